// pdl: generate | train | eval | verify | experiment
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "pdl/checkpoint.hpp"
#include "pdl/config.hpp"
#include "pdl/dataset_io.hpp"
#include "pdl/error.hpp"
#include "pdl/evaluation.hpp"
#include "pdl/experiment.hpp"
#include "pdl/training.hpp"
#include "pdl/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// Every RunConfig key becomes a --flag. Precedence: defaults, then --config,
// then $PDL_SEED, then explicit flags.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "Config file (key = value lines)");
    for (const auto& key : pdl::RunConfig::keys()) {
      cmd->add_option(flag_name(key), values[key], "Override config key '" + key + "'");
    }
  }

  pdl::RunConfig resolve() const {
    pdl::RunConfig c;
    if (!config_file.empty()) c = pdl::RunConfig::from_text(pdl::io::read_text_file(config_file));
    pdl::apply_seed_env(c);
    for (const auto& [key, value] : values) {
      if (!value.empty()) c.set(key, value);
    }
    c.validate();
    return c;
  }
};

void require_geometry(const pdl::RunConfig& c, const pdl::synthetic::Dataset& ds) {
  if (ds.image_size() != c.image_size || ds.depth_size() != c.depth_size) {
    throw pdl::ValidationError("dataset is " + std::to_string(ds.image_size()) + "px / depth " +
                               std::to_string(ds.depth_size()) + " but the config asks for " +
                               std::to_string(c.image_size) + "px / depth " + std::to_string(c.depth_size));
  }
}

int cmd_generate(const pdl::RunConfig& c, const fs::path& out, const std::string& storage) {
  const auto ds = pdl::synthetic::generate(pdl::synthetic::default_domains(), c.generate_options());
  const auto kind = storage == "files" ? pdl::io::SampleStorage::PerSampleFiles : pdl::io::SampleStorage::Blob;
  const std::string hash = pdl::io::save_dataset(ds, out, kind);
  std::cout << "wrote " << ds.samples.size() << " samples (" << ds.domains.size() << " domains) to " << out.string()
            << "\nmanifest hash " << hash << '\n';
  return kExitOk;
}

int cmd_train(const pdl::RunConfig& c, const fs::path& data, const fs::path& out, bool quiet) {
  const auto ds = pdl::io::load_dataset(data);
  require_geometry(c, ds);
  const auto split = pdl::synthetic::split_leave_one_domain_out(ds, c.held_out_domain);
  pdl::train::TrainOptions options;
  options.out_dir = out;
  options.progress = quiet ? nullptr : &std::cout;
  const auto result = pdl::train::run_training(c, pdl::train::from_split(split), options);
  std::cout << "trained " << result.steps << " steps on " << split.train.size() << " samples (held out domain "
            << c.held_out_domain << "); config hash " << result.config_hash << '\n';
  return kExitOk;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& data, int held_out, const fs::path& out,
             const std::string& config_file, bool allow_train_eval) {
  std::uint64_t expected_arch = 0;
  if (!config_file.empty()) {
    expected_arch = pdl::RunConfig::from_text(pdl::io::read_text_file(config_file)).architecture().hash();
  }
  const pdl::Checkpoint ck = pdl::load_checkpoint(checkpoint, expected_arch);
  const pdl::RunConfig trained = pdl::RunConfig::from_text(ck.config_text);
  if (trained.architecture().hash() != ck.architecture_hash) {
    throw pdl::ValidationError("checkpoint config does not match its architecture hash");
  }
  if (held_out != trained.held_out_domain && !allow_train_eval) {
    throw pdl::ValidationError("domain " + std::to_string(held_out) + " was part of training (the checkpoint held out " +
                               std::to_string(trained.held_out_domain) + "); pass --allow-train-eval to score it anyway");
  }
  const auto ds = pdl::io::load_dataset(data);
  require_geometry(trained, ds);
  const auto split = pdl::synthetic::split_leave_one_domain_out(ds, held_out);

  const pdl::Model model(trained.architecture());
  std::vector<std::vector<double>> features;
  pdl::eval::EvalResult r = pdl::eval::evaluate(model, ck.params, split.test, &features);
  r.seed = ck.seed;
  r.epoch = ck.epoch;
  r.config_hash = ck.config_hash;
  r.held_out_domain = held_out;
  pdl::io::ensure_directory(out);
  pdl::io::write_text_file(out / "eval.json", pdl::eval::to_json(r));
  pdl::io::write_text_file(out / "projection.csv", pdl::eval::projection_csv(pdl::eval::project_features(
                                                      features, r.sample_ids, r.labels, r.scores)));
  std::cout << "AUC " << r.auc << " on " << r.scores.size() << " samples of domain " << held_out << "\nwrote "
            << (out / "eval.json").string() << " and " << (out / "projection.csv").string() << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::size_t seeds, bool corrupt) {
  pdl::verify::VerifyOptions options;
  options.seeds = seeds;
  options.corrupt_gradients = corrupt;
  const auto results = pdl::verify::run_suite(suite, options);
  std::cout << pdl::verify::format_report(results);
  return pdl::verify::all_passed(results) ? kExitOk : kExitValidation;
}

int cmd_experiment(const pdl::RunConfig& c, const fs::path& data, const fs::path& out, bool quiet) {
  const auto ds = data.empty() ? pdl::synthetic::generate(pdl::synthetic::default_domains(), c.generate_options())
                               : pdl::io::load_dataset(data);
  require_geometry(c, ds);
  const auto summary = pdl::experiment::leave_one_domain_out(
      c, ds, {pdl::LabelingMode::Pseudo, pdl::LabelingMode::Single}, out, quiet ? nullptr : &std::cout);
  std::cout << pdl::experiment::summary_json(summary, c);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-domain meta-learning for face anti-spoofing on synthetic data"};
  app.require_subcommand(1);

  ConfigFlags gen_flags, train_flags, exp_flags;
  std::string gen_out, storage = "blob";
  auto* gen = app.add_subcommand("generate", "Write a synthetic multi-domain dataset");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--storage", storage, "blob | files")->check(CLI::IsMember({"blob", "files"}));
  gen_flags.attach(gen);

  std::string train_data, train_out;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train on all generator domains but --held-out-domain");
  train->add_option("--data", train_data, "Dataset directory")->required();
  train->add_option("--out", train_out, "Run directory for logs and checkpoints")->required();
  train->add_flag("--quiet", quiet, "No per-epoch progress");
  train_flags.attach(train);

  std::string ck_path, eval_data, eval_out, eval_config;
  int eval_domain = 0;
  bool allow_train_eval = false;
  auto* ev = app.add_subcommand("eval", "Score a checkpoint on one generator domain");
  ev->add_option("--checkpoint", ck_path, "Checkpoint file")->required();
  ev->add_option("--data", eval_data, "Dataset directory")->required();
  ev->add_option("--held-out-domain", eval_domain, "Domain to score")->required();
  ev->add_option("--out", eval_out, "Output directory for eval.json and projection.csv")->required();
  ev->add_option("--config", eval_config, "Expected config; its architecture must match the checkpoint");
  ev->add_flag("--allow-train-eval", allow_train_eval, "Permit scoring a domain the checkpoint was trained on");

  std::string suite = "all";
  std::size_t seeds = 20;
  bool corrupt = false;
  auto* verify = app.add_subcommand("verify", "Run property suites");
  verify->add_option("suite", suite, "gradients | mldg-taylor | clustering | all")
      ->check(CLI::IsMember({"gradients", "mldg-taylor", "clustering", "all"}));
  verify->add_option("--seeds", seeds, "Random seeds per property");
  verify->add_flag("--corrupt-gradients", corrupt, "Negative control: perturb analytic gradients, must fail");

  std::string exp_data, exp_out;
  auto* exp = app.add_subcommand("experiment", "Leave-one-domain-out comparison of pseudo-domain MLDG and ERM");
  exp->add_option("--data", exp_data, "Dataset directory (default: generate from the config)");
  exp->add_option("--out", exp_out, "Output directory");
  exp->add_flag("--quiet", quiet, "No per-epoch progress");
  exp_flags.attach(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return cmd_generate(gen_flags.resolve(), gen_out, storage);
    if (*train) return cmd_train(train_flags.resolve(), train_data, train_out, quiet);
    if (*ev) return cmd_eval(ck_path, eval_data, eval_domain, eval_out, eval_config, allow_train_eval);
    if (*verify) return cmd_verify(suite, seeds, corrupt);
    if (*exp) return cmd_experiment(exp_flags.resolve(), exp_data, exp_out, quiet);
  } catch (const pdl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
