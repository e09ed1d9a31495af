#include "pdl/training.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "json.hpp"
#include "pdl/checkpoint.hpp"
#include "pdl/dataset_io.hpp"
#include "pdl/error.hpp"
#include "pdl/hash.hpp"
#include "pdl/meta.hpp"
#include "pdl/optimizer.hpp"
#include "pdl/style.hpp"

namespace pdl::train {

using nlohmann::json;

namespace {

json run_header(const RunConfig& config) {
  return {{"type", "run"}, {"config", config.to_text()}, {"config_hash", config.hash()}, {"seed", config.seed}};
}

json step_line(const meta::MetaStepReport& r, std::size_t epoch, std::size_t step, const EpisodeBatch& ep,
               const std::string& hash, std::uint64_t seed) {
  std::vector<int> train_domains;
  for (const auto& b : ep.meta_train) train_domains.push_back(b.domain);
  return {{"type", "step"},
          {"epoch", epoch},
          {"step", step},
          {"episode_seed", ep.seed},
          {"meta_train_domains", train_domains},
          {"meta_test_domain", ep.meta_test.domain},
          {"train_cls", r.train_cls},
          {"train_dep", r.train_dep},
          {"test_cls", r.test_cls},
          {"test_dep", r.test_dep},
          {"total", r.total},
          {"grad_norm_feature", r.grad_norm_feature},
          {"grad_norm_meta", r.grad_norm_meta},
          {"grad_norm_depth", r.grad_norm_depth},
          {"clamped_probs", r.clamped_probs},
          {"config_hash", hash},
          {"seed", seed}};
}

json episode_ids(const EpisodeBatch& ep) {
  json j = {{"meta_train", json::array()}, {"meta_test", ep.meta_test.sample_ids}};
  for (const auto& b : ep.meta_train) j["meta_train"].push_back({{"domain", b.domain}, {"sample_ids", b.sample_ids}});
  return j;
}

// Generator ids remapped to 0..K-1 in ascending id order.
std::pair<std::vector<int>, std::size_t> dense_truth(const std::vector<int>& truth) {
  std::map<int, int> remap;
  for (int t : truth) remap.emplace(t, 0);
  int next = 0;
  for (auto& [id, dense] : remap) dense = next++;
  std::vector<int> out;
  for (int t : truth) out.push_back(remap.at(t));
  return {out, remap.size()};
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& dir) : dir_(dir) {
    if (dir_.empty()) return;
    io::ensure_directory(dir_);
    io::ensure_directory(dir_ / "checkpoints");
    steps_.open(dir_ / "train_log.jsonl", std::ios::trunc);
    epochs_.open(dir_ / "epochs.jsonl", std::ios::trunc);
    if (!steps_ || !epochs_) throw ValidationError("cannot write logs in '" + dir_.string() + "'");
  }
  bool enabled() const { return !dir_.empty(); }
  void step(const json& j) {
    if (enabled()) steps_ << j.dump() << '\n';
  }
  void epoch(const json& j) {
    if (enabled()) epochs_ << j.dump() << '\n' << std::flush;
  }
  void both(const json& j) {
    step(j);
    epoch(j);
  }
  const std::filesystem::path& dir() const { return dir_; }
  void flush() {
    if (enabled()) steps_.flush();
  }

 private:
  std::filesystem::path dir_;
  std::ofstream steps_, epochs_;
};

void write_checkpoint(const Writer& w, const std::filesystem::path& name, const RunConfig& config,
                      const ModelParams& params, std::size_t epoch) {
  if (!w.enabled()) return;
  Checkpoint ck{params.clone(), config.architecture().hash(), config.to_text(), config.hash(), config.seed, epoch};
  save_checkpoint(ck, w.dir() / name);
}

std::string epoch_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "checkpoints/epoch_%04zu.ckpt", epoch);
  return buf;
}

}  // namespace

TrainData from_split(const synthetic::DomainSplit& split) { return {split.train, split.train_domain_truth}; }

std::size_t steps_per_epoch(const RunConfig& config, std::size_t n_records) {
  if (config.steps_per_epoch > 0) return config.steps_per_epoch;
  const std::size_t per_step = config.n_domains * config.per_domain_batch;
  return std::max<std::size_t>(1, (n_records + per_step - 1) / per_step);
}

TrainResult run_training(const RunConfig& config, const TrainData& data, const TrainOptions& options) {
  config.validate();
  if (data.records.empty()) throw ValidationError("train: no training records");
  if (!data.domain_truth.empty() && data.domain_truth.size() != data.records.size()) {
    throw ShapeError("train: domain truth does not match the records");
  }
  if (config.labeling == LabelingMode::GeneratorTruth && data.domain_truth.empty()) {
    throw ValidationError("train: labeling = generator-truth needs generator domain ids");
  }
  for (const auto& r : data.records) {
    if (r.image.size() != 6 * config.image_size * config.image_size || r.depth.size() != config.depth_size * config.depth_size) {
      throw ShapeError("train: record " + std::to_string(r.sample_id) + " does not match image_size/depth_size");
    }
  }

  const Model model(config.architecture());
  const std::string hash = config.hash();
  TrainResult result;
  result.config_hash = hash;
  result.params = model.init_params(config.seed);

  Writer writer(options.out_dir);
  if (writer.enabled()) io::write_text_file(writer.dir() / "config.txt", "# config_hash = " + hash + "\n" + config.to_text());
  writer.both(run_header(config));
  write_checkpoint(writer, epoch_name(0), config, result.params, 0);

  meta::Hyperparams hp = config.hyperparams();
  const auto optimizer = make_optimizer(config.optimizer, config.beta);
  const std::size_t n_steps = steps_per_epoch(config, data.records.size());

  std::vector<int> truth;
  std::size_t truth_domains = 0;
  if (!data.domain_truth.empty()) std::tie(truth, truth_domains) = dense_truth(data.domain_truth);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    domains::PseudoDomainAssignment assignment;
    switch (config.labeling) {
      case LabelingMode::Pseudo: {
        domains::RelabelOptions ro;
        ro.n_domains = config.n_domains;
        ro.method = config.cluster_method;
        ro.pca_dim = config.pca_dim;
        ro.seed = mix_seed(config.seed, 0xC1000000ULL + epoch);
        ro.threads = config.threads;
        assignment = domains::relabel_with_policy(model, result.params, data.records, ro, epoch);
        break;
      }
      case LabelingMode::GeneratorTruth:
        assignment = domains::assignment_from_labels(truth, truth_domains, epoch, "generator-truth");
        break;
      case LabelingMode::Single:
        assignment = domains::assignment_from_labels(std::vector<int>(data.records.size(), 0), 1, epoch, "single");
        break;
    }
    hp.n_domains = assignment.n_domains;

    json epoch_json = {{"type", "epoch"},
                       {"epoch", epoch},
                       {"label_counts", assignment.counts},
                       {"retries", assignment.retries},
                       {"source", assignment.source},
                       {"config_hash", hash},
                       {"seed", config.seed}};
    epoch_json["ari_vs_generator"] =
        truth.empty() ? json(nullptr) : json(style::adjusted_rand_index(assignment.labels, truth));

    domains::EpisodeSampler sampler(assignment, data.records, config.per_domain_batch, config.image_size,
                                    config.depth_size, mix_seed(config.seed, 0xE0000000ULL + epoch));
    double epoch_total = 0.0;
    for (std::size_t step = 0; step < n_steps; ++step) {
      EpisodeBatch episode;
      meta::MetaStepReport report;
      try {
        if (config.labeling == LabelingMode::Single) {
          episode.meta_test = sampler.sample_domain(0, config.n_domains * config.per_domain_batch);
          episode.seed = mix_seed(config.seed, (epoch << 32) + step);
          meta::MetaGradients g = meta::erm_gradients(model, result.params, episode.meta_test);
          optimizer->step(result.params, g.grads);
          report = g.report;
        } else {
          episode = sampler.sample();
          report = meta::meta_step(model, result.params, episode, hp, *optimizer);
        }
      } catch (const NumericalError& e) {
        if (writer.enabled()) {
          json dump = {{"error", e.what()},     {"epoch", epoch},          {"step", step},
                       {"episode", episode_ids(episode)}, {"config_hash", hash}, {"seed", config.seed}};
          io::write_text_file(writer.dir() / "nan_dump.json", dump.dump(2) + "\n");
          writer.flush();
        }
        throw NumericalError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + ")");
      }
      result.step_totals.push_back(report.total);
      epoch_total += report.total;
      writer.step(step_line(report, epoch, step, episode, hash, config.seed));
      ++result.steps;
    }

    epoch_json["mean_total"] = epoch_total / static_cast<double>(n_steps);
    epoch_json["steps"] = n_steps;
    writer.epoch(epoch_json);
    if (options.progress != nullptr) {
      *options.progress << "epoch " << epoch << "/" << config.epochs << " mean_total=" << epoch_total / n_steps
                        << " labels=" << epoch_json["label_counts"].dump()
                        << " ari=" << epoch_json["ari_vs_generator"].dump() << '\n';
    }
    if (epoch % config.checkpoint_every == 0 || epoch == config.epochs) {
      write_checkpoint(writer, epoch_name(epoch), config, result.params, epoch);
    }
    result.assignments.push_back(std::move(assignment));
  }
  if (config.epochs > 0) write_checkpoint(writer, "final.ckpt", config, result.params, config.epochs);
  writer.flush();
  return result;
}

}  // namespace pdl::train
