#include "pdl/experiment.hpp"

#include <ostream>

#include "json.hpp"
#include "pdl/dataset_io.hpp"
#include "pdl/error.hpp"
#include "pdl/evaluation.hpp"
#include "pdl/training.hpp"

namespace pdl::experiment {

using nlohmann::json;

Summary leave_one_domain_out(const RunConfig& base, const synthetic::Dataset& dataset,
                             const std::vector<LabelingMode>& modes, const std::filesystem::path& out_dir,
                             std::ostream* progress) {
  if (modes.empty()) throw ValidationError("experiment: no labeling modes requested");
  if (dataset.image_size() != base.image_size || dataset.depth_size() != base.depth_size) {
    throw ValidationError("experiment: dataset geometry does not match the config");
  }
  Summary summary;
  summary.modes = modes;
  summary.mean_auc.assign(modes.size(), 0.0);

  for (const auto& spec : dataset.domains) {
    const synthetic::DomainSplit split = synthetic::split_leave_one_domain_out(dataset, spec.id);
    FoldOutcome fold;
    fold.held_out_domain = spec.id;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      RunConfig config = base;
      config.labeling = modes[m];
      config.held_out_domain = spec.id;
      const std::filesystem::path dir =
          out_dir.empty() ? std::filesystem::path{}
                          : out_dir / ("fold_" + std::to_string(spec.id)) / to_string(modes[m]);
      if (progress != nullptr) *progress << "fold " << spec.id << " mode " << to_string(modes[m]) << '\n';

      train::TrainOptions options;
      options.out_dir = dir;
      options.progress = progress;
      const train::TrainResult trained = train::run_training(config, train::from_split(split), options);

      const Model model(config.architecture());
      std::vector<std::vector<double>> features;
      eval::EvalResult result = eval::evaluate(model, trained.params, split.test, &features);
      result.seed = config.seed;
      result.epoch = config.epochs;
      result.config_hash = trained.config_hash;
      result.held_out_domain = spec.id;
      if (!dir.empty()) {
        io::write_text_file(dir / "eval.json", eval::to_json(result));
        io::write_text_file(dir / "projection.csv",
                            eval::projection_csv(eval::project_features(features, result.sample_ids, result.labels,
                                                                        result.scores)));
      }

      RunOutcome run;
      run.labeling = modes[m];
      run.auc = result.auc;
      run.step_totals = trained.step_totals;
      if (modes[m] == LabelingMode::Pseudo && !trained.assignments.empty()) {
        double total = 0.0;
        for (const auto& a : trained.assignments) {
          total += style::adjusted_rand_index(a.labels, split.train_domain_truth);
        }
        run.mean_ari = total / static_cast<double>(trained.assignments.size());
      }
      if (progress != nullptr) *progress << "  held-out AUC " << run.auc << '\n';
      summary.mean_auc[m] += run.auc / static_cast<double>(dataset.domains.size());
      fold.runs.push_back(std::move(run));
    }
    summary.folds.push_back(std::move(fold));
  }
  if (!out_dir.empty()) io::write_text_file(out_dir / "summary.json", summary_json(summary, base));
  return summary;
}

std::string summary_json(const Summary& summary, const RunConfig& base) {
  json j = {{"config", base.to_text()}, {"config_hash", base.hash()}, {"seed", base.seed}, {"folds", json::array()}};
  for (const auto& fold : summary.folds) {
    json f = {{"held_out_domain", fold.held_out_domain}, {"runs", json::array()}};
    for (const auto& r : fold.runs) {
      json run = {{"labeling", to_string(r.labeling)}, {"auc", r.auc}};
      if (r.mean_ari >= 0.0) run["mean_ari_vs_generator"] = r.mean_ari;
      f["runs"].push_back(run);
    }
    j["folds"].push_back(f);
  }
  for (std::size_t m = 0; m < summary.modes.size(); ++m) j["mean_auc"][to_string(summary.modes[m])] = summary.mean_auc[m];
  return j.dump(2) + "\n";
}

}  // namespace pdl::experiment
