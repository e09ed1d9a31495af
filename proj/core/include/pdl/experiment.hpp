#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdl/config.hpp"
#include "pdl/synthetic.hpp"

namespace pdl::experiment {

struct RunOutcome {
  LabelingMode labeling = LabelingMode::Pseudo;
  double auc = 0.0;
  std::vector<double> step_totals;
  double mean_ari = -1.0;  // pseudo mode only: mean over epochs of ARI vs generator domains
};

struct FoldOutcome {
  int held_out_domain = 0;
  std::vector<RunOutcome> runs;  // in the order of the requested modes
};

struct Summary {
  std::vector<LabelingMode> modes;
  std::vector<FoldOutcome> folds;
  std::vector<double> mean_auc;  // per mode
};

// Leave-one-domain-out: for every generator domain, train each labeling mode
// on the remaining domains and score the held-out one. With a non-empty
// out_dir each run lands in out_dir/fold_<k>/<mode>/ (training artifacts plus
// eval.json and projection.csv) and a summary.json is written at the top.
Summary leave_one_domain_out(const RunConfig& base, const synthetic::Dataset& dataset,
                             const std::vector<LabelingMode>& modes, const std::filesystem::path& out_dir = {},
                             std::ostream* progress = nullptr);

std::string summary_json(const Summary& summary, const RunConfig& base);

}  // namespace pdl::experiment
