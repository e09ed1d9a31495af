#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdl/model.hpp"
#include "pdl/synthetic.hpp"

namespace pdl::eval {

struct ScoreHistogram {
  std::vector<double> edges;               // bins + 1 edges over [0,1]
  std::vector<std::size_t> live_counts;    // per bin
  std::vector<std::size_t> spoof_counts;
};

struct EvalResult {
  std::vector<std::uint64_t> sample_ids;
  std::vector<double> scores;  // P(live)
  std::vector<int> labels;     // 1 = live
  double auc = 0.0;
  ScoreHistogram histogram;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::string config_hash;
  int held_out_domain = -1;
};

// l = M(F(x)) for a batch of images [B,6,H,W]; no parameter is touched.
std::vector<double> score(const Model& model, const ModelParams& params, const Tensor& images);

// Scores samples in chunks of batch_size, optionally also returning the
// flattened F features (row-major, one row per sample).
std::vector<double> score_samples(const Model& model, const ModelParams& params,
                                  const std::vector<synthetic::Sample>& samples, std::size_t batch_size = 32,
                                  std::vector<std::vector<double>>* features = nullptr);

// Scores, labels, AUC and histogram for a set of samples. Metadata fields are left at defaults.
EvalResult evaluate(const Model& model, const ModelParams& params, const std::vector<synthetic::Sample>& samples,
                    std::vector<std::vector<double>>* features = nullptr);

// Mann-Whitney form, ties count one half. Positive class is label 1.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

ScoreHistogram histogram(const std::vector<double>& scores, const std::vector<int>& labels, std::size_t bins = 20);

std::string to_json(const EvalResult& result);
// Throws ValidationError when the text does not follow the EvalResult schema.
EvalResult eval_result_from_json(const std::string& text);

struct ProjectionRow {
  std::uint64_t sample_id;
  double pc1, pc2;
  int label;
  double score;
};

// First two principal components of the features. Needs >= 3 samples.
std::vector<ProjectionRow> project_features(const std::vector<std::vector<double>>& features,
                                            const std::vector<std::uint64_t>& ids, const std::vector<int>& labels,
                                            const std::vector<double>& scores);

// Header "sample_id,pc1,pc2,label,score", LF line endings.
std::string projection_csv(const std::vector<ProjectionRow>& rows);

}  // namespace pdl::eval
