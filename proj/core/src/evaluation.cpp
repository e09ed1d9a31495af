#include "pdl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "pdl/episode.hpp"
#include "pdl/error.hpp"
#include "pdl/style.hpp"

namespace pdl::eval {

using nlohmann::json;

std::vector<double> score(const Model& model, const ModelParams& params, const Tensor& images) {
  NoGradScope no_grad;
  Tensor probs = model.M.classify(model.F.forward(images, params.feature).features, params.meta);
  return {probs.data().begin(), probs.data().end()};
}

std::vector<double> score_samples(const Model& model, const ModelParams& params,
                                  const std::vector<synthetic::Sample>& samples, std::size_t batch_size,
                                  std::vector<std::vector<double>>* features) {
  NoGradScope no_grad;
  std::vector<double> out;
  out.reserve(samples.size());
  batch_size = std::max<std::size_t>(1, batch_size);
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    const std::size_t end = std::min(samples.size(), start + batch_size);
    std::vector<const std::vector<double>*> images;
    for (std::size_t i = start; i < end; ++i) images.push_back(&samples[i].image);
    Tensor x = stack_images(images, model.arch.image_size);
    Tensor f = model.F.forward(x, params.feature).features;
    Tensor p = model.M.classify(f, params.meta);
    out.insert(out.end(), p.data().begin(), p.data().end());
    if (features != nullptr) {
      const std::size_t width = f.numel() / f.dim(0);
      for (std::size_t b = 0; b < f.dim(0); ++b) {
        features->emplace_back(f.data().begin() + static_cast<std::ptrdiff_t>(b * width),
                               f.data().begin() + static_cast<std::ptrdiff_t>((b + 1) * width));
      }
    }
  }
  return out;
}

EvalResult evaluate(const Model& model, const ModelParams& params, const std::vector<synthetic::Sample>& samples,
                    std::vector<std::vector<double>>* features) {
  EvalResult r;
  r.scores = score_samples(model, params, samples, 32, features);
  for (const auto& s : samples) {
    r.sample_ids.push_back(s.sample_id);
    r.labels.push_back(static_cast<int>(synthetic::class_target(s.label)));
  }
  r.auc = auc(r.scores, r.labels);
  r.histogram = histogram(r.scores, r.labels);
  return r;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("auc: labels must be 0 or 1");
    n_pos += l == 1 ? 1 : 0;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("auc: both classes must be present");

  // Average ranks over tie groups, then U = R_pos - n_pos (n_pos + 1) / 2.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

ScoreHistogram histogram(const std::vector<double>& scores, const std::vector<int>& labels, std::size_t bins) {
  ScoreHistogram h;
  bins = std::max<std::size_t>(1, bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
  h.live_counts.assign(bins, 0);
  h.spoof_counts.assign(bins, 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto b = static_cast<std::size_t>(std::clamp(scores[i], 0.0, 1.0) * static_cast<double>(bins));
    b = std::min(b, bins - 1);
    (labels[i] == 1 ? h.live_counts : h.spoof_counts)[b] += 1;
  }
  return h;
}

std::string to_json(const EvalResult& r) {
  json j = {
      {"schema", "pdl-eval-v1"},
      {"auc", r.auc},
      {"n_samples", r.scores.size()},
      {"samples", json::array()},
      {"histogram", {{"edges", r.histogram.edges}, {"live", r.histogram.live_counts}, {"spoof", r.histogram.spoof_counts}}},
      {"metadata",
       {{"seed", r.seed}, {"epoch", r.epoch}, {"config_hash", r.config_hash}, {"held_out_domain", r.held_out_domain}}},
  };
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    j["samples"].push_back({{"sample_id", r.sample_ids[i]}, {"score", r.scores[i]}, {"label", r.labels[i]}});
  }
  return j.dump(2) + "\n";
}

EvalResult eval_result_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("schema").get<std::string>() != "pdl-eval-v1") throw ValidationError("eval result: unknown schema");
    EvalResult r;
    r.auc = j.at("auc").get<double>();
    if (!(r.auc >= 0.0 && r.auc <= 1.0)) throw ValidationError("eval result: auc outside [0,1]");
    for (const auto& s : j.at("samples")) {
      r.sample_ids.push_back(s.at("sample_id").get<std::uint64_t>());
      r.scores.push_back(s.at("score").get<double>());
      const int label = s.at("label").get<int>();
      if (label != 0 && label != 1) throw ValidationError("eval result: label must be 0 or 1");
      r.labels.push_back(label);
    }
    if (j.at("n_samples").get<std::size_t>() != r.scores.size()) {
      throw ValidationError("eval result: n_samples does not match samples");
    }
    const auto& h = j.at("histogram");
    r.histogram.edges = h.at("edges").get<std::vector<double>>();
    r.histogram.live_counts = h.at("live").get<std::vector<std::size_t>>();
    r.histogram.spoof_counts = h.at("spoof").get<std::vector<std::size_t>>();
    if (r.histogram.edges.size() != r.histogram.live_counts.size() + 1 ||
        r.histogram.live_counts.size() != r.histogram.spoof_counts.size()) {
      throw ValidationError("eval result: inconsistent histogram");
    }
    const auto& m = j.at("metadata");
    r.seed = m.at("seed").get<std::uint64_t>();
    r.epoch = m.at("epoch").get<std::size_t>();
    r.config_hash = m.at("config_hash").get<std::string>();
    r.held_out_domain = m.at("held_out_domain").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("eval result: ") + e.what());
  }
}

std::vector<ProjectionRow> project_features(const std::vector<std::vector<double>>& features,
                                            const std::vector<std::uint64_t>& ids, const std::vector<int>& labels,
                                            const std::vector<double>& scores) {
  if (features.size() < 3) throw ValidationError("export_projection: need at least 3 samples");
  if (ids.size() != features.size() || labels.size() != features.size() || scores.size() != features.size()) {
    throw ShapeError("export_projection: inputs differ in length");
  }
  const style::DataMatrix data = style::DataMatrix::from_rows(features);
  const style::PcaModel pca = style::fit_pca(data, 2);
  std::vector<ProjectionRow> rows;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto p = pca.project(data.row(i));
    rows.push_back({ids[i], p[0], pca.k > 1 ? p[1] : 0.0, labels[i], scores[i]});
  }
  return rows;
}

std::string projection_csv(const std::vector<ProjectionRow>& rows) {
  std::string out = "sample_id,pc1,pc2,label,score\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%d,%.17g\n", static_cast<unsigned long long>(r.sample_id), r.pc1,
                  r.pc2, r.label, r.score);
    out += buf;
  }
  return out;
}

}  // namespace pdl::eval
