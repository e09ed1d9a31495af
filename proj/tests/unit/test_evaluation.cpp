#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pdl/error.hpp"
#include "pdl/evaluation.hpp"
#include "test_support.hpp"

using namespace pdl_test;

namespace {

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

std::vector<int> random_labels(std::size_t n, Rng& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng() % 2);
  y[0] = 0;
  y[1] = 1;
  return y;
}

// Silhouette of a 2-D labelled point set.
double silhouette(const std::vector<eval::ProjectionRow>& rows) {
  double total = 0.0;
  for (const auto& r : rows) {
    double same = 0.0, other = 0.0;
    std::size_t ns = 0, no = 0;
    for (const auto& q : rows) {
      if (&q == &r) continue;
      const double d = std::hypot(r.pc1 - q.pc1, r.pc2 - q.pc2);
      (q.label == r.label ? same : other) += d;
      ++(q.label == r.label ? ns : no);
    }
    const double a = same / static_cast<double>(ns), b = other / static_cast<double>(no);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(rows.size());
}

}  // namespace

TEST(Score, ZeroHeadGivesOneHalf) {
  const Model model(tiny_arch());
  ModelParams p = model.init_params(1);
  fill(p.meta, 0.0);
  Rng rng(1);
  for (double s : eval::score(model, p, uniform({4, 6, 8, 8}, rng, 0.0, 1.0))) EXPECT_EQ(s, 0.5);
}

TEST(Score, BatchIndependentAndRepeatable) {
  const Model model(tiny_arch());
  const ModelParams p = jittered_params(model, 2);
  const auto before = p.checksum();
  const auto ds = synthetic::generate(synthetic::default_domains(), small_generate_options(5));
  const auto batched = eval::score_samples(model, p, ds.samples, 32);
  const auto single = eval::score_samples(model, p, ds.samples, 1);
  const auto again = eval::score_samples(model, p, ds.samples, 7);
  ASSERT_EQ(batched.size(), ds.samples.size());
  for (std::size_t i = 0; i < batched.size(); ++i) {
    EXPECT_NEAR(batched[i], single[i], 1e-12);
    EXPECT_EQ(batched[i], again[i]);
  }
  EXPECT_EQ(p.checksum(), before);
}

TEST(Auc, Examples) {
  EXPECT_EQ(eval::auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 1.0);
  EXPECT_EQ(eval::auc({0.3, 0.3, 0.3, 0.3}, {0, 1, 0, 1}), 0.5);
  EXPECT_THROW(eval::auc({0.1, 0.2}, {1, 1}), ValidationError);
  EXPECT_THROW(eval::auc({0.1, 0.2}, {1, 2}), ValidationError);
  EXPECT_THROW(eval::auc({0.1}, {1, 0}), ShapeError);
}

TEST(Auc, MatchesPairwiseOracleWithTies) {
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    auto s = uniform_values(200, rng, 0.0, 1.0);
    for (std::size_t i = 0; i < 200; i += 7) s[i] = std::round(s[i] * 4.0) / 4.0;
    const auto y = random_labels(200, rng);
    EXPECT_NEAR(eval::auc(s, y), pairwise_auc(s, y), 1e-12);
  }
}

TEST(Auc, MonotoneInvarianceAndLabelSwap) {
  Rng rng(4);
  const auto s = uniform_values(150, rng, -2.0, 2.0);
  const auto y = random_labels(150, rng);
  const double a = eval::auc(s, y);
  std::vector<double> e(s.size()), l(s.size());
  std::vector<int> flipped(y.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    e[i] = std::exp(s[i]);
    l[i] = 3.0 * s[i] + 1.0;
    flipped[i] = 1 - y[i];
  }
  EXPECT_EQ(eval::auc(e, y), a);
  EXPECT_EQ(eval::auc(l, y), a);
  EXPECT_NEAR(a + eval::auc(s, flipped), 1.0, 1e-12);
}

TEST(Histogram, CountsEverySample) {
  const auto h = eval::histogram({0.0, 0.5, 1.0, 0.99, 0.01}, {1, 0, 1, 0, 1}, 4);
  EXPECT_EQ(h.edges.size(), 5u);
  std::size_t live = 0, spoof = 0;
  for (auto c : h.live_counts) live += c;
  for (auto c : h.spoof_counts) spoof += c;
  EXPECT_EQ(live, 3u);
  EXPECT_EQ(spoof, 2u);
}

TEST(Projection, RowsOrderingAndSilhouette) {
  Rng rng(5);
  std::vector<std::vector<double>> feats;
  std::vector<std::uint64_t> ids;
  std::vector<int> labels;
  std::vector<double> scores;
  std::normal_distribution<double> noise(0.0, 0.3);
  for (std::size_t i = 0; i < 40; ++i) {
    const int y = static_cast<int>(i % 2);
    std::vector<double> f(10);
    for (std::size_t k = 0; k < 10; ++k) f[k] = (y == 1 ? 3.0 : -3.0) * (k < 3 ? 1.0 : 0.0) + noise(rng);
    feats.push_back(f);
    ids.push_back(100 + i);
    labels.push_back(y);
    scores.push_back(0.5);
  }
  const auto rows = eval::project_features(feats, ids, labels, scores);
  ASSERT_EQ(rows.size(), 40u);
  double v1 = 0.0, v2 = 0.0;
  for (const auto& r : rows) v1 += r.pc1 * r.pc1, v2 += r.pc2 * r.pc2;
  EXPECT_GE(v1, v2);
  EXPECT_GT(silhouette(rows), 0.0);
  EXPECT_EQ(rows[3].sample_id, 103u);

  const std::string csv = eval::projection_csv(rows);
  EXPECT_EQ(csv.rfind("sample_id,pc1,pc2,label,score\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 41);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Projection, Preconditions) {
  const std::vector<std::vector<double>> two{{1.0, 2.0}, {2.0, 1.0}};
  EXPECT_THROW(eval::project_features(two, {1, 2}, {0, 1}, {0.5, 0.5}), ValidationError);
  const std::vector<std::vector<double>> same(4, std::vector<double>{1.0, 1.0});
  EXPECT_THROW(eval::project_features(same, {1, 2, 3, 4}, {0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5}), NumericalError);
}

TEST(EvalJson, RoundTripAndSchema) {
  const Model model(tiny_arch());
  const ModelParams p = jittered_params(model, 6);
  const auto ds = synthetic::generate(synthetic::default_domains(), small_generate_options(6));
  eval::EvalResult r = eval::evaluate(model, p, ds.samples);
  r.seed = 9;
  r.epoch = 3;
  r.config_hash = "abc";
  r.held_out_domain = 1;
  EXPECT_GE(r.auc, 0.0);
  EXPECT_LE(r.auc, 1.0);
  const auto back = eval::eval_result_from_json(eval::to_json(r));
  EXPECT_EQ(back.scores, r.scores);
  EXPECT_EQ(back.labels, r.labels);
  EXPECT_EQ(back.sample_ids, r.sample_ids);
  EXPECT_EQ(back.auc, r.auc);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.config_hash, "abc");
  EXPECT_THROW(eval::eval_result_from_json("{\"schema\": \"other\"}"), ValidationError);
  EXPECT_THROW(eval::eval_result_from_json("not json"), ValidationError);
}
