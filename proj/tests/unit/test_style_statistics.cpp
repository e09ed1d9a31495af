#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "pdl/error.hpp"
#include "pdl/style.hpp"
#include "test_support.hpp"

using namespace pdl_test;
using style::DataMatrix;

namespace {

DataMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DataMatrix m(rows, cols);
  m.values = uniform_values(rows * cols, rng);
  return m;
}

// Clouds of `per` points around centres spaced `spacing` apart along a diagonal.
DataMatrix clouds(std::size_t k, std::size_t per, std::size_t dim, double spacing, double radius, Rng& rng,
                  std::vector<int>& truth) {
  DataMatrix m(k * per, dim);
  std::uniform_real_distribution<double> u(-radius, radius);
  truth.clear();
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      for (std::size_t d = 0; d < dim; ++d) m(c * per + i, d) = spacing * static_cast<double>(c) + u(rng);
      truth.push_back(static_cast<int>(c));
    }
  }
  return m;
}

Eigen::MatrixXd to_eigen(const DataMatrix& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace

TEST(ChannelStats, ConstantActivation) {
  const Tensor s = style::channel_stats(Tensor::full({2, 3, 4, 4}, 3.0));
  ASSERT_EQ(s.shape(), (Shape{2, 6}));
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(s.at(b * 6 + c), 3.0);
      EXPECT_EQ(s.at(b * 6 + 3 + c), 0.0);
    }
  }
}

TEST(ChannelStats, TwoPoint) {
  const Tensor s = style::channel_stats(Tensor::from({1, 1, 1, 2}, {0.0, 2.0}));
  EXPECT_EQ(s.at(0), 1.0);
  EXPECT_EQ(s.at(1), 1.0);
}

TEST(ChannelStats, MatchesTwoPassOracle) {
  Rng rng(1);
  const Tensor a = uniform({4, 8, 5, 5}, rng, -3.0, 3.0);
  const Tensor s = style::channel_stats(a);
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t c = 0; c < 8; ++c) {
      double mean = 0.0;
      for (std::size_t k = 0; k < 25; ++k) mean += a.at((b * 8 + c) * 25 + k);
      mean /= 25.0;
      double var = 0.0;
      for (std::size_t k = 0; k < 25; ++k) var += std::pow(a.at((b * 8 + c) * 25 + k) - mean, 2);
      var /= 25.0;
      EXPECT_NEAR(s.at(b * 16 + c), mean, 1e-12);
      EXPECT_NEAR(s.at(b * 16 + 8 + c), var, 1e-12);
      EXPECT_GE(s.at(b * 16 + 8 + c), 0.0);
    }
  }
}

TEST(ChannelStats, BatchPermutationEquivariant) {
  Rng rng(2);
  const Tensor a = uniform({3, 2, 4, 4}, rng);
  std::vector<double> swapped(a.numel());
  const std::size_t per = 2 * 16;
  const std::size_t perm[3] = {2, 0, 1};
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < per; ++k) swapped[b * per + k] = a.at(perm[b] * per + k);
  const Tensor s = style::channel_stats(a), t = style::channel_stats(Tensor::from({3, 2, 4, 4}, swapped));
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(t.at(b * 4 + k), s.at(perm[b] * 4 + k));
}

TEST(ChannelStats, BadShapeRejected) {
  EXPECT_THROW(style::channel_stats(Tensor::zeros({2, 3})), ShapeError);
}

TEST(StackStats, OrderIsPerTapMeansThenVars) {
  const Tensor a = Tensor::from({1, 2}, {1.0, 2.0}), b = Tensor::from({1, 4}, {3.0, 4.0, 5.0, 6.0});
  const std::vector<Tensor> taps{a, b};
  const DataMatrix m = style::stack_stats(taps);
  EXPECT_EQ(m.cols, 6u);
  EXPECT_EQ(m.values, (std::vector<double>{1, 2, 3, 4, 5, 6}));
}

TEST(Pca, CollinearPoints) {
  DataMatrix m(5, 2);
  for (std::size_t i = 0; i < 5; ++i) m(i, 0) = m(i, 1) = static_cast<double>(i) - 1.3;
  const style::PcaModel pca = style::fit_pca(m, 1);
  ASSERT_EQ(pca.k, 1u);
  EXPECT_NEAR(pca.component(0)[0], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(pca.component(0)[1], 1.0 / std::sqrt(2.0), 1e-12);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto rec = pca.reconstruct(pca.project(m.row(i)));
    EXPECT_LT(max_abs_diff(rec, m.row(i)), 1e-12);
  }
}

TEST(Pca, FullRankRoundTrip) {
  Rng rng(3);
  const DataMatrix m = random_matrix(20, 6, rng);
  const style::PcaModel pca = style::fit_pca(m, 6);
  ASSERT_EQ(pca.k, 6u);
  for (std::size_t i = 0; i < m.rows; ++i) {
    EXPECT_LT(max_abs_diff(pca.reconstruct(pca.project(m.row(i))), m.row(i)), 1e-8);
  }
}

TEST(Pca, KClamped) {
  Rng rng(4);
  EXPECT_EQ(style::fit_pca(random_matrix(5, 10, rng), 256).k, 4u);
  EXPECT_EQ(style::fit_pca(random_matrix(50, 10, rng), 256).k, 10u);
}

TEST(Pca, OrthonormalAndEigenvaluesMatchDenseSolver) {
  Rng rng(5);
  DataMatrix m = random_matrix(40, 7, rng);
  for (std::size_t i = 0; i < m.rows; ++i) m(i, 2) = 3.0 * m(i, 0) + 0.1 * m(i, 2);
  const style::PcaModel pca = style::fit_pca(m, 7);
  for (std::size_t a = 0; a < pca.k; ++a) {
    for (std::size_t b = 0; b < pca.k; ++b) {
      double dot = 0.0;
      for (std::size_t j = 0; j < 7; ++j) dot += pca.component(a)[j] * pca.component(b)[j];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-8);
    }
  }
  Eigen::MatrixXd x = to_eigen(m);
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(m.rows - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  for (std::size_t i = 0; i < pca.k; ++i) {
    EXPECT_NEAR(pca.explained_variance[i], es.eigenvalues()(static_cast<Eigen::Index>(6 - i)), 1e-8);
  }
}

TEST(Pca, DegenerateStatistics) {
  DataMatrix m(4, 3);
  for (auto& v : m.values) v = 1.5;
  try {
    style::fit_pca(m, 2);
    FAIL();
  } catch (const DegenerateStatisticsError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate statistics"), std::string::npos);
  }
  EXPECT_THROW(style::fit_pca(DataMatrix(1, 3), 1), ValidationError);
}

TEST(Pca, ProjectionProperties) {
  Rng rng(6);
  const DataMatrix m = random_matrix(30, 5, rng);
  const style::PcaModel pca = style::fit_pca(m, 3);
  for (double v : pca.project(pca.mean)) EXPECT_EQ(v, 0.0);
  for (int t = 0; t < 100; ++t) {
    const auto raw = uniform_values(5, rng, -4.0, 4.0);
    const auto red = pca.project(raw);
    double nr = 0.0, nc = 0.0;
    for (double v : red) nr += v * v;
    for (std::size_t j = 0; j < 5; ++j) nc += std::pow(raw[j] - pca.mean[j], 2);
    EXPECT_LE(std::sqrt(nr), std::sqrt(nc) + 1e-8);
  }
  EXPECT_THROW(pca.project(std::vector<double>(4, 0.0)), ShapeError);
}

TEST(Pca, TrainingProjectionCentredAndUncorrelated) {
  Rng rng(7);
  const DataMatrix m = random_matrix(60, 6, rng);
  const style::PcaModel pca = style::fit_pca(m, 6);
  const DataMatrix p = pca.project_all(m);
  for (std::size_t j = 0; j < p.cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < p.rows; ++i) mean += p(i, j);
    EXPECT_NEAR(mean / static_cast<double>(p.rows), 0.0, 1e-8);
  }
  for (std::size_t a = 0; a < p.cols; ++a) {
    for (std::size_t b = a + 1; b < p.cols; ++b) {
      double c = 0.0;
      for (std::size_t i = 0; i < p.rows; ++i) c += p(i, a) * p(i, b);
      EXPECT_LT(std::abs(c / static_cast<double>(p.rows - 1)), 1e-6 * pca.explained_variance[0]);
    }
  }
}

TEST(Standardizer, ZScoreAndConstantColumns) {
  DataMatrix m(3, 2);
  m.values = {1.0, 5.0, 2.0, 5.0, 3.0, 5.0};
  const auto s = style::Standardizer::fit(m);
  const DataMatrix z = s.apply(m);
  EXPECT_NEAR(z(0, 0) + z(1, 0) + z(2, 0), 0.0, 1e-15);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(z(i, 1), 0.0);
}

TEST(Clustering, SeparatedCloudsKMeansAndGmm) {
  Rng rng(8);
  std::vector<int> truth;
  const DataMatrix m = clouds(2, 25, 3, 100.0 / std::sqrt(3.0), 0.1, rng, truth);
  for (auto method : {style::ClusterMethod::KMeans, style::ClusterMethod::Gmm}) {
    const auto model = style::fit_clusters(m, 2, method, 11);
    EXPECT_EQ(style::adjusted_rand_index(model.train_labels, truth), 1.0) << style::to_string(method);
    EXPECT_EQ(model.n_clusters, 2u);
  }
}

TEST(Clustering, SingleClusterCentreIsMean) {
  Rng rng(9);
  const DataMatrix m = random_matrix(17, 4, rng);
  const auto model = style::fit_clusters(m, 1, style::ClusterMethod::KMeans, 0);
  for (int l : model.train_labels) EXPECT_EQ(l, 0);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) mean += m(i, j);
    EXPECT_NEAR(model.center(0)[j], mean / 17.0, 1e-10);
  }
}

TEST(Clustering, KMeansObjectiveNearMultiRestartOracle) {
  Rng rng(10);
  const DataMatrix m = random_matrix(30, 2, rng);
  const auto model = style::fit_clusters(m, 3, style::ClusterMethod::KMeans, 3);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 1000; ++s) best = std::min(best, style::kmeans_single(m, 3, 1000 + s).inertia);
  EXPECT_LE(model.inertia, best * 1.05);
  EXPECT_NEAR(model.inertia, style::within_cluster_ss(m, model.train_labels, 3), 1e-9);
}

TEST(Clustering, TooFewSamplesRejected) {
  Rng rng(11);
  EXPECT_THROW(style::fit_clusters(random_matrix(2, 2, rng), 3, style::ClusterMethod::KMeans, 0), ValidationError);
  EXPECT_THROW(style::fit_clusters(random_matrix(2, 2, rng), 3, style::ClusterMethod::Gmm, 0), ValidationError);
}

TEST(Clustering, DeterministicUnderSeed) {
  Rng rng(12);
  const DataMatrix m = random_matrix(40, 3, rng);
  for (auto method : {style::ClusterMethod::KMeans, style::ClusterMethod::Gmm}) {
    const auto a = style::fit_clusters(m, 3, method, 5), b = style::fit_clusters(m, 3, method, 5);
    EXPECT_EQ(a.train_labels, b.train_labels);
    EXPECT_EQ(a.centers, b.centers);
  }
}

TEST(Clustering, TranslationInvariantPartition) {
  Rng rng(13);
  std::vector<int> truth;
  const DataMatrix m = clouds(3, 15, 4, 3.0, 1.2, rng, truth);
  DataMatrix shifted = m;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) shifted(i, j) += 1000.0 * static_cast<double>(j + 1);
  const auto a = style::fit_clusters(m, 3, style::ClusterMethod::KMeans, 9);
  const auto b = style::fit_clusters(shifted, 3, style::ClusterMethod::KMeans, 9);
  EXPECT_NEAR(style::adjusted_rand_index(a.train_labels, b.train_labels), 1.0, 1e-12);
}

TEST(Assign, ExactCentreTieRuleAndRefitConsistency) {
  style::ClusterModel model;
  model.method = style::ClusterMethod::KMeans;
  model.n_clusters = 3;
  model.dim = 1;
  model.centers = {-1.0, 5.0, 1.0};
  EXPECT_EQ(model.assign(std::vector<double>{5.0}), 1);
  EXPECT_EQ(model.assign(std::vector<double>{0.0}), 0);
  EXPECT_THROW(model.assign(std::vector<double>{0.0, 1.0}), ShapeError);

  Rng rng(14);
  const DataMatrix m = random_matrix(50, 3, rng);
  for (auto method : {style::ClusterMethod::KMeans, style::ClusterMethod::Gmm}) {
    const auto fit = style::fit_clusters(m, 4, method, 2);
    for (std::size_t i = 0; i < m.rows; ++i) EXPECT_EQ(fit.assign(m.row(i)), fit.train_labels[i]);
  }
}

TEST(Ari, KnownValues) {
  const std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0}, c{0, 1, 0, 1};
  EXPECT_EQ(style::adjusted_rand_index(a, b), 1.0);
  EXPECT_LT(style::adjusted_rand_index(a, c), 0.0);
  EXPECT_THROW(style::adjusted_rand_index(a, std::vector<int>{0}), ShapeError);
}
