#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdl/tensor.hpp"

// Style statistics of intermediate activations, PCA reduction and clustering
// into pseudo-domains.
namespace pdl::style {

// Dense row-major matrix of samples (rows) by features (cols).
struct DataMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DataMatrix() = default;
  DataMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// [B,C,H,W] -> [B,2C]: per-channel means, then per-channel population variances.
Tensor channel_stats(const Tensor& activation);

// Concatenates per-tap [B,2C_k] statistics into one row per sample, in the
// order given.
DataMatrix stack_stats(std::span<const Tensor> per_tap_stats);

// Per-coordinate z-score. Constant coordinates map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const DataMatrix& data);
  DataMatrix apply(const DataMatrix& data) const;
};

struct PcaModel {
  std::size_t input_dim = 0;
  std::size_t k = 0;
  std::vector<double> mean;                // input_dim
  std::vector<double> components;          // k x input_dim, orthonormal rows
  std::vector<double> explained_variance;  // k, descending, sample covariance eigenvalues

  std::span<const double> component(std::size_t i) const { return {components.data() + i * input_dim, input_dim}; }
  std::vector<double> project(std::span<const double> raw) const;
  std::vector<double> reconstruct(std::span<const double> reduced) const;
  DataMatrix project_all(const DataMatrix& data) const;
};

// k is clamped to min(k, rows - 1, cols). Components come from the SVD of the
// centred data; each component's largest-magnitude entry is made positive.
PcaModel fit_pca(const DataMatrix& data, std::size_t k);

enum class ClusterMethod { KMeans, Gmm };

std::string to_string(ClusterMethod m);
ClusterMethod cluster_method_from_string(const std::string& s);

struct ClusterOptions {
  std::size_t kmeans_restarts = 10;  // k-means++ restarts; best inertia wins
  std::size_t kmeans_max_iter = 300;
  double kmeans_shift_tol = 1e-6;
  std::size_t gmm_max_iter = 200;
  double gmm_ll_tol = 1e-7;         // on the mean per-sample log-likelihood
  double gmm_variance_floor = 1e-6;
};

struct ClusterModel {
  ClusterMethod method = ClusterMethod::KMeans;
  std::size_t n_clusters = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> centers;    // n_clusters x dim
  std::vector<double> variances;  // GMM only, n_clusters x dim
  std::vector<double> weights;    // GMM only
  std::vector<int> train_labels;
  double inertia = 0.0;           // within-cluster sum of squares of train_labels
  double log_likelihood = 0.0;    // GMM: mean per-sample
  std::size_t iterations = 0;

  std::span<const double> center(std::size_t k) const { return {centers.data() + k * dim, dim}; }
  // k-means: nearest centre; GMM: highest responsibility. Ties go to the lowest label.
  int assign(std::span<const double> point) const;
};

ClusterModel fit_clusters(const DataMatrix& data, std::size_t n_clusters, ClusterMethod method, std::uint64_t seed,
                          const ClusterOptions& options = {});

// Lloyd's algorithm from a k-means++ start, a single run.
ClusterModel kmeans_single(const DataMatrix& data, std::size_t n_clusters, std::uint64_t seed,
                           const ClusterOptions& options = {});

double within_cluster_ss(const DataMatrix& data, std::span<const int> labels, std::size_t n_clusters);

// Adjusted Rand index of two labelings of the same items.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace pdl::style
