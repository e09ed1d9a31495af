#include "pdl/style.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "pdl/error.hpp"
#include "pdl/hash.hpp"

namespace pdl::style {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearest_center(std::span<const double> point, const std::vector<double>& centers, std::size_t k,
                           std::size_t dim, double* distance = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point, {centers.data() + c * dim, dim});
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (distance != nullptr) *distance = best_d;
  return best;
}

void check_data(const DataMatrix& data, const char* op) {
  if (data.values.size() != data.rows * data.cols) throw ShapeError(std::string(op) + ": malformed data matrix");
  for (double v : data.values) {
    if (!std::isfinite(v)) throw NumericalError(std::string(op) + ": non-finite input value");
  }
}

double log_gaussian_diag(std::span<const double> x, std::span<const double> mean, std::span<const double> var) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean[i];
    s += -0.5 * (std::log(2.0 * std::numbers::pi * var[i]) + d * d / var[i]);
  }
  return s;
}

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  DataMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw ShapeError("DataMatrix: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Tensor channel_stats(const Tensor& activation) {
  if (activation.rank() != 4) {
    throw ShapeError("channel_stats: expected [B,C,H,W], got " + shape_str(activation.shape()));
  }
  const std::size_t B = activation.dim(0), C = activation.dim(1), hw = activation.dim(2) * activation.dim(3);
  if (hw == 0) throw ShapeError("channel_stats: empty spatial dimensions");
  const auto in = activation.data();
  std::vector<double> out(B * 2 * C);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      const double* p = in.data() + (b * C + c) * hw;
      double mean = 0.0;
      for (std::size_t i = 0; i < hw; ++i) mean += p[i];
      mean /= static_cast<double>(hw);
      double var = 0.0;
      for (std::size_t i = 0; i < hw; ++i) var += (p[i] - mean) * (p[i] - mean);
      var /= static_cast<double>(hw);
      out[b * 2 * C + c] = mean;
      out[b * 2 * C + C + c] = var;
    }
  }
  return Tensor::from({B, 2 * C}, std::move(out));
}

DataMatrix stack_stats(std::span<const Tensor> per_tap_stats) {
  if (per_tap_stats.empty()) throw ShapeError("stack_stats: no statistics");
  const std::size_t B = per_tap_stats[0].dim(0);
  std::size_t cols = 0;
  for (const auto& t : per_tap_stats) {
    if (t.rank() != 2 || t.dim(0) != B) throw ShapeError("stack_stats: inconsistent statistic shapes");
    cols += t.dim(1);
  }
  DataMatrix m(B, cols);
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t off = 0;
    for (const auto& t : per_tap_stats) {
      const std::size_t w = t.dim(1);
      std::copy_n(t.data().data() + b * w, w, m.row(b).begin() + static_cast<std::ptrdiff_t>(off));
      off += w;
    }
  }
  return m;
}

Standardizer Standardizer::fit(const DataMatrix& data) {
  check_data(data, "standardize");
  if (data.rows == 0) throw ShapeError("standardize: no samples");
  Standardizer s;
  s.mean.assign(data.cols, 0.0);
  s.scale.assign(data.cols, 1.0);
  const double n = static_cast<double>(data.rows);
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t j = 0; j < data.cols; ++j) s.mean[j] += data(i, j);
  }
  for (double& m : s.mean) m /= n;
  std::vector<double> var(data.cols, 0.0);
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t j = 0; j < data.cols; ++j) var[j] += (data(i, j) - s.mean[j]) * (data(i, j) - s.mean[j]);
  }
  for (std::size_t j = 0; j < data.cols; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 0.0;
  }
  return s;
}

DataMatrix Standardizer::apply(const DataMatrix& data) const {
  if (data.cols != mean.size()) throw ShapeError("standardize: dimension mismatch");
  DataMatrix out(data.rows, data.cols);
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t j = 0; j < data.cols; ++j) out(i, j) = scale[j] > 0.0 ? (data(i, j) - mean[j]) / scale[j] : 0.0;
  }
  return out;
}

std::vector<double> PcaModel::project(std::span<const double> raw) const {
  if (raw.size() != input_dim) {
    throw ShapeError("pca project: expected length " + std::to_string(input_dim) + ", got " +
                     std::to_string(raw.size()));
  }
  std::vector<double> out(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const auto comp = component(c);
    double s = 0.0;
    for (std::size_t j = 0; j < input_dim; ++j) s += comp[j] * (raw[j] - mean[j]);
    out[c] = s;
  }
  return out;
}

std::vector<double> PcaModel::reconstruct(std::span<const double> reduced) const {
  if (reduced.size() != k) throw ShapeError("pca reconstruct: expected length " + std::to_string(k));
  std::vector<double> out(mean);
  for (std::size_t c = 0; c < k; ++c) {
    const auto comp = component(c);
    for (std::size_t j = 0; j < input_dim; ++j) out[j] += reduced[c] * comp[j];
  }
  return out;
}

DataMatrix PcaModel::project_all(const DataMatrix& data) const {
  DataMatrix out(data.rows, k);
  for (std::size_t i = 0; i < data.rows; ++i) {
    const auto p = project(data.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

PcaModel fit_pca(const DataMatrix& data, std::size_t k) {
  check_data(data, "fit_pca");
  if (data.rows < 2) throw ValidationError("fit_pca: need at least 2 vectors");
  if (k == 0) throw ValidationError("fit_pca: k must be >= 1");
  const std::size_t n = data.rows, p = data.cols;

  PcaModel model;
  model.input_dim = p;
  model.mean.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) model.mean[j] += data(i, j);
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  Eigen::MatrixXd centered(n, p);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data(i, j) - model.mean[j];
      max_abs = std::max(max_abs, std::abs(data(i, j)));
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 1e-12 * std::max(1.0, max_abs) * std::sqrt(static_cast<double>(n))) {
    throw DegenerateStatisticsError("fit_pca: degenerate statistics (all vectors identical)");
  }

  model.k = std::min({k, n - 1, p});
  model.components.assign(model.k * p, 0.0);
  model.explained_variance.assign(model.k, 0.0);
  const Eigen::MatrixXd& V = svd.matrixV();
  for (std::size_t c = 0; c < model.k; ++c) {
    const auto col = V.col(static_cast<Eigen::Index>(c));
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    const double sign = col(arg) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < p; ++j) model.components[c * p + j] = sign * col(static_cast<Eigen::Index>(j));
    const double s = sv(static_cast<Eigen::Index>(c));
    model.explained_variance[c] = s * s / static_cast<double>(n - 1);
  }
  return model;
}

std::string to_string(ClusterMethod m) { return m == ClusterMethod::KMeans ? "kmeans" : "gmm"; }

ClusterMethod cluster_method_from_string(const std::string& s) {
  if (s == "kmeans") return ClusterMethod::KMeans;
  if (s == "gmm") return ClusterMethod::Gmm;
  throw ValidationError("unknown clustering method '" + s + "' (expected kmeans or gmm)");
}

int ClusterModel::assign(std::span<const double> point) const {
  if (point.size() != dim) {
    throw ShapeError("assign: expected dimension " + std::to_string(dim) + ", got " + std::to_string(point.size()));
  }
  if (method == ClusterMethod::KMeans) return static_cast<int>(nearest_center(point, centers, n_clusters, dim));
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const double score = std::log(weights[c]) + log_gaussian_diag(point, center(c), {variances.data() + c * dim, dim});
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double within_cluster_ss(const DataMatrix& data, std::span<const int> labels, std::size_t n_clusters) {
  std::vector<double> centers(n_clusters * data.cols, 0.0);
  std::vector<std::size_t> counts(n_clusters, 0);
  for (std::size_t i = 0; i < data.rows; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    for (std::size_t j = 0; j < data.cols; ++j) centers[c * data.cols + j] += data(i, j);
  }
  for (std::size_t c = 0; c < n_clusters; ++c) {
    for (std::size_t j = 0; j < data.cols; ++j) {
      if (counts[c] > 0) centers[c * data.cols + j] /= static_cast<double>(counts[c]);
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    total += squared_distance(data.row(i), {centers.data() + static_cast<std::size_t>(labels[i]) * data.cols, data.cols});
  }
  return total;
}

ClusterModel kmeans_single(const DataMatrix& data, std::size_t n_clusters, std::uint64_t seed,
                           const ClusterOptions& options) {
  check_data(data, "kmeans");
  const std::size_t n = data.rows, dim = data.cols;
  if (n_clusters == 0) throw ValidationError("kmeans: need at least one cluster");
  if (n < n_clusters) {
    throw ValidationError("fit_clusters: " + std::to_string(n) + " samples cannot form " +
                          std::to_string(n_clusters) + " clusters");
  }

  std::mt19937_64 rng(seed);
  std::vector<double> centers(n_clusters * dim);
  // k-means++ seeding.
  {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t first = pick(rng);
    std::copy_n(data.row(first).begin(), dim, centers.begin());
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(data.row(i), data.row(first));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t c = 1; c < n_clusters; ++c) {
      double total = 0.0;
      for (double v : d2) total += v;
      std::size_t chosen = 0;
      if (total <= 0.0) {
        chosen = pick(rng);
      } else {
        const double target = u(rng) * total;
        double acc = 0.0;
        chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > target) {
            chosen = i;
            break;
          }
        }
      }
      std::copy_n(data.row(chosen).begin(), dim, centers.begin() + static_cast<std::ptrdiff_t>(c * dim));
      for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(data.row(i), data.row(chosen)));
    }
  }

  std::vector<int> labels(n, 0);
  std::vector<double> dist(n, 0.0);
  std::size_t iter = 0;
  for (; iter < options.kmeans_max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(nearest_center(data.row(i), centers, n_clusters, dim, &dist[i]));

    std::vector<double> next(n_clusters * dim, 0.0);
    std::vector<std::size_t> counts(n_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) next[c * dim + j] += data(i, j);
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: move its centre onto the point farthest from its own centre.
        const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy_n(data.row(far).begin(), dim, next.begin() + static_cast<std::ptrdiff_t>(c * dim));
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) next[c * dim + j] /= static_cast<double>(counts[c]);
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < n_clusters; ++c) {
      max_shift = std::max(max_shift, std::sqrt(squared_distance({next.data() + c * dim, dim}, {centers.data() + c * dim, dim})));
    }
    centers.swap(next);
    if (max_shift < options.kmeans_shift_tol) {
      ++iter;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(nearest_center(data.row(i), centers, n_clusters, dim));

  ClusterModel model;
  model.method = ClusterMethod::KMeans;
  model.n_clusters = n_clusters;
  model.dim = dim;
  model.seed = seed;
  model.centers = std::move(centers);
  model.train_labels = std::move(labels);
  model.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    model.inertia += squared_distance(data.row(i), model.center(static_cast<std::size_t>(model.train_labels[i])));
  }
  model.iterations = iter;
  return model;
}

namespace {

ClusterModel fit_kmeans(const DataMatrix& data, std::size_t n_clusters, std::uint64_t seed, const ClusterOptions& options) {
  const std::size_t restarts = std::max<std::size_t>(1, options.kmeans_restarts);
  ClusterModel best;
  for (std::size_t r = 0; r < restarts; ++r) {
    ClusterModel m = kmeans_single(data, n_clusters, mix_seed(seed, r), options);
    if (r == 0 || m.inertia < best.inertia) best = std::move(m);
  }
  best.seed = seed;
  return best;
}

ClusterModel fit_gmm(const DataMatrix& data, std::size_t n_clusters, std::uint64_t seed, const ClusterOptions& options) {
  const std::size_t n = data.rows, dim = data.cols;
  ClusterModel init = fit_kmeans(data, n_clusters, seed, options);

  ClusterModel m;
  m.method = ClusterMethod::Gmm;
  m.n_clusters = n_clusters;
  m.dim = dim;
  m.seed = seed;
  m.centers = init.centers;
  m.variances.assign(n_clusters * dim, 0.0);
  m.weights.assign(n_clusters, 0.0);
  {
    std::vector<std::size_t> counts(n_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(init.train_labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = data(i, j) - m.centers[c * dim + j];
        m.variances[c * dim + j] += d * d;
      }
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      m.weights[c] = std::max<double>(counts[c], 1.0) / static_cast<double>(n);
      for (std::size_t j = 0; j < dim; ++j) {
        m.variances[c * dim + j] =
            m.variances[c * dim + j] / std::max<double>(counts[c], 1.0) + options.gmm_variance_floor;
      }
    }
  }

  std::vector<double> resp(n * n_clusters);
  std::vector<double> row(n_clusters);
  double previous_ll = -std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (; iter < options.gmm_max_iter; ++iter) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < n_clusters; ++c) {
        row[c] = std::log(m.weights[c]) + log_gaussian_diag(data.row(i), m.center(c), {m.variances.data() + c * dim, dim});
      }
      const double lse = log_sum_exp(row);
      ll += lse;
      for (std::size_t c = 0; c < n_clusters; ++c) resp[i * n_clusters + c] = std::exp(row[c] - lse);
    }
    ll /= static_cast<double>(n);
    if (!std::isfinite(ll)) throw NumericalError("fit_clusters: GMM log-likelihood is not finite");

    for (std::size_t c = 0; c < n_clusters; ++c) {
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp[i * n_clusters + c];
      nk = std::max(nk, 1e-12);
      m.weights[c] = nk / static_cast<double>(n);
      for (std::size_t j = 0; j < dim; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += resp[i * n_clusters + c] * data(i, j);
        mu /= nk;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = data(i, j) - mu;
          var += resp[i * n_clusters + c] * d * d;
        }
        m.centers[c * dim + j] = mu;
        m.variances[c * dim + j] = var / nk + options.gmm_variance_floor;
      }
    }
    m.log_likelihood = ll;
    if (std::abs(ll - previous_ll) < options.gmm_ll_tol) {
      ++iter;
      break;
    }
    previous_ll = ll;
  }
  m.iterations = iter;
  m.train_labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.train_labels[i] = m.assign(data.row(i));
  m.inertia = within_cluster_ss(data, m.train_labels, n_clusters);
  return m;
}

}  // namespace

ClusterModel fit_clusters(const DataMatrix& data, std::size_t n_clusters, ClusterMethod method, std::uint64_t seed,
                          const ClusterOptions& options) {
  check_data(data, "fit_clusters");
  if (n_clusters == 0) throw ValidationError("fit_clusters: need at least one cluster");
  if (data.rows < n_clusters) {
    throw ValidationError("fit_clusters: " + std::to_string(data.rows) + " samples cannot form " +
                          std::to_string(n_clusters) + " clusters");
  }
  return method == ClusterMethod::KMeans ? fit_kmeans(data, n_clusters, seed, options)
                                         : fit_gmm(data, n_clusters, seed, options);
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ShapeError("adjusted_rand_index: labelings differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [k, v] : table) index += comb2(v);
  for (const auto& [k, v] : rows) sum_rows += comb2(v);
  for (const auto& [k, v] : cols) sum_cols += comb2(v);
  const double expected = sum_rows * sum_cols / comb2(static_cast<double>(n));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both labelings trivial (one cluster each, or all singletons)
  return (index - expected) / (max_index - expected);
}

}  // namespace pdl::style
