#include "pdl/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>

#include "pdl/error.hpp"
#include "pdl/evaluation.hpp"
#include "pdl/grad_check.hpp"
#include "pdl/hash.hpp"
#include "pdl/meta.hpp"
#include "pdl/mldg_check.hpp"
#include "pdl/model.hpp"
#include "pdl/ops.hpp"
#include "pdl/style.hpp"

namespace pdl::verify {

namespace {

using Rng = std::mt19937_64;

Tensor uniform(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// Contract an op output with fixed random weights so every output element
// gets a distinct upstream gradient.
Tensor contract(const Tensor& out, const Tensor& weights) { return ops::sum(ops::mul(out, weights)); }

struct GradCase {
  std::string name;
  std::function<std::pair<ScalarFn, std::vector<Tensor>>(Rng&)> make;
};

ArchitectureConfig tiny_arch() {
  ArchitectureConfig a;
  a.image_size = 8;
  a.depth_size = 4;
  a.stage_channels = {2, 3, 3};
  a.layers_per_stage = 3;
  a.tap_layers = {5, 9};
  a.head_hidden = 4;
  a.depth_hidden = 3;
  return a;
}

// Tensors of a ParamSet with small random biases, so no unit sits exactly at a ReLU kink.
std::vector<Tensor> jittered(const ParamSet& ps, Rng& rng) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Tensor t = ps[i].clone();
    if (ps.name(i).ends_with("bias")) {
      std::uniform_real_distribution<double> u(-0.1, 0.1);
      for (double& v : t.mutable_data()) v = u(rng);
    }
    t.set_requires_grad(true);
    out.push_back(t);
  }
  return out;
}

ParamSet rebuild(const ParamSet& names, const std::vector<Tensor>& tensors, std::size_t offset) {
  ParamSet ps;
  for (std::size_t i = 0; i < names.size(); ++i) ps.add(names.name(i), tensors[offset + i]);
  return ps;
}

std::vector<GradCase> gradient_cases() {
  std::vector<GradCase> cases;
  auto unary = [&](std::string name, std::function<Tensor(const Tensor&)> op, Shape shape, double lo = -1.0,
                   double hi = 1.0) {
    cases.push_back({name, [op, shape, lo, hi](Rng& rng) {
                       Tensor x = uniform(shape, rng, lo, hi);
                       Tensor w = uniform(op(x.detach()).shape(), rng, -1.0, 1.0, false);
                       ScalarFn f = [op, w](const std::vector<Tensor>& p) { return contract(op(p[0]), w); };
                       return std::pair{f, std::vector<Tensor>{x}};
                     }});
  };
  auto binary = [&](std::string name, std::function<Tensor(const Tensor&, const Tensor&)> op, Shape shape) {
    cases.push_back({name, [op, shape](Rng& rng) {
                       Tensor a = uniform(shape, rng), b = uniform(shape, rng);
                       Tensor w = uniform(op(a.detach(), b.detach()).shape(), rng, -1.0, 1.0, false);
                       ScalarFn f = [op, w](const std::vector<Tensor>& p) { return contract(op(p[0], p[1]), w); };
                       return std::pair{f, std::vector<Tensor>{a, b}};
                     }});
  };

  for (const auto& [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 0}}) {
    cases.push_back({"conv2d(stride=" + std::to_string(stride) + ",pad=" + std::to_string(pad) + ")",
                     [stride, pad](Rng& rng) {
                       Tensor x = uniform({2, 2, 5, 5}, rng), k = uniform({3, 2, 3, 3}, rng), b = uniform({3}, rng);
                       Tensor w = uniform(ops::conv2d(x.detach(), k.detach(), b.detach(), stride, pad).shape(), rng,
                                          -1.0, 1.0, false);
                       ScalarFn f = [w, stride, pad](const std::vector<Tensor>& p) {
                         return contract(ops::conv2d(p[0], p[1], p[2], stride, pad), w);
                       };
                       return std::pair{f, std::vector<Tensor>{x, k, b}};
                     }});
  }
  unary("max_pool2d", [](const Tensor& x) { return ops::max_pool2d(x); }, {2, 2, 4, 4});
  unary("upsample_nearest", [](const Tensor& x) { return ops::upsample_nearest(x, 2); }, {1, 2, 3, 3});
  cases.push_back({"linear", [](Rng& rng) {
                     Tensor x = uniform({3, 4}, rng), k = uniform({5, 4}, rng), b = uniform({5}, rng);
                     Tensor w = uniform({3, 5}, rng, -1.0, 1.0, false);
                     ScalarFn f = [w](const std::vector<Tensor>& p) { return contract(ops::linear(p[0], p[1], p[2]), w); };
                     return std::pair{f, std::vector<Tensor>{x, k, b}};
                   }});
  unary("relu", [](const Tensor& x) { return ops::relu(x); }, {4, 5});
  unary("sigmoid", [](const Tensor& x) { return ops::sigmoid(x); }, {4, 5}, -4.0, 4.0);
  unary("log_sigmoid", [](const Tensor& x) { return ops::log_sigmoid(x); }, {4, 5}, -4.0, 4.0);
  binary("add", [](const Tensor& a, const Tensor& b) { return ops::add(a, b); }, {3, 4});
  binary("sub", [](const Tensor& a, const Tensor& b) { return ops::sub(a, b); }, {3, 4});
  binary("mul", [](const Tensor& a, const Tensor& b) { return ops::mul(a, b); }, {3, 4});
  unary("scale", [](const Tensor& x) { return ops::scale(x, -2.5); }, {3, 4});
  unary("sum", [](const Tensor& x) { return ops::sum(x); }, {3, 4});
  unary("mean", [](const Tensor& x) { return ops::mean(x); }, {3, 4});
  binary("mse", [](const Tensor& a, const Tensor& b) { return ops::mse(a, b); }, {2, 1, 3, 3});
  unary("flatten", [](const Tensor& x) { return ops::flatten(x); }, {2, 3, 2, 2});
  unary("reshape", [](const Tensor& x) { return ops::reshape(x, {4, 6}); }, {2, 3, 4});
  binary("concat_channels", [](const Tensor& a, const Tensor& b) {
           const std::vector<Tensor> parts{a, b};
           return ops::concat_channels(parts);
         }, {2, 2, 3, 3});
  cases.push_back({"binary_cross_entropy", [](Rng& rng) {
                     Tensor p = uniform({8}, rng, 0.05, 0.95);
                     std::bernoulli_distribution coin(0.5);
                     std::vector<double> y(8);
                     for (double& v : y) v = coin(rng) ? 1.0 : 0.0;
                     Tensor t = Tensor::from({8}, y);
                     ScalarFn f = [t](const std::vector<Tensor>& q) { return ops::binary_cross_entropy(q[0], t); };
                     return std::pair{f, std::vector<Tensor>{p}};
                   }});

  // Full-model compositions: classification (F, M), depth (F, D) and their sum.
  enum class Loss { Cls, Dep, Joint };
  for (const auto& [name, kind] : {std::pair{"model cls_loss(M(F(x)))", Loss::Cls},
                                   std::pair{"model depth_loss(D(F(x)))", Loss::Dep},
                                   std::pair{"model cls_loss + depth_loss", Loss::Joint}}) {
    cases.push_back({name, [kind](Rng& rng) {
                       const auto model = std::make_shared<const Model>(tiny_arch());
                       const ModelParams init = model->init_params(rng());
                       const bool with_meta = kind != Loss::Dep, with_depth = kind != Loss::Cls;
                       std::vector<Tensor> tensors = jittered(init.feature, rng);
                       if (with_meta) {
                         for (const auto& t : jittered(init.meta, rng)) tensors.push_back(t);
                       }
                       if (with_depth) {
                         for (const auto& t : jittered(init.depth, rng)) tensors.push_back(t);
                       }
                       const Tensor x = uniform({3, 6, 8, 8}, rng, 0.0, 1.0, false);
                       const Tensor y = Tensor::from({3}, {1.0, 0.0, 1.0});
                       const Tensor depth = uniform({3, 1, 4, 4}, rng, 0.0, 1.0, false);
                       ScalarFn f = [=](const std::vector<Tensor>& p) {
                         const ParamSet pf = rebuild(init.feature, p, 0);
                         const Tensor feats = model->F.forward(x, pf).features;
                         std::size_t offset = pf.size();
                         Tensor loss;
                         if (with_meta) {
                           loss = meta::cls_loss(model->M.classify(feats, rebuild(init.meta, p, offset)), y);
                           offset += init.meta.size();
                         }
                         if (with_depth) {
                           Tensor dep = meta::depth_loss(model->D.estimate(feats, rebuild(init.depth, p, offset)), depth);
                           loss = loss.defined() ? ops::add(loss, dep) : dep;
                         }
                         return loss;
                       };
                       return std::pair{f, tensors};
                     }});
  }
  return cases;
}

PropertyResult make_result(std::string suite, std::string name, double measured, std::string cmp, double bound,
                           bool passed, std::string detail = "") {
  return {std::move(suite), std::move(name), measured, std::move(cmp), bound, passed, std::move(detail)};
}

// Smooth toy losses on R^3: logistic data terms plus a ridge.
meta::ScalarField logistic_field(Rng& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> a(n, std::vector<double>(dim));
  for (auto& row : a) {
    for (double& v : row) v = g(rng);
  }
  auto value = [a](const std::vector<double>& t) {
    double s = 0.0, ridge = 0.0;
    for (const auto& row : a) {
      double z = 0.0;
      for (std::size_t j = 0; j < t.size(); ++j) z += row[j] * t[j];
      s += std::log1p(std::exp(z));
    }
    for (double v : t) ridge += v * v;
    return s / static_cast<double>(a.size()) + 0.05 * ridge;
  };
  auto gradient = [a](const std::vector<double>& t) {
    std::vector<double> out(t.size(), 0.0);
    for (const auto& row : a) {
      double z = 0.0;
      for (std::size_t j = 0; j < t.size(); ++j) z += row[j] * t[j];
      const double s = 1.0 / (1.0 + std::exp(-z));
      for (std::size_t j = 0; j < t.size(); ++j) out[j] += s * row[j] / static_cast<double>(a.size());
    }
    for (std::size_t j = 0; j < t.size(); ++j) out[j] += 0.1 * t[j];
    return out;
  };
  return {value, gradient};
}

struct Quadratic {
  Eigen::MatrixXd h;
  Eigen::VectorXd b;
  meta::ScalarField field() const {
    const Eigen::MatrixXd hh = h;
    const Eigen::VectorXd bb = b;
    return {[hh, bb](const std::vector<double>& t) {
              const Eigen::Map<const Eigen::VectorXd> x(t.data(), static_cast<Eigen::Index>(t.size()));
              return 0.5 * x.dot(hh * x) + bb.dot(x);
            },
            [hh, bb](const std::vector<double>& t) {
              const Eigen::Map<const Eigen::VectorXd> x(t.data(), static_cast<Eigen::Index>(t.size()));
              const Eigen::VectorXd g = hh * x + bb;
              return std::vector<double>(g.data(), g.data() + g.size());
            }};
  }
};

Quadratic random_quadratic(Rng& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = g(rng);
  }
  Quadratic q{m * m.transpose() / dim + Eigen::MatrixXd::Identity(dim, dim) * 0.1, Eigen::VectorXd(dim)};
  for (int i = 0; i < dim; ++i) q.b(i) = g(rng);
  return q;
}

style::DataMatrix gaussian_cloud(Rng& rng, const std::vector<std::vector<double>>& centers, std::size_t per_center,
                                 double sd, std::vector<int>& truth) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t i = 0; i < per_center; ++i) {
      std::vector<double> r = centers[c];
      for (double& v : r) v += g(rng);
      rows.push_back(std::move(r));
      truth.push_back(static_cast<int>(c));
    }
  }
  return style::DataMatrix::from_rows(rows);
}

}  // namespace

std::vector<std::string> suite_names() { return {"gradients", "mldg-taylor", "clustering"}; }

std::vector<PropertyResult> gradient_suite(const VerifyOptions& options) {
  std::vector<PropertyResult> out;
  GradCheckOptions gc;
  if (options.corrupt_gradients) gc.analytic_scale = 1.01;
  const auto cases = gradient_cases();
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    double worst = 0.0;
    std::size_t worst_seed = 0, coordinates = 0, one_sided = 0, skipped = 0;
    for (std::size_t s = 0; s < options.seeds; ++s) {
      Rng rng(mix_seed(s, 0x6AD0 + ci));
      auto [f, params] = cases[ci].make(rng);
      const GradCheckReport r = grad_check(f, params, gc);
      coordinates += r.coordinates;
      one_sided += r.one_sided;
      skipped += r.skipped;
      if (r.max_rel_error > worst || s == 0) {
        worst = r.max_rel_error;
        worst_seed = s;
      }
    }
    out.push_back(make_result("gradients", cases[ci].name, worst, "<=", gc.tolerance, worst <= gc.tolerance,
                              std::to_string(options.seeds) + " seeds, " + std::to_string(coordinates) +
                                  " coordinates (" + std::to_string(one_sided) + " one-sided at a kink, " +
                                  std::to_string(skipped) + " skipped), worst seed " + std::to_string(worst_seed)));
  }

  // The checker must reject a gradient that is off by 50%.
  Rng rng(7);
  Tensor x = uniform({4, 5}, rng, -3.0, 3.0);
  GradCheckOptions bad;
  bad.analytic_scale = 1.5;
  const GradCheckReport neg = grad_check([](const std::vector<Tensor>& p) { return ops::sum(ops::sigmoid(p[0])); }, {x}, bad);
  out.push_back(make_result("gradients", "negative control (analytic x1.5 is rejected)", neg.max_rel_error, ">",
                            gc.tolerance, !neg.passed));
  return out;
}

std::vector<PropertyResult> mldg_taylor_suite(const VerifyOptions& options) {
  std::vector<PropertyResult> out;
  const double beta = 0.5;

  double at_zero = 0.0, closed_form_err = 0.0, worst_ratio_gap = 0.0, worst_ratio = 4.0;
  for (std::size_t s = 0; s < options.seeds; ++s) {
    Rng rng(mix_seed(s, 0x7A7));
    const auto f = logistic_field(rng, 12, 3);
    const auto g = logistic_field(rng, 12, 3);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> theta(3);
    for (double& v : theta) v = n01(rng);

    at_zero = std::max(at_zero, meta::mldg_objective_check(theta, 0.0, beta, f, g).residual);

    const double r1 = meta::mldg_objective_check(theta, 1e-2, beta, f, g).residual;
    const double r2 = meta::mldg_objective_check(theta, 5e-3, beta, f, g).residual;
    const double ratio = r1 / r2;
    if (std::abs(ratio - 4.0) >= worst_ratio_gap) {
      worst_ratio_gap = std::abs(ratio - 4.0);
      worst_ratio = ratio;
    }

    const Quadratic qf = random_quadratic(rng, 4), qg = random_quadratic(rng, 4);
    std::vector<double> t4(4);
    for (double& v : t4) v = n01(rng);
    const Eigen::Map<const Eigen::VectorXd> x(t4.data(), 4);
    const Eigen::VectorXd fg = qf.h * x + qf.b;
    for (double alpha : {1e-3, 1e-2, 0.1, 0.5}) {
      const double expected = beta * alpha * alpha * 0.5 * fg.dot(qg.h * fg);
      const double got = meta::mldg_objective_check(t4, alpha, beta, qf.field(), qg.field()).residual;
      closed_form_err = std::max(closed_form_err, std::abs(got - expected));
    }
  }
  out.push_back(make_result("mldg-taylor", "residual at alpha = 0", at_zero, "<=", 1e-12, at_zero <= 1e-12));
  out.push_back(make_result("mldg-taylor", "quadratic F,G: residual = beta alpha^2 g'Hg/2", closed_form_err, "<=", 1e-10,
                            closed_form_err <= 1e-10));
  out.push_back(make_result("mldg-taylor", "halving alpha (1e-2 -> 5e-3) shrinks residual ~4x", worst_ratio,
                            "in [3.5,4.5]", 4.0, worst_ratio >= 3.5 && worst_ratio <= 4.5,
                            "worst ratio over " + std::to_string(options.seeds) + " seeds"));

  // Inner update on a two-parameter logistic model against the hand-derived gradient.
  double inner_err = 0.0, identity_err = 0.0;
  for (std::size_t s = 0; s < options.seeds; ++s) {
    Rng rng(mix_seed(s, 0x1AA));
    std::normal_distribution<double> n01(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const std::size_t B = 6;
    std::vector<double> xs(B), ys(B);
    for (std::size_t i = 0; i < B; ++i) {
      xs[i] = n01(rng);
      ys[i] = coin(rng) ? 1.0 : 0.0;
    }
    ParamSet theta;
    theta.add("w", Tensor::from({1}, {n01(rng)}));
    theta.add("b", Tensor::from({1}, {n01(rng)}));
    const Tensor xt = Tensor::from({B, 1}, xs), yt = Tensor::from({B}, ys);
    const meta::LossFn loss = [&](const ParamSet& p) {
      const Tensor z = ops::reshape(ops::linear(xt, ops::reshape(p[0], {1, 1}), p[1]), {B});
      return meta::cls_loss(ops::sigmoid(z), yt);
    };
    const double alpha = 0.3;
    const ParamSet stepped = meta::gradient_step(theta, loss, alpha);
    double gw = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(theta[0].item() * xs[i] + theta[1].item())));
      gw += (p - ys[i]) * xs[i] / B;
      gb += (p - ys[i]) / B;
    }
    inner_err = std::max({inner_err, std::abs(stepped[0].item() - (theta[0].item() - alpha * gw)),
                          std::abs(stepped[1].item() - (theta[1].item() - alpha * gb))});
    const ParamSet same = meta::gradient_step(theta, loss, 0.0);
    identity_err = std::max({identity_err, std::abs(same[0].item() - theta[0].item()),
                             std::abs(same[1].item() - theta[1].item())});
  }
  out.push_back(make_result("mldg-taylor", "inner update matches hand-derived logistic step", inner_err, "<=", 1e-12,
                            inner_err <= 1e-12));
  out.push_back(make_result("mldg-taylor", "inner update with alpha = 0 is the identity", identity_err, "<=", 0.0,
                            identity_err == 0.0));
  return out;
}

std::vector<PropertyResult> clustering_suite(const VerifyOptions& options) {
  std::vector<PropertyResult> out;
  double worst_ari_km = 1.0, worst_ari_gmm = 1.0, ortho = 0.0, eig = 0.0, auc_err = 0.0;
  for (std::size_t s = 0; s < options.seeds; ++s) {
    Rng rng(mix_seed(s, 0xC105));
    std::vector<int> truth;
    const auto data = gaussian_cloud(rng, {{5, 5, 5, 5, 5}, {-5, -5, -5, -5, -5}}, 40, 0.5, truth);
    const auto km = style::fit_clusters(data, 2, style::ClusterMethod::KMeans, s);
    const auto gm = style::fit_clusters(data, 2, style::ClusterMethod::Gmm, s);
    worst_ari_km = std::min(worst_ari_km, style::adjusted_rand_index(km.train_labels, truth));
    worst_ari_gmm = std::min(worst_ari_gmm, style::adjusted_rand_index(gm.train_labels, truth));

    // Correlated data for PCA.
    std::normal_distribution<double> n01(0.0, 1.0);
    const std::size_t n = 60, p = 8;
    Eigen::MatrixXd mix(p, p);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = n01(rng);
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    Eigen::MatrixXd x(n, p);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd z(p);
      for (std::size_t j = 0; j < p; ++j) z(static_cast<Eigen::Index>(j)) = n01(rng);
      const Eigen::VectorXd r = mix * z;
      for (std::size_t j = 0; j < p; ++j) rows[i][j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r(static_cast<Eigen::Index>(j));
    }
    const auto pca = style::fit_pca(style::DataMatrix::from_rows(rows), 5);
    for (std::size_t a = 0; a < pca.k; ++a) {
      for (std::size_t b = 0; b < pca.k; ++b) {
        double dot = 0.0;
        for (std::size_t j = 0; j < p; ++j) dot += pca.component(a)[j] * pca.component(b)[j];
        ortho = std::max(ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
      }
    }
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    for (std::size_t a = 0; a < pca.k; ++a) {
      const double expected = solver.eigenvalues()(static_cast<Eigen::Index>(p - 1 - a));
      eig = std::max(eig, std::abs(pca.explained_variance[a] - expected));
    }

    // AUC against the O(n^2) pairwise count, with ties.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> scores(200);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < 200; ++i) {
      scores[i] = std::round(u(rng) * 50.0) / 50.0;
      labels[i] = u(rng) < 0.4 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < 200; ++i) {
      for (std::size_t j = 0; j < 200; ++j) {
        if (labels[i] == 1 && labels[j] == 0) {
          pairs += 1.0;
          wins += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
        }
      }
    }
    auc_err = std::max(auc_err, std::abs(eval::auc(scores, labels) - wins / pairs));
  }
  out.push_back(make_result("clustering", "k-means ARI on two separated clouds", worst_ari_km, ">=", 1.0,
                            worst_ari_km >= 1.0 - 1e-12));
  out.push_back(make_result("clustering", "GMM ARI on two separated clouds", worst_ari_gmm, ">=", 1.0,
                            worst_ari_gmm >= 1.0 - 1e-12));
  out.push_back(make_result("clustering", "PCA components orthonormal", ortho, "<=", 1e-8, ortho <= 1e-8));
  out.push_back(make_result("clustering", "PCA variances match covariance eigensolver", eig, "<=", 1e-8, eig <= 1e-8));
  out.push_back(make_result("clustering", "AUC matches pairwise oracle", auc_err, "<=", 1e-12, auc_err <= 1e-12));
  return out;
}

std::vector<PropertyResult> run_suite(const std::string& suite, const VerifyOptions& options) {
  if (suite == "gradients") return gradient_suite(options);
  if (suite == "mldg-taylor") return mldg_taylor_suite(options);
  if (suite == "clustering") return clustering_suite(options);
  if (suite == "all") {
    std::vector<PropertyResult> out = gradient_suite(options);
    for (auto& r : mldg_taylor_suite(options)) out.push_back(std::move(r));
    for (auto& r : clustering_suite(options)) out.push_back(std::move(r));
    return out;
  }
  throw ValidationError("unknown verify suite '" + suite + "' (gradients | mldg-taylor | clustering | all)");
}

bool all_passed(const std::vector<PropertyResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

std::string format_report(const std::vector<PropertyResult>& results) {
  std::string out;
  char buf[512];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%s  %-12s %-52s measured=%.3e  %s %.1e", r.passed ? "PASS" : "FAIL",
                  r.suite.c_str(), r.name.c_str(), r.measured, r.comparison.c_str(), r.bound);
    out += buf;
    if (!r.detail.empty()) out += "  (" + r.detail + ")";
    out += '\n';
  }
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  out += std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " properties passed\n";
  return out;
}

}  // namespace pdl::verify
