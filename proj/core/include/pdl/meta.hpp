#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pdl/episode.hpp"
#include "pdl/model.hpp"
#include "pdl/optimizer.hpp"

// Meta-train / meta-test / meta-optimization over pseudo-domains, with
// depth-regression auxiliary supervision.
namespace pdl::meta {

// First order treats each adapted theta'_Mi as a constant w.r.t. theta_M and
// theta_F. Second order adds the curvature terms through theta'_Mi, assembled
// from central differences of gradients along the meta-test gradient.
enum class GradientOrder { First, Second };

struct Hyperparams {
  double alpha = 0.001;  // inner (meta-train) step
  double beta = 0.001;   // outer (meta-optimization) rate
  std::size_t n_domains = 3;
  std::size_t per_domain_batch = 7;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  GradientOrder order = GradientOrder::First;
  double second_order_step = 1e-5;  // norm of the finite-difference perturbation

  void validate() const;
};

struct MetaStepReport {
  std::vector<double> train_cls;  // L_Cls(S_i) at theta_M, one per meta-train domain
  std::vector<double> train_dep;  // L_Dep(S_i)
  std::vector<double> test_cls;   // L_Cls(S~) at theta'_Mi
  double test_dep = 0.0;          // L_Dep(S~)
  double total = 0.0;
  double grad_norm_feature = 0.0;
  double grad_norm_meta = 0.0;
  double grad_norm_depth = 0.0;
  std::size_t clamped_probs = 0;
};

struct MetaGradients {
  ModelParams grads;
  MetaStepReport report;
};

// Mean binary cross-entropy, probabilities clamped to [1e-12, 1 - 1e-12].
Tensor cls_loss(const Tensor& probs, const Tensor& labels, std::size_t* clamped = nullptr);
// Mean over the batch of ||pred - target||^2 / d^2.
Tensor depth_loss(const Tensor& pred, const Tensor& target);

using LossFn = std::function<Tensor(const ParamSet&)>;

// grad loss(theta), recorded on a private tape; theta is not modified.
ParamSet loss_gradient(const ParamSet& theta, const LossFn& loss);
// theta - alpha * grad loss(theta), as a new set.
ParamSet gradient_step(const ParamSet& theta, const LossFn& loss, double alpha);

// Gradient of the classification loss w.r.t. theta_M only, theta_F frozen.
ParamSet meta_learner_gradient(const Model& model, const ModelParams& params, const Batch& batch);

// theta'_Mi = theta_M - alpha * grad_{theta_M} L_Cls(batch). theta_M untouched.
ParamSet inner_update(const Model& model, const ModelParams& params, const Batch& batch, double alpha);

// Gradients of the meta-optimization objective for one episode.
MetaGradients meta_gradients(const Model& model, const ModelParams& params, const EpisodeBatch& episode,
                             const Hyperparams& hp);

// meta_gradients followed by the optimizer update. With Sgd(beta) this is
// exactly theta <- theta - beta * grad.
MetaStepReport meta_step(const Model& model, ModelParams& params, const EpisodeBatch& episode, const Hyperparams& hp,
                         Optimizer& optimizer);

// Plain joint-loss baseline on a pooled batch: L_Cls + L_Dep, no inner update.
MetaGradients erm_gradients(const Model& model, const ModelParams& params, const Batch& batch);

}  // namespace pdl::meta
