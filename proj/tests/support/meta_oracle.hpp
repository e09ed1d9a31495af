#pragma once

// Meta-step gradients assembled term by term, each term on its own tape.

#include "pdl/meta.hpp"
#include "pdl/ops.hpp"
#include "test_support.hpp"

namespace pdl_test {

struct TermGradients {
  ParamSet feature, meta, depth;
};

inline Tensor frozen_features(const Model& model, const ParamSet& feature, const Tensor& images) {
  NoGradScope no_grad;
  return model.F.forward(images, feature).features;
}

// grad_F of a loss built on F's features.
inline ParamSet feature_gradient(const Model& model, const ParamSet& feature, const Tensor& images,
                                 const std::function<Tensor(const Tensor&)>& head_loss) {
  return meta::loss_gradient(feature, [&](const ParamSet& f) { return head_loss(model.F.forward(images, f).features); });
}

inline ParamSet cls_grad_meta(const Model& model, const ModelParams& p, const ParamSet& theta_m, const Batch& b) {
  const Tensor feats = frozen_features(model, p.feature, b.images);
  return meta::loss_gradient(theta_m, [&](const ParamSet& m) { return meta::cls_loss(model.M.classify(feats, m), b.labels); });
}

inline ParamSet cls_grad_feature(const Model& model, const ModelParams& p, const ParamSet& theta_m, const Batch& b) {
  return feature_gradient(model, p.feature, b.images,
                          [&](const Tensor& f) { return meta::cls_loss(model.M.classify(f, theta_m), b.labels); });
}

inline ParamSet dep_grad_depth(const Model& model, const ModelParams& p, const Batch& b) {
  const Tensor feats = frozen_features(model, p.feature, b.images);
  return meta::loss_gradient(p.depth, [&](const ParamSet& d) { return meta::depth_loss(model.D.estimate(feats, d), b.depth); });
}

inline ParamSet dep_grad_feature(const Model& model, const ModelParams& p, const Batch& b) {
  return feature_gradient(model, p.feature, b.images,
                          [&](const Tensor& f) { return meta::depth_loss(model.D.estimate(f, p.depth), b.depth); });
}

// First-order MLDG gradients:
//   theta_M: sum_i [grad L_cls(S_i) + grad_{theta'_i} L_cls(S~; theta'_i)]
//   theta_F: grad L_dep(S~) + sum_i [L_cls(S_i) + L_dep(S_i) + L_cls(S~; theta'_i)]
//   theta_D: grad L_dep(S~) + sum_i L_dep(S_i)
inline TermGradients hand_assembled_gradients(const Model& model, const ModelParams& p, const EpisodeBatch& ep,
                                              double alpha) {
  TermGradients g{dep_grad_feature(model, p, ep.meta_test), p.meta.zeros_like(), dep_grad_depth(model, p, ep.meta_test)};
  for (const Batch& s : ep.meta_train) {
    const ParamSet inner = cls_grad_meta(model, p, p.meta, s);
    const ParamSet adapted = param_axpy(p.meta, inner, -alpha);
    param_add_inplace(g.meta, inner);
    param_add_inplace(g.meta, cls_grad_meta(model, p, adapted, ep.meta_test));
    param_add_inplace(g.feature, cls_grad_feature(model, p, p.meta, s));
    param_add_inplace(g.feature, dep_grad_feature(model, p, s));
    param_add_inplace(g.feature, cls_grad_feature(model, p, adapted, ep.meta_test));
    param_add_inplace(g.depth, dep_grad_depth(model, p, s));
  }
  return g;
}

// Builds an episode of independent random batches for the given architecture.
inline EpisodeBatch random_episode(const ArchitectureConfig& arch, std::size_t n_train, std::size_t b, Rng& rng) {
  EpisodeBatch ep;
  for (std::size_t i = 0; i < n_train; ++i) ep.meta_train.push_back(random_batch(arch, b, rng, static_cast<int>(i)));
  ep.meta_test = random_batch(arch, b, rng, static_cast<int>(n_train));
  return ep;
}

}  // namespace pdl_test
