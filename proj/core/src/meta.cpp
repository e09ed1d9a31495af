#include "pdl/meta.hpp"

#include <cmath>
#include <sstream>

#include "pdl/error.hpp"
#include "pdl/ops.hpp"

namespace pdl::meta {

namespace {

void require_finite(const ParamSet& ps, const char* what) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (double v : ps[i].data()) {
      if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite gradient in '" + ps.name(i) + "'");
    }
  }
}

ModelParams tracked_copy(const ModelParams& params) {
  ModelParams work = params.clone();
  work.feature.set_requires_grad(true);
  work.meta.set_requires_grad(true);
  work.depth.set_requires_grad(true);
  return work;
}

// grad_{theta_M} L_Cls for features treated as constants.
ParamSet meta_gradient_from_features(const Model& model, const ParamSet& theta_m, const Tensor& features,
                                     const Tensor& labels) {
  ParamSet g = loss_gradient(theta_m, [&](const ParamSet& m) { return cls_loss(model.M.classify(features, m), labels); });
  require_finite(g, "inner_update");
  return g;
}

// grad of L_Cls(batch)(theta_F, theta_M) w.r.t. theta_F and theta_M.
std::pair<ParamSet, ParamSet> classification_gradients(const Model& model, const ParamSet& theta_f,
                                                       const ParamSet& theta_m, const Batch& batch) {
  ParamSet f = theta_f.clone(), m = theta_m.clone();
  f.set_requires_grad(true);
  m.set_requires_grad(true);
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = cls_loss(model.M.classify(model.F.forward(batch.images, f).features, m), batch.labels);
  }
  tape.backward(loss);
  return {f.grads(), m.grads()};
}

void validate_batch(const Batch& b, const char* what) {
  if (b.size() == 0) throw ValidationError(std::string(what) + ": empty batch");
  if (b.labels.shape() != Shape{b.size()}) throw ShapeError(std::string(what) + ": labels do not match the batch");
}

std::string describe(const MetaStepReport& r) {
  std::ostringstream os;
  os << "train_cls=[";
  for (double v : r.train_cls) os << v << ' ';
  os << "] train_dep=[";
  for (double v : r.train_dep) os << v << ' ';
  os << "] test_cls=[";
  for (double v : r.test_cls) os << v << ' ';
  os << "] test_dep=" << r.test_dep;
  return os.str();
}

}  // namespace

void Hyperparams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("hyperparams: alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("hyperparams: beta must be >= 0");
  if (n_domains < 2) throw ValidationError("hyperparams: meta-learning needs N >= 2 pseudo-domains");
  if (per_domain_batch < 2) throw ValidationError("hyperparams: per_domain_batch must be >= 2");
  if (!(second_order_step > 0.0)) throw ValidationError("hyperparams: second_order_step must be positive");
}

Tensor cls_loss(const Tensor& probs, const Tensor& labels, std::size_t* clamped) {
  if (probs.rank() != 1) throw ShapeError("cls_loss: expected probabilities [B], got " + shape_str(probs.shape()));
  return ops::binary_cross_entropy(probs, labels, 1e-12, clamped);
}

Tensor depth_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("depth_loss: prediction " + shape_str(pred.shape()) + " vs target " + shape_str(target.shape()));
  }
  // mean over B*d*d elements == mean over the batch of ||.||^2 / d^2
  return ops::mse(pred, target);
}

ParamSet loss_gradient(const ParamSet& theta, const LossFn& loss) {
  ParamSet local = theta.clone();
  local.set_requires_grad(true);
  Tape tape;
  Tensor value;
  {
    TapeScope scope(tape);
    value = loss(local);
  }
  tape.backward(value);
  return local.grads();
}

ParamSet gradient_step(const ParamSet& theta, const LossFn& loss, double alpha) {
  return param_axpy(theta, loss_gradient(theta, loss), -alpha);
}

ParamSet meta_learner_gradient(const Model& model, const ModelParams& params, const Batch& batch) {
  validate_batch(batch, "inner_update");
  Tensor features;
  {
    NoGradScope no_grad;
    features = model.F.forward(batch.images, params.feature).features;
  }
  return meta_gradient_from_features(model, params.meta, features, batch.labels);
}

ParamSet inner_update(const Model& model, const ModelParams& params, const Batch& batch, double alpha) {
  return param_axpy(params.meta, meta_learner_gradient(model, params, batch), -alpha);
}

MetaGradients meta_gradients(const Model& model, const ModelParams& params, const EpisodeBatch& episode,
                             const Hyperparams& hp) {
  hp.validate();
  if (episode.meta_train.empty()) throw ValidationError("meta_step: episode has no meta-train domains");
  for (const auto& b : episode.meta_train) validate_batch(b, "meta_step");
  validate_batch(episode.meta_test, "meta_step");

  ModelParams work = tracked_copy(params);
  const std::size_t n_train = episode.meta_train.size();
  MetaGradients out;
  MetaStepReport& report = out.report;

  Tape tape;
  std::vector<Tensor> train_features;
  Tensor test_features;
  {
    TapeScope scope(tape);
    for (const auto& b : episode.meta_train) train_features.push_back(model.F.forward(b.images, work.feature).features);
    test_features = model.F.forward(episode.meta_test.images, work.feature).features;
  }

  // Meta-train: one step on each domain's classification loss; depth is not used here.
  std::vector<ParamSet> adapted;
  for (std::size_t i = 0; i < n_train; ++i) {
    ParamSet g = meta_gradient_from_features(model, work.meta, train_features[i].detach(), episode.meta_train[i].labels);
    adapted.push_back(param_axpy(work.meta, g, -hp.alpha));
  }

  Tensor total;
  std::vector<Tensor> train_cls, train_dep, test_cls;
  Tensor test_dep;
  {
    TapeScope scope(tape);
    for (std::size_t i = 0; i < n_train; ++i) {
      const Batch& b = episode.meta_train[i];
      train_cls.push_back(cls_loss(model.M.classify(train_features[i], work.meta), b.labels, &report.clamped_probs));
      train_dep.push_back(depth_loss(model.D.estimate(train_features[i], work.depth), b.depth));
      test_cls.push_back(cls_loss(model.M.classify(test_features, adapted[i]), episode.meta_test.labels,
                                  &report.clamped_probs));
    }
    test_dep = depth_loss(model.D.estimate(test_features, work.depth), episode.meta_test.depth);
    total = test_dep;
    for (std::size_t i = 0; i < n_train; ++i) total = ops::add(total, ops::add(ops::add(train_cls[i], train_dep[i]), test_cls[i]));
  }

  for (std::size_t i = 0; i < n_train; ++i) {
    report.train_cls.push_back(train_cls[i].item());
    report.train_dep.push_back(train_dep[i].item());
    report.test_cls.push_back(test_cls[i].item());
  }
  report.test_dep = test_dep.item();
  report.total = total.item();
  if (!std::isfinite(report.total)) throw NumericalError("meta_step: non-finite loss; " + describe(report));

  tape.backward(total);

  out.grads.feature = work.feature.grads();
  out.grads.depth = work.depth.grads();
  out.grads.meta = work.meta.grads();
  for (const auto& a : adapted) param_add_inplace(out.grads.meta, a.grads());

  if (hp.order == GradientOrder::Second) {
    for (std::size_t i = 0; i < n_train; ++i) {
      const ParamSet v = adapted[i].grads();
      const double norm = param_norm(v);
      if (norm == 0.0) continue;
      const double eps = hp.second_order_step / norm;
      const auto [gf_plus, gm_plus] =
          classification_gradients(model, params.feature, param_axpy(params.meta, v, eps), episode.meta_train[i]);
      const auto [gf_minus, gm_minus] =
          classification_gradients(model, params.feature, param_axpy(params.meta, v, -eps), episode.meta_train[i]);
      // -alpha * (d grad_i / d theta)^T v, with grad_i = grad_{theta_M} L_Cls(S_i):
      // theta_M gets the Hessian-vector product, theta_F the mixed term.
      const double c = -hp.alpha / (2.0 * eps);
      const ParamSet dm = param_axpy(gm_plus, gm_minus, -1.0);
      const ParamSet df = param_axpy(gf_plus, gf_minus, -1.0);
      param_add_inplace(out.grads.meta, param_axpy(dm.zeros_like(), dm, c));
      param_add_inplace(out.grads.feature, param_axpy(df.zeros_like(), df, c));
    }
  }

  require_finite(out.grads.feature, "meta_step");
  require_finite(out.grads.meta, "meta_step");
  require_finite(out.grads.depth, "meta_step");
  report.grad_norm_feature = param_norm(out.grads.feature);
  report.grad_norm_meta = param_norm(out.grads.meta);
  report.grad_norm_depth = param_norm(out.grads.depth);
  return out;
}

MetaStepReport meta_step(const Model& model, ModelParams& params, const EpisodeBatch& episode, const Hyperparams& hp,
                         Optimizer& optimizer) {
  MetaGradients g = meta_gradients(model, params, episode, hp);
  optimizer.step(params, g.grads);
  return g.report;
}

MetaGradients erm_gradients(const Model& model, const ModelParams& params, const Batch& batch) {
  validate_batch(batch, "erm_step");
  ModelParams work = tracked_copy(params);
  MetaGradients out;
  Tape tape;
  Tensor cls, dep, total;
  {
    TapeScope scope(tape);
    Tensor features = model.F.forward(batch.images, work.feature).features;
    cls = cls_loss(model.M.classify(features, work.meta), batch.labels, &out.report.clamped_probs);
    dep = depth_loss(model.D.estimate(features, work.depth), batch.depth);
    total = ops::add(cls, dep);
  }
  out.report.train_cls = {cls.item()};
  out.report.train_dep = {dep.item()};
  out.report.total = total.item();
  if (!std::isfinite(out.report.total)) throw NumericalError("erm_step: non-finite loss");
  tape.backward(total);
  out.grads = {work.feature.grads(), work.meta.grads(), work.depth.grads()};
  require_finite(out.grads.feature, "erm_step");
  require_finite(out.grads.meta, "erm_step");
  require_finite(out.grads.depth, "erm_step");
  out.report.grad_norm_feature = param_norm(out.grads.feature);
  out.report.grad_norm_meta = param_norm(out.grads.meta);
  out.report.grad_norm_depth = param_norm(out.grads.depth);
  return out;
}

}  // namespace pdl::meta
