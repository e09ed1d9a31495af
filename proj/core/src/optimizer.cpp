#include "pdl/optimizer.hpp"

#include <cmath>

#include "pdl/error.hpp"

namespace pdl {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw ValidationError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

void Sgd::step(ModelParams& params, const ModelParams& grads) {
  for (auto [p, g] : {std::pair{&params.feature, &grads.feature}, std::pair{&params.meta, &grads.meta},
                      std::pair{&params.depth, &grads.depth}}) {
    p->require_same_structure(*g, "sgd step");
    for (std::size_t i = 0; i < p->size(); ++i) {
      auto x = (*p)[i].mutable_data();
      const auto d = (*g)[i].data();
      for (std::size_t k = 0; k < x.size(); ++k) x[k] -= rate_ * d[k];
    }
  }
}

void Adam::update(ParamSet& params, const ParamSet& grads, std::vector<std::vector<double>>& m,
                  std::vector<std::vector<double>>& v) {
  params.require_same_structure(grads, "adam step");
  if (m.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m.emplace_back(params[i].numel(), 0.0);
      v.emplace_back(params[i].numel(), 0.0);
    }
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto x = params[i].mutable_data();
    const auto g = grads[i].data();
    for (std::size_t k = 0; k < x.size(); ++k) {
      m[i][k] = beta1_ * m[i][k] + (1.0 - beta1_) * g[k];
      v[i][k] = beta2_ * v[i][k] + (1.0 - beta2_) * g[k] * g[k];
      x[k] -= rate_ * (m[i][k] / c1) / (std::sqrt(v[i][k] / c2) + eps_);
    }
  }
}

void Adam::step(ModelParams& params, const ModelParams& grads) {
  ++t_;
  update(params.feature, grads.feature, m_[0], v_[0]);
  update(params.meta, grads.meta, m_[1], v_[1]);
  update(params.depth, grads.depth, m_[2], v_[2]);
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double rate) {
  if (kind == OptimizerKind::Sgd) return std::make_unique<Sgd>(rate);
  return std::make_unique<Adam>(rate);
}

}  // namespace pdl
