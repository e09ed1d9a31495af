#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdl/model.hpp"

namespace pdl {

enum class OptimizerKind { Sgd, Adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

// Outer-loop update rule: params <- params - rate * f(grads).
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ModelParams& params, const ModelParams& grads) = 0;
  virtual OptimizerKind kind() const = 0;
};

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double rate) : rate_(rate) {}
  void step(ModelParams& params, const ModelParams& grads) override;
  OptimizerKind kind() const override { return OptimizerKind::Sgd; }

 private:
  double rate_;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(double rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : rate_(rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ModelParams& params, const ModelParams& grads) override;
  OptimizerKind kind() const override { return OptimizerKind::Adam; }

 private:
  void update(ParamSet& params, const ParamSet& grads, std::vector<std::vector<double>>& m,
              std::vector<std::vector<double>>& v);

  double rate_, beta1_, beta2_, eps_;
  long long t_ = 0;
  // first and second moments per ParamSet (feature, meta, depth), per tensor
  std::vector<std::vector<double>> m_[3], v_[3];
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double rate);

}  // namespace pdl
