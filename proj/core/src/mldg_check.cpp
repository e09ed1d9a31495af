#include "pdl/mldg_check.hpp"

#include <cmath>

#include "pdl/error.hpp"

namespace pdl::meta {

MldgResidual mldg_objective_check(const std::vector<double>& theta, double alpha, double beta, const ScalarField& f,
                                  const ScalarField& g) {
  const std::vector<double> f_grad = f.gradient(theta);
  const std::vector<double> g_grad = g.gradient(theta);
  if (f_grad.size() != theta.size() || g_grad.size() != theta.size()) {
    throw ShapeError("mldg_objective_check: gradient length differs from theta");
  }
  std::vector<double> stepped(theta.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    stepped[i] = theta[i] - alpha * f_grad[i];
    dot += g_grad[i] * f_grad[i];
  }
  const double f0 = f.value(theta);
  MldgResidual r;
  r.gradient_dot = dot;
  r.objective = f0 + beta * g.value(stepped);
  r.first_order = f0 + beta * g.value(theta) - beta * alpha * dot;
  r.residual = std::abs(r.objective - r.first_order);
  return r;
}

}  // namespace pdl::meta
