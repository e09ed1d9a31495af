#pragma once

#include <functional>
#include <vector>

namespace pdl::meta {

// A scalar loss over a flat parameter vector together with its gradient.
struct ScalarField {
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

struct MldgResidual {
  double objective = 0.0;    // J(alpha) = F(theta) + beta * G(theta - alpha F'(theta))
  double first_order = 0.0;  // F(theta) + beta G(theta) - beta alpha G'(theta).F'(theta)
  double residual = 0.0;     // |J - first_order|
  double gradient_dot = 0.0; // G'(theta).F'(theta)
};

// Compares the MLDG objective with its first-order Taylor form at one alpha.
MldgResidual mldg_objective_check(const std::vector<double>& theta, double alpha, double beta, const ScalarField& f,
                                  const ScalarField& g);

}  // namespace pdl::meta
