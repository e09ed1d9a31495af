#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pdl/tensor.hpp"

namespace pdl {

struct GradCheckOptions {
  double step = 1e-4;       // central-difference step h
  double tolerance = 1e-4;  // pass threshold on the max relative error
  // Relative error is |a - n| / max(|a|, |n|, denominator_floor); the floor
  // keeps coordinates with vanishing gradient from dividing rounding noise by ~0.
  double denominator_floor = 1e-6;
  // Multiplies the analytic gradient before comparison. Anything but 1.0 is a
  // negative control that must fail.
  double analytic_scale = 1.0;
  // Central differences are only an oracle where f is smooth on [x-h, x+h].
  // When a ReLU sign or max-pool argmax flips inside that interval, fall back
  // to a one-sided Richardson difference (steps h and h/2) on a side that
  // stays in the centre's linear region; if neither side does, skip the
  // coordinate and count it.
  bool kink_aware = true;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t one_sided = 0;  // coordinates checked with a one-sided difference
  std::size_t skipped = 0;    // coordinates with a kink on both sides
  bool passed = false;
};

// f builds a scalar loss from the given tensors. It is called once on a tape
// for the analytic gradient and twice per coordinate without a tape.
using ScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> params, const GradCheckOptions& options = {});

}  // namespace pdl
