#include "pdl/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "pdl/error.hpp"
#include "pdl/ops.hpp"

namespace pdl {

namespace {

struct Sample {
  double value;
  std::uint64_t pattern;
};

Sample evaluate(const ScalarFn& f, const std::vector<Tensor>& params) {
  NoGradScope no_grad;
  ops::ActivationPatternScope pattern;
  const double v = f(params).item();
  if (!std::isfinite(v)) throw NumericalError("grad_check: function returned a non-finite value");
  return {v, pattern.value()};
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> params, const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw ValidationError("grad_check: step must be positive");

  std::vector<bool> previous_flags;
  for (auto& p : params) {
    previous_flags.push_back(p.requires_grad());
    p.set_requires_grad(true);
    p.zero_grad();
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = f(params);
    }
    if (!std::isfinite(loss.item())) throw NumericalError("grad_check: function returned a non-finite value");
    tape.backward(loss);
    for (const auto& p : params) {
      std::vector<double> g(p.numel(), 0.0);
      if (p.has_grad()) std::copy(p.grad().begin(), p.grad().end(), g.begin());
      for (double& v : g) v *= options.analytic_scale;
      analytic.push_back(std::move(g));
    }
  }

  GradCheckReport report;
  const double h = options.step;
  const Sample centre = evaluate(f, params);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto values = params[t].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      auto at = [&](double offset) {
        values[i] = original + offset;
        const Sample s = evaluate(f, params);
        values[i] = original;
        return s;
      };
      const Sample up = at(h), down = at(-h);

      double numeric = (up.value - down.value) / (2.0 * h);
      if (options.kink_aware && (up.pattern != centre.pattern || down.pattern != centre.pattern)) {
        bool resolved = false;
        for (const double side : {1.0, -1.0}) {
          const Sample& far = side > 0 ? up : down;
          if (far.pattern != centre.pattern) continue;
          const Sample near = at(side * h / 2.0);
          if (near.pattern != centre.pattern) continue;
          const double d_full = (far.value - centre.value) / (side * h);
          const double d_half = (near.value - centre.value) / (side * h / 2.0);
          numeric = 2.0 * d_half - d_full;
          resolved = true;
          break;
        }
        if (!resolved) {
          ++report.skipped;
          continue;
        }
        ++report.one_sided;
      }

      const double a = analytic[t][i];
      const double abs_err = std::abs(a - numeric);
      const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      ++report.coordinates;
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel_err > report.max_rel_error || report.coordinates == 1) {
        report.max_rel_error = rel_err;
        report.worst_tensor = t;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < options.tolerance;

  for (std::size_t t = 0; t < params.size(); ++t) {
    params[t].zero_grad();
    params[t].set_requires_grad(previous_flags[t]);
  }
  return report;
}

}  // namespace pdl
