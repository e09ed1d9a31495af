#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pdl/error.hpp"
#include "pdl/grad_check.hpp"
#include "pdl/ops.hpp"
#include "test_support.hpp"

using namespace pdl_test;

namespace {

// Runs f under a fresh tape and backpropagates.
template <typename F>
Tensor run_backward(F&& f) {
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = f();
  }
  tape.backward(loss);
  return loss;
}

// Direct loop convolution.
std::vector<double> conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t pad) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t K = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t Ho = (H + 2 * pad - kh) / stride + 1, Wo = (W + 2 * pad - kw) / stride + 1;
  std::vector<double> out(B * K * Ho * Wo, 0.0);
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < Ho; ++i)
        for (std::size_t j = 0; j < Wo; ++j) {
          double acc = b.at(k);
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t u = 0; u < kh; ++u)
              for (std::size_t v = 0; v < kw; ++v) {
                const long r = static_cast<long>(i * stride + u) - static_cast<long>(pad);
                const long s = static_cast<long>(j * stride + v) - static_cast<long>(pad);
                if (r < 0 || s < 0 || r >= static_cast<long>(H) || s >= static_cast<long>(W)) continue;
                acc += x.at(((n * C + c) * H + r) * W + s) * w.at(((k * C + c) * kh + u) * kw + v);
              }
          out[((n * K + k) * Ho + i) * Wo + j] = acc;
        }
  return out;
}

}  // namespace

TEST(Conv2d, OnesGiveNine) {
  const Tensor x = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor y = ops::conv2d(x, w, Tensor::zeros({1}));
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(y.item(), 9.0);
}

TEST(Conv2d, IdentityKernel) {
  Rng rng(1);
  const Tensor x = uniform({2, 1, 5, 4}, rng);
  const Tensor y = ops::conv2d(x, Tensor::full({1, 1, 1, 1}, 1.0), Tensor::zeros({1}));
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.at(i), x.at(i));
}

TEST(Conv2d, MatchesLoopOracleWithStrideAndPadding) {
  Rng rng(2);
  const Tensor x = uniform({2, 3, 7, 6}, rng);
  const Tensor w = uniform({4, 3, 3, 3}, rng);
  const Tensor b = uniform({4}, rng);
  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t pad : {0u, 1u}) {
      const Tensor y = ops::conv2d(x, w, b, stride, pad);
      EXPECT_EQ(y.dim(2), (7 + 2 * pad - 3) / stride + 1);
      EXPECT_LT(max_abs_diff(y.data(), conv_oracle(x, w, b, stride, pad)), 1e-12);
    }
  }
}

TEST(Conv2d, WeightGradientMatchesFiniteDifferences) {
  Rng rng(3);
  const Tensor x = uniform({2, 3, 8, 8}, rng);
  const Tensor w = uniform({4, 3, 3, 3}, rng, -1.0, 1.0, true);
  const Tensor b = Tensor::zeros({4});
  GradCheckOptions o;
  o.tolerance = 1e-5;
  const auto report = grad_check([&](const std::vector<Tensor>& p) { return ops::sum(ops::conv2d(x, p[0], b)); }, {w}, o);
  EXPECT_TRUE(report.passed) << report.max_rel_error;
  EXPECT_LT(report.max_rel_error, 1e-5);
}

TEST(Conv2d, ShapeMismatchIsRejected) {
  EXPECT_THROW(ops::conv2d(Tensor::zeros({1, 2, 4, 4}), Tensor::zeros({1, 3, 3, 3}), Tensor::zeros({1})), ShapeError);
  EXPECT_THROW(ops::conv2d(Tensor::zeros({1, 1, 2, 2}), Tensor::zeros({1, 1, 3, 3}), Tensor::zeros({1})), ShapeError);
  EXPECT_THROW(ops::conv2d(Tensor::zeros({1, 1, 4, 4}), Tensor::zeros({1, 1, 3, 3}), Tensor::zeros({2})), ShapeError);
}

TEST(CoreOps, ReluAndSigmoidValues) {
  const Tensor r = ops::relu(Tensor::from({2}, {-2.0, 3.5}));
  EXPECT_EQ(r.at(0), 0.0);
  EXPECT_EQ(r.at(1), 3.5);
  EXPECT_EQ(ops::sigmoid(Tensor::scalar(0.0)).item(), 0.5);
}

TEST(CoreOps, LogSigmoidFiniteAtFifty) {
  const Tensor z = Tensor::from({4}, {-50.0, -20.0, 20.0, 50.0});
  const Tensor ls = ops::log_sigmoid(z);
  for (std::size_t i = 0; i < 4; ++i) ASSERT_TRUE(std::isfinite(ls.at(i)));
  EXPECT_NEAR(ls.at(0), -50.0 - std::log1p(std::exp(-50.0)), 1e-12);
  EXPECT_NEAR(ls.at(3), -std::log1p(std::exp(-50.0)), 1e-30);
}

TEST(CoreOps, MseGradient) {
  const Tensor a = Tensor::from({2}, {1.0, 2.0}, true);
  const Tensor b = Tensor::zeros({2});
  run_backward([&] { return ops::mse(a, b); });
  ASSERT_TRUE(a.has_grad());
  EXPECT_DOUBLE_EQ(a.grad()[0], 1.0);
  EXPECT_DOUBLE_EQ(a.grad()[1], 2.0);
  const auto report = grad_check([&](const std::vector<Tensor>& p) { return ops::mse(p[0], b); }, {a});
  EXPECT_TRUE(report.passed);
}

TEST(CoreOps, MaxPoolTiesGoToFirst) {
  const Tensor x = Tensor::from({1, 1, 2, 2}, {1.0, 1.0, 1.0, 1.0}, true);
  run_backward([&] { return ops::sum(ops::max_pool2d(x)); });
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(x.grad()[1] + x.grad()[2] + x.grad()[3], 0.0);
}

TEST(CoreOps, ConcatAndFlattenShapes) {
  const Tensor a = Tensor::zeros({2, 1, 3, 3}), b = Tensor::zeros({2, 2, 3, 3});
  const std::vector<Tensor> parts{a, b};
  const Tensor c = ops::concat_channels(parts);
  EXPECT_EQ(c.shape(), (Shape{2, 3, 3, 3}));
  EXPECT_EQ(ops::flatten(c).shape(), (Shape{2, 27}));
}

TEST(CoreOps, NonFiniteInputNamesTheOp) {
  const Tensor bad = Tensor::from({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
  try {
    ops::relu(bad);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("relu"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ops::sigmoid(Tensor::scalar(std::numeric_limits<double>::infinity())), NumericalError);
}

TEST(CoreOps, ElementwiseShapesMustMatch) {
  EXPECT_THROW(ops::add(Tensor::zeros({2}), Tensor::zeros({3})), ShapeError);
  EXPECT_THROW(ops::mul(Tensor::zeros({2, 1}), Tensor::zeros({2})), ShapeError);
}

TEST(CoreOps, RandomOpsPassGradCheckOverSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    const std::size_t B = dim(rng), C = dim(rng), H = 2 * dim(rng), W = 2 * dim(rng);
    const Tensor x = uniform({B, C, H, W}, rng, -1.0, 1.0, true);
    const Tensor w = uniform({B, C, H, W}, rng);
    const auto contract = [&](const Tensor& t) { return ops::sum(ops::mul(t, w)); };
    const auto r1 = grad_check([&](const std::vector<Tensor>& p) { return contract(ops::sigmoid(p[0])); }, {x});
    const auto r2 = grad_check([&](const std::vector<Tensor>& p) { return contract(ops::log_sigmoid(p[0])); }, {x});
    const Tensor lw = uniform({3, C * H * W}, rng, -1.0, 1.0, true);
    const Tensor lb = uniform({3}, rng, -1.0, 1.0, true);
    const auto r3 = grad_check(
        [&](const std::vector<Tensor>& p) { return ops::mean(ops::linear(ops::flatten(p[0]), p[1], p[2])); },
        {x, lw, lb});
    EXPECT_TRUE(r1.passed && r2.passed && r3.passed) << "seed " << seed;
  }
}

TEST(Backward, ProductRule) {
  const Tensor w = Tensor::from({1}, {2.0}, true);
  const Tensor x = Tensor::from({1}, {3.0}, true);
  run_backward([&] { return ops::sum(ops::mul(w, x)); });
  EXPECT_EQ(w.grad()[0], 3.0);
  EXPECT_EQ(x.grad()[0], 2.0);
}

TEST(Backward, ZeroAtMinimum) {
  const Tensor target = Tensor::from({3}, {0.5, -1.0, 2.0});
  const Tensor w = Tensor::from({3}, {0.5, -1.0, 2.0}, true);
  run_backward([&] { return ops::mse(w, target); });
  for (double g : w.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, NonScalarLossRejected) {
  const Tensor w = Tensor::from({2}, {1.0, 2.0}, true);
  Tape tape;
  Tensor y;
  {
    TapeScope scope(tape);
    y = ops::scale(w, 2.0);
  }
  EXPECT_THROW(tape.backward(y), ShapeError);
}

TEST(Backward, ConsumedTapeRejected) {
  const Tensor w = Tensor::from({2}, {1.0, 2.0}, true);
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = ops::sum(w);
  }
  tape.backward(loss);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(loss), ValidationError);
}

TEST(Backward, NoGradScopeRecordsNothing) {
  const Tensor w = Tensor::from({2}, {1.0, 2.0}, true);
  Tape tape;
  {
    TapeScope scope(tape);
    NoGradScope no_grad;
    ops::sum(w);
  }
  EXPECT_TRUE(tape.empty());
}

TEST(Backward, LinearityInLossScale) {
  Rng rng(7);
  const Tensor x = uniform({2, 3, 6, 6}, rng);
  const Tensor w1 = uniform({4, 3, 3, 3}, rng, -1.0, 1.0, true);
  const Tensor w2 = w1.clone();
  run_backward([&] { return ops::mean(ops::relu(ops::conv2d(x, w1, Tensor::zeros({4})))); });
  run_backward([&] { return ops::scale(ops::mean(ops::relu(ops::conv2d(x, w2, Tensor::zeros({4})))), 3.0); });
  for (std::size_t i = 0; i < w1.numel(); ++i) EXPECT_NEAR(w2.grad()[i], 3.0 * w1.grad()[i], 1e-14);
}

TEST(Backward, ForwardIsDeterministic) {
  Rng rng(8);
  const Tensor x = uniform({2, 3, 8, 8}, rng);
  const Tensor w = uniform({4, 3, 3, 3}, rng);
  const Tensor b = uniform({4}, rng);
  const Tensor y1 = ops::conv2d(x, w, b, 1, 1), y2 = ops::conv2d(x, w, b, 1, 1);
  for (std::size_t i = 0; i < y1.numel(); ++i) ASSERT_EQ(y1.at(i), y2.at(i));
}

TEST(GradCheck, SquareAtThree) {
  GradCheckOptions o;
  o.step = 1e-5;
  const Tensor w = Tensor::from({1}, {3.0}, true);
  const auto report = grad_check([](const std::vector<Tensor>& p) { return ops::sum(ops::mul(p[0], p[0])); }, {w}, o);
  EXPECT_TRUE(report.passed);
  EXPECT_DOUBLE_EQ(report.worst_analytic, 6.0);
  EXPECT_NEAR(report.worst_numeric, 6.0, 1e-6);
}

TEST(GradCheck, CorruptedGradientFails) {
  Rng rng(9);
  GradCheckOptions o;
  o.analytic_scale = 1.1;
  const Tensor x = uniform({3, 4}, rng, -1.0, 1.0, true);
  const auto report = grad_check([](const std::vector<Tensor>& p) { return ops::sum(ops::sigmoid(p[0])); }, {x}, o);
  EXPECT_FALSE(report.passed);
  EXPECT_GT(report.max_rel_error, 0.05);
}

TEST(GradCheck, NonFiniteFunctionIsAnError) {
  const Tensor w = Tensor::from({1}, {1.0}, true);
  EXPECT_THROW(grad_check([](const std::vector<Tensor>&) { return Tensor::scalar(std::nan("")); }, {w}),
               Error);
}

TEST(GradCheck, KinkAwareHandlesReluAtBreakpoint) {
  // x sits within h of the ReLU kink at 0; the one-sided estimate must pick the smooth side.
  const Tensor x = Tensor::from({2}, {5e-5, 1.0}, true);
  const auto report = grad_check([](const std::vector<Tensor>& p) { return ops::sum(ops::relu(p[0])); }, {x});
  EXPECT_TRUE(report.passed) << report.max_rel_error;
  EXPECT_EQ(report.one_sided, 1u);
}
