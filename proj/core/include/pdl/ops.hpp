#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pdl/hash.hpp"
#include "pdl/tensor.hpp"

// Differentiable ops. Every op rejects non-finite inputs with a NumericalError
// naming the op, and shape mismatches with a ShapeError. Broadcasting exists
// only for bias-add inside conv2d/linear and for scalar scaling.
namespace pdl::ops {

// input [B,C,H,W], weight [K,C,kh,kw], bias [K] -> [B,K,H',W']
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride = 1,
              std::size_t padding = 0);

// Non-overlapping when stride == kernel. Ties route the gradient to the first maximum.
Tensor max_pool2d(const Tensor& input, std::size_t kernel = 2, std::size_t stride = 2);

// Nearest-neighbour upsampling of [B,C,H,W] by an integer factor.
Tensor upsample_nearest(const Tensor& input, std::size_t factor);

// input [B,in], weight [out,in], bias [out] -> [B,out]
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// log(sigmoid(x)) as -softplus(-x); finite for any finite x.
Tensor log_sigmoid(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// mean((a - b)^2) over every element.
Tensor mse(const Tensor& a, const Tensor& b);

// [B, ...] -> [B, prod(...)]
Tensor flatten(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
// Concatenates [B,C_i,H,W] tensors along the channel axis.
Tensor concat_channels(std::span<const Tensor> parts);

// Mean binary cross-entropy of probabilities against {0,1} targets:
// mean(-[y log p + (1-y) log(1-p)]), with p clamped to [eps, 1-eps].
// Clamped entries pass no gradient; their count is added to *clamped.
Tensor binary_cross_entropy(const Tensor& probs, const Tensor& targets, double eps = 1e-12,
                            std::size_t* clamped = nullptr);

// While alive, relu and max_pool2d on this thread fold the piece they took
// (sign mask, argmax positions) into a hash. Two evaluations with equal
// hashes ran through the same linear region of every piecewise-linear op.
class ActivationPatternScope {
 public:
  ActivationPatternScope();
  ~ActivationPatternScope();
  ActivationPatternScope(const ActivationPatternScope&) = delete;
  ActivationPatternScope& operator=(const ActivationPatternScope&) = delete;

  std::uint64_t value() const { return hash_.value(); }
  Fnv1a& hash() { return hash_; }

 private:
  Fnv1a hash_;
  ActivationPatternScope* previous_;
};

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& x) { return scale(x, s); }

}  // namespace pdl::ops
