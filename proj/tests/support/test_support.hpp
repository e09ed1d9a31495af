#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pdl/episode.hpp"
#include "pdl/model.hpp"
#include "pdl/synthetic.hpp"
#include "pdl/tensor.hpp"

namespace pdl_test {

using namespace pdl;

using Rng = std::mt19937_64;

// 8x8 input, 9 convs of 2-3 channels, 4x4 depth.
inline ArchitectureConfig tiny_arch() {
  ArchitectureConfig a;
  a.image_size = 8;
  a.depth_size = 4;
  a.stage_channels = {2, 3, 3};
  a.layers_per_stage = 3;
  a.tap_layers = {5, 9};
  a.head_hidden = 4;
  a.depth_hidden = 3;
  return a;
}

inline std::vector<double> uniform_values(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline Tensor uniform(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool requires_grad = false) {
  const std::size_t n = shape_numel(shape);
  return Tensor::from(std::move(shape), uniform_values(n, rng, lo, hi), requires_grad);
}

inline void fill(ParamSet& ps, double value) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (double& v : ps[i].mutable_data()) v = value;
  }
}

inline ModelParams zero_params(const Model& model) {
  ModelParams p = model.init_params(0);
  fill(p.feature, 0.0);
  fill(p.meta, 0.0);
  fill(p.depth, 0.0);
  return p;
}

// Small biases so no unit sits on a ReLU kink.
inline void jitter_biases(ParamSet& ps, Rng& rng, double amount = 0.1) {
  std::uniform_real_distribution<double> u(-amount, amount);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].rank() != 1) continue;
    for (double& v : ps[i].mutable_data()) v = u(rng);
  }
}

inline ModelParams jittered_params(const Model& model, std::uint64_t seed) {
  ModelParams p = model.init_params(seed);
  Rng rng(seed ^ 0xB1A5ULL);
  jitter_biases(p.feature, rng);
  jitter_biases(p.meta, rng);
  jitter_biases(p.depth, rng);
  return p;
}

// Class-balanced random batch for an architecture: labels alternate live/spoof.
inline Batch random_batch(const ArchitectureConfig& arch, std::size_t b, Rng& rng, int domain = -1) {
  Batch out;
  out.images = uniform({b, 6, arch.image_size, arch.image_size}, rng, 0.0, 1.0);
  std::vector<double> y(b);
  for (std::size_t i = 0; i < b; ++i) y[i] = (i % 2 == 0) ? 1.0 : 0.0;
  out.labels = Tensor::from({b}, y);
  std::vector<double> depth(b * arch.depth_size * arch.depth_size, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < b; ++i) {
    if (y[i] == 0.0) continue;
    for (std::size_t k = 0; k < arch.depth_size * arch.depth_size; ++k) depth[i * arch.depth_size * arch.depth_size + k] = u(rng);
  }
  out.depth = Tensor::from({b, 1, arch.depth_size, arch.depth_size}, depth);
  out.domain = domain;
  for (std::size_t i = 0; i < b; ++i) out.sample_ids.push_back(rng());
  return out;
}

inline synthetic::GenerateOptions small_generate_options(std::size_t per_domain, std::uint64_t seed = 0,
                                                         std::size_t image_size = 8, std::size_t depth_size = 4) {
  synthetic::GenerateOptions o;
  o.per_domain = per_domain;
  o.image_size = image_size;
  o.depth_size = depth_size;
  o.seed = seed;
  return o;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const ParamSet& a, const ParamSet& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a[i].data(), b[i].data()));
  return m;
}

}  // namespace pdl_test
