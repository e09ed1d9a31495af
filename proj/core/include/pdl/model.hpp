#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pdl/param_set.hpp"
#include "pdl/tensor.hpp"

namespace pdl {

struct ArchitectureConfig {
  std::size_t in_channels = 6;  // RGB + HSV
  std::size_t image_size = 32;
  std::size_t depth_size = 16;
  // One entry per stage; every stage has layers_per_stage 3x3 convs and all
  // stages but the last end in a 2x2 max-pool.
  std::vector<std::size_t> stage_channels = {16, 32, 64};
  std::size_t layers_per_stage = 3;
  std::vector<std::size_t> tap_layers = {5, 9};  // 1-based conv indices
  std::size_t head_hidden = 32;
  std::size_t depth_hidden = 16;

  std::size_t conv_layers() const { return stage_channels.size() * layers_per_stage; }
  std::size_t feature_channels() const { return stage_channels.back(); }
  std::size_t feature_size() const;
  std::size_t channels_at_layer(std::size_t layer) const;

  // Throws ValidationError when the geometry cannot be built.
  void validate() const;
  std::uint64_t hash() const;
};

struct FeatureOutput {
  Tensor features;                    // [B, C_f, s, s]
  std::map<std::size_t, Tensor> taps;  // conv layer index -> post-ReLU activation
};

// F: the stacked conv blocks. Stateless; all weights come from the ParamSet.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(ArchitectureConfig arch);

  ParamSet init_params(std::uint64_t seed) const;
  FeatureOutput forward(const Tensor& x, const ParamSet& params) const;
  const ArchitectureConfig& arch() const { return arch_; }

 private:
  ArchitectureConfig arch_;
};

// M: flattened features -> hidden -> logit -> probability.
class MetaLearner {
 public:
  explicit MetaLearner(ArchitectureConfig arch);

  ParamSet init_params(std::uint64_t seed) const;
  Tensor logits(const Tensor& features, const ParamSet& params) const;  // [B]
  Tensor classify(const Tensor& features, const ParamSet& params) const;  // [B], in (0,1)

 private:
  ArchitectureConfig arch_;
};

// D: conv -> relu -> resample to d x d -> conv to one channel.
class DepthEstimator {
 public:
  explicit DepthEstimator(ArchitectureConfig arch);

  ParamSet init_params(std::uint64_t seed) const;
  Tensor estimate(const Tensor& features, const ParamSet& params) const;  // [B,1,d,d]

 private:
  ArchitectureConfig arch_;
};

struct ModelParams {
  ParamSet feature;  // theta_F
  ParamSet meta;     // theta_M
  ParamSet depth;    // theta_D

  ModelParams clone() const { return {feature.clone(), meta.clone(), depth.clone()}; }
  std::uint64_t checksum() const;
};

struct Model {
  explicit Model(const ArchitectureConfig& arch) : arch(arch), F(arch), M(arch), D(arch) { arch.validate(); }

  ModelParams init_params(std::uint64_t seed) const;

  ArchitectureConfig arch;
  FeatureExtractor F;
  MetaLearner M;
  DepthEstimator D;
};

}  // namespace pdl
