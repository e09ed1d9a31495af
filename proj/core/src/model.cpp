#include "pdl/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdl/error.hpp"
#include "pdl/hash.hpp"
#include "pdl/ops.hpp"

namespace pdl {

namespace {

Tensor he_uniform(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

std::string layer_name(const char* prefix, std::size_t index, const char* what) {
  return std::string(prefix) + std::to_string(index) + "." + what;
}

}  // namespace

std::size_t ArchitectureConfig::feature_size() const {
  std::size_t s = image_size;
  for (std::size_t i = 0; i + 1 < stage_channels.size(); ++i) s /= 2;
  return s;
}

std::size_t ArchitectureConfig::channels_at_layer(std::size_t layer) const {
  if (layer == 0 || layer > conv_layers()) {
    throw ValidationError("architecture: conv layer " + std::to_string(layer) + " does not exist (have " +
                          std::to_string(conv_layers()) + ")");
  }
  return stage_channels[(layer - 1) / layers_per_stage];
}

void ArchitectureConfig::validate() const {
  if (in_channels == 0) throw ValidationError("architecture: in_channels must be positive");
  if (stage_channels.empty() || layers_per_stage == 0) throw ValidationError("architecture: no conv layers");
  if (std::any_of(stage_channels.begin(), stage_channels.end(), [](std::size_t c) { return c == 0; })) {
    throw ValidationError("architecture: stage channels must be positive");
  }
  if (conv_layers() < 9) {
    throw ValidationError("architecture: need at least 9 conv layers, have " + std::to_string(conv_layers()));
  }
  std::size_t s = image_size;
  for (std::size_t i = 0; i + 1 < stage_channels.size(); ++i) {
    if (s < 2 || s % 2 != 0) {
      throw ValidationError("architecture: image_size " + std::to_string(image_size) + " cannot be pooled " +
                            std::to_string(stage_channels.size() - 1) + " times");
    }
    s /= 2;
  }
  if (depth_size == 0) throw ValidationError("architecture: depth_size must be positive");
  if (depth_size % s != 0 && s % depth_size != 0) {
    throw ValidationError("architecture: depth_size " + std::to_string(depth_size) +
                          " is not an integer rescale of the feature size " + std::to_string(s));
  }
  if (tap_layers.empty()) throw ValidationError("architecture: at least one tap layer required");
  for (std::size_t t : tap_layers) channels_at_layer(t);
  if (head_hidden == 0 || depth_hidden == 0) throw ValidationError("architecture: head sizes must be positive");
}

std::uint64_t ArchitectureConfig::hash() const {
  Fnv1a h;
  h.update("pdl-arch-v1");
  for (std::uint64_t v : {in_channels, image_size, depth_size, layers_per_stage, head_hidden, depth_hidden}) {
    h.update_pod(v);
  }
  h.update_pod(static_cast<std::uint64_t>(stage_channels.size()));
  for (std::uint64_t c : stage_channels) h.update_pod(c);
  h.update_pod(static_cast<std::uint64_t>(tap_layers.size()));
  for (std::uint64_t t : tap_layers) h.update_pod(t);
  return h.value();
}

FeatureExtractor::FeatureExtractor(ArchitectureConfig arch) : arch_(std::move(arch)) {}

ParamSet FeatureExtractor::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed, 0xF));
  ParamSet ps;
  std::size_t in = arch_.in_channels;
  for (std::size_t l = 1; l <= arch_.conv_layers(); ++l) {
    const std::size_t out = arch_.channels_at_layer(l);
    ps.add(layer_name("conv", l, "weight"), he_uniform({out, in, 3, 3}, in * 9, rng));
    ps.add(layer_name("conv", l, "bias"), Tensor::zeros({out}));
    in = out;
  }
  return ps;
}

FeatureOutput FeatureExtractor::forward(const Tensor& x, const ParamSet& params) const {
  if (x.rank() != 4 || x.dim(1) != arch_.in_channels) {
    throw ShapeError("forward_features: expected input [B," + std::to_string(arch_.in_channels) + ",H,W], got " +
                     shape_str(x.shape()));
  }
  if (x.dim(2) != arch_.image_size || x.dim(3) != arch_.image_size) {
    throw ShapeError("forward_features: expected " + std::to_string(arch_.image_size) + "x" +
                     std::to_string(arch_.image_size) + " images, got " + shape_str(x.shape()));
  }
  if (params.size() != 2 * arch_.conv_layers()) {
    throw ShapeError("forward_features: parameter set does not match the feature extractor");
  }
  FeatureOutput out;
  Tensor h = x;
  for (std::size_t l = 1; l <= arch_.conv_layers(); ++l) {
    h = ops::relu(ops::conv2d(h, params[2 * (l - 1)], params[2 * (l - 1) + 1], 1, 1));
    if (std::find(arch_.tap_layers.begin(), arch_.tap_layers.end(), l) != arch_.tap_layers.end()) {
      out.taps.emplace(l, h);
    }
    const bool stage_end = l % arch_.layers_per_stage == 0;
    if (stage_end && l != arch_.conv_layers()) h = ops::max_pool2d(h, 2, 2);
  }
  out.features = h;
  return out;
}

MetaLearner::MetaLearner(ArchitectureConfig arch) : arch_(std::move(arch)) {}

ParamSet MetaLearner::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed, 0xA));
  const std::size_t in = arch_.feature_channels() * arch_.feature_size() * arch_.feature_size();
  ParamSet ps;
  ps.add("fc1.weight", he_uniform({arch_.head_hidden, in}, in, rng));
  ps.add("fc1.bias", Tensor::zeros({arch_.head_hidden}));
  ps.add("fc2.weight", he_uniform({1, arch_.head_hidden}, arch_.head_hidden, rng));
  ps.add("fc2.bias", Tensor::zeros({1}));
  return ps;
}

Tensor MetaLearner::logits(const Tensor& features, const ParamSet& params) const {
  if (params.size() != 4) throw ShapeError("classify: parameter set does not match the meta learner");
  Tensor flat = ops::flatten(features);
  Tensor hidden = ops::relu(ops::linear(flat, params[0], params[1]));
  Tensor logit = ops::linear(hidden, params[2], params[3]);
  return ops::reshape(logit, {features.dim(0)});
}

Tensor MetaLearner::classify(const Tensor& features, const ParamSet& params) const {
  return ops::sigmoid(logits(features, params));
}

DepthEstimator::DepthEstimator(ArchitectureConfig arch) : arch_(std::move(arch)) {}

ParamSet DepthEstimator::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed, 0xD));
  const std::size_t c = arch_.feature_channels();
  ParamSet ps;
  ps.add("dconv1.weight", he_uniform({arch_.depth_hidden, c, 3, 3}, c * 9, rng));
  ps.add("dconv1.bias", Tensor::zeros({arch_.depth_hidden}));
  ps.add("dconv2.weight", he_uniform({1, arch_.depth_hidden, 3, 3}, arch_.depth_hidden * 9, rng));
  ps.add("dconv2.bias", Tensor::zeros({1}));
  return ps;
}

Tensor DepthEstimator::estimate(const Tensor& features, const ParamSet& params) const {
  if (params.size() != 4) throw ShapeError("estimate_depth: parameter set does not match the depth estimator");
  Tensor h = ops::relu(ops::conv2d(features, params[0], params[1], 1, 1));
  const std::size_t s = features.dim(2);
  const std::size_t d = arch_.depth_size;
  if (d > s) {
    h = ops::upsample_nearest(h, d / s);
  } else if (d < s) {
    h = ops::max_pool2d(h, s / d, s / d);
  }
  return ops::conv2d(h, params[2], params[3], 1, 1);
}

std::uint64_t ModelParams::checksum() const {
  Fnv1a h;
  h.update_pod(feature.checksum());
  h.update_pod(meta.checksum());
  h.update_pod(depth.checksum());
  return h.value();
}

ModelParams Model::init_params(std::uint64_t seed) const {
  return {F.init_params(seed), M.init_params(seed), D.init_params(seed)};
}

}  // namespace pdl
