#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdl/meta.hpp"
#include "pdl/model.hpp"
#include "pdl/optimizer.hpp"
#include "pdl/style.hpp"
#include "pdl/synthetic.hpp"

namespace pdl {

// How training samples are grouped into domains each epoch.
enum class LabelingMode {
  Pseudo,          // cluster feature statistics (the method)
  GeneratorTruth,  // generator domain ids, for comparison runs
  Single,          // everything in one domain; trains the plain ERM baseline
};

std::string to_string(LabelingMode m);
LabelingMode labeling_mode_from_string(const std::string& s);

std::string to_string(meta::GradientOrder o);
meta::GradientOrder gradient_order_from_string(const std::string& s);

struct RunConfig {
  // meta-learning
  double alpha = 0.001;
  double beta = 0.001;
  std::size_t n_domains = 3;
  std::size_t per_domain_batch = 7;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  meta::GradientOrder gradient_order = meta::GradientOrder::First;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  std::size_t steps_per_epoch = 0;  // 0: one pass, ceil(n_train / (N * batch))
  std::size_t checkpoint_every = 5;

  // pseudo-domains
  LabelingMode labeling = LabelingMode::Pseudo;
  style::ClusterMethod cluster_method = style::ClusterMethod::KMeans;
  std::size_t pca_dim = 256;

  // architecture
  std::size_t image_size = 32;
  std::size_t depth_size = 16;
  std::vector<std::size_t> tap_layers = {5, 9};
  std::vector<std::size_t> stage_channels = {16, 32, 64};
  std::size_t layers_per_stage = 3;
  std::size_t head_hidden = 32;
  std::size_t depth_hidden = 16;

  // data
  std::size_t per_domain = 200;
  double live_fraction = 0.5;
  int held_out_domain = 0;

  std::size_t threads = 1;

  ArchitectureConfig architecture() const;
  meta::Hyperparams hyperparams() const;
  synthetic::GenerateOptions generate_options() const;

  // Throws ValidationError naming the offending key.
  void validate() const;

  // Flat "key = value" text, one key per line in a fixed order. Doubles are
  // written with 17 significant digits so parsing restores them exactly.
  std::string to_text() const;
  std::string hash() const;  // hex FNV-1a of to_text()

  // Keys not listed keep their defaults; unknown keys and malformed values throw.
  static RunConfig from_text(const std::string& text);
  // Applies one key/value pair with the same typing rules as from_text.
  void set(const std::string& key, const std::string& value);
  static std::vector<std::string> keys();
};

// Replaces config.seed with $PDL_SEED when it is set. Returns true if applied.
bool apply_seed_env(RunConfig& config);

}  // namespace pdl
