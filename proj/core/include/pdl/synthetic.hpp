#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pdl/tensor.hpp"

namespace pdl::synthetic {

enum class Label : int { Spoof = 0, Live = 1 };

enum class TextureFamily { MoireStripes, HalftoneDots, FlatReflectance };

std::string to_string(TextureFamily t);
TextureFamily texture_from_string(const std::string& s);

// Capture conditions of one source: colour cast, optics, sensor noise and the
// attack medium used for its spoofs.
struct DomainSpec {
  int id = 0;
  std::array<double, 9> color_cast{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major 3x3 on RGB
  double blur_sigma = 0.0;
  double noise_sigma = 0.0;
  TextureFamily texture = TextureFamily::MoireStripes;
  double texture_period = 4.0;   // pixels
  double texture_angle = 0.0;    // radians
  double texture_strength = 0.1;
};

std::vector<DomainSpec> default_domains();

struct GenerateOptions {
  std::size_t per_domain = 200;
  double live_fraction = 0.5;
  std::size_t image_size = 32;
  std::size_t depth_size = 16;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// One generated sample; true_domain is generator ground truth and never
// reaches the trainer.
struct Sample {
  std::uint64_t sample_id = 0;
  std::vector<double> image;  // [6,H,W]: RGB in [0,1] then HSV in [0,1]
  std::vector<double> depth;  // [1,d,d]
  Label label = Label::Spoof;
  int true_domain = 0;
};

struct Dataset {
  std::vector<DomainSpec> domains;
  GenerateOptions options;
  std::vector<Sample> samples;

  std::size_t image_size() const { return options.image_size; }
  std::size_t depth_size() const { return options.depth_size; }
};

// What a trainer may see of a sample: no domain identity.
struct TrainRecord {
  std::uint64_t sample_id = 0;
  std::vector<double> image;
  std::vector<double> depth;
  Label label = Label::Spoof;
};

struct DomainSplit {
  std::vector<TrainRecord> train;
  std::vector<Sample> test;
  // Generator domains of the train records, index-aligned. Only diagnostics
  // and the generator-truth labeling mode may read this.
  std::vector<int> train_domain_truth;
};

Dataset generate(const std::vector<DomainSpec>& domains, const GenerateOptions& options);

DomainSplit split_leave_one_domain_out(const Dataset& dataset, int test_domain);

// Hexcone HSV, all channels in [0,1] (hue divided by 360 degrees). Out-of-range
// inputs are clamped and counted in *clamped.
void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);
// [3,H,W] -> [3,H,W]
Tensor rgb_to_hsv(const Tensor& rgb, std::size_t* clamped = nullptr);

// 1.0 for live, 0.0 for spoof: y multiplies log M(F(x)) in the classification loss.
inline double class_target(Label l) { return l == Label::Live ? 1.0 : 0.0; }

}  // namespace pdl::synthetic
