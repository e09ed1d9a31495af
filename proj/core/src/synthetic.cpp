#include "pdl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "pdl/error.hpp"
#include "pdl/hash.hpp"

namespace pdl::synthetic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Canvas {
  std::size_t size;
  std::vector<double> rgb;  // [3,H,W]

  double& at(std::size_t c, std::size_t y, std::size_t x) { return rgb[(c * size + y) * size + x]; }
};

struct FaceGeometry {
  double cx, cy, radius;
};

double smooth_step(double edge0, double edge1, double x) {
  const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double dome(double r, double radius) { return std::max(0.0, 1.0 - (r / radius) * (r / radius)); }

// Smooth background plus a radial face blob whose shading follows the depth dome.
FaceGeometry render_face(Canvas& canvas, std::mt19937_64& rng) {
  const double H = static_cast<double>(canvas.size);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FaceGeometry g{};
  g.cx = H / 2.0 + (u(rng) - 0.5) * 0.16 * H;
  g.cy = H / 2.0 + (u(rng) - 0.5) * 0.16 * H;
  g.radius = (0.30 + 0.10 * u(rng)) * H;

  std::array<double, 3> bg{}, grad_x{}, grad_y{};
  for (int c = 0; c < 3; ++c) {
    bg[c] = 0.30 + 0.20 * u(rng);
    grad_x[c] = (u(rng) - 0.5) * 0.15;
    grad_y[c] = (u(rng) - 0.5) * 0.15;
  }
  const std::array<double, 3> skin{0.62 + 0.20 * u(rng), 0.45 + 0.15 * u(rng), 0.35 + 0.12 * u(rng)};
  const double light_dx = (u(rng) - 0.5) * 0.4;
  const double light_dy = (u(rng) - 0.5) * 0.4;

  for (std::size_t y = 0; y < canvas.size; ++y) {
    for (std::size_t x = 0; x < canvas.size; ++x) {
      const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
      const double r = std::hypot(px - g.cx, py - g.cy);
      const double alpha = smooth_step(g.radius, g.radius - 1.5, r);
      const double shade = 0.55 + 0.45 * dome(r, g.radius) +
                           light_dx * (px - g.cx) / g.radius + light_dy * (py - g.cy) / g.radius;
      for (std::size_t c = 0; c < 3; ++c) {
        const double back = bg[c] + grad_x[c] * (px / H - 0.5) + grad_y[c] * (py / H - 0.5);
        canvas.at(c, y, x) = alpha * skin[c] * shade + (1.0 - alpha) * back;
      }
    }
  }
  return g;
}

void apply_attack_texture(Canvas& canvas, const DomainSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = canvas.size;
  const double s = spec.texture_strength;
  const double period = spec.texture_period;
  const double phase = kTwoPi * u(rng);
  const double angle = spec.texture_angle + (u(rng) - 0.5) * 0.2;
  switch (spec.texture) {
    case TextureFamily::MoireStripes: {
      // Screen recapture: colour-fringed interference stripes.
      const std::array<double, 3> tint{1.0, 0.7, 1.2};
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
          const double t = std::sin(kTwoPi * (x * std::cos(angle) + y * std::sin(angle)) / period + phase);
          for (std::size_t c = 0; c < 3; ++c) canvas.at(c, y, x) += s * tint[c] * t;
        }
      }
      break;
    }
    case TextureFamily::HalftoneDots: {
      // Print attack: rotated dot screen, zero-mean so it does not darken the print.
      const double ox = u(rng) * period, oy = u(rng) * period;
      const double ca = std::cos(angle), sa = std::sin(angle);
      const double dot_radius = 0.35 * period;
      const double coverage = std::numbers::pi * dot_radius * dot_radius / (period * period);
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
          const double rx = (x + ox) * ca + (y + oy) * sa;
          const double ry = -(x + ox) * sa + (y + oy) * ca;
          const double fx = rx - period * std::round(rx / period);
          const double fy = ry - period * std::round(ry / period);
          const double dot = std::hypot(fx, fy) < dot_radius ? 1.0 : 0.0;
          for (std::size_t c = 0; c < 3; ++c) canvas.at(c, y, x) -= 2.0 * s * (dot - coverage);
        }
      }
      break;
    }
    case TextureFamily::FlatReflectance: {
      // Glossy photo: specular glare patch over a fine paper-grain checker.
      const double gx = (0.2 + 0.6 * u(rng)) * n, gy = (0.2 + 0.6 * u(rng)) * n;
      const double gr = (0.15 + 0.15 * u(rng)) * n;
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
          const double r = std::hypot(x + 0.5 - gx, y + 0.5 - gy);
          const double glare = 1.5 * s * smooth_step(gr, 0.0, r);
          const double grain = ((x + y) % 2 == 0 ? 1.0 : -1.0) * 0.8 * s;
          for (std::size_t c = 0; c < 3; ++c) canvas.at(c, y, x) += glare + grain;
        }
      }
      break;
    }
  }
}

void gaussian_blur(Canvas& canvas, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += kernel[k + radius];
  }
  for (double& k : kernel) k /= total;
  const int n = static_cast<int>(canvas.size);
  std::vector<double> tmp(canvas.rgb.size());
  auto idx = [n](int c, int y, int x) { return (static_cast<std::size_t>(c) * n + y) * n + x; };
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * canvas.rgb[idx(c, y, std::clamp(x + k, 0, n - 1))];
        tmp[idx(c, y, x)] = acc;
      }
    }
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp[idx(c, std::clamp(y + k, 0, n - 1), x)];
        canvas.rgb[idx(c, y, x)] = acc;
      }
    }
  }
}

void apply_domain(Canvas& canvas, const DomainSpec& spec, std::mt19937_64& rng) {
  const std::size_t hw = canvas.size * canvas.size;
  for (std::size_t i = 0; i < hw; ++i) {
    const double r = canvas.rgb[i], g = canvas.rgb[hw + i], b = canvas.rgb[2 * hw + i];
    const auto& m = spec.color_cast;
    canvas.rgb[i] = m[0] * r + m[1] * g + m[2] * b;
    canvas.rgb[hw + i] = m[3] * r + m[4] * g + m[5] * b;
    canvas.rgb[2 * hw + i] = m[6] * r + m[7] * g + m[8] * b;
  }
  gaussian_blur(canvas, spec.blur_sigma);
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (double& v : canvas.rgb) v += noise(rng);
  }
  for (double& v : canvas.rgb) v = std::clamp(v, 0.0, 1.0);
}

Sample make_sample(const DomainSpec& spec, const GenerateOptions& opt, std::uint64_t sample_id, Label label) {
  std::mt19937_64 rng(mix_seed(opt.seed, sample_id));
  Canvas canvas{opt.image_size, std::vector<double>(3 * opt.image_size * opt.image_size)};
  const FaceGeometry face = render_face(canvas, rng);
  if (label == Label::Spoof) apply_attack_texture(canvas, spec, rng);
  apply_domain(canvas, spec, rng);

  Sample s;
  s.sample_id = sample_id;
  s.label = label;
  s.true_domain = spec.id;
  const std::size_t hw = opt.image_size * opt.image_size;
  s.image.resize(6 * hw);
  std::copy(canvas.rgb.begin(), canvas.rgb.end(), s.image.begin());
  for (std::size_t i = 0; i < hw; ++i) {
    rgb_to_hsv(canvas.rgb[i], canvas.rgb[hw + i], canvas.rgb[2 * hw + i], s.image[3 * hw + i], s.image[4 * hw + i],
               s.image[5 * hw + i]);
  }

  const std::size_t d = opt.depth_size;
  s.depth.assign(d * d, 0.0);
  if (label == Label::Live) {
    const double cell = static_cast<double>(opt.image_size) / static_cast<double>(d);
    for (std::size_t y = 0; y < d; ++y) {
      for (std::size_t x = 0; x < d; ++x) {
        const double r = std::hypot((x + 0.5) * cell - face.cx, (y + 0.5) * cell - face.cy);
        s.depth[y * d + x] = dome(r, face.radius);
      }
    }
  }
  return s;
}

}  // namespace

std::string to_string(TextureFamily t) {
  switch (t) {
    case TextureFamily::MoireStripes: return "moire_stripes";
    case TextureFamily::HalftoneDots: return "halftone_dots";
    case TextureFamily::FlatReflectance: return "flat_reflectance";
  }
  return "unknown";
}

TextureFamily texture_from_string(const std::string& s) {
  if (s == "moire_stripes") return TextureFamily::MoireStripes;
  if (s == "halftone_dots") return TextureFamily::HalftoneDots;
  if (s == "flat_reflectance") return TextureFamily::FlatReflectance;
  throw ValidationError("unknown texture family '" + s + "'");
}

std::vector<DomainSpec> default_domains() {
  std::vector<DomainSpec> d(4);
  d[0] = {0, {1.30, 0.05, 0.0, 0.0, 0.90, 0.0, 0.0, 0.0, 0.50}, 0.0, 0.010, TextureFamily::MoireStripes, 3.5, 0.3, 0.10};
  d[1] = {1, {0.55, 0.0, 0.0, 0.0, 0.90, 0.05, 0.05, 0.0, 1.55}, 0.5, 0.005, TextureFamily::HalftoneDots, 4.0, 0.8, 0.12};
  d[2] = {2, {0.95, 0.05, 0.0, 0.10, 1.40, 0.0, 0.0, 0.0, 0.60}, 0.0, 0.040, TextureFamily::FlatReflectance, 2.0, 0.0, 0.10};
  d[3] = {3, {0.45, 0.08, 0.08, 0.0, 0.45, 0.0, 0.08, 0.08, 0.55}, 0.0, 0.025, TextureFamily::MoireStripes, 5.0, 1.2, 0.09};
  return d;
}

Dataset generate(const std::vector<DomainSpec>& domains, const GenerateOptions& options) {
  if (domains.empty()) throw ValidationError("generate: no domains");
  if (options.per_domain < 2) throw ValidationError("generate: per_domain must be >= 2");
  if (!(options.live_fraction > 0.0 && options.live_fraction < 1.0)) {
    throw ValidationError("generate: live_fraction must lie in (0,1)");
  }
  if (options.image_size < 8) throw ValidationError("generate: image size must be >= 8");
  if (options.depth_size == 0) throw ValidationError("generate: depth size must be positive");
  for (std::size_t i = 0; i < domains.size(); ++i) {
    for (std::size_t j = i + 1; j < domains.size(); ++j) {
      if (domains[i].id == domains[j].id) throw ValidationError("generate: duplicate domain id");
    }
  }

  struct Job {
    std::size_t domain_index;
    std::uint64_t sample_id;
    Label label;
  };
  std::vector<Job> jobs;
  const auto n_live = static_cast<std::size_t>(std::llround(options.live_fraction * options.per_domain));
  for (std::size_t di = 0; di < domains.size(); ++di) {
    std::vector<Label> labels(options.per_domain, Label::Spoof);
    std::fill_n(labels.begin(), std::clamp<std::size_t>(n_live, 1, options.per_domain - 1), Label::Live);
    std::mt19937_64 rng(mix_seed(options.seed, 0xD0000000ULL + static_cast<std::uint64_t>(domains[di].id)));
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t k = 0; k < options.per_domain; ++k) {
      jobs.push_back({di, static_cast<std::uint64_t>(di * options.per_domain + k), labels[k]});
    }
  }

  Dataset ds;
  ds.domains = domains;
  ds.options = options;
  ds.samples.resize(jobs.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < jobs.size(); i += stride) {
      ds.samples[i] = make_sample(domains[jobs[i].domain_index], options, jobs[i].sample_id, jobs[i].label);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  return ds;
}

DomainSplit split_leave_one_domain_out(const Dataset& dataset, int test_domain) {
  const bool known = std::any_of(dataset.domains.begin(), dataset.domains.end(),
                                 [&](const DomainSpec& d) { return d.id == test_domain; });
  if (!known) throw ValidationError("split: unknown domain id " + std::to_string(test_domain));
  DomainSplit split;
  for (const Sample& s : dataset.samples) {
    if (s.true_domain == test_domain) {
      split.test.push_back(s);
    } else {
      split.train.push_back({s.sample_id, s.image, s.depth, s.label});
      split.train_domain_truth.push_back(s.true_domain);
    }
  }
  return split;
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  double deg;
  if (mx == r) {
    deg = 60.0 * std::fmod((g - b) / delta, 6.0);
  } else if (mx == g) {
    deg = 60.0 * ((b - r) / delta + 2.0);
  } else {
    deg = 60.0 * ((r - g) / delta + 4.0);
  }
  if (deg < 0.0) deg += 360.0;
  h = deg / 360.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double deg = std::fmod(h * 360.0, 360.0);
  const double c = v * s;
  const double hp = deg / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(hp)) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  const double m = v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

Tensor rgb_to_hsv(const Tensor& rgb, std::size_t* clamped) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) throw ShapeError("rgb_to_hsv: expected [3,H,W], got " + shape_str(rgb.shape()));
  const std::size_t hw = rgb.dim(1) * rgb.dim(2);
  const auto in = rgb.data();
  std::vector<double> out(3 * hw);
  std::size_t count = 0;
  auto clamp01 = [&count](double v) {
    if (v < 0.0 || v > 1.0) {
      ++count;
      return std::clamp(v, 0.0, 1.0);
    }
    return v;
  };
  for (std::size_t i = 0; i < hw; ++i) {
    rgb_to_hsv(clamp01(in[i]), clamp01(in[hw + i]), clamp01(in[2 * hw + i]), out[i], out[hw + i], out[2 * hw + i]);
  }
  if (clamped != nullptr) *clamped += count;
  return Tensor::from(rgb.shape(), std::move(out));
}

}  // namespace pdl::synthetic
