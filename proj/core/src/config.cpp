#include "pdl/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "pdl/error.hpp"
#include "pdl/hash.hpp"

namespace pdl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
    throw ValidationError("config: '" + key + "' expects a finite number, got '" + v + "'");
  }
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int<std::size_t>(key, trim(item)));
  if (out.empty()) throw ValidationError("config: '" + key + "' expects a comma-separated list");
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define PDL_SIZE_FIELD(name)                                                 \
  Field {                                                                    \
    #name, [](const RunConfig& c) { return std::to_string(c.name); },        \
        [](RunConfig& c, const std::string& v) { c.name = parse_int<std::size_t>(#name, v); } \
  }
#define PDL_DOUBLE_FIELD(name)                                             \
  Field {                                                                  \
    #name, [](const RunConfig& c) { return fmt_double(c.name); },          \
        [](RunConfig& c, const std::string& v) { c.name = parse_double(#name, v); } \
  }
#define PDL_LIST_FIELD(name)                                          \
  Field {                                                             \
    #name, [](const RunConfig& c) { return fmt_list(c.name); },       \
        [](RunConfig& c, const std::string& v) { c.name = parse_list(#name, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      PDL_DOUBLE_FIELD(alpha),
      PDL_DOUBLE_FIELD(beta),
      PDL_SIZE_FIELD(n_domains),
      PDL_SIZE_FIELD(per_domain_batch),
      PDL_SIZE_FIELD(epochs),
      {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>("seed", v); }},
      {"gradient_order", [](const RunConfig& c) { return to_string(c.gradient_order); },
       [](RunConfig& c, const std::string& v) { c.gradient_order = gradient_order_from_string(v); }},
      {"optimizer", [](const RunConfig& c) { return to_string(c.optimizer); },
       [](RunConfig& c, const std::string& v) { c.optimizer = optimizer_from_string(v); }},
      PDL_SIZE_FIELD(steps_per_epoch),
      PDL_SIZE_FIELD(checkpoint_every),
      {"labeling", [](const RunConfig& c) { return to_string(c.labeling); },
       [](RunConfig& c, const std::string& v) { c.labeling = labeling_mode_from_string(v); }},
      {"cluster_method", [](const RunConfig& c) { return style::to_string(c.cluster_method); },
       [](RunConfig& c, const std::string& v) { c.cluster_method = style::cluster_method_from_string(v); }},
      PDL_SIZE_FIELD(pca_dim),
      PDL_SIZE_FIELD(image_size),
      PDL_SIZE_FIELD(depth_size),
      PDL_LIST_FIELD(tap_layers),
      PDL_LIST_FIELD(stage_channels),
      PDL_SIZE_FIELD(layers_per_stage),
      PDL_SIZE_FIELD(head_hidden),
      PDL_SIZE_FIELD(depth_hidden),
      PDL_SIZE_FIELD(per_domain),
      PDL_DOUBLE_FIELD(live_fraction),
      {"held_out_domain", [](const RunConfig& c) { return std::to_string(c.held_out_domain); },
       [](RunConfig& c, const std::string& v) { c.held_out_domain = parse_int<int>("held_out_domain", v); }},
      PDL_SIZE_FIELD(threads),
  };
  return table;
}

#undef PDL_SIZE_FIELD
#undef PDL_DOUBLE_FIELD
#undef PDL_LIST_FIELD

}  // namespace

std::string to_string(LabelingMode m) {
  switch (m) {
    case LabelingMode::Pseudo: return "pseudo";
    case LabelingMode::GeneratorTruth: return "generator-truth";
    case LabelingMode::Single: return "single";
  }
  return "unknown";
}

LabelingMode labeling_mode_from_string(const std::string& s) {
  if (s == "pseudo") return LabelingMode::Pseudo;
  if (s == "generator-truth") return LabelingMode::GeneratorTruth;
  if (s == "single") return LabelingMode::Single;
  throw ValidationError("unknown labeling mode '" + s + "' (pseudo | generator-truth | single)");
}

std::string to_string(meta::GradientOrder o) { return o == meta::GradientOrder::First ? "first" : "second"; }

meta::GradientOrder gradient_order_from_string(const std::string& s) {
  if (s == "first") return meta::GradientOrder::First;
  if (s == "second") return meta::GradientOrder::Second;
  throw ValidationError("unknown gradient order '" + s + "' (first | second)");
}

ArchitectureConfig RunConfig::architecture() const {
  ArchitectureConfig a;
  a.image_size = image_size;
  a.depth_size = depth_size;
  a.stage_channels = stage_channels;
  a.layers_per_stage = layers_per_stage;
  a.tap_layers = tap_layers;
  a.head_hidden = head_hidden;
  a.depth_hidden = depth_hidden;
  return a;
}

meta::Hyperparams RunConfig::hyperparams() const {
  meta::Hyperparams hp;
  hp.alpha = alpha;
  hp.beta = beta;
  hp.n_domains = n_domains;
  hp.per_domain_batch = per_domain_batch;
  hp.epochs = epochs;
  hp.seed = seed;
  hp.order = gradient_order;
  return hp;
}

synthetic::GenerateOptions RunConfig::generate_options() const {
  synthetic::GenerateOptions g;
  g.per_domain = per_domain;
  g.live_fraction = live_fraction;
  g.image_size = image_size;
  g.depth_size = depth_size;
  g.seed = seed;
  g.threads = threads;
  return g;
}

void RunConfig::validate() const {
  if (!(alpha >= 0.0)) throw ValidationError("config: alpha must be >= 0");
  if (!(beta >= 0.0)) throw ValidationError("config: beta must be >= 0");
  if (labeling != LabelingMode::Single && n_domains < 2) {
    throw ValidationError("config: n_domains must be >= 2 for meta-learning (use labeling = single for ERM)");
  }
  if (per_domain_batch < 2) throw ValidationError("config: per_domain_batch must be >= 2");
  if (per_domain < 2) throw ValidationError("config: per_domain must be >= 2");
  if (!(live_fraction > 0.0 && live_fraction < 1.0)) throw ValidationError("config: live_fraction must lie in (0,1)");
  if (image_size < 8) throw ValidationError("config: image_size must be >= 8");
  if (pca_dim == 0) throw ValidationError("config: pca_dim must be >= 1");
  if (threads == 0) throw ValidationError("config: threads must be >= 1");
  if (checkpoint_every == 0) throw ValidationError("config: checkpoint_every must be >= 1");
  architecture().validate();
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a(to_text())); }

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw ValidationError("config: unknown key '" + key + "'");
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return c;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

bool apply_seed_env(RunConfig& config) {
  const char* env = std::getenv("PDL_SEED");
  if (env == nullptr || *env == '\0') return false;
  config.seed = parse_int<std::uint64_t>("PDL_SEED", env);
  return true;
}

}  // namespace pdl
