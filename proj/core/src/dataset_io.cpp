#include "pdl/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pdl/error.hpp"
#include "pdl/hash.hpp"

namespace pdl::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "pdl-dataset-v1";

std::uint64_t to_le_bits(double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return bits;
}

double from_le_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

json spec_to_json(const synthetic::DomainSpec& d) {
  return json{{"id", d.id},
              {"color_cast", d.color_cast},
              {"blur_sigma", d.blur_sigma},
              {"noise_sigma", d.noise_sigma},
              {"texture", synthetic::to_string(d.texture)},
              {"texture_period", d.texture_period},
              {"texture_angle", d.texture_angle},
              {"texture_strength", d.texture_strength}};
}

synthetic::DomainSpec spec_from_json(const json& j) {
  synthetic::DomainSpec d;
  d.id = j.at("id").get<int>();
  d.color_cast = j.at("color_cast").get<std::array<double, 9>>();
  d.blur_sigma = j.at("blur_sigma").get<double>();
  d.noise_sigma = j.at("noise_sigma").get<double>();
  d.texture = synthetic::texture_from_string(j.at("texture").get<std::string>());
  d.texture_period = j.at("texture_period").get<double>();
  d.texture_angle = j.at("texture_angle").get<double>();
  d.texture_strength = j.at("texture_strength").get<double>();
  return d;
}

void write_record(std::ostream& os, const synthetic::Sample& s) {
  const double header[3] = {static_cast<double>(s.sample_id), static_cast<double>(static_cast<int>(s.label)),
                            static_cast<double>(s.true_domain)};
  write_f64_le(os, header, 3);
  write_f64_le(os, s.image.data(), s.image.size());
  write_f64_le(os, s.depth.data(), s.depth.size());
}

synthetic::Sample read_record(std::istream& is, std::size_t image_size, std::size_t depth_size) {
  double header[3];
  read_f64_le(is, header, 3);
  synthetic::Sample s;
  s.sample_id = static_cast<std::uint64_t>(header[0]);
  const int label = static_cast<int>(header[1]);
  if (label != 0 && label != 1) throw ValidationError("dataset: record has invalid label");
  s.label = static_cast<synthetic::Label>(label);
  s.true_domain = static_cast<int>(header[2]);
  s.image.resize(6 * image_size * image_size);
  s.depth.resize(depth_size * depth_size);
  read_f64_le(is, s.image.data(), s.image.size());
  read_f64_le(is, s.depth.data(), s.depth.size());
  return s;
}

std::string sample_file_name(std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%08llu.bin", static_cast<unsigned long long>(id));
  return buf;
}

}  // namespace

std::size_t record_doubles(std::size_t image_size, std::size_t depth_size) {
  return 3 + 6 * image_size * image_size + depth_size * depth_size;
}

void write_f64_le(std::ostream& os, const double* values, std::size_t n) {
  std::vector<std::uint64_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = to_le_bits(values[i]);
  os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
}

void read_f64_le(std::istream& is, double* values, std::size_t n) {
  std::vector<std::uint64_t> bits(n);
  is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
  if (!is) throw ValidationError("binary read: unexpected end of data");
  for (std::size_t i = 0; i < n; ++i) values[i] = from_le_bits(bits[i]);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("failed writing " + path.string());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create directory " + dir.string());
}

std::string save_dataset(const synthetic::Dataset& dataset, const fs::path& dir, SampleStorage storage) {
  ensure_directory(dir);
  const auto& opt = dataset.options;
  const std::size_t H = opt.image_size, d = opt.depth_size;

  json domains = json::array();
  json per_domain_counts = json::object();
  for (const auto& spec : dataset.domains) {
    domains.push_back(spec_to_json(spec));
    std::size_t live = 0, total = 0;
    for (const auto& s : dataset.samples) {
      if (s.true_domain != spec.id) continue;
      ++total;
      live += s.label == synthetic::Label::Live ? 1 : 0;
    }
    per_domain_counts[std::to_string(spec.id)] = {{"total", total}, {"live", live}, {"spoof", total - live}};
  }

  json manifest = {
      {"format", kFormat},
      {"seed", opt.seed},
      {"image_size", H},
      {"depth_size", d},
      {"per_domain", opt.per_domain},
      {"live_fraction", opt.live_fraction},
      {"domains", domains},
      {"counts", {{"total", dataset.samples.size()}, {"per_domain", per_domain_counts}}},
      {"storage", storage == SampleStorage::Blob ? "blob" : "per_sample"},
      {"record_layout",
       {{"dtype", "float64"},
        {"byte_order", "little"},
        {"record_doubles", record_doubles(H, d)},
        {"fields",
         json::array({{{"name", "sample_id"}, {"count", 1}},
                      {{"name", "label"}, {"count", 1}, {"encoding", "1 = live, 0 = spoof"}},
                      {{"name", "true_domain"}, {"count", 1}},
                      {{"name", "image"}, {"count", 6 * H * H}, {"shape", {6, H, H}}, {"channels", "R,G,B,H,S,V"}},
                      {{"name", "depth"}, {"count", d * d}, {"shape", {1, d, d}}}})}}},
  };

  if (storage == SampleStorage::Blob) {
    manifest["blob"] = "samples.bin";
    std::ofstream out(dir / "samples.bin", std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + (dir / "samples.bin").string());
    for (const auto& s : dataset.samples) write_record(out, s);
    if (!out) throw ValidationError("failed writing " + (dir / "samples.bin").string());
  } else {
    manifest["sample_dir"] = "samples";
    ensure_directory(dir / "samples");
    json ids = json::array();
    for (const auto& s : dataset.samples) {
      const fs::path p = dir / "samples" / sample_file_name(s.sample_id);
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      if (!out) throw ValidationError("cannot write " + p.string());
      write_record(out, s);
      ids.push_back(s.sample_id);
    }
    manifest["sample_ids"] = ids;
  }

  const std::string text = manifest.dump(2) + "\n";
  write_text_file(dir / "manifest.json", text);
  return hex64(fnv1a(text));
}

synthetic::Dataset load_dataset(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ValidationError("dataset manifest " + (dir / "manifest.json").string() + ": " + e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != kFormat) {
      throw ValidationError("dataset: unsupported format in " + dir.string());
    }
    synthetic::Dataset ds;
    ds.options.seed = manifest.at("seed").get<std::uint64_t>();
    ds.options.image_size = manifest.at("image_size").get<std::size_t>();
    ds.options.depth_size = manifest.at("depth_size").get<std::size_t>();
    ds.options.per_domain = manifest.at("per_domain").get<std::size_t>();
    ds.options.live_fraction = manifest.at("live_fraction").get<double>();
    for (const auto& j : manifest.at("domains")) ds.domains.push_back(spec_from_json(j));
    const std::size_t H = ds.options.image_size, d = ds.options.depth_size;
    if (manifest.at("record_layout").at("record_doubles").get<std::size_t>() != record_doubles(H, d)) {
      throw ValidationError("dataset: record layout does not match image/depth sizes");
    }
    const std::size_t total = manifest.at("counts").at("total").get<std::size_t>();
    const std::string storage = manifest.at("storage").get<std::string>();
    if (storage == "blob") {
      const fs::path blob = dir / manifest.at("blob").get<std::string>();
      std::ifstream in(blob, std::ios::binary);
      if (!in) throw ValidationError("cannot read " + blob.string());
      for (std::size_t i = 0; i < total; ++i) ds.samples.push_back(read_record(in, H, d));
    } else if (storage == "per_sample") {
      const fs::path sample_dir = dir / manifest.at("sample_dir").get<std::string>();
      for (const auto& id : manifest.at("sample_ids")) {
        const fs::path p = sample_dir / sample_file_name(id.get<std::uint64_t>());
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ValidationError("cannot read " + p.string());
        ds.samples.push_back(read_record(in, H, d));
      }
      if (ds.samples.size() != total) throw ValidationError("dataset: sample count does not match manifest");
    } else {
      throw ValidationError("dataset: unknown storage '" + storage + "'");
    }
    return ds;
  } catch (const json::exception& e) {
    throw ValidationError("dataset manifest " + (dir / "manifest.json").string() + ": " + e.what());
  }
}

}  // namespace pdl::io
