#include "pdl/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "pdl/dataset_io.hpp"
#include "pdl/error.hpp"
#include "pdl/hash.hpp"

namespace pdl {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'P', 'D', 'L', 'C', 'K', 'P', 'T', '1'};

void write_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

struct Entry {
  const char* set;
  ParamSet ModelParams::*member;
};
constexpr Entry kSets[] = {{"feature", &ModelParams::feature}, {"meta", &ModelParams::meta}, {"depth", &ModelParams::depth}};

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  json header = {
      {"format", "pdl-checkpoint-v1"},
      {"architecture_hash", hex64(ck.architecture_hash)},
      {"config", ck.config_text},
      {"config_hash", ck.config_hash},
      {"seed", ck.seed},
      {"epoch", ck.epoch},
      {"tensors", json::array()},
  };
  std::size_t offset = 0;
  for (const auto& e : kSets) {
    const ParamSet& ps = ck.params.*e.member;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      header["tensors"].push_back({{"set", e.set}, {"name", ps.name(i)}, {"shape", ps[i].shape()}, {"offset", offset}});
      offset += ps[i].numel();
    }
  }
  const std::string text = header.dump();

  if (path.has_parent_path()) io::ensure_directory(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint '" + path.string() + "'");
  out.write(kMagic.data(), kMagic.size());
  write_u64_le(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& e : kSets) {
    const ParamSet& ps = ck.params.*e.member;
    for (std::size_t i = 0; i < ps.size(); ++i) io::write_f64_le(out, ps[i].data().data(), ps[i].numel());
  }
  if (!out) throw ValidationError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_architecture) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint '" + path.string() + "'");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError("'" + path.string() + "' is not a checkpoint (bad magic)");
  const std::uint64_t len = read_u64_le(in);
  if (!in || len > (1ULL << 30)) throw ValidationError("checkpoint '" + path.string() + "': bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ValidationError("checkpoint '" + path.string() + "': truncated header");

  Checkpoint ck;
  try {
    const json h = json::parse(text);
    if (h.at("format").get<std::string>() != "pdl-checkpoint-v1") {
      throw ValidationError("checkpoint '" + path.string() + "': unknown format");
    }
    ck.architecture_hash = std::stoull(h.at("architecture_hash").get<std::string>(), nullptr, 16);
    ck.config_text = h.at("config").get<std::string>();
    ck.config_hash = h.at("config_hash").get<std::string>();
    ck.seed = h.at("seed").get<std::uint64_t>();
    ck.epoch = h.at("epoch").get<std::size_t>();
    if (expected_architecture != 0 && expected_architecture != ck.architecture_hash) {
      throw ValidationError("checkpoint '" + path.string() + "': architecture hash " + hex64(ck.architecture_hash) +
                            " does not match the configured architecture " + hex64(expected_architecture));
    }
    std::size_t expected_offset = 0;
    for (const auto& t : h.at("tensors")) {
      const auto set = t.at("set").get<std::string>();
      const auto shape = t.at("shape").get<Shape>();
      if (t.at("offset").get<std::size_t>() != expected_offset) {
        throw ValidationError("checkpoint '" + path.string() + "': non-contiguous tensor offsets");
      }
      std::vector<double> values(shape_numel(shape));
      io::read_f64_le(in, values.data(), values.size());
      if (!in) throw ValidationError("checkpoint '" + path.string() + "': truncated tensor data");
      expected_offset += values.size();
      ParamSet* target = nullptr;
      for (const auto& e : kSets) {
        if (set == e.set) target = &(ck.params.*e.member);
      }
      if (target == nullptr) throw ValidationError("checkpoint '" + path.string() + "': unknown set '" + set + "'");
      target->add(t.at("name").get<std::string>(), Tensor::from(shape, std::move(values)));
    }
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint '" + path.string() + "': " + e.what());
  }
  return ck;
}

}  // namespace pdl
