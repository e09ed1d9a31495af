#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pdl/model.hpp"

namespace pdl {

// Archive layout: the 8-byte magic "PDLCKPT1", a little-endian uint64 header
// length, a JSON header, then every tensor as raw little-endian float64 in
// header order (offsets in the header are counted in doubles).
struct Checkpoint {
  ModelParams params;
  std::uint64_t architecture_hash = 0;
  std::string config_text;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

// Throws ValidationError on a malformed file, or when expected_architecture is
// nonzero and differs from the stored hash.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_architecture = 0);

}  // namespace pdl
