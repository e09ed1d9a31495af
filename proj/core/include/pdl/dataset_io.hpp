#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pdl/synthetic.hpp"

namespace pdl::io {

enum class SampleStorage { Blob, PerSampleFiles };

// Writes <dir>/manifest.json plus either <dir>/samples.bin or
// <dir>/samples/<sample_id>.bin. Every record is little-endian float64:
// [sample_id, label, true_domain, image (6*H*W), depth (d*d)].
// Returns the manifest hash (FNV-1a of the manifest text).
std::string save_dataset(const synthetic::Dataset& dataset, const std::filesystem::path& dir,
                         SampleStorage storage = SampleStorage::Blob);

// Accepts either storage layout; the manifest says which.
synthetic::Dataset load_dataset(const std::filesystem::path& dir);

std::size_t record_doubles(std::size_t image_size, std::size_t depth_size);

// Little-endian float64 helpers shared with the checkpoint format.
void write_f64_le(std::ostream& os, const double* values, std::size_t n);
void read_f64_le(std::istream& is, double* values, std::size_t n);

std::string read_text_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: full rewrite, throws with the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
void ensure_directory(const std::filesystem::path& dir);

}  // namespace pdl::io
