#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdl/synthetic.hpp"
#include "pdl/tensor.hpp"

namespace pdl {

// One sampled batch from a single (pseudo-)domain.
struct Batch {
  Tensor images;  // [B,6,H,W]
  Tensor labels;  // [B], 1 = live
  Tensor depth;   // [B,1,d,d]
  int domain = -1;
  std::vector<std::uint64_t> sample_ids;

  std::size_t size() const { return images.defined() ? images.dim(0) : 0; }
};

// N-1 meta-train batches and one meta-test batch drawn from the remaining label.
struct EpisodeBatch {
  std::vector<Batch> meta_train;
  Batch meta_test;
  std::uint64_t seed = 0;
};

Batch make_batch(std::span<const synthetic::TrainRecord* const> records, std::size_t image_size,
                 std::size_t depth_size, int domain = -1);

// Stacks images only, for inference.
Tensor stack_images(std::span<const std::vector<double>* const> images, std::size_t image_size);

}  // namespace pdl
