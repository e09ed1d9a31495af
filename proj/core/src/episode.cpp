#include "pdl/episode.hpp"

#include <algorithm>

#include "pdl/error.hpp"

namespace pdl {

Batch make_batch(std::span<const synthetic::TrainRecord* const> records, std::size_t image_size,
                 std::size_t depth_size, int domain) {
  if (records.empty()) throw ValidationError("make_batch: empty batch");
  const std::size_t B = records.size();
  const std::size_t img = 6 * image_size * image_size, dep = depth_size * depth_size;
  std::vector<double> images(B * img), labels(B), depth(B * dep);
  Batch batch;
  batch.domain = domain;
  for (std::size_t i = 0; i < B; ++i) {
    const auto& r = *records[i];
    if (r.image.size() != img || r.depth.size() != dep) {
      throw ShapeError("make_batch: record " + std::to_string(r.sample_id) + " does not match image/depth size");
    }
    std::copy(r.image.begin(), r.image.end(), images.begin() + static_cast<std::ptrdiff_t>(i * img));
    std::copy(r.depth.begin(), r.depth.end(), depth.begin() + static_cast<std::ptrdiff_t>(i * dep));
    labels[i] = synthetic::class_target(r.label);
    batch.sample_ids.push_back(r.sample_id);
  }
  batch.images = Tensor::from({B, 6, image_size, image_size}, std::move(images));
  batch.labels = Tensor::from({B}, std::move(labels));
  batch.depth = Tensor::from({B, 1, depth_size, depth_size}, std::move(depth));
  return batch;
}

Tensor stack_images(std::span<const std::vector<double>* const> images, std::size_t image_size) {
  if (images.empty()) throw ValidationError("stack_images: no images");
  const std::size_t img = 6 * image_size * image_size;
  std::vector<double> out(images.size() * img);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i]->size() != img) throw ShapeError("stack_images: image size mismatch");
    std::copy(images[i]->begin(), images[i]->end(), out.begin() + static_cast<std::ptrdiff_t>(i * img));
  }
  return Tensor::from({images.size(), 6, image_size, image_size}, std::move(out));
}

}  // namespace pdl
