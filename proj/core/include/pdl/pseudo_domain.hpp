#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pdl/episode.hpp"
#include "pdl/model.hpp"
#include "pdl/style.hpp"
#include "pdl/synthetic.hpp"

namespace pdl::domains {

// Epoch-scoped labels, index-aligned with the training records.
struct PseudoDomainAssignment {
  std::size_t epoch = 0;
  std::size_t n_domains = 0;
  std::vector<int> labels;
  std::vector<std::size_t> counts;
  bool degenerate = false;  // some label in {0..N-1} has no sample
  std::size_t retries = 0;
  std::string source = "pseudo";  // pseudo | generator-truth | single | random-fallback
  std::uint64_t cluster_seed = 0;
};

PseudoDomainAssignment assignment_from_labels(std::vector<int> labels, std::size_t n_domains, std::size_t epoch,
                                              std::string source);

struct RelabelOptions {
  std::size_t n_domains = 3;
  style::ClusterMethod method = style::ClusterMethod::KMeans;
  std::size_t pca_dim = 256;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  std::size_t threads = 1;
  style::ClusterOptions cluster;
};

// Raw style vectors of every record, one row each, stacked as
// [F-tap means, F-tap vars] per feature tap (in tap order) then [D-last means, D-last vars].
style::DataMatrix style_vectors(const Model& model, const ModelParams& params,
                                const std::vector<synthetic::TrainRecord>& records, std::size_t batch_size = 32,
                                std::size_t threads = 1);

// Inference pass -> channel stats -> standardize -> PCA -> cluster -> assign.
// Never modifies params.
PseudoDomainAssignment relabel_epoch(const Model& model, const ModelParams& params,
                                     const std::vector<synthetic::TrainRecord>& records, const RelabelOptions& options,
                                     std::size_t epoch);

// Same, but style vectors already computed.
PseudoDomainAssignment cluster_style_vectors(const style::DataMatrix& raw, const RelabelOptions& options,
                                             std::size_t epoch);

// Labels whose records are all live or all spoof, or that are empty.
std::vector<int> unusable_labels(const PseudoDomainAssignment& assignment,
                                 const std::vector<synthetic::TrainRecord>& records);

// relabel_epoch with the class-collapse policy: retry clustering with a fresh
// seed up to max_retries times, then fall back to a random class-balanced partition.
PseudoDomainAssignment relabel_with_policy(const Model& model, const ModelParams& params,
                                           const std::vector<synthetic::TrainRecord>& records,
                                           const RelabelOptions& options, std::size_t epoch,
                                           std::size_t max_retries = 3);

PseudoDomainAssignment random_balanced_partition(const std::vector<synthetic::TrainRecord>& records,
                                                 std::size_t n_domains, std::uint64_t seed, std::size_t epoch);

// Draws meta-train/meta-test episodes for one epoch. Within a (label, class)
// pool records are taken without replacement until the pool is exhausted,
// then the pool is reshuffled; pools smaller than the request are sampled
// with replacement.
class EpisodeSampler {
 public:
  EpisodeSampler(const PseudoDomainAssignment& assignment, const std::vector<synthetic::TrainRecord>& records,
                 std::size_t per_domain_batch, std::size_t image_size, std::size_t depth_size, std::uint64_t seed);

  EpisodeBatch sample();
  // One class-stratified batch drawn from a single label (ERM pools everything under label 0).
  Batch sample_domain(int label, std::size_t batch_size);

  std::size_t n_domains() const { return n_domains_; }

 private:
  struct Pool {
    std::vector<std::size_t> indices;
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
  };
  std::vector<std::size_t> draw(Pool& pool, std::size_t count);

  const std::vector<synthetic::TrainRecord>* records_;
  std::size_t n_domains_;
  std::size_t per_domain_batch_;
  std::size_t image_size_, depth_size_;
  std::mt19937_64 rng_;
  std::uint64_t episode_counter_ = 0;
  std::uint64_t seed_;
  std::vector<Pool> live_, spoof_;
};

}  // namespace pdl::domains
