#include "pdl/pseudo_domain.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "pdl/error.hpp"
#include "pdl/hash.hpp"

namespace pdl::domains {

using synthetic::Label;
using synthetic::TrainRecord;

PseudoDomainAssignment assignment_from_labels(std::vector<int> labels, std::size_t n_domains, std::size_t epoch,
                                              std::string source) {
  PseudoDomainAssignment a;
  a.epoch = epoch;
  a.n_domains = n_domains;
  a.counts.assign(n_domains, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= n_domains) {
      throw ValidationError("assignment: label " + std::to_string(l) + " outside [0," + std::to_string(n_domains) + ")");
    }
    ++a.counts[static_cast<std::size_t>(l)];
  }
  a.labels = std::move(labels);
  a.degenerate = std::any_of(a.counts.begin(), a.counts.end(), [](std::size_t c) { return c == 0; });
  a.source = std::move(source);
  return a;
}

style::DataMatrix style_vectors(const Model& model, const ModelParams& params, const std::vector<TrainRecord>& records,
                                std::size_t batch_size, std::size_t threads) {
  if (records.empty()) throw ValidationError("relabel_epoch: empty training set");
  batch_size = std::max<std::size_t>(1, batch_size);
  const std::size_t n_batches = (records.size() + batch_size - 1) / batch_size;
  std::vector<style::DataMatrix> parts(n_batches);

  auto run_batch = [&](std::size_t bi) {
    NoGradScope no_grad;
    const std::size_t start = bi * batch_size, end = std::min(records.size(), start + batch_size);
    std::vector<const std::vector<double>*> images;
    for (std::size_t i = start; i < end; ++i) images.push_back(&records[i].image);
    const Tensor x = stack_images(images, model.arch.image_size);
    const FeatureOutput fo = model.F.forward(x, params.feature);
    std::vector<Tensor> stats;
    for (std::size_t tap : model.arch.tap_layers) stats.push_back(style::channel_stats(fo.taps.at(tap)));
    stats.push_back(style::channel_stats(model.D.estimate(fo.features, params.depth)));
    parts[bi] = style::stack_stats(stats);
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n_batches);
  if (workers == 1) {
    for (std::size_t bi = 0; bi < n_batches; ++bi) run_batch(bi);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t bi = t; bi < n_batches; bi += workers) run_batch(bi);
      });
    }
  }

  style::DataMatrix out(records.size(), parts[0].cols);
  std::size_t row = 0;
  for (const auto& p : parts) {
    std::copy(p.values.begin(), p.values.end(), out.values.begin() + static_cast<std::ptrdiff_t>(row * out.cols));
    row += p.rows;
  }
  return out;
}

PseudoDomainAssignment cluster_style_vectors(const style::DataMatrix& raw, const RelabelOptions& options,
                                             std::size_t epoch) {
  if (options.n_domains == 0) throw ValidationError("relabel_epoch: N must be >= 1");
  if (raw.rows < options.n_domains) {
    throw ValidationError("relabel_epoch: " + std::to_string(raw.rows) + " samples cannot form " +
                          std::to_string(options.n_domains) + " pseudo-domains");
  }
  const style::DataMatrix z = style::Standardizer::fit(raw).apply(raw);
  const style::PcaModel pca = style::fit_pca(z, std::max<std::size_t>(1, options.pca_dim));
  const style::DataMatrix reduced = pca.project_all(z);
  const style::ClusterModel clusters =
      style::fit_clusters(reduced, options.n_domains, options.method, options.seed, options.cluster);
  PseudoDomainAssignment a = assignment_from_labels(clusters.train_labels, options.n_domains, epoch, "pseudo");
  a.cluster_seed = options.seed;
  return a;
}

PseudoDomainAssignment relabel_epoch(const Model& model, const ModelParams& params,
                                     const std::vector<TrainRecord>& records, const RelabelOptions& options,
                                     std::size_t epoch) {
  return cluster_style_vectors(style_vectors(model, params, records, options.batch_size, options.threads), options,
                               epoch);
}

std::vector<int> unusable_labels(const PseudoDomainAssignment& assignment, const std::vector<TrainRecord>& records) {
  std::vector<std::size_t> live(assignment.n_domains, 0), spoof(assignment.n_domains, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto l = static_cast<std::size_t>(assignment.labels[i]);
    (records[i].label == Label::Live ? live : spoof)[l] += 1;
  }
  std::vector<int> bad;
  for (std::size_t l = 0; l < assignment.n_domains; ++l) {
    if (live[l] == 0 || spoof[l] == 0) bad.push_back(static_cast<int>(l));
  }
  return bad;
}

PseudoDomainAssignment random_balanced_partition(const std::vector<TrainRecord>& records, std::size_t n_domains,
                                                 std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> live, spoof;
  for (std::size_t i = 0; i < records.size(); ++i) (records[i].label == Label::Live ? live : spoof).push_back(i);
  if (live.size() < n_domains || spoof.size() < n_domains) {
    throw ClassCollapsedError("random partition: too few samples of one class for " + std::to_string(n_domains) +
                              " class-balanced domains");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(live.begin(), live.end(), rng);
  std::shuffle(spoof.begin(), spoof.end(), rng);
  std::vector<int> labels(records.size(), 0);
  for (std::size_t k = 0; k < live.size(); ++k) labels[live[k]] = static_cast<int>(k % n_domains);
  for (std::size_t k = 0; k < spoof.size(); ++k) labels[spoof[k]] = static_cast<int>(k % n_domains);
  return assignment_from_labels(std::move(labels), n_domains, epoch, "random-fallback");
}

PseudoDomainAssignment relabel_with_policy(const Model& model, const ModelParams& params,
                                           const std::vector<TrainRecord>& records, const RelabelOptions& options,
                                           std::size_t epoch, std::size_t max_retries) {
  const style::DataMatrix raw = style_vectors(model, params, records, options.batch_size, options.threads);
  RelabelOptions attempt = options;
  for (std::size_t retry = 0; retry <= max_retries; ++retry) {
    attempt.seed = retry == 0 ? options.seed : mix_seed(options.seed, 0x5EED0000ULL + retry);
    PseudoDomainAssignment a = cluster_style_vectors(raw, attempt, epoch);
    a.retries = retry;
    if (!a.degenerate && unusable_labels(a, records).empty()) return a;
  }
  PseudoDomainAssignment a =
      random_balanced_partition(records, options.n_domains, mix_seed(options.seed, 0xFA11BACCULL + epoch), epoch);
  a.retries = max_retries + 1;
  return a;
}

EpisodeSampler::EpisodeSampler(const PseudoDomainAssignment& assignment, const std::vector<TrainRecord>& records,
                               std::size_t per_domain_batch, std::size_t image_size, std::size_t depth_size,
                               std::uint64_t seed)
    : records_(&records),
      n_domains_(assignment.n_domains),
      per_domain_batch_(per_domain_batch),
      image_size_(image_size),
      depth_size_(depth_size),
      rng_(seed),
      seed_(seed) {
  if (assignment.labels.size() != records.size()) {
    throw ValidationError("sample_episode: assignment does not cover the training records");
  }
  if (per_domain_batch < 2) throw ValidationError("sample_episode: per_domain_batch must be >= 2");
  live_.resize(n_domains_);
  spoof_.resize(n_domains_);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto l = static_cast<std::size_t>(assignment.labels[i]);
    (records[i].label == Label::Live ? live_ : spoof_)[l].indices.push_back(i);
  }
  for (std::size_t l = 0; l < n_domains_; ++l) {
    if (live_[l].indices.empty() || spoof_[l].indices.empty()) {
      throw ClassCollapsedError("class-collapsed pseudo-domain: label " + std::to_string(l) + " has " +
                                std::to_string(live_[l].indices.size()) + " live and " +
                                std::to_string(spoof_[l].indices.size()) + " spoof samples");
    }
  }
}

std::vector<std::size_t> EpisodeSampler::draw(Pool& pool, std::size_t count) {
  std::vector<std::size_t> out;
  if (pool.indices.size() < count) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.indices.size() - 1);
    for (std::size_t k = 0; k < count; ++k) out.push_back(pool.indices[pick(rng_)]);
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) {
    if (pool.cursor >= pool.order.size()) {
      pool.order = pool.indices;
      std::shuffle(pool.order.begin(), pool.order.end(), rng_);
      pool.cursor = 0;
    }
    out.push_back(pool.order[pool.cursor++]);
  }
  return out;
}

Batch EpisodeSampler::sample_domain(int label, std::size_t batch_size) {
  if (label < 0 || static_cast<std::size_t>(label) >= n_domains_) {
    throw ValidationError("sample_episode: label " + std::to_string(label) + " out of range");
  }
  if (batch_size < 2) throw ValidationError("sample_episode: batch must hold both classes");
  Pool& live = live_[static_cast<std::size_t>(label)];
  Pool& spoof = spoof_[static_cast<std::size_t>(label)];
  const double live_fraction =
      static_cast<double>(live.indices.size()) / static_cast<double>(live.indices.size() + spoof.indices.size());
  const auto n_live = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(live_fraction * static_cast<double>(batch_size))), 1, batch_size - 1);
  std::vector<std::size_t> picks = draw(live, n_live);
  const std::vector<std::size_t> spoofs = draw(spoof, batch_size - n_live);
  picks.insert(picks.end(), spoofs.begin(), spoofs.end());
  std::vector<const TrainRecord*> recs;
  for (std::size_t i : picks) recs.push_back(&(*records_)[i]);
  return make_batch(recs, image_size_, depth_size_, label);
}

EpisodeBatch EpisodeSampler::sample() {
  if (n_domains_ < 2) throw ValidationError("sample_episode: need at least 2 pseudo-domains");
  EpisodeBatch ep;
  ep.seed = mix_seed(seed_, episode_counter_++);
  std::uniform_int_distribution<std::size_t> pick(0, n_domains_ - 1);
  const auto test_label = static_cast<int>(pick(rng_));
  for (std::size_t l = 0; l < n_domains_; ++l) {
    if (static_cast<int>(l) == test_label) continue;
    ep.meta_train.push_back(sample_domain(static_cast<int>(l), per_domain_batch_));
  }
  ep.meta_test = sample_domain(test_label, per_domain_batch_);
  return ep;
}

}  // namespace pdl::domains
