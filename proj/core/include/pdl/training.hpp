#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdl/config.hpp"
#include "pdl/model.hpp"
#include "pdl/pseudo_domain.hpp"
#include "pdl/synthetic.hpp"

namespace pdl::train {

struct TrainData {
  std::vector<synthetic::TrainRecord> records;
  // Generator domains, index-aligned with records. Optional; read only by the
  // generator-truth labeling mode and by the ARI diagnostic in the epoch log.
  std::vector<int> domain_truth;
};

TrainData from_split(const synthetic::DomainSplit& split);

struct TrainOptions {
  std::filesystem::path out_dir;  // empty: keep everything in memory
  std::ostream* progress = nullptr;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> step_totals;
  std::vector<domains::PseudoDomainAssignment> assignments;  // one per epoch
  std::string config_hash;
  std::size_t steps = 0;
};

// Per epoch: domain labels (pseudo, generator-truth or single) then a fixed
// number of meta-steps (or ERM steps in single mode).
//
// Files in out_dir:
//   config.txt                 resolved config
//   train_log.jsonl            run header, then one line per step
//   epochs.jsonl               run header, then one line per epoch
//   checkpoints/epoch_NNNN.ckpt  initial, every checkpoint_every epochs, and the last
//   final.ckpt                 written after the last epoch when epochs > 0
//   nan_dump.json              only when a step produced a non-finite value
//
// Throws NumericalError on non-finite losses or gradients, after writing the dump.
TrainResult run_training(const RunConfig& config, const TrainData& data, const TrainOptions& options = {});

std::size_t steps_per_epoch(const RunConfig& config, std::size_t n_records);

}  // namespace pdl::train
