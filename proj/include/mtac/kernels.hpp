#pragma once
#include <span>
#include <vector>

#include "mtac/net.hpp"
#include "mtac/norm.hpp"
#include "mtac/rollout.hpp"

namespace mtac {

struct BatchConfig {
  double entropy_cost = 0.0;
  double baseline_cost = 0.5;
  bool single_value_head = false;  // route every rollout through head 0
  int num_threads = 0;             // parallel kernel team size; 0 => OpenMP default
};

// Per-rollout byproducts of target assembly, needed after the gradient step.
struct RolloutDerived {
  std::vector<double> value_targets;  // corrected returns G_t, unnormalized
  double policy_loss_sum = 0.0;
  double value_loss_sum = 0.0;
  double entropy_sum = 0.0;
};

struct ProcessedBatch {
  Gradients gradients;  // mean over all samples in the batch
  std::vector<RolloutDerived> per_rollout;
  double policy_loss = 0.0;  // means over samples
  double value_loss = 0.0;
  double entropy = 0.0;
  std::size_t samples = 0;
};

// Assembles corrected value/policy targets for each rollout (current-policy
// log-probs against the stored behavior log-probs), normalizes them with the
// task's statistics and accumulates loss gradients.
//
// The serial kernel walks samples one at a time into a single accumulator and
// is the reference the parallel kernel is tested against. The parallel kernel
// computes per-rollout partial gradients under OpenMP and reduces them in
// rollout order, so its result is bitwise reproducible for any thread count.
ProcessedBatch process_batch_serial(const Network& net, std::span<const Rollout> batch,
                                    const TaskStatsVector& stats, const BatchConfig& cfg);
ProcessedBatch process_batch_parallel(const Network& net, std::span<const Rollout> batch,
                                      const TaskStatsVector& stats, const BatchConfig& cfg);

}  // namespace mtac
