#include "mtac/kernels.hpp"

#include <omp.h>

#include <string>

#include "mtac/errors.hpp"
#include "mtac/vtrace.hpp"

namespace mtac {

namespace {

int head_for(const Rollout& r, const TaskStatsVector& stats, const BatchConfig& cfg) {
  int head = cfg.single_value_head ? 0 : r.task_id;
  if (head < 0 || head >= static_cast<int>(stats.size())) {
    throw ValidationError("process_batch: no statistics entry for task " +
                          std::to_string(r.task_id));
  }
  return head;
}

// Forward passes, corrected targets and sample gradients for one rollout,
// accumulated into `grads`.
RolloutDerived process_one_rollout(const Network& net, const Rollout& r, const NormStats& stats,
                                   int head, const BatchConfig& cfg, Gradients& grads) {
  int n = r.length;
  std::vector<Activation> acts(n + 1);
  for (int t = 0; t <= n; ++t) forward(net, r.obs_row(t), acts[t]);

  VTraceInputs in;
  in.rewards = r.rewards;
  in.behavior_logp = r.behavior_logp;
  in.discounts = r.discounts;
  in.values.resize(n + 1);
  in.target_logp.resize(n);
  std::vector<double> logp(net.cfg.actions);
  for (int t = 0; t <= n; ++t) {
    in.values[t] = denormalize(acts[t].normalized_values[head], stats);
    if (t < n) {
      log_softmax(acts[t].logits, logp);
      in.target_logp[t] = logp[r.actions[t]];
    }
  }
  VTraceOutputs out = compute_vtrace(in);

  RolloutDerived derived;
  derived.value_targets = out.vtrace_returns;
  for (int t = 0; t < n; ++t) {
    double normalized_target = normalize(out.vtrace_returns[t], stats);
    double coefficient =
        normalized_coefficient(out.policy_targets[t], stats, acts[t].normalized_values[head]);
    SampleLoss loss = accumulate_sample_gradients(net, acts[t], r.obs_row(t), r.actions[t], head,
                                                  normalized_target, coefficient, cfg.entropy_cost,
                                                  cfg.baseline_cost, grads);
    derived.policy_loss_sum += loss.policy;
    derived.value_loss_sum += loss.value;
    derived.entropy_sum += loss.entropy;
  }
  return derived;
}

ProcessedBatch finish(ProcessedBatch batch) {
  double inv = batch.samples > 0 ? 1.0 / static_cast<double>(batch.samples) : 0.0;
  scale_gradients(batch.gradients, inv);
  for (const RolloutDerived& d : batch.per_rollout) {
    batch.policy_loss += d.policy_loss_sum;
    batch.value_loss += d.value_loss_sum;
    batch.entropy += d.entropy_sum;
  }
  batch.policy_loss *= inv;
  batch.value_loss *= inv;
  batch.entropy *= inv;
  return batch;
}

void validate_batch(std::span<const Rollout> batch) {
  if (batch.empty()) throw ValidationError("process_batch: empty batch");
  for (const Rollout& r : batch) {
    if (r.length < 1 || r.actions.size() != static_cast<std::size_t>(r.length) ||
        r.observations.size() != static_cast<std::size_t>(r.length + 1) * r.obs_dim) {
      throw ValidationError("process_batch: malformed rollout");
    }
  }
}

}  // namespace

ProcessedBatch process_batch_serial(const Network& net, std::span<const Rollout> batch,
                                    const TaskStatsVector& stats, const BatchConfig& cfg) {
  validate_batch(batch);
  ProcessedBatch out;
  out.gradients = zero_gradients(net.cfg);
  out.per_rollout.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    int head = head_for(batch[i], stats, cfg);
    out.per_rollout[i] = process_one_rollout(net, batch[i], stats[head], head, cfg, out.gradients);
    out.samples += batch[i].length;
  }
  return finish(std::move(out));
}

ProcessedBatch process_batch_parallel(const Network& net, std::span<const Rollout> batch,
                                      const TaskStatsVector& stats, const BatchConfig& cfg) {
  validate_batch(batch);
  std::size_t count = batch.size();
  std::vector<int> heads(count);
  for (std::size_t i = 0; i < count; ++i) heads[i] = head_for(batch[i], stats, cfg);

  std::vector<Gradients> partial(count);
  std::vector<RolloutDerived> derived(count);
  std::exception_ptr error;
  int team = cfg.num_threads > 0 ? cfg.num_threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      partial[i] = zero_gradients(net.cfg);
      derived[i] =
          process_one_rollout(net, batch[i], stats[heads[i]], heads[i], cfg, partial[i]);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  ProcessedBatch out;
  out.gradients = zero_gradients(net.cfg);
  out.per_rollout = std::move(derived);
  for (std::size_t i = 0; i < count; ++i) {
    add_gradients(out.gradients, partial[i]);
    out.samples += batch[i].length;
  }
  return finish(std::move(out));
}

}  // namespace mtac
