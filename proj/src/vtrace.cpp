#include "mtac/vtrace.hpp"

#include <cmath>
#include <string>

#include "mtac/errors.hpp"

namespace mtac {

std::atomic<std::uint64_t>& ratio_saturation_count() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}

double importance_ratio(double target_logp, double behavior_logp) {
  if (!std::isfinite(target_logp) || !std::isfinite(behavior_logp)) {
    throw ValidationError("importance_ratio: non-finite log-probability");
  }
  double ratio = std::exp(target_logp - behavior_logp);
  if (ratio > kRatioCap) {
    ratio_saturation_count().fetch_add(1, std::memory_order_relaxed);
    return kRatioCap;
  }
  return ratio;
}

double clipped_importance_ratio(double target_logp, double behavior_logp) {
  // min(1, exp(d)) == exp(min(0, d)); stays in log space until the end.
  if (!std::isfinite(target_logp) || !std::isfinite(behavior_logp)) {
    throw ValidationError("clipped_importance_ratio: non-finite log-probability");
  }
  return std::exp(std::min(0.0, target_logp - behavior_logp));
}

static void validate(const VTraceInputs& in) {
  std::size_t n = in.rewards.size();
  if (n == 0) throw ValidationError("compute_vtrace: empty rollout");
  if (in.values.size() != n + 1) {
    throw ValidationError("compute_vtrace: values must have one more entry than rewards (got " +
                          std::to_string(in.values.size()) + " vs " + std::to_string(n) + ")");
  }
  if (in.target_logp.size() != n || in.behavior_logp.size() != n || in.discounts.size() != n) {
    throw ValidationError("compute_vtrace: sequence length mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (in.discounts[k] < 0.0 || in.discounts[k] > 1.0) {
      throw ValidationError("compute_vtrace: discount out of [0,1] at index " + std::to_string(k));
    }
    double d = in.target_logp[k] - in.behavior_logp[k];
    if (!std::isfinite(d)) {
      throw ValidationError("compute_vtrace: non-finite importance ratio at index " +
                            std::to_string(k));
    }
  }
}

VTraceOutputs compute_vtrace(const VTraceInputs& in) {
  validate(in);
  std::size_t n = in.rewards.size();
  VTraceOutputs out;
  out.vtrace_returns.resize(n);
  out.policy_targets.resize(n);

  // Backward recursion on the correction term A_t = G_t - v(S_t):
  //   A_t = c_t (delta_t + gamma_t A_{t+1}),  A_n = 0.
  double acc = 0.0;
  for (std::size_t idx = n; idx-- > 0;) {
    double c = std::exp(std::min(0.0, in.target_logp[idx] - in.behavior_logp[idx]));
    double delta = in.rewards[idx] + in.discounts[idx] * in.values[idx + 1] - in.values[idx];
    acc = c * (delta + in.discounts[idx] * acc);
    out.vtrace_returns[idx] = in.values[idx] + acc;
  }
  for (std::size_t idx = 0; idx < n; ++idx) {
    double next = (idx + 1 < n) ? out.vtrace_returns[idx + 1] : in.values[n];
    out.policy_targets[idx] = in.rewards[idx] + in.discounts[idx] * next;
  }
  return out;
}

}  // namespace mtac
