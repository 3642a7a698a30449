#pragma once
#include <atomic>
#include <cstdint>
#include <vector>

namespace mtac {

// One rollout's worth of inputs for the corrected return computation.
// values has n+1 entries (state values including the bootstrap state);
// the other sequences have n entries. discounts carry the per-step discount,
// zero at episode terminations.
struct VTraceInputs {
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> target_logp;
  std::vector<double> behavior_logp;
  std::vector<double> discounts;
};

struct VTraceOutputs {
  std::vector<double> vtrace_returns;  // value targets G_t
  std::vector<double> policy_targets;  // G_t^pi = R_{t+1} + gamma_t * G_{t+1}
};

// Clipped-ratio multi-step return:
//   delta_k = R_{k+1} + gamma_k v(S_{k+1}) - v(S_k)
//   c_k     = min(1, pi/mu)         (computed in log space)
//   G_t     = v(S_t) + sum_k prod(gamma_{t..k-1}) prod(c_{t..k}) delta_k
// Policy targets bootstrap the final position on v(S_{t+n}).
// Throws ValidationError on structural problems and on non-finite ratios
// (the message names the offending index).
VTraceOutputs compute_vtrace(const VTraceInputs& in);

// pi/mu from log-probabilities. Saturates at kRatioCap with a warning count.
inline constexpr double kRatioCap = 1e6;
double importance_ratio(double target_logp, double behavior_logp);
double clipped_importance_ratio(double target_logp, double behavior_logp);

// Number of ratio evaluations that hit the saturation cap, process-wide.
std::atomic<std::uint64_t>& ratio_saturation_count();

}  // namespace mtac
