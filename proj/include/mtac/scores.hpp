#pragma once
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mtac/env.hpp"
#include "mtac/net.hpp"
#include "mtac/oracle.hpp"

namespace mtac {

struct ScoreRecord {
  int task_id = 0;
  double raw_return = 0.0;
  double random_ref = 0.0;
  double optimal_ref = 0.0;
  double normalized = 0.0;
  double capped = 0.0;
};

// (raw - random) / (optimal - random); throws on equal references.
double normalized_score(double raw, double random_ref, double optimal_ref);
double cap_score(double normalized);  // min(normalized, 1)

struct AggregateScores {
  double median_normalized = 0.0;
  double mean_capped = 0.0;
};
AggregateScores aggregate(std::span<const ScoreRecord> records);
double median(std::vector<double> values);

// Optional policy override for evaluation (the default samples the network's
// softmax). Receives the live environment so oracle policies can read state.
using PolicyFn = std::function<int(const Env& env, std::span<const double> obs,
                                   std::mt19937_64& rng)>;

// Frozen-policy evaluation: no learning, no statistics updates, and the task
// id is never given to the policy. Mean discounted return per task over
// `episodes_per_task` episodes.
std::vector<ScoreRecord> evaluate(const Network& net, const Suite& suite, int episodes_per_task,
                                  std::uint64_t seed, const OracleRefs& refs,
                                  const PolicyFn* policy_override = nullptr);

}  // namespace mtac
