#pragma once
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mtac/env.hpp"

namespace mtac {

// Finite-horizon value iteration over (state, steps-taken). Exact for the
// capped episodic tasks (backward induction leaves zero residual).
struct OracleSolution {
  double optimal_return = 0.0;          // from the start state, step 0
  std::vector<std::vector<int>> greedy;  // [steps_taken][state] -> action
};
OracleSolution solve_optimal(const TaskSpec& spec);
double oracle_optimal_return(const TaskSpec& spec);

// Monte Carlo mean return of the uniform-random policy, with standard error.
struct RandomReturn {
  double mean = 0.0;
  double stderr_mean = 0.0;
};
RandomReturn oracle_random_return(const TaskSpec& spec, int episodes, std::uint64_t seed);

// Fixed seed for reference computation so normalization anchors are stable
// across runs of the same suite.
inline constexpr std::uint64_t kOracleRefSeed = 0x5ca1ab1e5eedULL;

// Per-task references for score normalization, cached as CSV
// (task_id, optimal, random, stderr).
struct OracleRefs {
  std::vector<double> optimal;
  std::vector<double> random;
  std::vector<double> random_stderr;
};
OracleRefs compute_oracle_refs(const Suite& suite, int episodes, std::uint64_t seed);
void write_oracle_cache(const std::filesystem::path& path, const OracleRefs& refs);

}  // namespace mtac
