#pragma once
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "mtac/config.hpp"
#include "mtac/net.hpp"
#include "mtac/norm.hpp"

namespace mtac {

struct Hyperparameters {
  double learning_rate = 1e-3;
  double entropy_cost = 1e-3;
  double rmsprop_epsilon = 1e-3;
  double max_grad_norm = 40.0;
};

// learning_rate, entropy_cost log-uniform; rmsprop_epsilon categorical;
// max_grad_norm uniform.
Hyperparameters sample_hyperparameters(std::mt19937_64& rng);
bool hyperparameters_in_support(const Hyperparameters& h);

struct PbtMember {
  int member_id = 0;
  Hyperparameters hypers;
  Network net;  // the member's checkpoint
  TaskStatsVector stats;
  double fitness = 0.0;
  bool fitness_stale = true;
};

// Bottom exploit_fraction members (by fitness) copy checkpoint, statistics and
// hyperparameters from a uniformly sampled top-fraction member, then perturb:
// continuous hyperparameters multiply by a factor from perturb_factors
// (clamped to their support), the categorical epsilon resamples.
// Throws ValidationError when the population has fewer than two members.
void pbt_step(std::vector<PbtMember>& population, double exploit_fraction,
              std::span<const double> perturb_factors, std::mt19937_64& rng);

struct PbtConfig {
  int population = 4;
  int intervals = 3;
  std::uint64_t frames_per_interval = 60'000;
  double exploit_fraction = 0.25;
  std::vector<double> perturb_factors = {0.8, 1.25};
  int eval_episodes = 32;
};

struct PbtResult {
  // fitness[e][m]: member m's fitness at evaluation e (intervals+1 evaluations).
  std::vector<std::vector<double>> fitness;
  std::filesystem::path fitness_csv;
};

// Serial orchestrator: members train in deterministic sync mode between
// evaluation barriers; fitness is the mean capped normalized score.
PbtResult run_pbt(const RunConfig& base, const PbtConfig& pbt_cfg);

}  // namespace mtac
