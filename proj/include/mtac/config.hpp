#pragma once
#include <cstdint>
#include <filesystem>
#include <string>

#include "mtac/variant.hpp"

namespace mtac {

// sync: actors and learner alternate on one thread, fully reproducible.
// threaded: free-running actors feeding the learner through the queue.
enum class RunMode { sync, threaded };
std::string mode_to_string(RunMode m);
RunMode mode_from_string(const std::string& s);

// Hyperparameter bounds used for config validation and PBT sampling.
inline constexpr double kLearningRateLo = 5e-6, kLearningRateHi = 5e-3;
inline constexpr double kEntropyCostLo = 5e-5, kEntropyCostHi = 1e-2;
inline constexpr double kMaxGradNormLo = 10.0, kMaxGradNormHi = 100.0;
inline constexpr double kRmsPropEpsilonChoices[] = {1e-1, 1e-3, 1e-5, 1e-7};

struct RunConfig {
  std::string suite = "scale6";  // builtin name or suite-file path
  AgentVariant variant = AgentVariant::popart;
  std::uint64_t frames = 2'000'000;
  int actors = 0;  // 0 => 2 per task
  int rollout_len = 20;
  int batch_size = 8;
  std::uint64_t seed = 1;
  int hidden = 64;

  double learning_rate = 2e-3;
  double entropy_cost = 3e-3;
  double baseline_cost = 0.5;
  double rmsprop_decay = 0.99;
  double rmsprop_epsilon = 1e-1;
  double max_grad_norm = 40.0;

  double stats_beta = 3e-4;  // return-statistics EMA decay
  double sigma_lo = 1e-4;
  double sigma_hi = 1e6;

  int queue_capacity = 0;  // 0 => 2 * actors
  RunMode mode = RunMode::threaded;
  int learner_threads = 0;  // 0 => OpenMP default team size
  bool serial_kernel = false;

  std::uint64_t checkpoint_interval = 0;  // frames between checkpoints; 0 => final only
  int eval_episodes = 100;
  int oracle_episodes = 4000;
  std::string out_dir;  // empty => no artifacts written
  bool quiet = false;

  void validate() const;
  int resolved_actors(int task_count) const;
  std::size_t resolved_queue_capacity(int actor_count) const;
};

RunConfig load_config_file(const std::string& path);
// key=value override, same keys as the config file.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace mtac
