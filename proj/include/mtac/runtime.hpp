#pragma once
#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>

#include "mtac/config.hpp"
#include "mtac/env.hpp"
#include "mtac/kernels.hpp"
#include "mtac/optim.hpp"
#include "mtac/rollout.hpp"
#include "mtac/scores.hpp"

namespace mtac {

// Seed stream ids; part of the reproducibility contract.
inline constexpr std::uint64_t kActorRngStream = 1000;
inline constexpr std::uint64_t kEnvStream = 2000;
inline constexpr std::uint64_t kEvalStream = 3000;

// Holds the latest published parameter snapshot. Snapshots are immutable
// values; actors only ever see complete networks.
class SnapshotSource {
 public:
  explicit SnapshotSource(std::shared_ptr<const Network> initial) : current_(std::move(initial)) {}
  std::shared_ptr<const Network> latest() const {
    std::lock_guard lock(mu_);
    return current_;
  }
  void publish(std::shared_ptr<const Network> net) {
    std::lock_guard lock(mu_);
    current_ = std::move(net);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const Network> current_;
};

// Mutable acting state; each environment is owned by exactly one actor and
// episodes continue across rollout boundaries.
struct ActorState {
  int actor_id = 0;
  Env env;
  std::mt19937_64 rng;
  std::vector<double> pending_obs;
  double episode_return = 0.0;
  double episode_discount = 1.0;
  bool needs_reset = true;

  ActorState(int id, Env e, std::mt19937_64 r)
      : actor_id(id), env(std::move(e)), rng(r), pending_obs(env.obs_dim(), 0.0) {}
};

// Builds the actor set for a suite: tasks assigned round-robin, one stream of
// randomness per actor.
std::vector<ActorState> make_actors(const Suite& suite, int actor_count, int obs_dim,
                                    std::uint64_t seed);

// Generates exactly `length` transitions by sampling the snapshot's softmax
// policy. Returns nullopt if *stop was raised mid-rollout (partial rollouts
// are discarded, never delivered).
std::optional<Rollout> generate_rollout(ActorState& st, const Network& snapshot, int length,
                                        const std::atomic<bool>* stop = nullptr);

// Free-running producer: fetch the latest snapshot before each rollout,
// generate, enqueue (blocking on a full queue). Exits cleanly when the queue
// closes or stop is raised.
void actor_loop(ActorState& st, SnapshotSource& source, RolloutQueue& queue, int rollout_len,
                const std::atomic<bool>& stop);

struct StepMetrics {
  std::uint64_t step = 0;
  std::uint64_t frames_total = 0;
  double staleness = 0.0;
  std::size_t queue_depth = 0;
  double grad_norm = 0.0;
  double loss_policy = 0.0;
  double loss_value = 0.0;
  double entropy = 0.0;
  bool applied = true;
};

// The single consumer. Per batch: (1) one optimizer update from the assembled
// gradients, (2) one statistics update per rollout, (3) output-preserving
// rescale of every head whose statistics changed.
class Learner {
 public:
  Learner(const RunConfig& cfg, const Suite& suite);

  StepMetrics step(std::span<const Rollout> batch, std::size_t queue_depth);

  std::shared_ptr<const Network> snapshot() const { return std::make_shared<Network>(net_); }
  const Network& network() const { return net_; }
  const TaskStatsVector& stats() const { return stats_; }
  const VariantTraits& traits() const { return traits_; }
  std::uint64_t frames() const { return frames_; }
  std::uint64_t step_count() const { return step_count_; }
  double task_return_mean(int task) const;
  std::uint64_t stats_update_count() const { return stats_updates_; }
  std::uint64_t preserve_call_count() const { return preserve_calls_; }
  std::uint64_t rejected_step_count() const { return opt_.reject_count(); }

  // Population-based training support: replace weights and statistics
  // (optimizer accumulators reset) and retune hyperparameters in place.
  void install(Network net, TaskStatsVector stats);
  void set_hyperparameters(double learning_rate, double entropy_cost, double rmsprop_epsilon,
                           double max_grad_norm);

 private:
  VariantTraits traits_;
  BatchConfig batch_cfg_;
  bool serial_kernel_ = false;
  Network net_;
  TaskStatsVector stats_;
  RmsProp opt_;
  std::uint64_t frames_ = 0;
  std::uint64_t step_count_ = 0;
  std::uint64_t stats_updates_ = 0;
  std::uint64_t preserve_calls_ = 0;
  std::vector<std::deque<double>> returns_window_;
};

// Deterministic synchronous engine: actors take turns producing one rollout
// each; every `batch_size` rollouts the learner consumes them immediately, so
// snapshot staleness is zero.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, const Suite& suite);

  using StepCallback = std::function<void(const StepMetrics&, const Learner&)>;
  void train_until(std::uint64_t target_frames, const StepCallback& callback = {});

  Learner& learner() { return learner_; }
  const Learner& learner() const { return learner_; }
  const Suite& suite() const { return suite_; }

 private:
  RunConfig cfg_;
  Suite suite_;
  Learner learner_;
  std::vector<ActorState> actors_;
  std::vector<Rollout> buffer_;
  std::size_t next_actor_ = 0;
};

struct TrainResult {
  std::uint64_t frames = 0;
  std::uint64_t steps = 0;
  std::filesystem::path out_dir;
  std::filesystem::path metrics_path;
  std::filesystem::path final_checkpoint;
  std::vector<ScoreRecord> final_scores;
  double median_normalized = 0.0;
  double mean_capped = 0.0;
  std::uint64_t rollouts_enqueued = 0;
  std::uint64_t rollouts_consumed = 0;
  std::uint64_t rollouts_discarded = 0;
};

// Full training run per the config: sync or threaded execution, metrics CSV,
// checkpoints, closing evaluation and summary.
TrainResult run_training(const RunConfig& cfg);

}  // namespace mtac
