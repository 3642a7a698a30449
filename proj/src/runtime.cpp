#include "mtac/runtime.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <thread>

#include "mtac/checkpoint.hpp"
#include "mtac/csv.hpp"
#include "mtac/errors.hpp"
#include "mtac/rng.hpp"

namespace mtac {

std::vector<ActorState> make_actors(const Suite& suite, int actor_count, int obs_dim,
                                    std::uint64_t seed) {
  std::vector<ActorState> actors;
  actors.reserve(actor_count);
  int tasks = static_cast<int>(suite.tasks.size());
  for (int a = 0; a < actor_count; ++a) {
    const TaskSpec& spec = suite.tasks[a % tasks];
    Env env(spec, obs_dim, splitmix64(seed ^ splitmix64(kEnvStream + a)));
    actors.emplace_back(a, std::move(env), seeded_rng(seed, kActorRngStream + a));
  }
  return actors;
}

std::optional<Rollout> generate_rollout(ActorState& st, const Network& snapshot, int length,
                                        const std::atomic<bool>* stop) {
  int obs_dim = st.env.obs_dim();
  Rollout r;
  r.task_id = st.env.spec().task_id;
  r.actor_id = st.actor_id;
  r.params_version = snapshot.version;
  r.length = length;
  r.obs_dim = obs_dim;
  r.observations.resize(static_cast<std::size_t>(length + 1) * obs_dim);
  r.actions.resize(length);
  r.rewards.resize(length);
  r.behavior_logp.resize(length);
  r.discounts.resize(length);

  if (st.needs_reset) {
    std::span<const double> obs = st.env.reset();
    std::copy(obs.begin(), obs.end(), st.pending_obs.begin());
    st.episode_return = 0.0;
    st.episode_discount = 1.0;
    st.needs_reset = false;
  }

  Activation act;
  std::vector<double> logp(snapshot.cfg.actions);
  double gamma = st.env.spec().gamma;
  for (int t = 0; t < length; ++t) {
    if (stop && stop->load(std::memory_order_relaxed)) return std::nullopt;

    std::copy(st.pending_obs.begin(), st.pending_obs.end(),
              r.observations.begin() + static_cast<std::size_t>(t) * obs_dim);

    forward(snapshot, st.pending_obs, act);
    log_softmax(act.logits, logp);
    double u = uniform01(st.rng);
    int action = snapshot.cfg.actions - 1;
    double cum = 0.0;
    for (int a = 0; a < snapshot.cfg.actions; ++a) {
      cum += std::exp(logp[a]);
      if (u < cum) {
        action = a;
        break;
      }
    }

    Env::StepResult res = st.env.step(action);
    r.actions[t] = action;
    r.rewards[t] = res.reward;
    r.behavior_logp[t] = logp[action];
    r.discounts[t] = res.terminated ? 0.0 : gamma;

    st.episode_return += st.episode_discount * res.reward;
    st.episode_discount *= gamma;

    if (res.terminated) {
      r.episode_returns.push_back(st.episode_return);
      std::span<const double> obs = st.env.reset();
      std::copy(obs.begin(), obs.end(), st.pending_obs.begin());
      st.episode_return = 0.0;
      st.episode_discount = 1.0;
    } else {
      std::span<const double> obs = st.env.observation();
      std::copy(obs.begin(), obs.end(), st.pending_obs.begin());
    }
  }
  std::copy(st.pending_obs.begin(), st.pending_obs.end(),
            r.observations.begin() + static_cast<std::size_t>(length) * obs_dim);
  return r;
}

void actor_loop(ActorState& st, SnapshotSource& source, RolloutQueue& queue, int rollout_len,
                const std::atomic<bool>& stop) {
  while (!stop.load(std::memory_order_relaxed) && !queue.closed()) {
    std::shared_ptr<const Network> snap = source.latest();
    std::optional<Rollout> rollout = generate_rollout(st, *snap, rollout_len, &stop);
    if (!rollout) return;  // stopped mid-rollout; partial data discarded
    if (!queue.push(std::move(*rollout))) return;
  }
}

Learner::Learner(const RunConfig& cfg, const Suite& suite)
    : traits_(make_agent_config(cfg.variant, static_cast<int>(suite.tasks.size()))),
      serial_kernel_(cfg.serial_kernel),
      net_(init_network({suite.obs_dim(), cfg.hidden, kActionCount, traits_.value_heads},
                        cfg.seed)),
      opt_({cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon, cfg.max_grad_norm, 0.0},
           net_.cfg),
      returns_window_(suite.tasks.size()) {
  batch_cfg_.entropy_cost = cfg.entropy_cost;
  batch_cfg_.baseline_cost = cfg.baseline_cost;
  batch_cfg_.single_value_head = traits_.value_heads == 1;
  batch_cfg_.num_threads = cfg.learner_threads;
  NormStats init;
  init.beta = cfg.stats_beta;
  init.sigma_lo = cfg.sigma_lo;
  init.sigma_hi = cfg.sigma_hi;
  stats_.assign(traits_.value_heads, init);
}

double Learner::task_return_mean(int task) const {
  const std::deque<double>& window = returns_window_.at(task);
  if (window.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double r : window) sum += r;
  return sum / static_cast<double>(window.size());
}

void Learner::install(Network net, TaskStatsVector stats) {
  if (net.cfg.obs_dim != net_.cfg.obs_dim || net.cfg.value_heads != net_.cfg.value_heads) {
    throw ValidationError("Learner::install: incompatible network shape");
  }
  if (stats.size() != stats_.size()) {
    throw ValidationError("Learner::install: incompatible statistics vector");
  }
  net_ = std::move(net);
  stats_ = std::move(stats);
  opt_.reset_state();
}

void Learner::set_hyperparameters(double learning_rate, double entropy_cost,
                                  double rmsprop_epsilon, double max_grad_norm) {
  opt_.set_hyperparameters(learning_rate, rmsprop_epsilon, max_grad_norm);
  batch_cfg_.entropy_cost = entropy_cost;
}

StepMetrics Learner::step(std::span<const Rollout> batch, std::size_t queue_depth) {
  if (batch.empty()) throw ValidationError("learner step: empty batch");

  double staleness = 0.0;
  for (const Rollout& r : batch) {
    staleness += static_cast<double>(net_.version - r.params_version);
  }
  staleness /= static_cast<double>(batch.size());

  ProcessedBatch processed = serial_kernel_
                                 ? process_batch_serial(net_, batch, stats_, batch_cfg_)
                                 : process_batch_parallel(net_, batch, stats_, batch_cfg_);

  StepMetrics metrics;
  metrics.queue_depth = queue_depth;
  metrics.staleness = staleness;
  metrics.loss_policy = processed.policy_loss;
  metrics.loss_value = processed.value_loss;
  metrics.entropy = processed.entropy;

  metrics.applied = opt_.step(net_, processed.gradients);
  if (metrics.applied) {
    metrics.grad_norm = opt_.last_grad_norm();
    if (traits_.normalization) {
      for (std::size_t i = 0; i < batch.size(); ++i) {
        int head = batch[i].task_id;
        NormStats old_stats = stats_[head];
        stats_[head] =
            update_stats_from_rollout(stats_[head], processed.per_rollout[i].value_targets);
        ++stats_updates_;
        preserve_outputs(net_.value_head_row(head), net_.bv[head], old_stats, stats_[head]);
        ++preserve_calls_;
      }
    }
  } else {
    metrics.grad_norm = gradient_global_norm(processed.gradients);
    std::cerr << "learner: non-finite gradients at step " << step_count_ << "; update skipped\n";
  }

  for (const Rollout& r : batch) {
    frames_ += static_cast<std::uint64_t>(r.length);
    std::deque<double>& window = returns_window_.at(r.task_id);
    for (double ret : r.episode_returns) {
      window.push_back(ret);
      if (window.size() > 100) window.pop_front();
    }
  }
  ++step_count_;
  metrics.step = step_count_;
  metrics.frames_total = frames_;
  return metrics;
}

Trainer::Trainer(const RunConfig& cfg, const Suite& suite)
    : cfg_(cfg), suite_(suite), learner_(cfg, suite) {
  cfg_.validate();
  suite_.validate();
  int actor_count = cfg_.resolved_actors(static_cast<int>(suite.tasks.size()));
  actors_ = make_actors(suite_, actor_count, suite_.obs_dim(), cfg_.seed);
}

void Trainer::train_until(std::uint64_t target_frames, const StepCallback& callback) {
  while (learner_.frames() < target_frames) {
    ActorState& actor = actors_[next_actor_];
    next_actor_ = (next_actor_ + 1) % actors_.size();
    std::optional<Rollout> rollout = generate_rollout(actor, learner_.network(), cfg_.rollout_len);
    buffer_.push_back(std::move(*rollout));
    if (buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size)) {
      StepMetrics metrics = learner_.step(buffer_, 0);
      buffer_.clear();
      if (callback) callback(metrics, learner_);
    }
  }
}

namespace {

std::vector<std::string> metrics_header(int task_count) {
  std::vector<std::string> header = {"step",        "frames",    "staleness",
                                     "queue_depth", "grad_norm", "loss_policy",
                                     "loss_value",  "entropy"};
  for (int i = 0; i < task_count; ++i) {
    header.push_back("return_mean_" + std::to_string(i));
    header.push_back("mu_" + std::to_string(i));
    header.push_back("sigma_" + std::to_string(i));
  }
  return header;
}

std::vector<std::string> metrics_row(const StepMetrics& m, const Learner& learner,
                                     int task_count) {
  std::vector<std::string> row = {std::to_string(m.step),
                                  std::to_string(m.frames_total),
                                  fmt_g17(m.staleness),
                                  std::to_string(m.queue_depth),
                                  fmt_g17(m.grad_norm),
                                  fmt_g17(m.loss_policy),
                                  fmt_g17(m.loss_value),
                                  fmt_g17(m.entropy)};
  const TaskStatsVector& stats = learner.stats();
  for (int i = 0; i < task_count; ++i) {
    row.push_back(fmt_g17(learner.task_return_mean(i)));
    const NormStats& s = stats.size() == 1 ? stats[0] : stats[i];
    row.push_back(fmt_g17(s.mu));
    row.push_back(fmt_g17(s.sigma()));
  }
  return row;
}

// Final checkpoint, closing evaluation, summary artifacts.
void finalize_run(TrainResult& result, const Learner& learner, const RunConfig& cfg,
                  const Suite& suite, bool artifacts) {
  if (artifacts) {
    result.final_checkpoint = result.out_dir / "final.ckpt";
    save_checkpoint(result.final_checkpoint, {cfg.variant, learner.network(), learner.stats()});
  }
  if (cfg.eval_episodes > 0) {
    OracleRefs refs = compute_oracle_refs(suite, cfg.oracle_episodes, kOracleRefSeed);
    result.final_scores = evaluate(learner.network(), suite, cfg.eval_episodes,
                                   splitmix64(cfg.seed ^ kEvalStream), refs);
    AggregateScores agg = aggregate(result.final_scores);
    result.median_normalized = agg.median_normalized;
    result.mean_capped = agg.mean_capped;
    if (artifacts) {
      write_oracle_cache(result.out_dir / "oracle_cache.csv", refs);
      CsvWriter summary(result.out_dir / "summary.csv",
                        {"variant", "suite", "median_normalized", "mean_capped"});
      summary.row({variant_to_string(cfg.variant), suite.name, fmt_g17(agg.median_normalized),
                   fmt_g17(agg.mean_capped)});
    }
    if (!cfg.quiet) {
      std::cout << "summary variant=" << variant_to_string(cfg.variant) << " suite=" << suite.name
                << " frames=" << result.frames
                << " median_normalized=" << agg.median_normalized
                << " mean_capped=" << agg.mean_capped << "\n";
    }
  }
}

}  // namespace

TrainResult run_training(const RunConfig& cfg) {
  cfg.validate();
  Suite suite = resolve_suite(cfg.suite);
  suite.validate();
  int task_count = static_cast<int>(suite.tasks.size());

  TrainResult result;
  bool artifacts = !cfg.out_dir.empty();
  std::unique_ptr<CsvWriter> metrics_csv;
  if (artifacts) {
    result.out_dir = cfg.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(result.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + result.out_dir.string());
    write_resolved_config(cfg, result.out_dir / "config.resolved");
    result.metrics_path = result.out_dir / "metrics.csv";
    metrics_csv = std::make_unique<CsvWriter>(result.metrics_path, metrics_header(task_count));
  }

  std::uint64_t ckpt_mark = 0;
  auto on_step = [&](const StepMetrics& m, const Learner& learner) {
    if (metrics_csv) metrics_csv->row(metrics_row(m, learner, task_count));
    if (artifacts && cfg.checkpoint_interval > 0) {
      std::uint64_t mark = m.frames_total / cfg.checkpoint_interval;
      if (mark > ckpt_mark) {
        ckpt_mark = mark;
        save_checkpoint(result.out_dir / ("ckpt_" + std::to_string(m.frames_total) + ".ckpt"),
                        {cfg.variant, learner.network(), learner.stats()});
      }
    }
  };

  auto preserve_on_failure = [&](const Learner& learner) {
    if (!artifacts) return;
    try {
      save_checkpoint(result.out_dir / "final.ckpt",
                      {cfg.variant, learner.network(), learner.stats()});
    } catch (...) {
    }
  };

  if (cfg.mode == RunMode::sync) {
    Trainer trainer(cfg, suite);
    try {
      trainer.train_until(cfg.frames, on_step);
    } catch (...) {
      preserve_on_failure(trainer.learner());
      throw;
    }
    result.frames = trainer.learner().frames();
    result.steps = trainer.learner().step_count();
    result.rollouts_enqueued = result.rollouts_consumed =
        result.steps * static_cast<std::uint64_t>(cfg.batch_size);
    finalize_run(result, trainer.learner(), cfg, suite, artifacts);
    return result;
  }

  // Threaded mode: free-running actors, single consumer.
  Learner learner(cfg, suite);
  int actor_count = cfg.resolved_actors(task_count);
  std::vector<ActorState> actors = make_actors(suite, actor_count, suite.obs_dim(), cfg.seed);
  RolloutQueue queue(cfg.resolved_queue_capacity(actor_count));
  SnapshotSource source(learner.snapshot());
  std::atomic<bool> stop{false};

  std::vector<std::thread> threads;
  threads.reserve(actors.size());
  for (ActorState& st : actors) {
    threads.emplace_back([&st, &source, &queue, &cfg, &stop] {
      actor_loop(st, source, queue, cfg.rollout_len, stop);
    });
  }
  auto shutdown = [&] {
    stop.store(true);
    queue.close();
    for (std::thread& t : threads) t.join();
  };

  try {
    std::vector<Rollout> batch;
    while (learner.frames() < cfg.frames) {
      batch.clear();
      while (batch.size() < static_cast<std::size_t>(cfg.batch_size)) {
        std::optional<Rollout> r = queue.pop();
        if (!r) break;
        batch.push_back(std::move(*r));
      }
      if (batch.empty()) break;
      StepMetrics m = learner.step(batch, queue.size());
      source.publish(learner.snapshot());
      on_step(m, learner);
    }
  } catch (...) {
    shutdown();
    preserve_on_failure(learner);
    throw;
  }

  shutdown();
  result.rollouts_discarded = queue.discard_remaining();
  result.rollouts_enqueued = queue.pushed_count();
  result.rollouts_consumed = queue.popped_count();
  result.frames = learner.frames();
  result.steps = learner.step_count();
  finalize_run(result, learner, cfg, suite, artifacts);
  return result;
}

}  // namespace mtac
