#include "mtac/config.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "mtac/csv.hpp"
#include "mtac/errors.hpp"

namespace mtac {

std::string mode_to_string(RunMode m) { return m == RunMode::sync ? "sync" : "threaded"; }

RunMode mode_from_string(const std::string& s) {
  if (s == "sync") return RunMode::sync;
  if (s == "threaded") return RunMode::threaded;
  throw ValidationError("unknown mode '" + s + "' (valid: sync, threaded)");
}

void RunConfig::validate() const {
  if (rollout_len < 1) throw ValidationError("config: rollout_len must be >= 1");
  if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
  if (hidden < 1) throw ValidationError("config: hidden must be >= 1");
  if (actors < 0) throw ValidationError("config: actors must be >= 0");
  if (queue_capacity < 0) throw ValidationError("config: queue_capacity must be >= 0");
  if (learner_threads < 0) throw ValidationError("config: learner_threads must be >= 0");
  if (eval_episodes < 0) throw ValidationError("config: eval_episodes must be >= 0");
  if (oracle_episodes < 1) throw ValidationError("config: oracle_episodes must be >= 1");
  if (!(learning_rate >= kLearningRateLo && learning_rate <= kLearningRateHi)) {
    throw ValidationError("config: learning_rate outside [5e-6, 5e-3]");
  }
  if (!(entropy_cost >= kEntropyCostLo && entropy_cost <= kEntropyCostHi)) {
    throw ValidationError("config: entropy_cost outside [5e-5, 1e-2]");
  }
  if (!(max_grad_norm >= kMaxGradNormLo && max_grad_norm <= kMaxGradNormHi)) {
    throw ValidationError("config: max_grad_norm outside [10, 100]");
  }
  if (!(rmsprop_epsilon > 0.0)) throw ValidationError("config: rmsprop_epsilon must be > 0");
  if (!(rmsprop_decay >= 0.0 && rmsprop_decay < 1.0)) {
    throw ValidationError("config: rmsprop_decay must be in [0,1)");
  }
  if (!(baseline_cost >= 0.0)) throw ValidationError("config: baseline_cost must be >= 0");
  if (!(stats_beta > 0.0 && stats_beta < 1.0)) {
    throw ValidationError("config: stats_beta must be in (0,1)");
  }
  if (!(sigma_lo > 0.0 && sigma_hi > sigma_lo)) {
    throw ValidationError("config: need 0 < sigma_lo < sigma_hi");
  }
}

int RunConfig::resolved_actors(int task_count) const {
  return actors > 0 ? actors : 2 * task_count;
}

std::size_t RunConfig::resolved_queue_capacity(int actor_count) const {
  return queue_capacity > 0 ? static_cast<std::size_t>(queue_capacity)
                            : static_cast<std::size_t>(2 * actor_count);
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: expected boolean, got '" + v + "'");
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "suite") cfg.suite = value;
    else if (key == "variant") cfg.variant = variant_from_string(value);
    else if (key == "frames") cfg.frames = std::stoull(value);
    else if (key == "actors") cfg.actors = std::stoi(value);
    else if (key == "rollout_len") cfg.rollout_len = std::stoi(value);
    else if (key == "batch_size") cfg.batch_size = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "hidden") cfg.hidden = std::stoi(value);
    else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
    else if (key == "entropy_cost") cfg.entropy_cost = std::stod(value);
    else if (key == "baseline_cost") cfg.baseline_cost = std::stod(value);
    else if (key == "rmsprop_decay") cfg.rmsprop_decay = std::stod(value);
    else if (key == "rmsprop_epsilon") cfg.rmsprop_epsilon = std::stod(value);
    else if (key == "max_grad_norm") cfg.max_grad_norm = std::stod(value);
    else if (key == "stats_beta") cfg.stats_beta = std::stod(value);
    else if (key == "sigma_lo") cfg.sigma_lo = std::stod(value);
    else if (key == "sigma_hi") cfg.sigma_hi = std::stod(value);
    else if (key == "queue_capacity") cfg.queue_capacity = std::stoi(value);
    else if (key == "mode") cfg.mode = mode_from_string(value);
    else if (key == "learner_threads") cfg.learner_threads = std::stoi(value);
    else if (key == "serial_kernel") cfg.serial_kernel = parse_bool(value);
    else if (key == "checkpoint_interval") cfg.checkpoint_interval = std::stoull(value);
    else if (key == "eval_episodes") cfg.eval_episodes = std::stoi(value);
    else if (key == "oracle_episodes") cfg.oracle_episodes = std::stoi(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "quiet") cfg.quiet = parse_bool(value);
    else throw ValidationError("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ValidationError("config: bad value for key '" + key + "': '" + value + "'");
  } catch (const std::out_of_range&) {
    throw ValidationError("config: value out of range for key '" + key + "'");
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config file " + path + ":" + std::to_string(lineno) +
                            ": expected key=value");
    }
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write resolved config: " + path.string());
  out << "suite = " << cfg.suite << "\n";
  out << "variant = " << variant_to_string(cfg.variant) << "\n";
  out << "frames = " << cfg.frames << "\n";
  out << "actors = " << cfg.actors << "\n";
  out << "rollout_len = " << cfg.rollout_len << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "hidden = " << cfg.hidden << "\n";
  out << "learning_rate = " << fmt_g17(cfg.learning_rate) << "\n";
  out << "entropy_cost = " << fmt_g17(cfg.entropy_cost) << "\n";
  out << "baseline_cost = " << fmt_g17(cfg.baseline_cost) << "\n";
  out << "rmsprop_decay = " << fmt_g17(cfg.rmsprop_decay) << "\n";
  out << "rmsprop_epsilon = " << fmt_g17(cfg.rmsprop_epsilon) << "\n";
  out << "max_grad_norm = " << fmt_g17(cfg.max_grad_norm) << "\n";
  out << "stats_beta = " << fmt_g17(cfg.stats_beta) << "\n";
  out << "sigma_lo = " << fmt_g17(cfg.sigma_lo) << "\n";
  out << "sigma_hi = " << fmt_g17(cfg.sigma_hi) << "\n";
  out << "queue_capacity = " << cfg.queue_capacity << "\n";
  out << "mode = " << mode_to_string(cfg.mode) << "\n";
  out << "learner_threads = " << cfg.learner_threads << "\n";
  out << "serial_kernel = " << (cfg.serial_kernel ? "true" : "false") << "\n";
  out << "checkpoint_interval = " << cfg.checkpoint_interval << "\n";
  out << "eval_episodes = " << cfg.eval_episodes << "\n";
  out << "oracle_episodes = " << cfg.oracle_episodes << "\n";
  out << "out_dir = " << cfg.out_dir << "\n";
  out << "quiet = " << (cfg.quiet ? "true" : "false") << "\n";
  if (!out) throw IoError("failed writing resolved config: " + path.string());
}

}  // namespace mtac
