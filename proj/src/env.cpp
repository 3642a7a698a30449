#include "mtac/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mtac/errors.hpp"
#include "mtac/rng.hpp"

namespace mtac {

std::string family_to_string(Family f) {
  switch (f) {
    case Family::chain: return "chain";
    case Family::grid: return "grid";
    case Family::dense_walk: return "dense_walk";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "chain") return Family::chain;
  if (s == "grid") return Family::grid;
  if (s == "dense_walk") return Family::dense_walk;
  throw ValidationError("unknown family: " + s);
}

std::string transform_to_string(Transform t) {
  switch (t) {
    case Transform::none: return "none";
    case Transform::clip: return "clip";
    case Transform::oar: return "oar";
  }
  return "?";
}

Transform transform_from_string(const std::string& s) {
  if (s == "none") return Transform::none;
  if (s == "clip") return Transform::clip;
  if (s == "oar") return Transform::oar;
  throw ValidationError("unknown transform: " + s);
}

std::string sparsity_to_string(Sparsity s) {
  return s == Sparsity::dense ? "dense" : "terminal_only";
}

Sparsity sparsity_from_string(const std::string& s) {
  if (s == "dense") return Sparsity::dense;
  if (s == "terminal_only") return Sparsity::terminal_only;
  throw ValidationError("unknown sparsity: " + s);
}

double transform_reward(double r, Transform transform) {
  switch (transform) {
    case Transform::none: return r;
    case Transform::clip: return std::min(std::max(r, -1.0), 1.0);
    case Transform::oar: {
      double t = std::tanh(r);
      return -0.3 * std::min(t, 0.0) + 5.0 * std::max(t, 0.0);
    }
  }
  return r;
}

int TaskSpec::state_count() const {
  switch (family) {
    case Family::chain: return length;
    case Family::grid: return width * height;
    case Family::dense_walk: return episode_cap;
  }
  return 0;
}

int TaskSpec::goal_state() const {
  switch (family) {
    case Family::chain: return length - 1;
    case Family::grid: return width * height - 1;  // bottom-right corner
    case Family::dense_walk: return -1;
  }
  return -1;
}

void TaskSpec::validate() const {
  if (episode_cap < 1) throw ValidationError("task: episode_cap must be >= 1");
  if (!std::isfinite(reward_scale) || reward_scale < 0.0) {
    throw ValidationError("task: reward_scale must be finite and non-negative");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("task: gamma must be in [0,1]");
  switch (family) {
    case Family::chain:
      if (length < 2) throw ValidationError("chain: length must be >= 2");
      if (sparsity != Sparsity::terminal_only)
        throw ValidationError("chain rewards are terminal-only");
      break;
    case Family::grid:
      if (width < 2 || height < 2) throw ValidationError("grid: width and height must be >= 2");
      if (sparsity != Sparsity::terminal_only)
        throw ValidationError("grid rewards are terminal-only");
      break;
    case Family::dense_walk:
      if (sparsity != Sparsity::dense) throw ValidationError("dense_walk rewards are dense");
      break;
  }
}

int family_next_state(const TaskSpec& spec, int state, int action) {
  switch (spec.family) {
    case Family::chain: {
      if (action == 1) return std::min(state + 1, spec.length - 1);
      if (action == 0) return std::max(state - 1, 0);
      return state;
    }
    case Family::grid: {
      int x = state % spec.width;
      int y = state / spec.width;
      if (action == 0) x = std::max(x - 1, 0);
      if (action == 1) x = std::min(x + 1, spec.width - 1);
      if (action == 2) y = std::max(y - 1, 0);
      if (action == 3) y = std::min(y + 1, spec.height - 1);
      return y * spec.width + x;
    }
    case Family::dense_walk:
      return state + 1;  // time index; actions have no effect
  }
  return state;
}

double expected_transition_reward(const TaskSpec& spec, int state, int next) {
  switch (spec.family) {
    case Family::chain:
    case Family::grid:
      if (next == spec.goal_state() && state != spec.goal_state()) {
        return transform_reward(spec.reward_scale, spec.transform);
      }
      return 0.0;
    case Family::dense_walk:
      // Bernoulli(0.3) of the scaled reward; transform(0) == 0 for all transforms.
      return 0.3 * transform_reward(spec.reward_scale, spec.transform);
  }
  return 0.0;
}

int Suite::obs_dim() const {
  int dim = 0;
  for (const TaskSpec& t : tasks) dim = std::max(dim, t.state_count());
  return dim;
}

void Suite::validate() const {
  if (tasks.empty()) throw ValidationError("suite has no tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    tasks[i].validate();
    if (tasks[i].task_id != static_cast<int>(i)) {
      throw ValidationError("suite: task ids must be 0..N-1 in order");
    }
  }
}

namespace {

TaskSpec make_chain(int id, double scale, Transform tf) {
  TaskSpec t;
  t.family = Family::chain;
  t.length = 8;
  t.reward_scale = scale;
  t.sparsity = Sparsity::terminal_only;
  t.gamma = 0.99;
  t.transform = tf;
  t.episode_cap = 50;
  t.task_id = id;
  return t;
}

TaskSpec make_grid(int id, double scale, Transform tf) {
  TaskSpec t;
  t.family = Family::grid;
  t.width = 4;
  t.height = 4;
  t.reward_scale = scale;
  t.sparsity = Sparsity::terminal_only;
  t.gamma = 0.99;
  t.transform = tf;
  t.episode_cap = 50;
  t.task_id = id;
  return t;
}

Suite make_scale6(const std::string& name, Transform tf) {
  Suite s;
  s.name = name;
  s.tasks = {make_chain(0, 0.01, tf), make_chain(1, 1.0, tf),  make_chain(2, 100.0, tf),
             make_grid(3, 0.01, tf),  make_grid(4, 1.0, tf),   make_grid(5, 100.0, tf)};
  return s;
}

}  // namespace

bool is_builtin_suite(const std::string& name) {
  return name == "scale6" || name == "clipped6" || name == "pbt2";
}

Suite builtin_suite(const std::string& name) {
  if (name == "scale6") return make_scale6("scale6", Transform::none);
  if (name == "clipped6") return make_scale6("clipped6", Transform::clip);
  if (name == "pbt2") {
    Suite s;
    s.name = "pbt2";
    s.tasks = {make_chain(0, 1.0, Transform::none), make_grid(1, 1.0, Transform::none)};
    return s;
  }
  throw ValidationError("unknown builtin suite: " + name);
}

Suite resolve_suite(const std::string& name_or_path) {
  if (is_builtin_suite(name_or_path)) return builtin_suite(name_or_path);
  return load_suite_file(name_or_path);
}

Suite load_suite_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open suite file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&kv, &path](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("suite file " + path + ": missing key " + key);
    return it->second;
  };
  Suite suite;
  suite.name = kv.count("name") ? kv["name"] : path;
  int n = std::stoi(need("tasks"));
  if (n < 1) throw ValidationError("suite file: tasks must be >= 1");
  for (int i = 0; i < n; ++i) {
    std::string p = "task." + std::to_string(i) + ".";
    TaskSpec t;
    t.task_id = i;
    t.family = family_from_string(need(p + "family"));
    if (t.family == Family::chain) t.length = std::stoi(need(p + "length"));
    if (t.family == Family::grid) {
      t.width = std::stoi(need(p + "width"));
      t.height = std::stoi(need(p + "height"));
    }
    t.sparsity = t.family == Family::dense_walk ? Sparsity::dense : Sparsity::terminal_only;
    if (kv.count(p + "sparsity")) t.sparsity = sparsity_from_string(kv[p + "sparsity"]);
    if (kv.count(p + "reward_scale")) t.reward_scale = std::stod(kv[p + "reward_scale"]);
    if (kv.count(p + "gamma")) t.gamma = std::stod(kv[p + "gamma"]);
    if (kv.count(p + "transform")) t.transform = transform_from_string(kv[p + "transform"]);
    if (kv.count(p + "episode_cap")) t.episode_cap = std::stoi(kv[p + "episode_cap"]);
    suite.tasks.push_back(t);
  }
  suite.validate();
  return suite;
}

void save_suite_file(const Suite& suite, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write suite file: " + path);
  out << "name = " << suite.name << "\n";
  out << "tasks = " << suite.tasks.size() << "\n";
  for (const TaskSpec& t : suite.tasks) {
    std::string p = "task." + std::to_string(t.task_id) + ".";
    out << p << "family = " << family_to_string(t.family) << "\n";
    if (t.family == Family::chain) out << p << "length = " << t.length << "\n";
    if (t.family == Family::grid) {
      out << p << "width = " << t.width << "\n";
      out << p << "height = " << t.height << "\n";
    }
    out << p << "sparsity = " << sparsity_to_string(t.sparsity) << "\n";
    out << p << "reward_scale = " << t.reward_scale << "\n";
    out << p << "gamma = " << t.gamma << "\n";
    out << p << "transform = " << transform_to_string(t.transform) << "\n";
    out << p << "episode_cap = " << t.episode_cap << "\n";
  }
  if (!out) throw IoError("failed writing suite file: " + path);
}

Env::Env(const TaskSpec& spec, int obs_dim, std::uint64_t seed)
    : spec_(spec), obs_(obs_dim, 0.0), rng_(std::mt19937_64(seed)) {
  spec_.validate();
  if (obs_dim < spec_.state_count()) {
    throw ValidationError("Env: observation width smaller than the task's state space");
  }
}

void Env::encode_state() {
  std::fill(obs_.begin(), obs_.end(), 0.0);
  int idx = std::min(state_, spec_.state_count() - 1);
  obs_[static_cast<std::size_t>(idx)] = 1.0;
}

std::span<const double> Env::reset() {
  state_ = spec_.start_state();
  steps_ = 0;
  terminated_ = false;
  encode_state();
  return obs_;
}

Env::StepResult Env::step(int action) {
  if (terminated_) throw ValidationError("Env::step: episode already terminated");
  if (action < 0 || action >= kActionCount) {
    throw ValidationError("Env::step: action out of range");
  }
  int next = family_next_state(spec_, state_, action);
  double reward = 0.0;
  switch (spec_.family) {
    case Family::chain:
    case Family::grid:
      if (next == spec_.goal_state() && state_ != spec_.goal_state()) {
        reward = transform_reward(spec_.reward_scale, spec_.transform);
        terminated_ = true;
      }
      break;
    case Family::dense_walk: {
      double base = uniform01(rng_) < 0.3 ? 1.0 : 0.0;
      reward = transform_reward(spec_.reward_scale * base, spec_.transform);
      break;
    }
  }
  state_ = next;
  ++steps_;
  if (steps_ >= spec_.episode_cap) terminated_ = true;
  encode_state();
  return {reward, terminated_};
}

}  // namespace mtac
