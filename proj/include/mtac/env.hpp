#pragma once
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mtac {

enum class Family { chain, grid, dense_walk };
enum class Transform { none, clip, oar };
enum class Sparsity { dense, terminal_only };

std::string family_to_string(Family f);
Family family_from_string(const std::string& s);
std::string transform_to_string(Transform t);
Transform transform_from_string(const std::string& s);
std::string sparsity_to_string(Sparsity s);
Sparsity sparsity_from_string(const std::string& s);

// clip: [-1, 1]; oar: -0.3 min(tanh r, 0) + 5 max(tanh r, 0).
double transform_reward(double r, Transform transform);

struct TaskSpec {
  Family family = Family::chain;
  int length = 8;               // chain
  int width = 4, height = 4;    // grid
  double reward_scale = 1.0;
  Sparsity sparsity = Sparsity::terminal_only;
  double gamma = 0.99;
  Transform transform = Transform::none;
  int episode_cap = 50;
  int task_id = 0;

  int state_count() const;  // chain: length; grid: width*height; dense_walk: episode_cap
  int start_state() const { return 0; }
  int goal_state() const;  // -1 for dense_walk (time-capped only)
  void validate() const;
};

// Shared dynamics used by both the live environments and the oracles.
// Actions: chain 0=left 1=right 2,3=no-op; grid 0=left 1=right 2=up 3=down
// (bumping a wall stays put); dense_walk ignores the action.
inline constexpr int kActionCount = 4;
int family_next_state(const TaskSpec& spec, int state, int action);
// Expected transformed reward of the transition state -> next.
double expected_transition_reward(const TaskSpec& spec, int state, int next);

struct Suite {
  std::string name;
  std::vector<TaskSpec> tasks;

  // Padded one-hot width: the largest per-family state count in the suite.
  int obs_dim() const;
  void validate() const;
};

// Built-in suites: "scale6", "clipped6", "pbt2".
Suite builtin_suite(const std::string& name);
bool is_builtin_suite(const std::string& name);
// Resolves a builtin name or loads a key=value suite file.
Suite resolve_suite(const std::string& name_or_path);
Suite load_suite_file(const std::string& path);
void save_suite_file(const Suite& suite, const std::string& path);

// One live episodic environment. Observations are a one-hot of the state
// index padded to the suite-wide width; the task id is never encoded.
class Env {
 public:
  Env(const TaskSpec& spec, int obs_dim, std::uint64_t seed);

  std::span<const double> reset();
  struct StepResult {
    double reward = 0.0;
    bool terminated = false;
  };
  // Throws ValidationError on an out-of-range action or when stepping a
  // terminated episode.
  StepResult step(int action);

  std::span<const double> observation() const { return obs_; }
  const TaskSpec& spec() const { return spec_; }
  int state() const { return state_; }
  int steps_taken() const { return steps_; }
  bool terminated() const { return terminated_; }
  int obs_dim() const { return static_cast<int>(obs_.size()); }

 private:
  void encode_state();

  TaskSpec spec_;
  std::vector<double> obs_;
  std::mt19937_64 rng_;
  int state_ = 0;
  int steps_ = 0;
  bool terminated_ = true;  // must reset() first
};

}  // namespace mtac
