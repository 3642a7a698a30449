#include "mtac/oracle.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "mtac/csv.hpp"
#include "mtac/errors.hpp"
#include "mtac/rng.hpp"

namespace mtac {

OracleSolution solve_optimal(const TaskSpec& spec) {
  spec.validate();
  int states = spec.state_count();
  int cap = spec.episode_cap;
  int goal = spec.goal_state();

  OracleSolution sol;
  sol.greedy.assign(cap, std::vector<int>(states, 0));

  // value[s] holds V_{t+1}; sweep t backwards from the last step.
  std::vector<double> value(states, 0.0);
  std::vector<double> next_value(states, 0.0);
  for (int t = cap - 1; t >= 0; --t) {
    for (int s = 0; s < states; ++s) {
      if (s == goal) {
        next_value[s] = 0.0;  // absorbing; episode ended on arrival
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      int best_action = 0;
      for (int a = 0; a < kActionCount; ++a) {
        int nxt = family_next_state(spec, s, a);
        double r = expected_transition_reward(spec, s, nxt);
        bool done = (goal >= 0 && nxt == goal) || (t + 1 >= cap);
        double q = r + (done ? 0.0 : spec.gamma * value[std::min(nxt, states - 1)]);
        if (q > best) {
          best = q;
          best_action = a;
        }
      }
      next_value[s] = best;
      sol.greedy[t][s] = best_action;
    }
    std::swap(value, next_value);
  }
  sol.optimal_return = value[spec.start_state()];
  return sol;
}

double oracle_optimal_return(const TaskSpec& spec) { return solve_optimal(spec).optimal_return; }

RandomReturn oracle_random_return(const TaskSpec& spec, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw ValidationError("oracle_random_return: episodes must be >= 1");
  std::vector<double> returns(episodes, 0.0);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < episodes; ++e) {
    Env env(spec, spec.state_count(), splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(e))));
    auto rng = seeded_rng(seed, 0xabcd0000ULL + static_cast<std::uint64_t>(e));
    env.reset();
    double ret = 0.0;
    double disc = 1.0;
    while (!env.terminated()) {
      int action = static_cast<int>(uniform_index(rng, kActionCount));
      auto res = env.step(action);
      ret += disc * res.reward;
      disc *= spec.gamma;
    }
    returns[e] = ret;
  }
  double sum = 0.0;
  for (double r : returns) sum += r;
  double mean = sum / episodes;
  double sq = 0.0;
  for (double r : returns) sq += (r - mean) * (r - mean);
  double variance = episodes > 1 ? sq / (episodes - 1) : 0.0;
  return {mean, std::sqrt(variance / episodes)};
}

OracleRefs compute_oracle_refs(const Suite& suite, int episodes, std::uint64_t seed) {
  OracleRefs refs;
  std::size_t n = suite.tasks.size();
  refs.optimal.resize(n);
  refs.random.resize(n);
  refs.random_stderr.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    refs.optimal[i] = oracle_optimal_return(suite.tasks[i]);
    RandomReturn rr = oracle_random_return(suite.tasks[i], episodes,
                                           splitmix64(seed ^ splitmix64(0x5eedULL + i)));
    refs.random[i] = rr.mean;
    refs.random_stderr[i] = rr.stderr_mean;
  }
  return refs;
}

void write_oracle_cache(const std::filesystem::path& path, const OracleRefs& refs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write oracle cache: " + path.string());
  out << "task_id,optimal,random,stderr\n";
  for (std::size_t i = 0; i < refs.optimal.size(); ++i) {
    out << i << ',' << fmt_g17(refs.optimal[i]) << ',' << fmt_g17(refs.random[i]) << ','
        << fmt_g17(refs.random_stderr[i]) << "\n";
  }
}

}  // namespace mtac
