#include "mtac/scores.hpp"

#include <algorithm>
#include <cmath>

#include "mtac/errors.hpp"
#include "mtac/rng.hpp"

namespace mtac {

double normalized_score(double raw, double random_ref, double optimal_ref) {
  if (optimal_ref == random_ref) {
    throw ValidationError("normalized_score: optimal and random references are equal; "
                          "normalization undefined");
  }
  return (raw - random_ref) / (optimal_ref - random_ref);
}

double cap_score(double normalized) { return std::min(normalized, 1.0); }

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median: empty input");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AggregateScores aggregate(std::span<const ScoreRecord> records) {
  if (records.empty()) throw ValidationError("aggregate: no score records");
  std::vector<double> normalized;
  normalized.reserve(records.size());
  double capped_sum = 0.0;
  for (const ScoreRecord& r : records) {
    normalized.push_back(r.normalized);
    capped_sum += r.capped;
  }
  return {median(std::move(normalized)), capped_sum / static_cast<double>(records.size())};
}

std::vector<ScoreRecord> evaluate(const Network& net, const Suite& suite, int episodes_per_task,
                                  std::uint64_t seed, const OracleRefs& refs,
                                  const PolicyFn* policy_override) {
  if (episodes_per_task < 1) throw ValidationError("evaluate: episodes_per_task must be >= 1");
  if (refs.optimal.size() != suite.tasks.size()) {
    throw ValidationError("evaluate: oracle references do not match the suite");
  }
  if (!policy_override && net.cfg.obs_dim != suite.obs_dim()) {
    throw ValidationError("evaluate: checkpoint observation width " +
                          std::to_string(net.cfg.obs_dim) + " does not match suite width " +
                          std::to_string(suite.obs_dim()));
  }

  int task_count = static_cast<int>(suite.tasks.size());
  std::vector<ScoreRecord> records(task_count);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < task_count; ++i) {
    const TaskSpec& spec = suite.tasks[i];
    Env env(spec, suite.obs_dim(), splitmix64(seed ^ splitmix64(0x9000ULL + i)));
    auto rng = seeded_rng(seed, 0x9500ULL + static_cast<std::uint64_t>(i));
    Activation act;
    double total = 0.0;
    for (int e = 0; e < episodes_per_task; ++e) {
      std::span<const double> obs = env.reset();
      double ret = 0.0;
      double disc = 1.0;
      while (!env.terminated()) {
        int action;
        if (policy_override) {
          action = (*policy_override)(env, obs, rng);
        } else {
          forward(net, obs, act);
          std::vector<double> p = softmax(act.logits);
          double u = uniform01(rng);
          action = 0;
          double cum = 0.0;
          for (int a = 0; a < net.cfg.actions; ++a) {
            cum += p[a];
            if (u < cum) {
              action = a;
              break;
            }
            action = a;
          }
        }
        Env::StepResult res = env.step(action);
        ret += disc * res.reward;
        disc *= spec.gamma;
        obs = env.observation();
      }
      total += ret;
    }
    ScoreRecord rec;
    rec.task_id = i;
    rec.raw_return = total / episodes_per_task;
    rec.random_ref = refs.random[i];
    rec.optimal_ref = refs.optimal[i];
    rec.normalized = normalized_score(rec.raw_return, rec.random_ref, rec.optimal_ref);
    rec.capped = cap_score(rec.normalized);
    records[i] = rec;
  }
  return records;
}

}  // namespace mtac
