#include "mtac/pbt.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <numeric>

#include "mtac/csv.hpp"
#include "mtac/errors.hpp"
#include "mtac/oracle.hpp"
#include "mtac/rng.hpp"
#include "mtac/runtime.hpp"

namespace mtac {

Hyperparameters sample_hyperparameters(std::mt19937_64& rng) {
  Hyperparameters h;
  h.entropy_cost = log_uniform_range(rng, kEntropyCostLo, kEntropyCostHi);
  h.learning_rate = log_uniform_range(rng, kLearningRateLo, kLearningRateHi);
  h.rmsprop_epsilon = kRmsPropEpsilonChoices[uniform_index(rng, 4)];
  h.max_grad_norm = uniform_range(rng, kMaxGradNormLo, kMaxGradNormHi);
  return h;
}

bool hyperparameters_in_support(const Hyperparameters& h) {
  bool eps_ok = false;
  for (double e : kRmsPropEpsilonChoices) eps_ok = eps_ok || h.rmsprop_epsilon == e;
  return h.learning_rate >= kLearningRateLo && h.learning_rate <= kLearningRateHi &&
         h.entropy_cost >= kEntropyCostLo && h.entropy_cost <= kEntropyCostHi &&
         h.max_grad_norm >= kMaxGradNormLo && h.max_grad_norm <= kMaxGradNormHi && eps_ok;
}

void pbt_step(std::vector<PbtMember>& population, double exploit_fraction,
              std::span<const double> perturb_factors, std::mt19937_64& rng) {
  if (population.size() < 2) throw ValidationError("pbt_step: population must have >= 2 members");
  if (perturb_factors.empty()) throw ValidationError("pbt_step: no perturbation factors");
  if (!(exploit_fraction > 0.0 && exploit_fraction < 1.0)) {
    throw ValidationError("pbt_step: exploit_fraction must be in (0,1)");
  }

  std::size_t count = population.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&population](std::size_t a, std::size_t b) {
    return population[a].fitness < population[b].fitness;
  });

  std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(exploit_fraction * count));
  auto pick_factor = [&perturb_factors, &rng] {
    return perturb_factors[uniform_index(rng, perturb_factors.size())];
  };
  for (std::size_t b = 0; b < k; ++b) {
    PbtMember& loser = population[order[b]];
    const PbtMember& source = population[order[count - 1 - uniform_index(rng, k)]];
    loser.net = source.net;
    loser.stats = source.stats;  // coupled to the head weights; always copied together
    loser.hypers = source.hypers;
    loser.fitness = source.fitness;
    loser.fitness_stale = true;

    loser.hypers.learning_rate =
        std::clamp(loser.hypers.learning_rate * pick_factor(), kLearningRateLo, kLearningRateHi);
    loser.hypers.entropy_cost =
        std::clamp(loser.hypers.entropy_cost * pick_factor(), kEntropyCostLo, kEntropyCostHi);
    loser.hypers.max_grad_norm =
        std::clamp(loser.hypers.max_grad_norm * pick_factor(), kMaxGradNormLo, kMaxGradNormHi);
    loser.hypers.rmsprop_epsilon = kRmsPropEpsilonChoices[uniform_index(rng, 4)];
  }
}

PbtResult run_pbt(const RunConfig& base, const PbtConfig& pbt_cfg) {
  if (pbt_cfg.population < 2) throw ValidationError("pbt: population must be >= 2");
  if (pbt_cfg.intervals < 1) throw ValidationError("pbt: intervals must be >= 1");
  base.validate();

  Suite suite = resolve_suite(base.suite);
  suite.validate();
  OracleRefs refs = compute_oracle_refs(suite, base.oracle_episodes, kOracleRefSeed);

  bool artifacts = !base.out_dir.empty();
  PbtResult result;
  std::unique_ptr<CsvWriter> csv;
  if (artifacts) {
    std::filesystem::create_directories(base.out_dir);
    write_resolved_config(base, std::filesystem::path(base.out_dir) / "config.resolved");
    result.fitness_csv = std::filesystem::path(base.out_dir) / "fitness.csv";
    std::vector<std::string> header = {"member",       "interval",        "fitness",
                                       "learning_rate", "entropy_cost",   "rmsprop_epsilon",
                                       "max_grad_norm"};
    csv = std::make_unique<CsvWriter>(result.fitness_csv, header);
  }

  auto hyper_rng = seeded_rng(base.seed, 0x9b7babc0ULL);
  std::vector<PbtMember> members(pbt_cfg.population);
  std::vector<std::unique_ptr<Trainer>> trainers;
  for (int m = 0; m < pbt_cfg.population; ++m) {
    members[m].member_id = m;
    members[m].hypers = sample_hyperparameters(hyper_rng);
    if (!hyperparameters_in_support(members[m].hypers)) {
      throw ValidationError("pbt: sampled hyperparameters left their support");
    }
    RunConfig cfg = base;
    cfg.mode = RunMode::sync;
    cfg.seed = splitmix64(base.seed ^ splitmix64(0xbeb0 + m));
    cfg.learning_rate = members[m].hypers.learning_rate;
    cfg.entropy_cost = members[m].hypers.entropy_cost;
    cfg.rmsprop_epsilon = members[m].hypers.rmsprop_epsilon;
    cfg.max_grad_norm = members[m].hypers.max_grad_norm;
    cfg.out_dir.clear();
    trainers.push_back(std::make_unique<Trainer>(cfg, suite));
    if (!base.quiet) {
      std::cout << "pbt member " << m << ": learning_rate=" << members[m].hypers.learning_rate
                << " entropy_cost=" << members[m].hypers.entropy_cost
                << " rmsprop_epsilon=" << members[m].hypers.rmsprop_epsilon
                << " max_grad_norm=" << members[m].hypers.max_grad_norm
                << " (within sampling supports)\n";
    }
  }

  auto exploit_rng = seeded_rng(base.seed, 0xe991017ULL);
  std::uint64_t trained = 0;
  for (int interval = 0; interval <= pbt_cfg.intervals; ++interval) {
    // Evaluation barrier.
    std::vector<double> row(pbt_cfg.population);
    for (int m = 0; m < pbt_cfg.population; ++m) {
      std::vector<ScoreRecord> records =
          evaluate(trainers[m]->learner().network(), suite, pbt_cfg.eval_episodes,
                   splitmix64(base.seed ^ splitmix64(0xeba1ULL + 97 * interval + m)), refs);
      members[m].fitness = aggregate(records).mean_capped;
      members[m].fitness_stale = false;
      row[m] = members[m].fitness;
      if (csv) {
        csv->row({std::to_string(m), std::to_string(interval), fmt_g17(members[m].fitness),
                  fmt_g17(members[m].hypers.learning_rate),
                  fmt_g17(members[m].hypers.entropy_cost),
                  fmt_g17(members[m].hypers.rmsprop_epsilon),
                  fmt_g17(members[m].hypers.max_grad_norm)});
      }
    }
    result.fitness.push_back(row);
    if (!base.quiet) {
      double best = *std::max_element(row.begin(), row.end());
      std::cout << "pbt interval " << interval << ": max fitness " << best << "\n";
    }
    if (interval == pbt_cfg.intervals) break;

    // Exploit/explore, then sync member state into the trainers.
    for (int m = 0; m < pbt_cfg.population; ++m) {
      members[m].net = trainers[m]->learner().network();
      members[m].stats = trainers[m]->learner().stats();
    }
    pbt_step(members, pbt_cfg.exploit_fraction, pbt_cfg.perturb_factors, exploit_rng);
    for (int m = 0; m < pbt_cfg.population; ++m) {
      if (!hyperparameters_in_support(members[m].hypers)) {
        throw ValidationError("pbt: perturbed hyperparameters left their support");
      }
      trainers[m]->learner().install(members[m].net, members[m].stats);
      trainers[m]->learner().set_hyperparameters(
          members[m].hypers.learning_rate, members[m].hypers.entropy_cost,
          members[m].hypers.rmsprop_epsilon, members[m].hypers.max_grad_norm);
    }

    trained += pbt_cfg.frames_per_interval;
    for (int m = 0; m < pbt_cfg.population; ++m) trainers[m]->train_until(trained);
  }
  return result;
}

}  // namespace mtac
