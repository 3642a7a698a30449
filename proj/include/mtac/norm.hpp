#pragma once
#include <span>
#include <vector>

namespace mtac {

// Exponential-moving-average statistics of value targets for one task.
// sigma is always derived from (mu, nu), never stored.
struct NormStats {
  double mu = 0.0;
  double nu = 1.0;  // second moment; 1.0 at init so sigma starts at 1
  double beta = 3e-4;
  double sigma_lo = 1e-4;
  double sigma_hi = 1e6;

  double sigma() const;
};

using TaskStatsVector = std::vector<NormStats>;

// One EMA step: mu <- (1-beta) mu + beta g, nu <- (1-beta) nu + beta g^2.
// Throws ValidationError on a non-finite target.
NormStats update_stats(const NormStats& stats, double target);

// One EMA step driven by a whole rollout: mu uses mean(targets),
// nu uses mean(targets^2). Throws on an empty or non-finite sequence.
NormStats update_stats_from_rollout(const NormStats& stats, std::span<const double> targets);

double normalize(double g, const NormStats& stats);
double denormalize(double n, const NormStats& stats);

// Rescales one value-head row and bias so that
// sigma_new * (w'.f + b') + mu_new == sigma_old * (w.f + b) + mu_old
// for every feature vector f.
void preserve_outputs(std::span<double> w_row, double& b, const NormStats& old_stats,
                      const NormStats& new_stats);

}  // namespace mtac
