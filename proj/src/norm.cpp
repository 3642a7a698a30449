#include "mtac/norm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtac/errors.hpp"

namespace mtac {

double NormStats::sigma() const {
  // nu - mu^2 can round slightly negative; floor it before the sqrt.
  double var = std::max(nu - mu * mu, 0.0);
  return std::clamp(std::sqrt(var), sigma_lo, sigma_hi);
}

NormStats update_stats(const NormStats& stats, double target) {
  if (!std::isfinite(target)) {
    throw ValidationError("update_stats: non-finite target would poison statistics: " +
                          std::to_string(target));
  }
  NormStats out = stats;
  out.mu = (1.0 - stats.beta) * stats.mu + stats.beta * target;
  out.nu = (1.0 - stats.beta) * stats.nu + stats.beta * target * target;
  return out;
}

NormStats update_stats_from_rollout(const NormStats& stats, std::span<const double> targets) {
  if (targets.empty()) {
    throw ValidationError("update_stats_from_rollout: empty target sequence");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!std::isfinite(targets[i])) {
      throw ValidationError("update_stats_from_rollout: non-finite target at index " +
                            std::to_string(i));
    }
    sum += targets[i];
    sum_sq += targets[i] * targets[i];
  }
  double inv = 1.0 / static_cast<double>(targets.size());
  NormStats out = stats;
  out.mu = (1.0 - stats.beta) * stats.mu + stats.beta * (sum * inv);
  out.nu = (1.0 - stats.beta) * stats.nu + stats.beta * (sum_sq * inv);
  return out;
}

double normalize(double g, const NormStats& stats) { return (g - stats.mu) / stats.sigma(); }

double denormalize(double n, const NormStats& stats) { return stats.sigma() * n + stats.mu; }

void preserve_outputs(std::span<double> w_row, double& b, const NormStats& old_stats,
                      const NormStats& new_stats) {
  double s_old = old_stats.sigma();
  double s_new = new_stats.sigma();
  double ratio = s_old / s_new;
  for (double& w : w_row) w *= ratio;
  b = (s_old * b + old_stats.mu - new_stats.mu) / s_new;
}

}  // namespace mtac
