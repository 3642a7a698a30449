#pragma once
#include <cstdint>

#include "mtac/net.hpp"

namespace mtac {

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.99;
  double epsilon = 0.1;       // inside the square root
  double max_grad_norm = 40;  // global clip applied before the accumulator update
  double momentum = 0.0;      // kept at zero
};

// Rescales so the global norm does not exceed max_norm; returns the pre-clip norm.
double clip_global_norm(Gradients& grads, double max_norm);

class RmsProp {
 public:
  RmsProp(const RmsPropConfig& cfg, const NetworkConfig& net_cfg);

  // Clips, updates the accumulators, applies the parameter step and bumps the
  // network version. A non-finite gradient rejects the whole step (parameters
  // and version untouched) and increments reject_count.
  bool step(Network& net, Gradients grads);

  const RmsPropConfig& config() const { return cfg_; }
  void set_hyperparameters(double learning_rate, double epsilon, double max_grad_norm);
  std::uint64_t reject_count() const { return reject_count_; }
  double last_grad_norm() const { return last_grad_norm_; }  // pre-clip
  void reset_state();

 private:
  RmsPropConfig cfg_;
  Gradients accum_;
  std::uint64_t reject_count_ = 0;
  double last_grad_norm_ = 0.0;
};

}  // namespace mtac
