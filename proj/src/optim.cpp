#include "mtac/optim.hpp"

#include <cmath>

#include "mtac/errors.hpp"

namespace mtac {

double clip_global_norm(Gradients& grads, double max_norm) {
  double norm = gradient_global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    scale_gradients(grads, max_norm / norm);
  }
  return norm;
}

RmsProp::RmsProp(const RmsPropConfig& cfg, const NetworkConfig& net_cfg)
    : cfg_(cfg), accum_(zero_gradients(net_cfg)) {
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("RmsProp: learning_rate must be > 0");
  if (!(cfg.decay >= 0.0 && cfg.decay < 1.0)) throw ValidationError("RmsProp: decay must be in [0,1)");
  if (!(cfg.epsilon > 0.0)) throw ValidationError("RmsProp: epsilon must be > 0");
  if (!(cfg.max_grad_norm > 0.0)) throw ValidationError("RmsProp: max_grad_norm must be > 0");
}

void RmsProp::set_hyperparameters(double learning_rate, double epsilon, double max_grad_norm) {
  if (!(learning_rate > 0.0) || !(epsilon > 0.0) || !(max_grad_norm > 0.0)) {
    throw ValidationError("RmsProp: hyperparameters must be positive");
  }
  cfg_.learning_rate = learning_rate;
  cfg_.epsilon = epsilon;
  cfg_.max_grad_norm = max_grad_norm;
}

void RmsProp::reset_state() {
  auto zero = [](std::vector<double>& a) { std::fill(a.begin(), a.end(), 0.0); };
  zero(accum_.w1);
  zero(accum_.b1);
  zero(accum_.wp);
  zero(accum_.bp);
  zero(accum_.wv);
  zero(accum_.bv);
}

bool RmsProp::step(Network& net, Gradients grads) {
  if (!gradients_finite(grads)) {
    ++reject_count_;
    return false;
  }
  last_grad_norm_ = clip_global_norm(grads, cfg_.max_grad_norm);

  auto apply = [this](std::vector<double>& params, std::vector<double>& m,
                      const std::vector<double>& g) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg_.decay * m[i] + (1.0 - cfg_.decay) * g[i] * g[i];
      params[i] -= cfg_.learning_rate * g[i] / std::sqrt(m[i] + cfg_.epsilon);
    }
  };
  apply(net.w1, accum_.w1, grads.w1);
  apply(net.b1, accum_.b1, grads.b1);
  apply(net.wp, accum_.wp, grads.wp);
  apply(net.bp, accum_.bp, grads.bp);
  apply(net.wv, accum_.wv, grads.wv);
  apply(net.bv, accum_.bv, grads.bv);
  ++net.version;
  return true;
}

}  // namespace mtac
