#pragma once
#include <cstdint>
#include <span>
#include <vector>

#include "mtac/norm.hpp"

namespace mtac {

struct NetworkConfig {
  int obs_dim = 0;
  int hidden = 64;
  int actions = 4;
  int value_heads = 1;
};

// One hidden tanh layer shared by a policy head and per-task normalized value
// heads. Parameters are plain row-major arrays; instances are treated as
// immutable snapshots once published by the learner.
struct Network {
  NetworkConfig cfg;
  std::vector<double> w1;  // hidden x obs_dim
  std::vector<double> b1;  // hidden
  std::vector<double> wp;  // actions x hidden
  std::vector<double> bp;  // actions
  std::vector<double> wv;  // value_heads x hidden (row i is task i's head)
  std::vector<double> bv;  // value_heads
  std::uint64_t version = 0;

  std::span<double> value_head_row(int head) {
    return {wv.data() + static_cast<std::size_t>(head) * cfg.hidden,
            static_cast<std::size_t>(cfg.hidden)};
  }
  std::span<const double> value_head_row(int head) const {
    return {wv.data() + static_cast<std::size_t>(head) * cfg.hidden,
            static_cast<std::size_t>(cfg.hidden)};
  }
};

// Trunk weights uniform in +-1/sqrt(fan_in); heads zero so the initial policy
// is uniform and initial normalized values are zero.
Network init_network(const NetworkConfig& cfg, std::uint64_t seed);

// Activations for one observation; hidden is kept for backprop.
struct Activation {
  std::vector<double> hidden;             // tanh outputs
  std::vector<double> logits;             // policy head
  std::vector<double> normalized_values;  // one per value head
};

// Deterministic forward pass. The policy path never sees a task id.
// Throws ValidationError on an observation dimension mismatch.
void forward(const Network& net, std::span<const double> obs, Activation& act);
Activation forward(const Network& net, std::span<const double> obs);

// Linear readout of one value head over a feature vector.
double value_head_output(std::span<const double> w_row, double b, std::span<const double> features);

// In-place softmax helpers over raw logits.
void log_softmax(std::span<const double> logits, std::span<double> out);
std::vector<double> softmax(std::span<const double> logits);

// Shannon entropy of softmax(logits), in nats.
double entropy(std::span<const double> logits);

// (G_pi - mu)/sigma - n: the advantage-like weight of the policy loss.
double normalized_coefficient(double g_pi, const NormStats& stats, double n_value);

// Gradients mirror Network's parameter arrays.
struct Gradients {
  std::vector<double> w1, b1, wp, bp, wv, bv;
};

Gradients zero_gradients(const NetworkConfig& cfg);
void add_gradients(Gradients& into, const Gradients& from);
void scale_gradients(Gradients& g, double factor);
double gradient_global_norm(const Gradients& g);
bool gradients_finite(const Gradients& g);

// One sample of the assembled loss:
//   -coefficient * log pi(action|obs)
//   + baseline_cost * 0.5 * (value_target - n_head)^2   (only `task_head`)
//   - entropy_cost * H(pi(obs))
// The coefficient is treated as a constant. Accumulates unscaled gradients
// into `grads` and returns the sample's loss terms.
struct SampleLoss {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};
SampleLoss accumulate_sample_gradients(const Network& net, std::span<const double> obs, int action,
                                       int task_head, double value_target, double coefficient,
                                       double entropy_cost, double baseline_cost, Gradients& grads);
// Fast path reusing an already-computed forward pass for the same observation.
SampleLoss accumulate_sample_gradients(const Network& net, const Activation& act,
                                       std::span<const double> obs, int action, int task_head,
                                       double value_target, double coefficient, double entropy_cost,
                                       double baseline_cost, Gradients& grads);

}  // namespace mtac
