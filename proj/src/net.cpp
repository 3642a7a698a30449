#include "mtac/net.hpp"

#include <cmath>
#include <string>

#include "mtac/errors.hpp"
#include "mtac/rng.hpp"

namespace mtac {

Network init_network(const NetworkConfig& cfg, std::uint64_t seed) {
  if (cfg.obs_dim < 1 || cfg.hidden < 1 || cfg.actions < 2 || cfg.value_heads < 1) {
    throw ValidationError("init_network: invalid network configuration");
  }
  Network net;
  net.cfg = cfg;
  net.w1.resize(static_cast<std::size_t>(cfg.hidden) * cfg.obs_dim);
  net.b1.assign(cfg.hidden, 0.0);
  net.wp.assign(static_cast<std::size_t>(cfg.actions) * cfg.hidden, 0.0);
  net.bp.assign(cfg.actions, 0.0);
  net.wv.assign(static_cast<std::size_t>(cfg.value_heads) * cfg.hidden, 0.0);
  net.bv.assign(cfg.value_heads, 0.0);

  auto rng = seeded_rng(seed, 0x6e65742d696e6974ULL);
  double bound = 1.0 / std::sqrt(static_cast<double>(cfg.obs_dim));
  for (double& w : net.w1) w = uniform_range(rng, -bound, bound);
  return net;
}

void forward(const Network& net, std::span<const double> obs, Activation& act) {
  const NetworkConfig& cfg = net.cfg;
  if (static_cast<int>(obs.size()) != cfg.obs_dim) {
    throw ValidationError("forward: observation dimension " + std::to_string(obs.size()) +
                          " does not match network input " + std::to_string(cfg.obs_dim));
  }
  act.hidden.resize(cfg.hidden);
  act.logits.resize(cfg.actions);
  act.normalized_values.resize(cfg.value_heads);

  for (int h = 0; h < cfg.hidden; ++h) {
    const double* row = net.w1.data() + static_cast<std::size_t>(h) * cfg.obs_dim;
    double a = net.b1[h];
    for (int d = 0; d < cfg.obs_dim; ++d) a += row[d] * obs[d];
    act.hidden[h] = std::tanh(a);
  }
  for (int a = 0; a < cfg.actions; ++a) {
    const double* row = net.wp.data() + static_cast<std::size_t>(a) * cfg.hidden;
    double z = net.bp[a];
    for (int h = 0; h < cfg.hidden; ++h) z += row[h] * act.hidden[h];
    act.logits[a] = z;
  }
  for (int i = 0; i < cfg.value_heads; ++i) {
    act.normalized_values[i] =
        value_head_output(net.value_head_row(i), net.bv[i], act.hidden);
  }
}

Activation forward(const Network& net, std::span<const double> obs) {
  Activation act;
  forward(net, obs, act);
  return act;
}

double value_head_output(std::span<const double> w_row, double b,
                         std::span<const double> features) {
  double n = b;
  for (std::size_t h = 0; h < w_row.size(); ++h) n += w_row[h] * features[h];
  return n;
}

void log_softmax(std::span<const double> logits, std::span<double> out) {
  double max_logit = logits[0];
  for (double z : logits) max_logit = std::max(max_logit, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - max_logit);
  double lse = max_logit + std::log(sum);
  for (std::size_t a = 0; a < logits.size(); ++a) out[a] = logits[a] - lse;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  log_softmax(logits, p);
  for (double& v : p) v = std::exp(v);
  return p;
}

double entropy(std::span<const double> logits) {
  std::vector<double> logp(logits.size());
  log_softmax(logits, logp);
  double h = 0.0;
  for (double lp : logp) h -= std::exp(lp) * lp;
  return h;
}

double normalized_coefficient(double g_pi, const NormStats& stats, double n_value) {
  return (g_pi - stats.mu) / stats.sigma() - n_value;
}

Gradients zero_gradients(const NetworkConfig& cfg) {
  Gradients g;
  g.w1.assign(static_cast<std::size_t>(cfg.hidden) * cfg.obs_dim, 0.0);
  g.b1.assign(cfg.hidden, 0.0);
  g.wp.assign(static_cast<std::size_t>(cfg.actions) * cfg.hidden, 0.0);
  g.bp.assign(cfg.actions, 0.0);
  g.wv.assign(static_cast<std::size_t>(cfg.value_heads) * cfg.hidden, 0.0);
  g.bv.assign(cfg.value_heads, 0.0);
  return g;
}

template <typename Fn>
static void for_each_array(Gradients& g, Fn fn) {
  fn(g.w1);
  fn(g.b1);
  fn(g.wp);
  fn(g.bp);
  fn(g.wv);
  fn(g.bv);
}

void add_gradients(Gradients& into, const Gradients& from) {
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  add(into.w1, from.w1);
  add(into.b1, from.b1);
  add(into.wp, from.wp);
  add(into.bp, from.bp);
  add(into.wv, from.wv);
  add(into.bv, from.bv);
}

void scale_gradients(Gradients& g, double factor) {
  for_each_array(g, [factor](std::vector<double>& a) {
    for (double& v : a) v *= factor;
  });
}

double gradient_global_norm(const Gradients& g) {
  double sq = 0.0;
  auto acc = [&sq](const std::vector<double>& a) {
    for (double v : a) sq += v * v;
  };
  acc(g.w1);
  acc(g.b1);
  acc(g.wp);
  acc(g.bp);
  acc(g.wv);
  acc(g.bv);
  return std::sqrt(sq);
}

bool gradients_finite(const Gradients& g) {
  auto ok = [](const std::vector<double>& a) {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  };
  return ok(g.w1) && ok(g.b1) && ok(g.wp) && ok(g.bp) && ok(g.wv) && ok(g.bv);
}

SampleLoss accumulate_sample_gradients(const Network& net, std::span<const double> obs, int action,
                                       int task_head, double value_target, double coefficient,
                                       double entropy_cost, double baseline_cost,
                                       Gradients& grads) {
  Activation act = forward(net, obs);
  return accumulate_sample_gradients(net, act, obs, action, task_head, value_target, coefficient,
                                     entropy_cost, baseline_cost, grads);
}

SampleLoss accumulate_sample_gradients(const Network& net, const Activation& act,
                                       std::span<const double> obs, int action, int task_head,
                                       double value_target, double coefficient, double entropy_cost,
                                       double baseline_cost, Gradients& grads) {
  const NetworkConfig& cfg = net.cfg;
  if (task_head < 0 || task_head >= cfg.value_heads) {
    throw ValidationError("accumulate_sample_gradients: task head " + std::to_string(task_head) +
                          " out of range (heads=" + std::to_string(cfg.value_heads) + ")");
  }
  if (action < 0 || action >= cfg.actions) {
    throw ValidationError("accumulate_sample_gradients: action out of range");
  }

  std::vector<double> logp(cfg.actions);
  log_softmax(act.logits, logp);

  double sample_entropy = 0.0;
  for (double lp : logp) sample_entropy -= std::exp(lp) * lp;

  double n_value = act.normalized_values[task_head];
  double value_err = n_value - value_target;

  SampleLoss loss;
  loss.policy = -coefficient * logp[action];
  loss.value = 0.5 * value_err * value_err;
  loss.entropy = sample_entropy;

  // d(loss)/d(logits): the policy term plus the entropy bonus.
  std::vector<double> dz(cfg.actions);
  for (int a = 0; a < cfg.actions; ++a) {
    double p = std::exp(logp[a]);
    double policy_part = coefficient * (p - (a == action ? 1.0 : 0.0));
    double entropy_part = entropy_cost * p * (logp[a] + sample_entropy);
    dz[a] = policy_part + entropy_part;
  }
  double dn = baseline_cost * value_err;  // only the sample's head

  // Head gradients.
  for (int a = 0; a < cfg.actions; ++a) {
    double* row = grads.wp.data() + static_cast<std::size_t>(a) * cfg.hidden;
    for (int h = 0; h < cfg.hidden; ++h) row[h] += dz[a] * act.hidden[h];
    grads.bp[a] += dz[a];
  }
  {
    double* row = grads.wv.data() + static_cast<std::size_t>(task_head) * cfg.hidden;
    for (int h = 0; h < cfg.hidden; ++h) row[h] += dn * act.hidden[h];
    grads.bv[task_head] += dn;
  }

  // Trunk backprop through tanh.
  std::span<const double> head_row = net.value_head_row(task_head);
  for (int h = 0; h < cfg.hidden; ++h) {
    double dh = dn * head_row[h];
    for (int a = 0; a < cfg.actions; ++a) {
      dh += dz[a] * net.wp[static_cast<std::size_t>(a) * cfg.hidden + h];
    }
    double da = dh * (1.0 - act.hidden[h] * act.hidden[h]);
    double* row = grads.w1.data() + static_cast<std::size_t>(h) * cfg.obs_dim;
    for (int d = 0; d < cfg.obs_dim; ++d) row[d] += da * obs[d];
    grads.b1[h] += da;
  }
  return loss;
}

}  // namespace mtac
