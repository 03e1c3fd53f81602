#include "pvl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pvl {

namespace {
constexpr double kLog2PiE = 2.8378770664093454836;  // log(2*pi*e)
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0) || gamma >= 1.0)
    throw std::invalid_argument("ppo: gamma must lie in (0, 1)");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw std::invalid_argument("ppo: gae_lambda must lie in [0, 1]");
  if (!(clip_ratio > 0.0)) throw std::invalid_argument("ppo: clip_ratio > 0");
  if (batch_size < minibatches || minibatches < 1)
    throw std::invalid_argument("ppo: batch_size must cover minibatches");
  if (hidden < 1) throw std::invalid_argument("ppo: hidden width >= 1");
}

GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<bool>& dones, double gamma,
                      double lambda, double bootstrap_value) {
  const std::size_t n = rewards.size();
  if (n == 0) throw std::invalid_argument("compute_gae: empty trajectory");
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("compute_gae: misaligned arrays");

  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double last_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double nonterminal = dones[i] ? 0.0 : 1.0;
    double next_value = (i + 1 < n) ? values[i + 1] : bootstrap_value;
    double delta = rewards[i] + gamma * next_value * nonterminal - values[i];
    last_adv = delta + gamma * lambda * nonterminal * last_adv;
    out.advantages[i] = last_adv;
    out.returns[i] = last_adv + values[i];
  }
  return out;
}

void PolicyGrads::zero_like(const PolicyNet& net) {
  const Backbone& bb = *net.backbone;
  w1.assign(bb.l1.W.size(), 0.0);
  b1.assign(bb.l1.b.size(), 0.0);
  w2.assign(bb.l2.W.size(), 0.0);
  b2.assign(bb.l2.b.size(), 0.0);
  wmu.assign(net.heads.mu.W.size(), 0.0);
  bmu.assign(net.heads.mu.b.size(), 0.0);
  wv.assign(net.heads.value.W.size(), 0.0);
  bv.assign(net.heads.value.b.size(), 0.0);
  log_std.assign(net.heads.log_std.size(), 0.0);
}

void PolicyGrads::scale(double s) {
  for (auto* vec : {&w1, &b1, &w2, &b2, &wmu, &bmu, &wv, &bv, &log_std})
    for (double& g : *vec) g *= s;
}

double PolicyGrads::squared_norm() const {
  double sq = 0.0;
  for (auto* vec : {&w1, &b1, &w2, &b2, &wmu, &bmu, &wv, &bv, &log_std})
    for (double g : *vec) sq += g * g;
  return sq;
}

void clip_grad_norm(PolicyGrads& grads, double max_norm) {
  double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
}

void AdamState::init_like(const PolicyNet& net) {
  auto zeros = [](std::size_t n) {
    return Moments{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  };
  const Backbone& bb = *net.backbone;
  w1_ = zeros(bb.l1.W.size());
  b1_ = zeros(bb.l1.b.size());
  w2_ = zeros(bb.l2.W.size());
  b2_ = zeros(bb.l2.b.size());
  wmu_ = zeros(net.heads.mu.W.size());
  bmu_ = zeros(net.heads.mu.b.size());
  wv_ = zeros(net.heads.value.W.size());
  bv_ = zeros(net.heads.value.b.size());
  log_std_ = zeros(net.heads.log_std.size());
  t_ = 0;
}

void AdamState::apply(std::vector<double>& params,
                      const std::vector<double>& g, Moments& mom, double lr,
                      double bias1, double bias2) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  for (std::size_t i = 0; i < params.size(); ++i) {
    mom.m[i] = kBeta1 * mom.m[i] + (1.0 - kBeta1) * g[i];
    mom.v[i] = kBeta2 * mom.v[i] + (1.0 - kBeta2) * g[i] * g[i];
    double m_hat = mom.m[i] / bias1;
    double v_hat = mom.v[i] / bias2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
  }
}

void AdamState::step(PolicyNet& net, const PolicyGrads& grads, double lr,
                     bool update_backbone, bool update_heads,
                     bool update_std) {
  ++t_;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999;
  double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  Backbone& bb = *net.backbone;
  if (update_backbone) {
    apply(bb.l1.W, grads.w1, w1_, lr, bias1, bias2);
    apply(bb.l1.b, grads.b1, b1_, lr, bias1, bias2);
    apply(bb.l2.W, grads.w2, w2_, lr, bias1, bias2);
    apply(bb.l2.b, grads.b2, b2_, lr, bias1, bias2);
  }
  if (update_heads) {
    apply(net.heads.mu.W, grads.wmu, wmu_, lr, bias1, bias2);
    apply(net.heads.mu.b, grads.bmu, bmu_, lr, bias1, bias2);
    apply(net.heads.value.W, grads.wv, wv_, lr, bias1, bias2);
    apply(net.heads.value.b, grads.bv, bv_, lr, bias1, bias2);
  }
  if (update_heads && update_std)
    apply(net.heads.log_std, grads.log_std, log_std_, lr, bias1, bias2);
}

UpdateDiag accumulate_ppo_gradients(const PolicyNet& net,
                                    const std::vector<Transition>& batch,
                                    const std::vector<double>& advantages,
                                    const std::vector<double>& returns,
                                    const std::vector<int>& indices,
                                    const PpoConfig& cfg, PolicyGrads& grads) {
  UpdateDiag diag;
  const Backbone& bb = *net.backbone;
  const int hidden = bb.hidden;
  const int act_dim = net.act_dim;
  const double inv_m = 1.0 / static_cast<double>(indices.size());

  ForwardCache cache;
  std::vector<double> mu;
  std::vector<double> dmu(act_dim), da2(hidden), dh2(hidden), da1(hidden),
      dh1(hidden);

  double kl_sum = 0.0;
  for (int idx : indices) {
    const Transition& tr = batch[idx];
    double value = 0.0;
    net.forward(tr.obs, mu, value, &cache);

    double logp_new = gaussian_log_prob(tr.raw_action, mu, net.heads.log_std);
    double log_ratio = logp_new - tr.log_prob;
    double ratio = std::exp(log_ratio);
    double adv = advantages[idx];
    kl_sum += (ratio - 1.0) - log_ratio;

    // Clipped surrogate: gradient flows only through the branch that
    // attains the minimum.
    double unclipped = ratio * adv;
    double clipped = std::clamp(ratio, 1.0 - cfg.clip_ratio,
                                1.0 + cfg.clip_ratio) * adv;
    bool active = unclipped <= clipped;
    diag.pg_loss += -std::min(unclipped, clipped) * inv_m;
    double dlogp = active ? -adv * ratio * inv_m : 0.0;

    double verr = value - returns[idx];
    diag.value_loss += 0.5 * verr * verr * inv_m;
    double dv = cfg.value_coef * verr * inv_m;

    double entropy = 0.0;
    for (int d = 0; d < act_dim; ++d)
      entropy += net.heads.log_std[d] + 0.5 * kLog2PiE;
    diag.entropy += entropy * inv_m;

    for (int d = 0; d < act_dim; ++d) {
      double sigma = std::exp(net.heads.log_std[d]);
      double z = (tr.raw_action[d] - mu[d]) / sigma;
      dmu[d] = dlogp * (z / sigma);
      grads.log_std[d] += dlogp * (z * z - 1.0);
      grads.log_std[d] += -cfg.entropy_coef * inv_m;  // entropy bonus
    }

    // Heads.
    for (int d = 0; d < act_dim; ++d) {
      for (int j = 0; j < hidden; ++j)
        grads.wmu[static_cast<std::size_t>(d) * hidden + j] +=
            dmu[d] * cache.a2[j];
      grads.bmu[d] += dmu[d];
    }
    for (int j = 0; j < hidden; ++j) grads.wv[j] += dv * cache.a2[j];
    grads.bv[0] += dv;

    // Backbone.
    for (int j = 0; j < hidden; ++j) {
      double acc = dv * net.heads.value.W[j];
      for (int d = 0; d < act_dim; ++d)
        acc += dmu[d] * net.heads.mu.W[static_cast<std::size_t>(d) * hidden + j];
      da2[j] = acc;
      dh2[j] = cache.h2[j] > 0.0 ? acc : 0.0;
    }
    for (int j = 0; j < hidden; ++j) {
      if (dh2[j] == 0.0) continue;
      const double g = dh2[j];
      double* wrow = grads.w2.data() + static_cast<std::size_t>(j) * hidden;
      for (int i = 0; i < hidden; ++i) wrow[i] += g * cache.a1[i];
      grads.b2[j] += g;
    }
    for (int i = 0; i < hidden; ++i) {
      double acc = 0.0;
      for (int j = 0; j < hidden; ++j)
        acc += dh2[j] * bb.l2.W[static_cast<std::size_t>(j) * hidden + i];
      da1[i] = acc;
      dh1[i] = cache.h1[i] > 0.0 ? acc : 0.0;
    }
    const int obs_dim = bb.obs_dim;
    for (int i = 0; i < hidden; ++i) {
      if (dh1[i] == 0.0) continue;
      const double g = dh1[i];
      double* wrow = grads.w1.data() + static_cast<std::size_t>(i) * obs_dim;
      for (int d = 0; d < obs_dim; ++d) wrow[d] += g * cache.x[d];
      grads.b1[i] += g;
    }
  }
  diag.approx_kl = kl_sum * inv_m;
  double total = diag.pg_loss + cfg.value_coef * diag.value_loss -
                 cfg.entropy_coef * diag.entropy;
  if (!std::isfinite(total)) diag.aborted = true;
  return diag;
}

UpdateDiag ppo_update(PolicyNet& net, AdamState& adam,
                      const std::vector<Transition>& batch,
                      const PpoConfig& cfg, RngStream& shuffle_rng,
                      double bootstrap_value) {
  if (batch.empty()) throw std::invalid_argument("ppo_update: empty batch");

  std::vector<double> rewards, values;
  std::vector<bool> dones;
  rewards.reserve(batch.size());
  for (const Transition& tr : batch) {
    rewards.push_back(tr.reward);
    values.push_back(tr.value);
    dones.push_back(tr.done);
  }
  GaeResult gae = compute_gae(rewards, values, dones, cfg.gamma,
                              cfg.gae_lambda, bootstrap_value);

  // Batch-level advantage normalization.
  double mean = std::accumulate(gae.advantages.begin(), gae.advantages.end(),
                                0.0) /
                gae.advantages.size();
  double sq = 0.0;
  for (double a : gae.advantages) sq += (a - mean) * (a - mean);
  double sd = std::sqrt(sq / gae.advantages.size()) + 1e-8;
  for (double& a : gae.advantages) a = (a - mean) / sd;

  std::vector<int> order(batch.size());
  std::iota(order.begin(), order.end(), 0);

  UpdateDiag diag;
  PolicyGrads grads;
  const int mb_size =
      std::max<int>(1, static_cast<int>(batch.size()) / cfg.minibatches);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(mb_size)) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(mb_size));
      std::vector<int> mb(order.begin() + start, order.begin() + end);
      grads.zero_like(net);
      diag = accumulate_ppo_gradients(net, batch, gae.advantages, gae.returns,
                                      mb, cfg, grads);
      if (diag.aborted) return diag;
      clip_grad_norm(grads, cfg.max_grad_norm);
      adam.step(net, grads, cfg.lr, /*update_backbone=*/true,
                /*update_heads=*/true, cfg.learn_std);
    }
  }
  return diag;
}

}  // namespace pvl
