#include "pvl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pvl {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void Linear::init(int in_dim, int out_dim, double weight_scale,
                  RngStream& rng) {
  in = in_dim;
  out = out_dim;
  W.assign(static_cast<std::size_t>(in) * out, 0.0);
  b.assign(out, 0.0);
  double r = weight_scale * std::sqrt(6.0 / (in + out));
  for (double& w : W) w = rng.uniform(-r, r);
}

void Linear::forward(const double* x, double* y) const {
  for (int o = 0; o < out; ++o) {
    double acc = b[o];
    const double* row = W.data() + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void Backbone::init(int obs, int width, RngStream& rng) {
  obs_dim = obs;
  hidden = width;
  l1.init(obs, width, std::sqrt(2.0), rng);
  l2.init(width, width, std::sqrt(2.0), rng);
}

void PolicyHeads::init(int hidden, int act_dim, double log_std_init,
                       RngStream& rng) {
  mu.init(hidden, act_dim, 0.01, rng);  // near-zero start keeps bids mid-range
  value.init(hidden, 1, 1.0, rng);
  log_std.assign(act_dim, log_std_init);
}

void PolicyNet::forward(const std::vector<double>& obs,
                        std::vector<double>& mu_out, double& value_out,
                        ForwardCache* cache) const {
  const Backbone& bb = *backbone;
  if (static_cast<int>(obs.size()) != bb.obs_dim)
    throw std::invalid_argument("policy forward: observation dimension " +
                                std::to_string(obs.size()) + " != " +
                                std::to_string(bb.obs_dim));
  std::vector<double> h1(bb.hidden), a1(bb.hidden), h2(bb.hidden),
      a2(bb.hidden);
  bb.l1.forward(obs.data(), h1.data());
  for (int i = 0; i < bb.hidden; ++i) a1[i] = std::max(h1[i], 0.0);
  bb.l2.forward(a1.data(), h2.data());
  for (int i = 0; i < bb.hidden; ++i) a2[i] = std::max(h2[i], 0.0);

  mu_out.assign(act_dim, 0.0);
  heads.mu.forward(a2.data(), mu_out.data());
  double v = 0.0;
  heads.value.forward(a2.data(), &v);
  value_out = v;

  if (cache) {
    cache->x = obs;
    cache->h1 = std::move(h1);
    cache->a1 = std::move(a1);
    cache->h2 = std::move(h2);
    cache->a2 = std::move(a2);
    cache->mu = mu_out;
    cache->value = v;
  }
}

std::size_t PolicyNet::parameter_count() const {
  const Backbone& bb = *backbone;
  return bb.l1.W.size() + bb.l1.b.size() + bb.l2.W.size() + bb.l2.b.size() +
         heads.mu.W.size() + heads.mu.b.size() + heads.value.W.size() +
         heads.value.b.size() + heads.log_std.size();
}

PolicyNet make_policy(int obs_dim, int hidden, int act_dim,
                      double log_std_init, std::uint64_t backbone_key,
                      std::uint64_t head_key,
                      std::shared_ptr<Backbone> shared) {
  PolicyNet net;
  net.act_dim = act_dim;
  if (shared) {
    net.backbone = std::move(shared);
  } else {
    net.backbone = std::make_shared<Backbone>();
    RngStream rng = RngStream::keyed({backbone_key, fnv1a("backbone")});
    net.backbone->init(obs_dim, hidden, rng);
  }
  RngStream rng = RngStream::keyed({head_key, fnv1a("heads")});
  net.heads.init(net.backbone->hidden, act_dim, log_std_init, rng);
  return net;
}

ObsNormalizer::ObsNormalizer(int dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

void ObsNormalizer::update(const std::vector<double>& x) {
  if (frozen_) return;
  if (x.size() != mean_.size())
    throw std::invalid_argument("normalizer: dimension mismatch");
  count_ += 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double delta = x[i] - mean_[i];
    mean_[i] += delta / count_;
    m2_[i] += delta * (x[i] - mean_[i]);
  }
}

std::vector<double> ObsNormalizer::stddev() const {
  std::vector<double> sd(mean_.size(), 1.0);
  if (count_ > 1.0)
    for (std::size_t i = 0; i < sd.size(); ++i)
      sd[i] = std::sqrt(m2_[i] / (count_ - 1.0) + 1e-8);
  return sd;
}

std::vector<double> ObsNormalizer::normalize(
    const std::vector<double>& x) const {
  if (count_ < 2.0) return x;
  std::vector<double> out(x.size());
  std::vector<double> sd = stddev();
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::clamp((x[i] - mean_[i]) / sd[i], -10.0, 10.0);
  return out;
}

void ObsNormalizer::restore(std::vector<double> mean, std::vector<double> m2,
                            double count) {
  mean_ = std::move(mean);
  m2_ = std::move(m2);
  count_ = count;
}

BidAction ActionMapper::to_action(const double* raw) const {
  double mid = 0.5 * (p_min + p_max);
  double half = 0.5 * (p_max - p_min);
  BidAction a;
  if (squash == SquashMode::Clamp) {
    a.price = std::clamp(mid + raw[0] * half, p_min, p_max);
    a.quantity = std::clamp(raw[1] * q_max, -q_max, q_max);
  } else {
    a.price = mid + std::tanh(raw[0]) * half;
    a.quantity = std::tanh(raw[1]) * q_max;
  }
  return a;
}

double ActionMapper::log_jacobian(const double* raw) const {
  if (squash == SquashMode::Clamp) return 0.0;
  double half = 0.5 * (p_max - p_min);
  double t0 = std::tanh(raw[0]);
  double t1 = std::tanh(raw[1]);
  return std::log(half * (1.0 - t0 * t0) + 1e-12) +
         std::log(q_max * (1.0 - t1 * t1) + 1e-12);
}

double gaussian_log_prob(const std::vector<double>& raw,
                         const std::vector<double>& mu,
                         const std::vector<double>& log_std) {
  double lp = 0.0;
  for (std::size_t d = 0; d < raw.size(); ++d) {
    double sigma = std::exp(log_std[d]);
    double z = (raw[d] - mu[d]) / sigma;
    lp += -0.5 * z * z - log_std[d] - 0.5 * kLog2Pi;
  }
  return lp;
}

SampledAction sample_action(const PolicyNet& net, const ActionMapper& mapper,
                            const std::vector<double>& obs, RngStream& rng) {
  std::vector<double> mu;
  double value = 0.0;
  net.forward(obs, mu, value);

  SampledAction out;
  out.value = value;
  out.raw.resize(net.act_dim);
  for (int d = 0; d < net.act_dim; ++d)
    out.raw[d] = rng.normal(mu[d], std::exp(net.heads.log_std[d]));
  out.log_prob = gaussian_log_prob(out.raw, mu, net.heads.log_std) -
                 mapper.log_jacobian(out.raw.data());
  out.action = mapper.to_action(out.raw.data());
  return out;
}

BidAction mean_action(const PolicyNet& net, const ActionMapper& mapper,
                      const std::vector<double>& obs) {
  std::vector<double> mu;
  double value = 0.0;
  net.forward(obs, mu, value);
  return mapper.to_action(mu.data());
}

}  // namespace pvl
