#include "pvl/enforcement.hpp"

#include <cmath>
#include <stdexcept>

namespace pvl {

void MechanismConfig::validate() const {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("mechanism: alpha must lie in (0, 1]");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("mechanism: epsilon must be positive");
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("mechanism: rho must lie in (0, 1]");
  if (penalty < 0.0)
    throw std::invalid_argument("mechanism: penalty must be non-negative");
  if (monitor_noise_sigma < 0.0)
    throw std::invalid_argument("mechanism: noise sigma must be >= 0");
}

double true_marginal(const AgentType& agent, double q_bid) {
  bool buy_side;
  if (q_bid > 0.0)
    buy_side = true;
  else if (q_bid < 0.0)
    buy_side = false;
  else if (agent.is_buyer())
    buy_side = true;
  else if (agent.is_seller())
    buy_side = false;
  else
    buy_side = agent.role_hint != Role::Seller;

  if (buy_side) {
    double q = std::min(std::abs(q_bid), agent.cap_demand);
    return agent.a - agent.b * q;
  }
  double q = std::min(std::abs(q_bid), agent.cap_supply);
  return agent.c + agent.e * q;
}

DetectionRecord detect(const MechanismConfig& cfg, int agent,
                       double bid_price, double v_prime, RngStream& rng) {
  DetectionRecord rec;
  rec.agent = agent;
  rec.true_marginal = v_prime;
  rec.bid_price = bid_price;
  rec.deviated = std::abs(bid_price - v_prime) > cfg.epsilon;
  if (cfg.detection_mode == DetectionMode::DirectRho) {
    rec.observed_price = bid_price;
    rec.detected = (rec.deviated && rng.bernoulli(cfg.rho)) ? 1 : 0;
  } else {
    rec.observed_price = bid_price + rng.normal(0.0, cfg.monitor_noise_sigma);
    rec.detected = std::abs(rec.observed_price - v_prime) > cfg.epsilon ? 1 : 0;
  }
  return rec;
}

double penalized_utility(double u, const DetectionRecord& rec,
                         const MechanismConfig& cfg) {
  return u - rec.detected * cfg.penalty;
}

double penalty_threshold(double alpha, double C, double rho) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("penalty_threshold: alpha must be in (0, 1]");
  if (C < 0.0)
    throw std::invalid_argument("penalty_threshold: C must be >= 0");
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("penalty_threshold: rho must be in (0, 1]");
  return (1.0 - alpha) * C / rho;
}

double effective_rho(const MechanismConfig& cfg, double deviation_magnitude,
                     int samples, RngStream& rng) {
  if (cfg.detection_mode != DetectionMode::NoiseInduced)
    throw std::invalid_argument("effective_rho: requires noise-induced mode");
  if (samples <= 0)
    throw std::invalid_argument("effective_rho: samples must be positive");
  int hits = 0;
  for (int i = 0; i < samples; ++i) {
    double observed = deviation_magnitude +
                      rng.normal(0.0, cfg.monitor_noise_sigma);
    if (std::abs(observed) > cfg.epsilon) ++hits;
  }
  return static_cast<double>(hits) / samples;
}

}  // namespace pvl
