#pragma once

#include "pvl/market.hpp"
#include "pvl/mechanism.hpp"
#include "pvl/rng.hpp"

namespace pvl {

enum class DetectionMode { DirectRho, NoiseInduced };

struct MechanismConfig {
  double alpha = 1.0;
  double epsilon = 1.0;              // price tolerance for deviation
  double rho = 1.0;                  // detection probability in (0, 1]
  double penalty = 0.0;              // one-shot penalty Pi
  double monitor_noise_sigma = 0.0;  // sigma of additive price noise
  DetectionMode detection_mode = DetectionMode::DirectRho;
  PivotMode pivot = PivotMode::Approx;

  void validate() const;
};

struct DetectionRecord {
  int agent = 0;
  double true_marginal = 0.0;
  double bid_price = 0.0;
  double observed_price = 0.0;
  bool deviated = false;  // ground truth from the pre-noise bid
  int detected = 0;       // D_k in {0, 1}
};

// Marginal valuation (buy side) or marginal cost (sell side) of the true
// type at the bid quantity; positive q is a buy, negative a sell, zero
// falls back to the agent's active side (role hint for pure prosumers).
double true_marginal(const AgentType& agent, double q_bid);

DetectionRecord detect(const MechanismConfig& cfg, int agent,
                       double bid_price, double v_prime, RngStream& rng);

// u - D_k * Pi; doubles as the RL reward for the slot.
double penalized_utility(double u, const DetectionRecord& rec,
                         const MechanismConfig& cfg);

// Strict lower bound (1 - alpha) * C / rho on the penalty that makes every
// detectable deviation unprofitable in expectation.
double penalty_threshold(double alpha, double C, double rho);

// Monte-Carlo detection frequency of a fixed price deviation under the
// noise-induced mode; maps sigma_xi to an effective rho.
double effective_rho(const MechanismConfig& cfg, double deviation_magnitude,
                     int samples, RngStream& rng);

}  // namespace pvl
