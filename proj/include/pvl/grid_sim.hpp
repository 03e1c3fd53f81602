#pragma once

#include <vector>

#include "pvl/enforcement.hpp"
#include "pvl/mechanism.hpp"
#include "pvl/rng.hpp"

namespace pvl {

// Shared physical configuration of the grid environment. Per-agent
// baselines and solar profiles are derived from these at setup.
struct PhysicalParams {
  double baseline_load = 2.0;
  double baseline_load_spread = 0.5;
  double solar_peak = 3.0;
  double solar_peak_spread = 0.5;
  int daylight_start = 6;  // first daylight slot (inclusive)
  int daylight_end = 18;   // last daylight slot (exclusive)
  double load_noise_sigma = 0.2;
  double gen_noise_sigma = 0.3;
  double soc_capacity = 10.0;
  double charge_efficiency = 0.95;
  double slot_hours = 0.25;
  int slots_per_episode = 24;
  int history = 4;
  double ar1_coeff = 0.0;  // extension point, i.i.d. noise by default
  double p_min = 0.0;
  double p_max = 20.0;
  double q_max = 5.0;

  void validate() const;
};

// Deterministic per-agent physical profile: constant baseline load and a
// half-sine solar curve over the daylight window.
struct AgentPhysical {
  double baseline_load = 0.0;
  std::vector<double> solar_profile;  // one entry per slot

  double solar_at(int slot) const {
    if (solar_profile.empty()) return 0.0;
    int t = slot % static_cast<int>(solar_profile.size());
    return solar_profile[t];
  }
};

AgentPhysical make_agent_physical(const PhysicalParams& params,
                                  RngStream& rng);

struct GridState {
  std::vector<double> soc;
  std::vector<double> realized_load;
  std::vector<double> realized_gen;
  std::vector<std::vector<double>> net_load_history;  // per agent, most recent last
  double last_price = 0.0;
  double last_qty = 0.0;
  int slot = 0;
};

GridState init_state(const PhysicalParams& params,
                     const std::vector<AgentPhysical>& phys, RngStream& rng);

struct Observation {
  double predicted_net_load = 0.0;
  double soc = 0.0;
  double last_price = 0.0;
  double last_qty = 0.0;
  double hour_sin = 0.0;
  double hour_cos = 1.0;
  std::vector<double> net_load_history;  // zero-padded to `history`

  std::vector<double> to_vector() const;
  static int dimension(int history) { return 6 + history; }
};

Observation observe(const GridState& state, const PhysicalParams& params,
                    const AgentPhysical& phys, std::size_t k);

struct BidAction {
  double price = 0.0;
  double quantity = 0.0;  // positive buys, negative sells
};

using BidProfile = std::vector<BidAction>;

// Map one bid per agent into the reported economy: positive quantity makes
// a buyer with intercept = bid price and demand cap = quantity, negative a
// seller, zero (or NaN, the rejected-bid case) a null agent. Curvature is
// carried over from the agent's true type.
EconomyInstance bid_to_economy(const BidProfile& bids,
                               const std::vector<AgentType>& base_types);

// SoC update with the current slot's realizations and cleared quantities
// (positive = bought energy), then next-slot load/gen draws, floored at
// zero. Advances the slot counter.
void step_physics(GridState& state, const PhysicalParams& params,
                  const std::vector<AgentPhysical>& phys,
                  const std::vector<double>& cleared_q, RngStream& rng);

struct SlotResult {
  MarketOutcome outcome;
  std::vector<DetectionRecord> detections;
  std::vector<double> rewards;       // u_k at truth minus detected penalty
  std::vector<double> utilities;     // u_k at truth, before penalties
  BidProfile bids;                   // clamped bids that entered clearing
};

// One full slot: clamp bids, clear and settle, detect deviations against
// each true type's marginal at the bid quantity, pay penalties, step the
// physics.
SlotResult run_slot(GridState& state, const std::vector<AgentType>& true_types,
                    const BidProfile& bids, const MechanismConfig& mech,
                    const ApproxParams& approx, const PhysicalParams& params,
                    const std::vector<AgentPhysical>& phys,
                    RngStream& detect_rng, RngStream& physics_rng);

// Convenience wrapper owning types, profiles, state, and the RNG keying
// (seed, run, episode, slot, agent, purpose) for episode loops.
class Environment {
 public:
  Environment(std::vector<AgentType> true_types, PhysicalParams params,
              MechanismConfig mech, ApproxParams approx, std::uint64_t seed,
              std::uint64_t run_id);

  std::size_t num_agents() const { return true_types_.size(); }
  const std::vector<AgentType>& true_types() const { return true_types_; }
  const PhysicalParams& params() const { return params_; }
  const GridState& state() const { return state_; }
  const MechanismConfig& mechanism() const { return mech_; }

  void reset(int episode);
  Observation observe_agent(std::size_t k) const;
  SlotResult step(const BidProfile& bids);
  int slot() const { return state_.slot; }
  int episode() const { return episode_; }

  RngStream stream(std::size_t agent, const char* purpose) const;

 private:
  std::vector<AgentType> true_types_;
  PhysicalParams params_;
  MechanismConfig mech_;
  ApproxParams approx_;
  std::uint64_t seed_ = 0;
  std::uint64_t run_id_ = 0;
  int episode_ = 0;
  std::vector<AgentPhysical> phys_;
  GridState state_;
};

}  // namespace pvl
