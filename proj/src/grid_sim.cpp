#include "pvl/grid_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pvl {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void PhysicalParams::validate() const {
  if (!(soc_capacity > 0.0))
    throw std::invalid_argument("physical: soc_capacity must be positive");
  if (!(charge_efficiency > 0.0) || charge_efficiency > 1.0)
    throw std::invalid_argument("physical: charge_efficiency in (0, 1]");
  if (slots_per_episode < 1)
    throw std::invalid_argument("physical: slots_per_episode >= 1");
  if (history < 0) throw std::invalid_argument("physical: history >= 0");
  if (!(p_max > p_min))
    throw std::invalid_argument("physical: p_max must exceed p_min");
  if (!(q_max > 0.0)) throw std::invalid_argument("physical: q_max > 0");
}

AgentPhysical make_agent_physical(const PhysicalParams& params,
                                  RngStream& rng) {
  AgentPhysical ap;
  ap.baseline_load = std::max(
      0.0, params.baseline_load +
               rng.uniform(-params.baseline_load_spread,
                           params.baseline_load_spread));
  double peak = std::max(
      0.0, params.solar_peak + rng.uniform(-params.solar_peak_spread,
                                           params.solar_peak_spread));
  ap.solar_profile.assign(params.slots_per_episode, 0.0);
  int span = params.daylight_end - params.daylight_start;
  for (int t = 0; t < params.slots_per_episode; ++t) {
    if (span > 0 && t >= params.daylight_start && t < params.daylight_end) {
      double phase = (t - params.daylight_start + 0.5) / span;
      ap.solar_profile[t] = peak * std::sin(kPi * phase);
    }
  }
  return ap;
}

GridState init_state(const PhysicalParams& params,
                     const std::vector<AgentPhysical>& phys, RngStream& rng) {
  GridState st;
  const std::size_t n = phys.size();
  st.soc.assign(n, params.soc_capacity / 2.0);
  st.realized_load.resize(n);
  st.realized_gen.resize(n);
  st.net_load_history.assign(n, {});
  st.slot = 0;
  for (std::size_t k = 0; k < n; ++k) {
    st.realized_load[k] = std::max(
        0.0, phys[k].baseline_load + rng.normal(0.0, params.load_noise_sigma));
    st.realized_gen[k] = std::max(
        0.0, phys[k].solar_at(0) + rng.normal(0.0, params.gen_noise_sigma));
  }
  return st;
}

std::vector<double> Observation::to_vector() const {
  std::vector<double> v;
  v.reserve(6 + net_load_history.size());
  v.push_back(predicted_net_load);
  v.push_back(soc);
  v.push_back(last_price);
  v.push_back(last_qty);
  v.push_back(hour_sin);
  v.push_back(hour_cos);
  v.insert(v.end(), net_load_history.begin(), net_load_history.end());
  return v;
}

Observation observe(const GridState& state, const PhysicalParams& params,
                    const AgentPhysical& phys, std::size_t k) {
  Observation obs;
  obs.predicted_net_load =
      phys.baseline_load - phys.solar_at(state.slot + 1);
  obs.soc = state.soc[k];
  obs.last_price = state.last_price;
  obs.last_qty = state.last_qty;
  double phase = 2.0 * kPi * (state.slot % params.slots_per_episode) /
                 params.slots_per_episode;
  obs.hour_sin = std::sin(phase);
  obs.hour_cos = std::cos(phase);

  obs.net_load_history.assign(params.history, 0.0);
  const auto& hist = state.net_load_history[k];
  std::size_t have = hist.size();
  std::size_t take = std::min<std::size_t>(have, params.history);
  for (std::size_t i = 0; i < take; ++i)
    obs.net_load_history[params.history - take + i] =
        hist[have - take + i];
  return obs;
}

EconomyInstance bid_to_economy(const BidProfile& bids,
                               const std::vector<AgentType>& base_types) {
  if (bids.size() != base_types.size())
    throw std::invalid_argument("bid_to_economy: one bid per agent required");
  EconomyInstance econ;
  econ.agents.reserve(bids.size());
  for (std::size_t k = 0; k < bids.size(); ++k) {
    AgentType ag = base_types[k];
    const BidAction& bid = bids[k];
    ag.cap_demand = 0.0;
    ag.cap_supply = 0.0;
    bool rejected = !std::isfinite(bid.price) || !std::isfinite(bid.quantity);
    if (!rejected && bid.quantity > 0.0) {
      ag.a = bid.price;
      ag.cap_demand = bid.quantity;
    } else if (!rejected && bid.quantity < 0.0) {
      ag.c = bid.price;
      ag.cap_supply = -bid.quantity;
    }
    econ.agents.push_back(ag);
  }
  return econ;
}

void step_physics(GridState& state, const PhysicalParams& params,
                  const std::vector<AgentPhysical>& phys,
                  const std::vector<double>& cleared_q, RngStream& rng) {
  const std::size_t n = state.soc.size();
  for (std::size_t k = 0; k < n; ++k) {
    double net = state.realized_gen[k] - state.realized_load[k] +
                 (k < cleared_q.size() ? cleared_q[k] : 0.0);
    double next = state.soc[k] +
                  params.charge_efficiency * net * params.slot_hours;
    state.soc[k] = std::clamp(next, 0.0, params.soc_capacity);

    auto& hist = state.net_load_history[k];
    hist.push_back(state.realized_load[k] - state.realized_gen[k]);
    if (hist.size() > static_cast<std::size_t>(std::max(params.history, 1)))
      hist.erase(hist.begin());
  }
  ++state.slot;
  for (std::size_t k = 0; k < n; ++k) {
    state.realized_load[k] = std::max(
        0.0, phys[k].baseline_load + rng.normal(0.0, params.load_noise_sigma));
    state.realized_gen[k] =
        std::max(0.0, phys[k].solar_at(state.slot) +
                          rng.normal(0.0, params.gen_noise_sigma));
  }
}

SlotResult run_slot(GridState& state, const std::vector<AgentType>& true_types,
                    const BidProfile& bids, const MechanismConfig& mech,
                    const ApproxParams& approx, const PhysicalParams& params,
                    const std::vector<AgentPhysical>& phys,
                    RngStream& detect_rng, RngStream& physics_rng) {
  const std::size_t n = true_types.size();
  SlotResult res;
  res.bids.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    BidAction b = k < bids.size() ? bids[k] : BidAction{};
    if (std::isfinite(b.price))
      b.price = std::clamp(b.price, params.p_min, params.p_max);
    if (std::isfinite(b.quantity))
      b.quantity = std::clamp(b.quantity, -params.q_max, params.q_max);
    res.bids[k] = b;
  }

  EconomyInstance reported = bid_to_economy(res.bids, true_types);
  res.outcome = settle(reported, approx, mech.pivot);

  res.detections.resize(n);
  res.rewards.assign(n, 0.0);
  res.utilities.assign(n, 0.0);
  std::vector<double> cleared(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double v_prime = true_marginal(true_types[k], res.bids[k].quantity);
    res.detections[k] = detect(mech, true_types[k].id, res.bids[k].price,
                               v_prime, detect_rng);
    double u = utility_at_truth(
        EconomyInstance{true_types, state.slot}, res.outcome, k);
    res.utilities[k] = u;
    res.rewards[k] = penalized_utility(u, res.detections[k], mech);
    const AgentOutcome& ao = res.outcome.agents[k];
    cleared[k] = ao.side == Side::Buyer ? ao.quantity
                 : ao.side == Side::Seller ? -ao.quantity
                                           : 0.0;
  }

  state.last_price = res.outcome.clearing_price;
  state.last_qty = res.outcome.allocation.total();
  step_physics(state, params, phys, cleared, physics_rng);
  return res;
}

Environment::Environment(std::vector<AgentType> true_types,
                         PhysicalParams params, MechanismConfig mech,
                         ApproxParams approx, std::uint64_t seed,
                         std::uint64_t run_id)
    : true_types_(std::move(true_types)),
      params_(params),
      mech_(mech),
      approx_(approx),
      seed_(seed),
      run_id_(run_id) {
  params_.validate();
  mech_.validate();
  phys_.reserve(true_types_.size());
  for (std::size_t k = 0; k < true_types_.size(); ++k) {
    RngStream rng = RngStream::keyed(
        {seed_, run_id_, static_cast<std::uint64_t>(k), fnv1a("agent-phys")});
    phys_.push_back(make_agent_physical(params_, rng));
  }
  reset(0);
}

void Environment::reset(int episode) {
  episode_ = episode;
  RngStream rng = stream(0, "episode-init");
  state_ = init_state(params_, phys_, rng);
}

Observation Environment::observe_agent(std::size_t k) const {
  return observe(state_, params_, phys_[k], k);
}

SlotResult Environment::step(const BidProfile& bids) {
  RngStream detect_rng = stream(0, "detect");
  RngStream physics_rng = stream(0, "physics");
  return run_slot(state_, true_types_, bids, mech_, approx_, params_, phys_,
                  detect_rng, physics_rng);
}

RngStream Environment::stream(std::size_t agent, const char* purpose) const {
  return RngStream::keyed({seed_, run_id_,
                           static_cast<std::uint64_t>(episode_),
                           static_cast<std::uint64_t>(state_.slot),
                           static_cast<std::uint64_t>(agent),
                           fnv1a(purpose)});
}

}  // namespace pvl
