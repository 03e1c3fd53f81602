#include "pvl/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pvl {

namespace {

constexpr double kPriceTol = 1e-9;
constexpr double kStepTol = 1e-7;  // window for flat-segment tie handling

// Willingness at price lambda with flat (zero-curvature) agents taken at
// full cap when marginal-or-better. Used as the upper envelope.
double demand_at(const AgentType& ag, double lambda) {
  if (!ag.is_buyer()) return 0.0;
  if (ag.b > 0.0)
    return std::clamp((ag.a - lambda) / ag.b, 0.0, ag.cap_demand);
  return lambda <= ag.a + kStepTol ? ag.cap_demand : 0.0;
}

double supply_at(const AgentType& ag, double lambda) {
  if (!ag.is_seller()) return 0.0;
  if (ag.e > 0.0)
    return std::clamp((lambda - ag.c) / ag.e, 0.0, ag.cap_supply);
  return lambda >= ag.c - kStepTol ? ag.cap_supply : 0.0;
}

bool marginal_step_buyer(const AgentType& ag, double lambda) {
  return ag.is_buyer() && ag.b == 0.0 && std::abs(ag.a - lambda) <= kStepTol;
}

bool marginal_step_seller(const AgentType& ag, double lambda) {
  return ag.is_seller() && ag.e == 0.0 && std::abs(ag.c - lambda) <= kStepTol;
}

// Per-agent quantities on one side summing to the cleared total T: strict
// and curved agents keep their price-implied quantity, marginal flat agents
// absorb the remainder proportionally to caps, and any residual numerical
// overhang is shaved by uniform scaling.
void assign_side(const EconomyInstance& econ, double lambda, double total,
                 bool buyer_side, std::vector<double>& qty) {
  const std::size_t n = econ.size();
  qty.assign(n, 0.0);
  double fixed = 0.0;
  double marginal_caps = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const AgentType& ag = econ.agents[k];
    bool marginal = buyer_side ? marginal_step_buyer(ag, lambda)
                               : marginal_step_seller(ag, lambda);
    if (marginal) {
      marginal_caps += buyer_side ? ag.cap_demand : ag.cap_supply;
      continue;
    }
    qty[k] = buyer_side ? demand_at(ag, lambda) : supply_at(ag, lambda);
    fixed += qty[k];
  }
  double remainder = total - fixed;
  if (remainder >= 0.0 && marginal_caps > 0.0) {
    double frac = std::min(remainder / marginal_caps, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      const AgentType& ag = econ.agents[k];
      bool marginal = buyer_side ? marginal_step_buyer(ag, lambda)
                                 : marginal_step_seller(ag, lambda);
      if (marginal) qty[k] = frac * (buyer_side ? ag.cap_demand : ag.cap_supply);
    }
  } else if (fixed > total && fixed > 0.0) {
    double scale = total / fixed;
    for (double& q : qty) q *= scale;
  }
}

Allocation pair_allocation(const EconomyInstance& econ,
                           const std::vector<double>& sell,
                           const std::vector<double>& buy, double total) {
  const std::size_t n = econ.size();
  Allocation x(n);
  if (total <= 0.0) return x;
  for (std::size_t i = 0; i < n; ++i) {
    if (sell[i] <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (buy[j] <= 0.0) continue;
      x.at(i, j) = sell[i] * buy[j] / total;
    }
  }
  return x;
}

ClearingResult zero_result(const EconomyInstance& econ, double lambda) {
  ClearingResult r;
  r.allocation = Allocation(econ.size());
  r.shadow_price = lambda;
  r.welfare_star = 0.0;
  return r;
}

}  // namespace

ClearingResult clear_exact(const EconomyInstance& econ) {
  validate_for_clearing(econ);
  const std::size_t n = econ.size();

  double a_max = -std::numeric_limits<double>::infinity();
  double c_min = std::numeric_limits<double>::infinity();
  for (const AgentType& ag : econ.agents) {
    if (ag.is_buyer()) a_max = std::max(a_max, ag.a);
    if (ag.is_seller()) c_min = std::min(c_min, ag.c);
  }
  const bool have_buyers = std::isfinite(a_max);
  const bool have_sellers = std::isfinite(c_min);
  if (!have_buyers && !have_sellers) return zero_result(econ, 0.0);
  if (!have_buyers) return zero_result(econ, c_min);
  if (!have_sellers) return zero_result(econ, a_max);
  if (a_max <= c_min) return zero_result(econ, (a_max + c_min) / 2.0);

  auto excess = [&](double lambda) {
    double d = 0.0, s = 0.0;
    for (const AgentType& ag : econ.agents) {
      d += demand_at(ag, lambda);
      s += supply_at(ag, lambda);
    }
    return d - s;
  };

  double lo = c_min - 1.0;
  double hi = a_max + 1.0;
  int iters = 0;
  while (hi - lo > kPriceTol && iters < 200) {
    double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    ++iters;
  }
  const double lambda = 0.5 * (lo + hi);

  double d_total = 0.0, s_total = 0.0;
  for (const AgentType& ag : econ.agents) {
    d_total += demand_at(ag, lambda);
    s_total += supply_at(ag, lambda);
  }
  const double total = std::min(d_total, s_total);
  if (total <= 0.0) return zero_result(econ, lambda);

  std::vector<double> buy, sell;
  assign_side(econ, lambda, total, /*buyer_side=*/true, buy);
  assign_side(econ, lambda, total, /*buyer_side=*/false, sell);

  ClearingResult r;
  r.allocation = pair_allocation(econ, sell, buy, total);
  r.shadow_price = lambda;
  r.welfare_star = welfare(econ, r.allocation);
  r.iterations = iters;
  // A negative-welfare clearing can only arise from pathological inputs;
  // zero trade dominates it and keeps the alpha contract trivially valid.
  if (r.welfare_star < 0.0) return zero_result(econ, lambda);
  (void)n;
  return r;
}

ClearingResult clear_alpha(const EconomyInstance& econ,
                           const ApproxParams& params) {
  if (!(params.alpha > 0.0) || params.alpha > 1.0)
    throw std::invalid_argument("alpha must lie in (0, 1]");
  ClearingResult exact = clear_exact(econ);
  if (params.alpha == 1.0) return exact;
  const double w_star = exact.welfare_star;
  if (w_star <= 0.0) {
    exact.allocation = Allocation(econ.size());
    exact.welfare_star = 0.0;
    return exact;
  }

  const double target = params.alpha * w_star;
  const double tol = params.scale_tolerance * w_star;
  double lo = 0.0, hi = 1.0;
  double s = 1.0, w = w_star;
  int iters = exact.iterations;
  for (int i = 0; i < params.max_bisect_iters; ++i) {
    s = 0.5 * (lo + hi);
    w = welfare(econ, exact.allocation.scaled(s));
    ++iters;
    if (std::abs(w - target) <= tol) break;
    if (w < target)
      lo = s;
    else
      hi = s;
  }

  ClearingResult r;
  r.allocation = exact.allocation.scaled(s);
  r.shadow_price = exact.shadow_price;
  r.welfare_star = w;
  r.iterations = iters;
  return r;
}

ClearingResult allocation_without(const EconomyInstance& econ,
                                  int excluded_id,
                                  const ApproxParams& params) {
  EconomyInstance reduced = econ;
  bool found = false;
  for (AgentType& ag : reduced.agents) {
    if (ag.id == excluded_id) {
      ag.cap_demand = 0.0;
      ag.cap_supply = 0.0;
      found = true;
    }
  }
  if (!found)
    throw std::invalid_argument("allocation_without: no agent with id " +
                                std::to_string(excluded_id));
  return clear_alpha(reduced, params);
}

}  // namespace pvl
