#include "pvl/incentive_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace pvl {

EconomyInstance EconomySampler::sample(RngStream& rng) const {
  EconomyInstance econ;
  int n = min_agents + static_cast<int>(rng.below(
                           static_cast<std::uint64_t>(max_agents - min_agents + 1)));
  n = std::max(n, 2);
  int n_buyers = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
  bool gapped = rng.bernoulli(no_trade_prob);
  for (int k = 0; k < n; ++k) {
    AgentType ag;
    ag.id = k;
    double cap = rng.uniform(cap_lo, cap_hi);
    bool flat = rng.bernoulli(flat_prob);
    if (k < n_buyers) {
      ag.role_hint = Role::Buyer;
      ag.a = gapped ? rng.uniform(0.5, 0.9) * c_lo : rng.uniform(a_lo, a_hi);
      ag.b = flat ? 0.0 : rng.uniform(b_lo, b_hi);
      ag.cap_demand = cap;
    } else {
      ag.role_hint = Role::Seller;
      ag.c = gapped ? rng.uniform(1.5, 2.0) * a_hi : rng.uniform(c_lo, c_hi);
      ag.e = flat ? 0.0 : rng.uniform(e_lo, e_hi);
      ag.cap_supply = cap;
    }
    econ.agents.push_back(ag);
  }
  return econ;
}

std::vector<double> DeviationGrid::intercept_deltas(double base) const {
  std::vector<double> out;
  out.reserve(intercept_points);
  double span = intercept_span * std::abs(base);
  for (int i = 0; i < intercept_points; ++i) {
    double t = intercept_points == 1
                   ? 0.0
                   : -1.0 + 2.0 * i / (intercept_points - 1);
    out.push_back(t * span);
  }
  return out;
}

std::vector<double> DeviationGrid::cap_fractions() const {
  std::vector<double> out;
  out.reserve(cap_points);
  for (int i = 0; i < cap_points; ++i) {
    double t = cap_points == 1 ? 1.0
                               : cap_lo + (cap_hi - cap_lo) * i / (cap_points - 1);
    out.push_back(t);
  }
  return out;
}

double marginal_contribution_C(const EconomySampler& sampler, int n_samples,
                               const ApproxParams& params, RngStream& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("marginal_contribution_C: n_samples >= 1");
  ApproxParams exact = params;
  exact.alpha = 1.0;
  double C = 0.0;
  bool any_trade = false;
  for (int s = 0; s < n_samples; ++s) {
    EconomyInstance econ = sampler.sample(rng);
    double w_star = clear_exact(econ).welfare_star;
    if (w_star > 0.0) any_trade = true;
    for (const AgentType& ag : econ.agents) {
      double w_without = allocation_without(econ, ag.id, exact).welfare_star;
      C = std::max(C, std::abs(w_star - w_without));
    }
  }
  if (!any_trade)
    std::cerr << "warning: marginal_contribution_C saw no trading economy; "
                 "C = 0\n";
  return C;
}

std::vector<GridGain> deviation_gain_surface(const EconomyInstance& econ_true,
                                             std::size_t k,
                                             const DeviationGrid& grid,
                                             const ApproxParams& params,
                                             PivotMode pivot) {
  if (k >= econ_true.size())
    throw std::out_of_range("deviation surface: agent index out of range");
  const AgentType& truth = econ_true.agents[k];
  if (truth.is_null()) return {};

  ApproxParams pivot_params = params;
  if (pivot == PivotMode::Exact) pivot_params.alpha = 1.0;
  // W_{-k} is independent of k's own report; compute it once.
  const double w_without_k =
      allocation_without(econ_true, truth.id, pivot_params).welfare_star;
  const double u_truth =
      agent_utility_at_truth(econ_true, econ_true, k, params, w_without_k);

  const bool buyer = truth.is_buyer();
  const double base = buyer ? truth.a : truth.c;
  const double cap = buyer ? truth.cap_demand : truth.cap_supply;

  std::vector<GridGain> surface;
  surface.reserve(static_cast<std::size_t>(grid.intercept_points) *
                  grid.cap_points);
  EconomyInstance reported = econ_true;
  for (double delta : grid.intercept_deltas(base)) {
    for (double frac : grid.cap_fractions()) {
      AgentType& rag = reported.agents[k];
      rag = truth;
      if (buyer) {
        rag.a = base + delta;
        rag.cap_demand = frac * cap;
      } else {
        rag.c = base + delta;
        rag.cap_supply = frac * cap;
      }
      double u = agent_utility_at_truth(reported, econ_true, k, params,
                                        w_without_k);
      surface.push_back({delta, frac, u - u_truth});
    }
  }
  return surface;
}

DeviationReport best_deviation(const EconomyInstance& econ_true,
                               std::size_t k, const DeviationGrid& grid,
                               const ApproxParams& params, PivotMode pivot,
                               double C, double rho, double epsilon) {
  if (k >= econ_true.size())
    throw std::out_of_range("best_deviation: agent index out of range");
  const AgentType& truth = econ_true.agents[k];

  ApproxParams pivot_params = params;
  if (pivot == PivotMode::Exact) pivot_params.alpha = 1.0;
  const double w_without_k =
      allocation_without(econ_true, truth.id, pivot_params).welfare_star;

  DeviationReport rep;
  rep.agent = truth.id;
  rep.u_truth =
      agent_utility_at_truth(econ_true, econ_true, k, params, w_without_k);
  rep.gap_bound = (1.0 - params.alpha) * C;
  rep.threshold = penalty_threshold(params.alpha, C, rho);
  if (truth.is_null()) return rep;  // nothing to misreport

  double best_detectable = -std::numeric_limits<double>::infinity();
  bool any_detectable = false;
  for (const GridGain& g :
       deviation_gain_surface(econ_true, k, grid, params, pivot)) {
    if (g.gain > rep.gain) {
      rep.gain = g.gain;
      rep.best_intercept_delta = g.intercept_delta;
      rep.best_cap_fraction = g.cap_fraction;
    }
    if (std::abs(g.intercept_delta) > epsilon && g.gain > best_detectable) {
      best_detectable = g.gain;
      any_detectable = true;
      rep.detectable_intercept_delta = g.intercept_delta;
      rep.detectable_cap_fraction = g.cap_fraction;
    }
  }
  if (any_detectable) rep.detectable_gain = best_detectable;
  return rep;
}

LemmaGapReport verify_lemma_gap(const EconomySampler& sampler, int n_econ,
                                const std::vector<double>& alphas,
                                const ApproxParams& params,
                                const DeviationGrid& grid, PivotMode pivot,
                                double epsilon, std::uint64_t seed,
                                double tol) {
  LemmaGapReport report;
  report.economies = n_econ;

  RngStream c_rng = RngStream::keyed({seed, fnv1a("lemma-C")});
  report.C = marginal_contribution_C(sampler, n_econ, params, c_rng);

  for (double alpha : alphas) {
    LemmaGapReport::AlphaRow row;
    row.alpha = alpha;
    row.bound = (1.0 - alpha) * report.C;
    ApproxParams ap = params;
    ap.alpha = alpha;
    RngStream econ_rng = RngStream::keyed({seed, fnv1a("lemma-econ")});
    for (int s = 0; s < n_econ; ++s) {
      EconomyInstance econ = sampler.sample(econ_rng);
      for (std::size_t k = 0; k < econ.size(); ++k) {
        DeviationReport dev = best_deviation(econ, k, grid, ap, pivot,
                                             report.C, 1.0, epsilon);
        row.max_gain = std::max(row.max_gain, dev.gain);
        if (dev.detectable_gain)
          row.max_detectable_gain =
              std::max(row.max_detectable_gain, *dev.detectable_gain);
        if (dev.gain > row.bound + tol) {
          ++row.violations;
          if (report.ok) {
            report.ok = false;
            report.counterexample = econ;
            report.counterexample_alpha = alpha;
          }
        }
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

ThresholdReport verify_threshold(const EconomyInstance& econ_true,
                                 std::size_t k, const DeviationGrid& grid,
                                 const ApproxParams& params, PivotMode pivot,
                                 double C, double rho, double epsilon,
                                 const std::vector<double>& pi_grid, int n_mc,
                                 RngStream& rng) {
  if (n_mc < 100)
    throw std::invalid_argument("verify_threshold: need >= 100 MC samples");
  DeviationReport dev =
      best_deviation(econ_true, k, grid, params, pivot, C, rho, epsilon);

  ThresholdReport rep;
  rep.agent = dev.agent;
  rep.threshold = dev.threshold;
  if (!dev.detectable_gain) return rep;  // nothing the monitor could flag
  rep.gain = *dev.detectable_gain;

  for (double pi : pi_grid) {
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_mc; ++i) {
      double du = rep.gain - (rng.bernoulli(rho) ? pi : 0.0);
      sum += du;
      sum_sq += du * du;
    }
    ThresholdPoint pt;
    pt.pi = pi;
    pt.mean_delta_u = sum / n_mc;
    double var = std::max(sum_sq / n_mc - pt.mean_delta_u * pt.mean_delta_u,
                          0.0);
    pt.ci99 = 2.576 * std::sqrt(var / n_mc);
    pt.above_threshold = pi > rep.threshold;
    if (pt.above_threshold && !(pt.mean_delta_u + pt.ci99 < 0.0))
      rep.ok = false;
    rep.points.push_back(pt);
  }

  // Expected dU is linear in Pi with slope -rho; the crossing in closed
  // form is gain / rho, reported from the MC means for honesty.
  std::sort(rep.points.begin(), rep.points.end(),
            [](const ThresholdPoint& l, const ThresholdPoint& r) {
              return l.pi < r.pi;
            });
  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i) {
    const auto& lo = rep.points[i];
    const auto& hi = rep.points[i + 1];
    if (lo.mean_delta_u >= 0.0 && hi.mean_delta_u < 0.0) {
      double t = lo.mean_delta_u / (lo.mean_delta_u - hi.mean_delta_u);
      rep.empirical_crossing = lo.pi + t * (hi.pi - lo.pi);
      break;
    }
  }
  if (!rep.empirical_crossing && !rep.points.empty()) {
    if (rep.points.front().mean_delta_u < 0.0) rep.empirical_crossing = 0.0;
  }
  return rep;
}

}  // namespace pvl
