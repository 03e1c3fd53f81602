#pragma once

#include <optional>
#include <vector>

#include "pvl/enforcement.hpp"
#include "pvl/mechanism.hpp"
#include "pvl/rng.hpp"

namespace pvl {

// Random small economies for property sweeps. Buyers and sellers are drawn
// with distinct intercept ranges so gains from trade are generic; a small
// share of agents gets zero curvature to exercise flat-segment handling.
struct EconomySampler {
  int min_agents = 2;
  int max_agents = 4;
  double a_lo = 6.0, a_hi = 14.0;
  double b_lo = 0.5, b_hi = 2.0;
  double c_lo = 1.0, c_hi = 5.0;
  double e_lo = 0.5, e_hi = 2.0;
  double cap_lo = 1.0, cap_hi = 5.0;
  double flat_prob = 0.1;      // chance an agent has zero curvature
  double no_trade_prob = 0.0;  // chance of an intentionally gapped economy

  EconomyInstance sample(RngStream& rng) const;
};

// Report grid for unilateral deviation searches: intercept misreports
// spanning +-intercept_span of the true value crossed with quantity-cap
// fractions.
struct DeviationGrid {
  int intercept_points = 41;
  double intercept_span = 0.5;
  int cap_points = 11;
  double cap_lo = 0.5;
  double cap_hi = 1.5;

  std::vector<double> intercept_deltas(double base) const;
  std::vector<double> cap_fractions() const;
};

struct DeviationReport {
  int agent = 0;
  double u_truth = 0.0;
  double best_intercept_delta = 0.0;
  double best_cap_fraction = 1.0;
  double gain = 0.0;  // u_dev - u_truth over the whole grid, >= 0 by grid
  // Best among reports whose intercept shift exceeds epsilon (the only ones
  // the monitor can flag); empty when the grid has no such points.
  std::optional<double> detectable_gain;
  double detectable_intercept_delta = 0.0;
  double detectable_cap_fraction = 1.0;
  double gap_bound = 0.0;   // (1 - alpha) * C
  double threshold = 0.0;   // (1 - alpha) * C / rho
};

// Empirical Assumption-1 constant: max over sampled economies and agents of
// |W* - W*_{-k}| under the exact allocator. Warns on a degenerate sampler.
double marginal_contribution_C(const EconomySampler& sampler, int n_samples,
                               const ApproxParams& params, RngStream& rng);

// Utility gain of every grid misreport for agent k, others truthful.
struct GridGain {
  double intercept_delta = 0.0;
  double cap_fraction = 1.0;
  double gain = 0.0;  // u_dev - u_truth at true types
};

std::vector<GridGain> deviation_gain_surface(const EconomyInstance& econ_true,
                                             std::size_t k,
                                             const DeviationGrid& grid,
                                             const ApproxParams& params,
                                             PivotMode pivot);

// Exhaustive unilateral deviation search for agent k over the report grid,
// others truthful. `epsilon` marks which misreports count as detectable.
DeviationReport best_deviation(const EconomyInstance& econ_true,
                               std::size_t k, const DeviationGrid& grid,
                               const ApproxParams& params, PivotMode pivot,
                               double C, double rho, double epsilon);

struct LemmaGapReport {
  struct AlphaRow {
    double alpha = 0.0;
    double max_gain = 0.0;
    double bound = 0.0;
    double max_detectable_gain = 0.0;
    int violations = 0;
  };
  std::vector<AlphaRow> rows;
  double C = 0.0;
  int economies = 0;
  bool ok = true;
  std::optional<EconomyInstance> counterexample;
  double counterexample_alpha = 0.0;
};

LemmaGapReport verify_lemma_gap(const EconomySampler& sampler, int n_econ,
                                const std::vector<double>& alphas,
                                const ApproxParams& params,
                                const DeviationGrid& grid, PivotMode pivot,
                                double epsilon, std::uint64_t seed,
                                double tol = 1e-6);

struct ThresholdPoint {
  double pi = 0.0;
  double mean_delta_u = 0.0;
  double ci99 = 0.0;
  bool above_threshold = false;
};

struct ThresholdReport {
  int agent = 0;
  double gain = 0.0;       // best detectable deviation gain
  double threshold = 0.0;  // analytic (1 - alpha) C / rho
  std::vector<ThresholdPoint> points;
  std::optional<double> empirical_crossing;  // smallest Pi with E[dU] < 0
  bool ok = true;  // every above-threshold point has dU < 0 at 99% CI
};

// Monte-Carlo expected deviation gain dU = gain - freq(detect) * Pi for the
// best detectable deviation, over a penalty grid. Asserts the Theorem-1
// sign: dU < 0 (99% CI) whenever Pi exceeds the analytic threshold.
ThresholdReport verify_threshold(const EconomyInstance& econ_true,
                                 std::size_t k, const DeviationGrid& grid,
                                 const ApproxParams& params, PivotMode pivot,
                                 double C, double rho, double epsilon,
                                 const std::vector<double>& pi_grid, int n_mc,
                                 RngStream& rng);

}  // namespace pvl
