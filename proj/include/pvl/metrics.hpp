#pragma once

#include <optional>

#include "pvl/trainer.hpp"

namespace pvl {

// Fraction of (agent, slot) bids whose price lies within eps of the true
// marginal at the bid quantity, over all evaluation slots.
double metric_truth_frac(const EvalTraces& traces, double eps);

// Deviating fraction among active bids (nonzero quantity); vacuous null
// bids are not counted as misreports.
double metric_misreport_rate(const EvalTraces& traces);

// Mean over slots of (W* - W_realized) / W*, realized welfare valued at
// true types; floored at zero. Empty when the reference admits no trade.
std::optional<double> metric_welfare_distortion(const EvalTraces& traces);

// Mean relative clearing-price gap versus the reference price, over slots
// where trade happened.
std::optional<double> metric_price_distortion(const EvalTraces& traces);

double metric_mean_reward(const EvalTraces& traces);

struct MetricsRecord {
  double truth_frac_eps = 0.0;
  double misreport_rate = 0.0;
  std::optional<double> welfare_distortion;
  std::optional<double> price_distortion;
  double mean_reward = 0.0;
};

MetricsRecord compute_metrics(const EvalTraces& traces);

}  // namespace pvl
