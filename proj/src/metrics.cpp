#include "pvl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pvl {

namespace {
constexpr double kFloor = 1e-9;
}

double metric_truth_frac(const EvalTraces& traces, double eps) {
  if (traces.slots.empty())
    throw std::invalid_argument("metric_truth_frac: empty traces");
  long truthful = 0, total = 0;
  for (const auto& slot : traces.slots) {
    for (std::size_t k = 0; k < slot.bid_price.size(); ++k) {
      ++total;
      if (std::abs(slot.bid_price[k] - slot.v_prime[k]) <= eps) ++truthful;
    }
  }
  return static_cast<double>(truthful) / static_cast<double>(total);
}

double metric_misreport_rate(const EvalTraces& traces) {
  if (traces.slots.empty())
    throw std::invalid_argument("metric_misreport_rate: empty traces");
  long deviating = 0, active = 0;
  for (const auto& slot : traces.slots) {
    for (std::size_t k = 0; k < slot.bid_price.size(); ++k) {
      if (slot.bid_qty[k] == 0.0) continue;
      ++active;
      if (slot.deviated[k]) ++deviating;
    }
  }
  if (active == 0) return 0.0;
  return static_cast<double>(deviating) / static_cast<double>(active);
}

std::optional<double> metric_welfare_distortion(const EvalTraces& traces) {
  if (traces.slots.empty())
    throw std::invalid_argument("metric_welfare_distortion: empty traces");
  if (traces.welfare_star <= kFloor) return std::nullopt;
  double sum = 0.0;
  for (const auto& slot : traces.slots) {
    double d = (traces.welfare_star - slot.welfare_true) / traces.welfare_star;
    sum += std::clamp(d, 0.0, 1.0);
  }
  return sum / traces.slots.size();
}

std::optional<double> metric_price_distortion(const EvalTraces& traces) {
  if (traces.price_star <= kFloor) return std::nullopt;
  double sum = 0.0;
  long n = 0;
  for (const auto& slot : traces.slots) {
    if (slot.traded <= kFloor) continue;
    sum += std::abs(slot.price - traces.price_star) / traces.price_star;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double metric_mean_reward(const EvalTraces& traces) {
  double sum = 0.0;
  long n = 0;
  for (const auto& slot : traces.slots)
    for (double r : slot.reward) {
      sum += r;
      ++n;
    }
  return n > 0 ? sum / n : 0.0;
}

MetricsRecord compute_metrics(const EvalTraces& traces) {
  MetricsRecord rec;
  rec.truth_frac_eps = metric_truth_frac(traces, traces.epsilon);
  rec.misreport_rate = metric_misreport_rate(traces);
  rec.welfare_distortion = metric_welfare_distortion(traces);
  rec.price_distortion = metric_price_distortion(traces);
  rec.mean_reward = metric_mean_reward(traces);
  return rec;
}

}  // namespace pvl
