#include "pvl/market.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pvl {

double Allocation::row_sum(std::size_t seller) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) s += x_[seller * n_ + j];
  return s;
}

double Allocation::col_sum(std::size_t buyer) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += x_[i * n_ + buyer];
  return s;
}

double Allocation::total() const {
  double s = 0.0;
  for (double v : x_) s += v;
  return s;
}

Allocation Allocation::scaled(double s) const {
  Allocation out(n_);
  for (std::size_t k = 0; k < x_.size(); ++k) out.x_[k] = x_[k] * s;
  return out;
}

double valuation(const AgentType& agent, double q) {
  if (q < 0.0) throw std::domain_error("valuation: negative quantity");
  if (agent.b > 0.0) {
    double plateau = std::max(agent.a, 0.0) / agent.b;
    double qe = std::min(q, plateau);
    return agent.a * qe - agent.b * qe * qe / 2.0;
  }
  return agent.a * q;
}

double cost(const AgentType& agent, double q) {
  if (q < 0.0) throw std::domain_error("cost: negative quantity");
  return agent.c * q + agent.e * q * q / 2.0;
}

void check_feasible(const EconomyInstance& econ, const Allocation& alloc,
                    double tol) {
  const std::size_t n = econ.size();
  if (alloc.size() != n)
    throw FeasibilityError("allocation size does not match economy size");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (alloc.at(i, j) < -tol)
        throw FeasibilityError("negative allocation entry x[" +
                               std::to_string(i) + "][" + std::to_string(j) +
                               "]");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sold = alloc.row_sum(i);
    if (sold > econ.agents[i].cap_supply + tol)
      throw FeasibilityError("supply cap violated for agent " +
                             std::to_string(econ.agents[i].id) + ": " +
                             std::to_string(sold) + " > s_i=" +
                             std::to_string(econ.agents[i].cap_supply));
  }
  for (std::size_t j = 0; j < n; ++j) {
    double bought = alloc.col_sum(j);
    if (bought > econ.agents[j].cap_demand + tol)
      throw FeasibilityError("demand cap violated for agent " +
                             std::to_string(econ.agents[j].id) + ": " +
                             std::to_string(bought) + " > d_j=" +
                             std::to_string(econ.agents[j].cap_demand));
  }
}

double welfare(const EconomyInstance& econ, const Allocation& alloc) {
  check_feasible(econ, alloc);
  double w = 0.0;
  for (std::size_t k = 0; k < econ.size(); ++k) {
    const AgentType& ag = econ.agents[k];
    if (ag.is_buyer()) w += valuation(ag, std::max(alloc.col_sum(k), 0.0));
    if (ag.is_seller()) w -= cost(ag, std::max(alloc.row_sum(k), 0.0));
  }
  return w;
}

void validate_for_clearing(const EconomyInstance& econ) {
  std::set<int> ids;
  for (const AgentType& ag : econ.agents) {
    if (!ids.insert(ag.id).second)
      throw std::invalid_argument("duplicate agent id " +
                                  std::to_string(ag.id));
    if (ag.b < 0.0 || ag.e < 0.0)
      throw std::invalid_argument("negative curvature for agent " +
                                  std::to_string(ag.id));
    if (ag.cap_demand < 0.0 || ag.cap_supply < 0.0)
      throw std::invalid_argument("negative capacity for agent " +
                                  std::to_string(ag.id));
    if (ag.is_buyer() && ag.is_seller())
      throw std::invalid_argument(
          "agent " + std::to_string(ag.id) +
          " has both caps positive; one side per clearing");
  }
}

}  // namespace pvl
