#include "pvl/mechanism.hpp"

#include <cmath>
#include <stdexcept>

namespace pvl {

namespace {

Side side_of(const AgentType& ag) {
  if (ag.is_buyer()) return Side::Buyer;
  if (ag.is_seller()) return Side::Seller;
  return Side::None;
}

}  // namespace

MarketOutcome settle(const EconomyInstance& reported,
                     const ApproxParams& params, PivotMode pivot) {
  ClearingResult cleared = clear_alpha(reported, params);
  const double w = cleared.welfare_star;

  ApproxParams pivot_params = params;
  if (pivot == PivotMode::Exact) pivot_params.alpha = 1.0;

  MarketOutcome out;
  out.allocation = cleared.allocation;
  out.welfare = w;
  out.clearing_price = cleared.shadow_price;
  out.agents.resize(reported.size());

  double buyer_payments = 0.0;
  double seller_receipts = 0.0;
  for (std::size_t k = 0; k < reported.size(); ++k) {
    const AgentType& ag = reported.agents[k];
    AgentOutcome& ao = out.agents[k];
    ao.side = side_of(ag);
    if (ao.side == Side::None) continue;  // zero externality, zero payment

    double w_without =
        allocation_without(reported, ag.id, pivot_params).welfare_star;
    if (ao.side == Side::Buyer) {
      ao.quantity = cleared.allocation.col_sum(k);
      double v = valuation(ag, ao.quantity);
      ao.payment = w_without - (w - v);
      ao.utility = v - ao.payment;
      buyer_payments += ao.payment;
    } else {
      ao.quantity = cleared.allocation.row_sum(k);
      double c = cost(ag, ao.quantity);
      ao.payment = (w + c) - w_without;
      ao.utility = ao.payment - c;
      seller_receipts += ao.payment;
    }
  }
  out.budget_imbalance = buyer_payments - seller_receipts;
  return out;
}

double utility_at_truth(const EconomyInstance& truth,
                        const MarketOutcome& outcome, std::size_t k) {
  if (k >= truth.size() || k >= outcome.agents.size())
    throw std::out_of_range("utility_at_truth: agent index out of range");
  const AgentOutcome& ao = outcome.agents[k];
  const AgentType& ag = truth.agents[k];
  switch (ao.side) {
    case Side::Buyer:
      return valuation(ag, ao.quantity) - ao.payment;
    case Side::Seller:
      return ao.payment - cost(ag, ao.quantity);
    case Side::None:
      return -ao.payment;
  }
  return 0.0;
}

double agent_utility_at_truth(const EconomyInstance& reported,
                              const EconomyInstance& truth, std::size_t k,
                              const ApproxParams& params,
                              double welfare_without_k) {
  ClearingResult cleared = clear_alpha(reported, params);
  const AgentType& rep = reported.agents[k];
  const AgentType& tru = truth.agents[k];
  const double w = cleared.welfare_star;
  if (rep.is_buyer()) {
    double q = cleared.allocation.col_sum(k);
    double payment = welfare_without_k - (w - valuation(rep, q));
    return valuation(tru, q) - payment;
  }
  if (rep.is_seller()) {
    double q = cleared.allocation.row_sum(k);
    double payment = (w + cost(rep, q)) - welfare_without_k;
    return payment - cost(tru, q);
  }
  return 0.0;
}

}  // namespace pvl
