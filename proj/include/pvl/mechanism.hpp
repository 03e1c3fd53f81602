#pragma once

#include "pvl/allocator.hpp"
#include "pvl/market.hpp"

namespace pvl {

// Whether pivot welfares W_{-k} run through the same alpha-approximate
// allocator as the main allocation or through the exact one.
enum class PivotMode { Approx, Exact };

enum class Side { None, Buyer, Seller };

struct AgentOutcome {
  Side side = Side::None;
  double quantity = 0.0;  // traded energy on the agent's side
  double payment = 0.0;   // buyers pay positive, sellers receive positive
  double utility = 0.0;   // quasi-linear utility at reported types
};

struct MarketOutcome {
  Allocation allocation;
  std::vector<AgentOutcome> agents;
  double welfare = 0.0;
  double clearing_price = 0.0;
  double budget_imbalance = 0.0;  // sum of buyer payments - seller receipts
};

// Clarke-pivot payments on the alpha-approximate allocation. Buyer j pays
// W_{-j} - (W - v_j(x_j)); seller i receives (W + c_i(x_i)) - W_{-i}. All
// terms are evaluated at reported types; null agents pay exactly zero.
MarketOutcome settle(const EconomyInstance& reported,
                     const ApproxParams& params,
                     PivotMode pivot = PivotMode::Approx);

// Utility of agent k under its true type, holding the outcome's allocation,
// side, and payment fixed. This is the u_k entering the penalty ledger.
double utility_at_truth(const EconomyInstance& truth,
                        const MarketOutcome& outcome, std::size_t k);

// Fast path for deviation searches: utility of the single agent `k` under
// its true type when `reported` is cleared, reusing a precomputed pivot
// welfare W_{-k} (which does not depend on k's own report).
double agent_utility_at_truth(const EconomyInstance& reported,
                              const EconomyInstance& truth, std::size_t k,
                              const ApproxParams& params,
                              double welfare_without_k);

}  // namespace pvl
