#pragma once

#include "pvl/market.hpp"

namespace pvl {

// Result of one market clearing. `shadow_price` is the uniform price at
// which aggregate demand meets aggregate supply; `welfare_star` is the
// welfare of the returned allocation (the optimum for clear_exact, the
// scaled value for clear_alpha).
struct ClearingResult {
  Allocation allocation;
  double shadow_price = 0.0;
  double welfare_star = 0.0;
  int iterations = 0;
};

struct ApproxParams {
  double alpha = 1.0;
  double scale_tolerance = 1e-6;
  int max_bisect_iters = 200;
};

// Exact welfare-maximizing clearing: bisect the price until excess demand
// vanishes, ration flat (zero-curvature) segments proportionally, then
// spread the cleared total over seller-buyer pairs proportionally to each
// side's individual quantity. No gains from trade is a zero-trade result,
// not an error.
ClearingResult clear_exact(const EconomyInstance& econ);

// Scale the exact allocation by s in [0,1] so the scaled welfare hits
// alpha * W_star within scale_tolerance (relative). W_star = 0 maps to the
// zero allocation for every alpha.
ClearingResult clear_alpha(const EconomyInstance& econ,
                           const ApproxParams& params);

// clear_alpha on the economy with agent `excluded_id` removed (caps nulled,
// indices preserved). Removing the only active side yields zero trade.
ClearingResult allocation_without(const EconomyInstance& econ,
                                  int excluded_id,
                                  const ApproxParams& params);

}  // namespace pvl
