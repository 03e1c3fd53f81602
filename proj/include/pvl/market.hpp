#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvl {

enum class Role { Buyer, Seller, Prosumer };

// Private type of one prosumer: quadratic-truncated valuation on the demand
// side, quadratic cost on the supply side, finite capacities on both.
struct AgentType {
  int id = 0;
  Role role_hint = Role::Prosumer;
  double a = 0.0;           // marginal-value intercept
  double b = 0.0;           // value curvature, >= 0
  double c = 0.0;           // marginal-cost intercept
  double e = 0.0;           // cost curvature, >= 0
  double cap_demand = 0.0;  // d_j
  double cap_supply = 0.0;  // s_i

  bool is_buyer() const { return cap_demand > 0.0; }
  bool is_seller() const { return cap_supply > 0.0; }
  bool is_null() const { return !is_buyer() && !is_seller(); }
};

// All agents' types for one trading slot.
struct EconomyInstance {
  std::vector<AgentType> agents;
  int slot = 0;

  std::size_t size() const { return agents.size(); }
};

struct FeasibilityError : std::runtime_error {
  explicit FeasibilityError(const std::string& what)
      : std::runtime_error(what) {}
};

// Seller-by-buyer quantity matrix over all agent indices; rows are supply,
// columns are demand. Kept square so agent indices stay stable everywhere.
class Allocation {
 public:
  Allocation() = default;
  explicit Allocation(std::size_t n) : n_(n), x_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& at(std::size_t seller, std::size_t buyer) {
    return x_[seller * n_ + buyer];
  }
  double at(std::size_t seller, std::size_t buyer) const {
    return x_[seller * n_ + buyer];
  }

  double row_sum(std::size_t seller) const;  // total sold by `seller`
  double col_sum(std::size_t buyer) const;   // total bought by `buyer`
  double total() const;

  Allocation scaled(double s) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> x_;
};

// a*min(q, a/b) - b*min(q, a/b)^2/2 for b > 0 (plateau at q = a/b), a*q for
// b = 0. Throws std::domain_error on q < 0.
double valuation(const AgentType& agent, double q);

// c*q + e*q^2/2. Throws std::domain_error on q < 0.
double cost(const AgentType& agent, double q);

// Throws FeasibilityError naming the violated constraint.
void check_feasible(const EconomyInstance& econ, const Allocation& alloc,
                    double tol = 1e-9);

// Social welfare: sum of buyer valuations at column totals minus seller
// costs at row totals. Verifies feasibility first.
double welfare(const EconomyInstance& econ, const Allocation& alloc);

// Structural validation for an economy entering the clearing pipeline:
// unique ids, non-negative parameters/caps, and at most one active side per
// agent (a prosumer commits to one side per slot before clearing).
void validate_for_clearing(const EconomyInstance& econ);

}  // namespace pvl
