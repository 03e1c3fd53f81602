#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pvl/grid_sim.hpp"
#include "pvl/rng.hpp"

namespace pvl {

struct Linear {
  int in = 0, out = 0;
  std::vector<double> W;  // out x in, row-major
  std::vector<double> b;

  void init(int in_dim, int out_dim, double weight_scale, RngStream& rng);
  void forward(const double* x, double* y) const;
};

// Two hidden ReLU layers; shareable across agents.
struct Backbone {
  Linear l1, l2;
  int obs_dim = 0, hidden = 0;

  void init(int obs, int width, RngStream& rng);
};

// Per-agent output heads: 2-d Gaussian mean over raw (price, quantity),
// scalar value, and a learned per-dimension log-std.
struct PolicyHeads {
  Linear mu, value;
  std::vector<double> log_std;

  void init(int hidden, int act_dim, double log_std_init, RngStream& rng);
};

struct ForwardCache {
  std::vector<double> x, h1, a1, h2, a2;  // pre/post activations
  std::vector<double> mu;
  double value = 0.0;
};

struct PolicyNet {
  std::shared_ptr<Backbone> backbone;
  PolicyHeads heads;
  int act_dim = 2;

  // Deterministic forward pass; fills the cache when given.
  void forward(const std::vector<double>& obs, std::vector<double>& mu_out,
               double& value_out, ForwardCache* cache = nullptr) const;

  std::size_t parameter_count() const;
};

PolicyNet make_policy(int obs_dim, int hidden, int act_dim,
                      double log_std_init, std::uint64_t backbone_key,
                      std::uint64_t head_key,
                      std::shared_ptr<Backbone> shared = nullptr);

// Running per-dimension mean/std; frozen during evaluation.
class ObsNormalizer {
 public:
  explicit ObsNormalizer(int dim = 0);

  void update(const std::vector<double>& x);
  std::vector<double> normalize(const std::vector<double>& x) const;
  void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }

  int dim() const { return static_cast<int>(mean_.size()); }
  const std::vector<double>& mean() const { return mean_; }
  std::vector<double> stddev() const;
  double count() const { return count_; }
  void restore(std::vector<double> mean, std::vector<double> m2,
               double count);
  const std::vector<double>& m2() const { return m2_; }

 private:
  std::vector<double> mean_, m2_;
  double count_ = 0.0;
  bool frozen_ = false;
};

enum class SquashMode { Clamp, Tanh };

// Maps raw policy outputs to bounded environment actions. Raw zero lands on
// the midpoint of the price range and on zero quantity.
struct ActionMapper {
  double p_min = 0.0, p_max = 20.0, q_max = 5.0;
  SquashMode squash = SquashMode::Clamp;

  BidAction to_action(const double* raw) const;
  // log|d action/d raw| summed over dims; zero in clamp mode where the
  // pre-clamp density convention applies.
  double log_jacobian(const double* raw) const;
};

struct SampledAction {
  BidAction action;
  std::vector<double> raw;  // pre-squash sample, what PPO differentiates
  double log_prob = 0.0;
  double value = 0.0;
};

SampledAction sample_action(const PolicyNet& net, const ActionMapper& mapper,
                            const std::vector<double>& obs, RngStream& rng);

// Mean action without exploration noise, for policy-freeze evaluation.
BidAction mean_action(const PolicyNet& net, const ActionMapper& mapper,
                      const std::vector<double>& obs);

double gaussian_log_prob(const std::vector<double>& raw,
                         const std::vector<double>& mu,
                         const std::vector<double>& log_std);

}  // namespace pvl
