#pragma once

#include <vector>

#include "pvl/policy.hpp"
#include "pvl/rng.hpp"

namespace pvl {

enum class Sharing { Independent, SharedBackbone };

struct PpoConfig {
  double lr = 3e-4;
  double gamma = 0.95;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int batch_size = 768;
  int epochs = 4;
  int minibatches = 4;
  int hidden = 64;
  Sharing sharing = Sharing::Independent;
  SquashMode squash = SquashMode::Clamp;
  double log_std_init = -0.7;
  bool learn_std = true;

  void validate() const;
};

struct Transition {
  std::vector<double> obs;  // normalized observation fed to the net
  std::vector<double> raw_action;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Standard GAE recursion over an aligned trajectory; `bootstrap_value`
// continues the value past the final transition unless it is terminal.
GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<bool>& dones, double gamma,
                      double lambda, double bootstrap_value);

// Gradient buffer mirroring a policy's parameters.
struct PolicyGrads {
  std::vector<double> w1, b1, w2, b2, wmu, bmu, wv, bv, log_std;

  void zero_like(const PolicyNet& net);
  void scale(double s);
  double squared_norm() const;
};

// Adam state for one policy (backbone + heads). In shared-backbone mode the
// backbone slice of one designated state advances the shared block.
class AdamState {
 public:
  void init_like(const PolicyNet& net);
  void step(PolicyNet& net, const PolicyGrads& grads, double lr,
            bool update_backbone, bool update_heads, bool update_std);

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  Moments w1_, b1_, w2_, b2_, wmu_, bmu_, wv_, bv_, log_std_;
  long t_ = 0;

  static void apply(std::vector<double>& params, const std::vector<double>& g,
                    Moments& mom, double lr, double bias1, double bias2);
};

struct UpdateDiag {
  double pg_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  bool aborted = false;  // non-finite loss encountered
};

// Accumulates clipped-surrogate + value + entropy gradients for one agent's
// batch into `grads` (normalized advantages computed over the whole batch).
// Does not step the optimizer; the trainer owns stepping so the shared
// backbone can pool gradients across agents.
UpdateDiag accumulate_ppo_gradients(const PolicyNet& net,
                                    const std::vector<Transition>& batch,
                                    const std::vector<double>& advantages,
                                    const std::vector<double>& returns,
                                    const std::vector<int>& indices,
                                    const PpoConfig& cfg, PolicyGrads& grads);

// Full PPO update for a single agent: epochs x minibatches over its batch,
// Adam step after each minibatch. Returns diagnostics of the last pass.
UpdateDiag ppo_update(PolicyNet& net, AdamState& adam,
                      const std::vector<Transition>& batch,
                      const PpoConfig& cfg, RngStream& shuffle_rng,
                      double bootstrap_value = 0.0);

void clip_grad_norm(PolicyGrads& grads, double max_norm);

}  // namespace pvl
