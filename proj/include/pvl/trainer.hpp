#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pvl/grid_sim.hpp"
#include "pvl/ppo.hpp"

namespace pvl {

// Type-draw ranges for environment prosumers. Curvatures are kept small so
// that marginal-value bids stay near intercepts relative to epsilon.
struct EnvEconomyConfig {
  int n_agents = 6;
  double a_lo = 8.0, a_hi = 12.0;
  double b_lo = 0.05, b_hi = 0.15;
  double c_lo = 2.0, c_hi = 6.0;
  double e_lo = 0.05, e_hi = 0.15;
  double cap = 5.0;
};

std::vector<AgentType> make_true_types(const EnvEconomyConfig& cfg,
                                       std::uint64_t seed,
                                       std::uint64_t run_id);

// Welfare-optimal commitment of each prosumer to one market side, used as
// the exact-oracle reference for distortion metrics. Enumerates all side
// assignments (n is small) and keeps the best.
struct SideReference {
  std::vector<Side> sides;
  double welfare_star = 0.0;
  double price_star = 0.0;
  EconomyInstance economy;  // the committed-side economy
};

SideReference best_side_assignment(const std::vector<AgentType>& types);

struct TrainingConfig {
  int episodes_train = 1280;
  int episodes_eval = 8;
  int eval_every = 64;
  int sustain_checkpoints = 20;
  double truth_target = 0.9;
};

// Everything the metric layer needs from policy-freeze evaluation runs.
struct EvalTraces {
  int n_agents = 0;
  double epsilon = 1.0;
  double welfare_star = 0.0;  // exact-oracle reference, fixed types
  double price_star = 0.0;
  struct Slot {
    std::vector<double> bid_price, bid_qty, v_prime, reward;
    std::vector<bool> deviated;
    std::vector<int> detected;
    double welfare_true = 0.0;  // realized allocation valued at true types
    double price = 0.0;
    double traded = 0.0;
  };
  std::vector<Slot> slots;
};

struct CheckpointMetrics {
  int episode = 0;
  double truth_frac = 0.0;
  double misreport_rate = 0.0;
  std::optional<double> welfare_distortion;
  double mean_reward = 0.0;
};

struct RunResult {
  std::vector<CheckpointMetrics> curve;
  CheckpointMetrics final_metrics;
  std::optional<int> convergence_episode;
  bool diverged = false;
};

// Scripted stand-ins for learned policies; sides follow the reference
// assignment.
enum class ScriptedKind { Truthful, Deviator, Zero };

BidProfile scripted_bids(const std::vector<AgentType>& types,
                         const SideReference& ref, ScriptedKind kind,
                         double epsilon);

// Independent (or shared-backbone) PPO over one environment instance;
// single-threaded and fully determined by (seed, run_id).
class Trainer {
 public:
  Trainer(EnvEconomyConfig econ_cfg, PhysicalParams phys,
          MechanismConfig mech, ApproxParams approx, PpoConfig ppo,
          TrainingConfig train_cfg, std::uint64_t seed, std::uint64_t run_id);

  RunResult train();
  EvalTraces evaluate(int episodes, std::uint64_t eval_tag);

  const std::vector<PolicyNet>& policies() const { return policies_; }
  std::vector<PolicyNet>& mutable_policies() { return policies_; }
  ObsNormalizer& normalizer() { return normalizer_; }
  const Environment& environment() const { return env_; }
  const SideReference& reference() const { return reference_; }

 private:
  EnvEconomyConfig econ_cfg_;
  PpoConfig ppo_;
  TrainingConfig train_cfg_;
  std::uint64_t seed_, run_id_;
  Environment env_;
  SideReference reference_;
  ActionMapper mapper_;
  std::vector<PolicyNet> policies_;
  std::vector<AdamState> adam_;
  ObsNormalizer normalizer_;
  AdamState backbone_adam_;

  void update_all(std::vector<std::vector<Transition>>& buffers,
                  bool& diverged, std::uint64_t update_index);
};

// Run evaluation episodes with fixed bid providers (scripted or frozen
// policies); shared by the trainer and the scripted metric paths.
EvalTraces run_eval_episodes(Environment& env, const SideReference& ref,
                             int episodes, std::uint64_t episode_offset,
                             const std::function<BidProfile(Environment&)>&
                                 bid_provider);

}  // namespace pvl
