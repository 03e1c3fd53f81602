#include "pvl/trainer.hpp"

#include "pvl/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pvl {

std::vector<AgentType> make_true_types(const EnvEconomyConfig& cfg,
                                       std::uint64_t seed,
                                       std::uint64_t run_id) {
  std::vector<AgentType> types;
  types.reserve(cfg.n_agents);
  RngStream rng = RngStream::keyed({seed, run_id, fnv1a("true-types")});
  for (int k = 0; k < cfg.n_agents; ++k) {
    AgentType ag;
    ag.id = k;
    ag.role_hint = Role::Prosumer;
    ag.a = rng.uniform(cfg.a_lo, cfg.a_hi);
    ag.b = rng.uniform(cfg.b_lo, cfg.b_hi);
    ag.c = rng.uniform(cfg.c_lo, cfg.c_hi);
    ag.e = rng.uniform(cfg.e_lo, cfg.e_hi);
    ag.cap_demand = cfg.cap;
    ag.cap_supply = cfg.cap;
    types.push_back(ag);
  }
  return types;
}

SideReference best_side_assignment(const std::vector<AgentType>& types) {
  const std::size_t n = types.size();
  SideReference best;
  best.sides.assign(n, Side::None);
  best.welfare_star = 0.0;

  EconomyInstance econ;
  econ.agents = types;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    for (std::size_t k = 0; k < n; ++k) {
      AgentType& ag = econ.agents[k];
      ag = types[k];
      if (mask & (1ull << k)) {
        ag.cap_supply = 0.0;  // buyer
      } else {
        ag.cap_demand = 0.0;  // seller
      }
    }
    ClearingResult r = clear_exact(econ);
    if (r.welfare_star > best.welfare_star) {
      best.welfare_star = r.welfare_star;
      best.price_star = r.shadow_price;
      best.economy = econ;
      for (std::size_t k = 0; k < n; ++k)
        best.sides[k] = (mask & (1ull << k)) ? Side::Buyer : Side::Seller;
    }
  }
  if (best.economy.agents.empty()) {
    best.economy = econ;  // degenerate, keep last assignment with zero trade
    for (std::size_t k = 0; k < n; ++k) best.sides[k] = Side::Seller;
  }
  return best;
}

BidProfile scripted_bids(const std::vector<AgentType>& types,
                         const SideReference& ref, ScriptedKind kind,
                         double epsilon) {
  BidProfile bids(types.size());
  for (std::size_t k = 0; k < types.size(); ++k) {
    if (kind == ScriptedKind::Zero) {
      bids[k] = {true_marginal(types[k], 0.0), 0.0};
      continue;
    }
    double q = ref.sides[k] == Side::Buyer ? types[k].cap_demand
                                           : -types[k].cap_supply;
    double p = true_marginal(types[k], q);
    if (kind == ScriptedKind::Deviator) p += 2.0 * epsilon;
    bids[k] = {p, q};
  }
  return bids;
}

EvalTraces run_eval_episodes(Environment& env, const SideReference& ref,
                             int episodes, std::uint64_t episode_offset,
                             const std::function<BidProfile(Environment&)>&
                                 bid_provider) {
  EvalTraces traces;
  traces.n_agents = static_cast<int>(env.num_agents());
  traces.epsilon = env.mechanism().epsilon;
  traces.welfare_star = ref.welfare_star;
  traces.price_star = ref.price_star;

  const auto& types = env.true_types();
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(static_cast<int>(episode_offset) + ep);
    for (int t = 0; t < env.params().slots_per_episode; ++t) {
      BidProfile bids = bid_provider(env);
      SlotResult res = env.step(bids);

      EvalTraces::Slot slot;
      slot.welfare_true = 0.0;
      for (std::size_t k = 0; k < types.size(); ++k) {
        slot.bid_price.push_back(res.bids[k].price);
        slot.bid_qty.push_back(res.bids[k].quantity);
        slot.v_prime.push_back(res.detections[k].true_marginal);
        slot.deviated.push_back(res.detections[k].deviated);
        slot.detected.push_back(res.detections[k].detected);
        slot.reward.push_back(res.rewards[k]);
        const AgentOutcome& ao = res.outcome.agents[k];
        if (ao.side == Side::Buyer)
          slot.welfare_true += valuation(types[k], ao.quantity);
        else if (ao.side == Side::Seller)
          slot.welfare_true -= cost(types[k], ao.quantity);
      }
      slot.price = res.outcome.clearing_price;
      slot.traded = res.outcome.allocation.total();
      traces.slots.push_back(std::move(slot));
    }
  }
  return traces;
}

Trainer::Trainer(EnvEconomyConfig econ_cfg, PhysicalParams phys,
                 MechanismConfig mech, ApproxParams approx, PpoConfig ppo,
                 TrainingConfig train_cfg, std::uint64_t seed,
                 std::uint64_t run_id)
    : econ_cfg_(econ_cfg),
      ppo_(ppo),
      train_cfg_(train_cfg),
      seed_(seed),
      run_id_(run_id),
      env_(make_true_types(econ_cfg, seed, run_id), phys, mech, approx, seed,
           run_id),
      reference_(best_side_assignment(env_.true_types())),
      normalizer_(Observation::dimension(phys.history)) {
  ppo_.validate();
  mapper_.p_min = phys.p_min;
  mapper_.p_max = phys.p_max;
  mapper_.q_max = phys.q_max;
  mapper_.squash = ppo_.squash;

  const int obs_dim = Observation::dimension(phys.history);
  const std::size_t n = env_.num_agents();
  std::shared_ptr<Backbone> shared;
  if (ppo_.sharing == Sharing::SharedBackbone) {
    PolicyNet proto = make_policy(obs_dim, ppo_.hidden, 2, ppo_.log_std_init,
                                  mix64(seed ^ run_id), 0);
    shared = proto.backbone;
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t head_key = RngStream::keyed({seed, run_id, k,
                                               fnv1a("head-key")}).next();
    std::uint64_t bb_key = RngStream::keyed({seed, run_id, k,
                                             fnv1a("backbone-key")}).next();
    policies_.push_back(make_policy(obs_dim, ppo_.hidden, 2,
                                    ppo_.log_std_init, bb_key, head_key,
                                    shared));
    AdamState st;
    st.init_like(policies_.back());
    adam_.push_back(std::move(st));
  }
  if (shared) backbone_adam_.init_like(policies_.front());
}

void Trainer::update_all(std::vector<std::vector<Transition>>& buffers,
                         bool& diverged, std::uint64_t update_index) {
  const std::size_t n = policies_.size();
  if (ppo_.sharing == Sharing::Independent) {
    for (std::size_t k = 0; k < n; ++k) {
      RngStream shuffle = RngStream::keyed(
          {seed_, run_id_, update_index, k, fnv1a("shuffle")});
      UpdateDiag diag =
          ppo_update(policies_[k], adam_[k], buffers[k], ppo_, shuffle);
      if (diag.aborted) diverged = true;
    }
    return;
  }

  // Shared backbone: heads step per agent, backbone gradients pool across
  // agents and step once per minibatch round.
  std::vector<GaeResult> gae(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> rewards, values;
    std::vector<bool> dones;
    for (const Transition& tr : buffers[k]) {
      rewards.push_back(tr.reward);
      values.push_back(tr.value);
      dones.push_back(tr.done);
    }
    gae[k] = compute_gae(rewards, values, dones, ppo_.gamma, ppo_.gae_lambda,
                         0.0);
    double mean = 0.0, sq = 0.0;
    for (double a : gae[k].advantages) mean += a;
    mean /= gae[k].advantages.size();
    for (double a : gae[k].advantages) sq += (a - mean) * (a - mean);
    double sd = std::sqrt(sq / gae[k].advantages.size()) + 1e-8;
    for (double& a : gae[k].advantages) a = (a - mean) / sd;
  }

  const int batch = static_cast<int>(buffers[0].size());
  const int mb_size = std::max(1, batch / ppo_.minibatches);
  std::vector<std::vector<int>> order(n);
  for (std::size_t k = 0; k < n; ++k) {
    order[k].resize(batch);
    for (int i = 0; i < batch; ++i) order[k][i] = i;
  }

  PolicyGrads agent_grads, pooled;
  for (int epoch = 0; epoch < ppo_.epochs; ++epoch) {
    for (std::size_t k = 0; k < n; ++k) {
      RngStream shuffle = RngStream::keyed({seed_, run_id_, update_index,
                                            static_cast<std::uint64_t>(epoch),
                                            k, fnv1a("shuffle")});
      for (std::size_t i = order[k].size(); i > 1; --i)
        std::swap(order[k][i - 1], order[k][shuffle.below(i)]);
    }
    for (int start = 0; start < batch; start += mb_size) {
      int end = std::min(batch, start + mb_size);
      pooled.zero_like(policies_[0]);
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<int> mb(order[k].begin() + start, order[k].begin() + end);
        agent_grads.zero_like(policies_[k]);
        UpdateDiag diag = accumulate_ppo_gradients(
            policies_[k], buffers[k], gae[k].advantages, gae[k].returns, mb,
            ppo_, agent_grads);
        if (diag.aborted) {
          diverged = true;
          return;
        }
        clip_grad_norm(agent_grads, ppo_.max_grad_norm);
        adam_[k].step(policies_[k], agent_grads, ppo_.lr,
                      /*update_backbone=*/false, /*update_heads=*/true,
                      ppo_.learn_std);
        for (std::size_t p = 0; p < pooled.w1.size(); ++p)
          pooled.w1[p] += agent_grads.w1[p];
        for (std::size_t p = 0; p < pooled.b1.size(); ++p)
          pooled.b1[p] += agent_grads.b1[p];
        for (std::size_t p = 0; p < pooled.w2.size(); ++p)
          pooled.w2[p] += agent_grads.w2[p];
        for (std::size_t p = 0; p < pooled.b2.size(); ++p)
          pooled.b2[p] += agent_grads.b2[p];
      }
      pooled.scale(1.0 / static_cast<double>(n));
      backbone_adam_.step(policies_[0], pooled, ppo_.lr,
                          /*update_backbone=*/true, /*update_heads=*/false,
                          false);
    }
  }
}

EvalTraces Trainer::evaluate(int episodes, std::uint64_t eval_tag) {
  bool was_frozen = normalizer_.frozen();
  normalizer_.set_frozen(true);
  auto provider = [this](Environment& env) {
    BidProfile bids(env.num_agents());
    for (std::size_t k = 0; k < env.num_agents(); ++k) {
      std::vector<double> obs =
          normalizer_.normalize(env.observe_agent(k).to_vector());
      bids[k] = mean_action(policies_[k], mapper_, obs);
    }
    return bids;
  };
  EvalTraces traces =
      run_eval_episodes(env_, reference_, episodes,
                        1000000ull + eval_tag * 1000ull, provider);
  normalizer_.set_frozen(was_frozen);
  return traces;
}

RunResult Trainer::train() {
  RunResult result;
  const std::size_t n = env_.num_agents();
  std::vector<std::vector<Transition>> buffers(n);
  std::uint64_t updates = 0;
  int sustained = 0;

  for (int episode = 0; episode < train_cfg_.episodes_train; ++episode) {
    env_.reset(episode);
    for (int t = 0; t < env_.params().slots_per_episode; ++t) {
      BidProfile bids(n);
      std::vector<Transition> pending(n);
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> raw_obs = env_.observe_agent(k).to_vector();
        normalizer_.update(raw_obs);
        std::vector<double> obs = normalizer_.normalize(raw_obs);
        RngStream act_rng = env_.stream(k, "act");
        SampledAction sa = sample_action(policies_[k], mapper_, obs, act_rng);
        pending[k].obs = std::move(obs);
        pending[k].raw_action = sa.raw;
        pending[k].log_prob = sa.log_prob;
        pending[k].value = sa.value;
        pending[k].done = (t + 1 == env_.params().slots_per_episode);
        bids[k] = sa.action;
      }
      SlotResult res = env_.step(bids);
      for (std::size_t k = 0; k < n; ++k) {
        pending[k].reward = res.rewards[k];
        buffers[k].push_back(std::move(pending[k]));
      }
    }

    if (static_cast<int>(buffers[0].size()) >= ppo_.batch_size) {
      update_all(buffers, result.diverged, updates++);
      for (auto& buf : buffers) buf.clear();
      if (result.diverged) break;
    }

    if ((episode + 1) % train_cfg_.eval_every == 0) {
      EvalTraces traces = evaluate(
          train_cfg_.episodes_eval,
          static_cast<std::uint64_t>(episode + 1) / train_cfg_.eval_every);
      CheckpointMetrics cm;
      cm.episode = episode + 1;
      cm.truth_frac = metric_truth_frac(traces, traces.epsilon);
      cm.misreport_rate = metric_misreport_rate(traces);
      cm.welfare_distortion = metric_welfare_distortion(traces);
      cm.mean_reward = metric_mean_reward(traces);
      result.curve.push_back(cm);

      if (cm.truth_frac >= train_cfg_.truth_target) {
        ++sustained;
        if (sustained >= train_cfg_.sustain_checkpoints &&
            !result.convergence_episode) {
          int idx = static_cast<int>(result.curve.size()) -
                    train_cfg_.sustain_checkpoints;
          result.convergence_episode = result.curve[idx].episode;
        }
      } else {
        sustained = 0;
        result.convergence_episode.reset();
      }
    }
  }

  if (!result.curve.empty()) result.final_metrics = result.curve.back();
  return result;
}

}  // namespace pvl
