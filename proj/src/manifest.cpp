#include "pvl/manifest.hpp"

#include "pvl/json_io.hpp"

#include <set>
#include <sstream>

namespace pvl {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object())
    throw std::invalid_argument("manifest: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::invalid_argument("manifest: unknown key '" + it.key() +
                                  "' in " + where);
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void get_opt(const json& j, const char* key, std::optional<double>& out) {
  if (j.contains(key) && !j.at(key).is_null())
    out = j.at(key).get<double>();
}

DetectionMode detection_mode_from(const std::string& s) {
  if (s == "direct-rho") return DetectionMode::DirectRho;
  if (s == "noise-induced") return DetectionMode::NoiseInduced;
  throw std::invalid_argument("manifest: detection_mode must be 'direct-rho' "
                              "or 'noise-induced', got '" + s + "'");
}

std::string detection_mode_name(DetectionMode m) {
  return m == DetectionMode::DirectRho ? "direct-rho" : "noise-induced";
}

PivotMode pivot_from(const std::string& s) {
  if (s == "approx") return PivotMode::Approx;
  if (s == "exact") return PivotMode::Exact;
  throw std::invalid_argument("manifest: pivot must be 'approx' or 'exact'");
}

void parse_mechanism(const json& j, MechanismConfig& m) {
  require_keys(j, "mechanism",
               {"alpha", "epsilon", "rho", "penalty", "monitor_noise_sigma",
                "detection_mode", "pivot"});
  get_if(j, "alpha", m.alpha);
  get_if(j, "epsilon", m.epsilon);
  get_if(j, "rho", m.rho);
  get_if(j, "penalty", m.penalty);
  get_if(j, "monitor_noise_sigma", m.monitor_noise_sigma);
  if (j.contains("detection_mode"))
    m.detection_mode = detection_mode_from(j.at("detection_mode"));
  if (j.contains("pivot")) m.pivot = pivot_from(j.at("pivot"));
  m.validate();
}

void parse_approx(const json& j, ApproxParams& a) {
  require_keys(j, "approx", {"scale_tolerance", "max_bisect_iters"});
  get_if(j, "scale_tolerance", a.scale_tolerance);
  get_if(j, "max_bisect_iters", a.max_bisect_iters);
}

void parse_physical(const json& j, PhysicalParams& p) {
  require_keys(j, "physical",
               {"baseline_load", "baseline_load_spread", "solar_peak",
                "solar_peak_spread", "daylight_start", "daylight_end",
                "load_noise_sigma", "gen_noise_sigma", "soc_capacity",
                "charge_efficiency", "slot_hours", "slots_per_episode",
                "history", "ar1_coeff", "p_min", "p_max", "q_max"});
  get_if(j, "baseline_load", p.baseline_load);
  get_if(j, "baseline_load_spread", p.baseline_load_spread);
  get_if(j, "solar_peak", p.solar_peak);
  get_if(j, "solar_peak_spread", p.solar_peak_spread);
  get_if(j, "daylight_start", p.daylight_start);
  get_if(j, "daylight_end", p.daylight_end);
  get_if(j, "load_noise_sigma", p.load_noise_sigma);
  get_if(j, "gen_noise_sigma", p.gen_noise_sigma);
  get_if(j, "soc_capacity", p.soc_capacity);
  get_if(j, "charge_efficiency", p.charge_efficiency);
  get_if(j, "slot_hours", p.slot_hours);
  get_if(j, "slots_per_episode", p.slots_per_episode);
  get_if(j, "history", p.history);
  get_if(j, "ar1_coeff", p.ar1_coeff);
  get_if(j, "p_min", p.p_min);
  get_if(j, "p_max", p.p_max);
  get_if(j, "q_max", p.q_max);
  p.validate();
}

void parse_economy(const json& j, EnvEconomyConfig& e) {
  require_keys(j, "economy", {"n_agents", "a_lo", "a_hi", "b_lo", "b_hi",
                              "c_lo", "c_hi", "e_lo", "e_hi", "cap"});
  get_if(j, "n_agents", e.n_agents);
  get_if(j, "a_lo", e.a_lo);
  get_if(j, "a_hi", e.a_hi);
  get_if(j, "b_lo", e.b_lo);
  get_if(j, "b_hi", e.b_hi);
  get_if(j, "c_lo", e.c_lo);
  get_if(j, "c_hi", e.c_hi);
  get_if(j, "e_lo", e.e_lo);
  get_if(j, "e_hi", e.e_hi);
  get_if(j, "cap", e.cap);
  if (e.n_agents < 2 || e.n_agents > 16)
    throw std::invalid_argument("manifest: economy.n_agents must be 2..16");
}

void parse_ppo(const json& j, PpoConfig& p) {
  require_keys(j, "ppo",
               {"lr", "gamma", "gae_lambda", "clip_ratio", "entropy_coef",
                "value_coef", "max_grad_norm", "batch_size", "epochs",
                "minibatches", "hidden", "sharing", "squash", "log_std_init",
                "learn_std"});
  get_if(j, "lr", p.lr);
  get_if(j, "gamma", p.gamma);
  get_if(j, "gae_lambda", p.gae_lambda);
  get_if(j, "clip_ratio", p.clip_ratio);
  get_if(j, "entropy_coef", p.entropy_coef);
  get_if(j, "value_coef", p.value_coef);
  get_if(j, "max_grad_norm", p.max_grad_norm);
  get_if(j, "batch_size", p.batch_size);
  get_if(j, "epochs", p.epochs);
  get_if(j, "minibatches", p.minibatches);
  get_if(j, "hidden", p.hidden);
  if (j.contains("sharing")) {
    std::string s = j.at("sharing");
    if (s == "independent") p.sharing = Sharing::Independent;
    else if (s == "shared-backbone") p.sharing = Sharing::SharedBackbone;
    else throw std::invalid_argument("manifest: sharing must be "
                                     "'independent' or 'shared-backbone'");
  }
  if (j.contains("squash")) {
    std::string s = j.at("squash");
    if (s == "clamp") p.squash = SquashMode::Clamp;
    else if (s == "tanh") p.squash = SquashMode::Tanh;
    else throw std::invalid_argument("manifest: squash must be 'clamp' or "
                                     "'tanh'");
  }
  get_if(j, "log_std_init", p.log_std_init);
  get_if(j, "learn_std", p.learn_std);
  p.validate();
}

void parse_training(const json& j, TrainingConfig& t) {
  require_keys(j, "training",
               {"episodes_train", "episodes_eval", "eval_every",
                "sustain_checkpoints", "truth_target"});
  get_if(j, "episodes_train", t.episodes_train);
  get_if(j, "episodes_eval", t.episodes_eval);
  get_if(j, "eval_every", t.eval_every);
  get_if(j, "sustain_checkpoints", t.sustain_checkpoints);
  get_if(j, "truth_target", t.truth_target);
}

void parse_grid(const json& j, const std::string& where, DeviationGrid& g) {
  require_keys(j, where, {"intercept_points", "intercept_span", "cap_points",
                          "cap_lo", "cap_hi"});
  get_if(j, "intercept_points", g.intercept_points);
  get_if(j, "intercept_span", g.intercept_span);
  get_if(j, "cap_points", g.cap_points);
  get_if(j, "cap_lo", g.cap_lo);
  get_if(j, "cap_hi", g.cap_hi);
}

void parse_sampler(const json& j, EconomySampler& s) {
  require_keys(j, "lab.sampler",
               {"min_agents", "max_agents", "a_lo", "a_hi", "b_lo", "b_hi",
                "c_lo", "c_hi", "e_lo", "e_hi", "cap_lo", "cap_hi",
                "flat_prob", "no_trade_prob"});
  get_if(j, "min_agents", s.min_agents);
  get_if(j, "max_agents", s.max_agents);
  get_if(j, "a_lo", s.a_lo);
  get_if(j, "a_hi", s.a_hi);
  get_if(j, "b_lo", s.b_lo);
  get_if(j, "b_hi", s.b_hi);
  get_if(j, "c_lo", s.c_lo);
  get_if(j, "c_hi", s.c_hi);
  get_if(j, "e_lo", s.e_lo);
  get_if(j, "e_hi", s.e_hi);
  get_if(j, "cap_lo", s.cap_lo);
  get_if(j, "cap_hi", s.cap_hi);
  get_if(j, "flat_prob", s.flat_prob);
  get_if(j, "no_trade_prob", s.no_trade_prob);
}

void parse_lab(const json& j, LabConfig& l) {
  require_keys(j, "lab", {"sampler", "grid", "n_economies", "alpha_list",
                          "rho_list", "n_mc", "threshold_economies"});
  if (j.contains("sampler")) parse_sampler(j.at("sampler"), l.sampler);
  if (j.contains("grid")) parse_grid(j.at("grid"), "lab.grid", l.grid);
  get_if(j, "n_economies", l.n_economies);
  get_if(j, "alpha_list", l.alpha_list);
  get_if(j, "rho_list", l.rho_list);
  get_if(j, "n_mc", l.n_mc);
  get_if(j, "threshold_economies", l.threshold_economies);
}

void parse_experiments(const json& j, ExperimentsConfig& e) {
  require_keys(j, "experiments",
               {"alpha_grid", "eps_grid", "gamma_grid", "entropy_grid",
                "width_grid", "pi_multipliers", "seeds", "plan_a_pi",
                "plan_a_gamma", "boundary_alpha", "boundary_eps",
                "plan_c_mode", "plan_c_economies", "plan_c_grid",
                "plan_c_truth_target", "plan_c_max_halvings", "plan_d_alpha",
                "plan_d_eps", "plan_d_entropy", "plan_d_width"});
  get_if(j, "alpha_grid", e.alpha_grid);
  get_if(j, "eps_grid", e.eps_grid);
  get_if(j, "gamma_grid", e.gamma_grid);
  get_if(j, "entropy_grid", e.entropy_grid);
  get_if(j, "width_grid", e.width_grid);
  get_if(j, "pi_multipliers", e.pi_multipliers);
  get_if(j, "seeds", e.seeds);
  get_if(j, "plan_a_pi", e.plan_a_pi);
  get_if(j, "plan_a_gamma", e.plan_a_gamma);
  get_opt(j, "boundary_alpha", e.boundary_alpha);
  get_opt(j, "boundary_eps", e.boundary_eps);
  get_if(j, "plan_c_mode", e.plan_c_mode);
  get_if(j, "plan_c_economies", e.plan_c_economies);
  if (j.contains("plan_c_grid"))
    parse_grid(j.at("plan_c_grid"), "experiments.plan_c_grid", e.plan_c_grid);
  get_if(j, "plan_c_truth_target", e.plan_c_truth_target);
  get_if(j, "plan_c_max_halvings", e.plan_c_max_halvings);
  get_opt(j, "plan_d_alpha", e.plan_d_alpha);
  get_opt(j, "plan_d_eps", e.plan_d_eps);
  get_if(j, "plan_d_entropy", e.plan_d_entropy);
  get_if(j, "plan_d_width", e.plan_d_width);
  if (e.plan_c_mode != "scripted" && e.plan_c_mode != "rl")
    throw std::invalid_argument("manifest: plan_c_mode must be 'scripted' "
                                "or 'rl'");
  if (e.seeds.empty())
    throw std::invalid_argument("manifest: experiments.seeds is empty");
}

}  // namespace

std::string hash_json(const json& j) {
  std::uint64_t h = fnv1a(j.dump());
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

Manifest manifest_from_json(const json& j) {
  require_keys(j, "manifest",
               {"schema", "seed", "mechanism", "approx", "physical",
                "economy", "ppo", "training", "experiments", "lab"});
  if (j.value("schema", "") != "manifest.v1")
    throw std::invalid_argument("manifest: schema must be 'manifest.v1'");
  Manifest m;
  get_if(j, "seed", m.seed);
  if (j.contains("mechanism")) parse_mechanism(j.at("mechanism"), m.mechanism);
  if (j.contains("approx")) parse_approx(j.at("approx"), m.approx);
  if (j.contains("physical")) parse_physical(j.at("physical"), m.physical);
  if (j.contains("economy")) parse_economy(j.at("economy"), m.economy);
  if (j.contains("ppo")) parse_ppo(j.at("ppo"), m.ppo);
  if (j.contains("training")) parse_training(j.at("training"), m.training);
  if (j.contains("experiments"))
    parse_experiments(j.at("experiments"), m.experiments);
  if (j.contains("lab")) parse_lab(j.at("lab"), m.lab);
  m.hash = hash_json(manifest_to_json(m));
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw std::invalid_argument("manifest file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& err) {
    throw std::invalid_argument("manifest parse error in " + path.string() +
                                ": " + err.what());
  }
  return manifest_from_json(j);
}

json manifest_to_json(const Manifest& m) {
  json j;
  j["schema"] = "manifest.v1";
  j["seed"] = m.seed;
  j["mechanism"] = {
      {"alpha", m.mechanism.alpha},
      {"epsilon", m.mechanism.epsilon},
      {"rho", m.mechanism.rho},
      {"penalty", m.mechanism.penalty},
      {"monitor_noise_sigma", m.mechanism.monitor_noise_sigma},
      {"detection_mode", detection_mode_name(m.mechanism.detection_mode)},
      {"pivot", m.mechanism.pivot == PivotMode::Approx ? "approx" : "exact"}};
  j["approx"] = {{"scale_tolerance", m.approx.scale_tolerance},
                 {"max_bisect_iters", m.approx.max_bisect_iters}};
  j["physical"] = {{"baseline_load", m.physical.baseline_load},
                   {"baseline_load_spread", m.physical.baseline_load_spread},
                   {"solar_peak", m.physical.solar_peak},
                   {"solar_peak_spread", m.physical.solar_peak_spread},
                   {"daylight_start", m.physical.daylight_start},
                   {"daylight_end", m.physical.daylight_end},
                   {"load_noise_sigma", m.physical.load_noise_sigma},
                   {"gen_noise_sigma", m.physical.gen_noise_sigma},
                   {"soc_capacity", m.physical.soc_capacity},
                   {"charge_efficiency", m.physical.charge_efficiency},
                   {"slot_hours", m.physical.slot_hours},
                   {"slots_per_episode", m.physical.slots_per_episode},
                   {"history", m.physical.history},
                   {"ar1_coeff", m.physical.ar1_coeff},
                   {"p_min", m.physical.p_min},
                   {"p_max", m.physical.p_max},
                   {"q_max", m.physical.q_max}};
  j["economy"] = {{"n_agents", m.economy.n_agents},
                  {"a_lo", m.economy.a_lo},
                  {"a_hi", m.economy.a_hi},
                  {"b_lo", m.economy.b_lo},
                  {"b_hi", m.economy.b_hi},
                  {"c_lo", m.economy.c_lo},
                  {"c_hi", m.economy.c_hi},
                  {"e_lo", m.economy.e_lo},
                  {"e_hi", m.economy.e_hi},
                  {"cap", m.economy.cap}};
  j["ppo"] = {{"lr", m.ppo.lr},
              {"gamma", m.ppo.gamma},
              {"gae_lambda", m.ppo.gae_lambda},
              {"clip_ratio", m.ppo.clip_ratio},
              {"entropy_coef", m.ppo.entropy_coef},
              {"value_coef", m.ppo.value_coef},
              {"max_grad_norm", m.ppo.max_grad_norm},
              {"batch_size", m.ppo.batch_size},
              {"epochs", m.ppo.epochs},
              {"minibatches", m.ppo.minibatches},
              {"hidden", m.ppo.hidden},
              {"sharing", m.ppo.sharing == Sharing::Independent
                              ? "independent"
                              : "shared-backbone"},
              {"squash",
               m.ppo.squash == SquashMode::Clamp ? "clamp" : "tanh"},
              {"log_std_init", m.ppo.log_std_init},
              {"learn_std", m.ppo.learn_std}};
  j["training"] = {{"episodes_train", m.training.episodes_train},
                   {"episodes_eval", m.training.episodes_eval},
                   {"eval_every", m.training.eval_every},
                   {"sustain_checkpoints", m.training.sustain_checkpoints},
                   {"truth_target", m.training.truth_target}};
  auto grid_json = [](const DeviationGrid& g) {
    return json{{"intercept_points", g.intercept_points},
                {"intercept_span", g.intercept_span},
                {"cap_points", g.cap_points},
                {"cap_lo", g.cap_lo},
                {"cap_hi", g.cap_hi}};
  };
  json exp = {{"alpha_grid", m.experiments.alpha_grid},
              {"eps_grid", m.experiments.eps_grid},
              {"gamma_grid", m.experiments.gamma_grid},
              {"entropy_grid", m.experiments.entropy_grid},
              {"width_grid", m.experiments.width_grid},
              {"pi_multipliers", m.experiments.pi_multipliers},
              {"seeds", m.experiments.seeds},
              {"plan_a_pi", m.experiments.plan_a_pi},
              {"plan_a_gamma", m.experiments.plan_a_gamma},
              {"plan_c_mode", m.experiments.plan_c_mode},
              {"plan_c_economies", m.experiments.plan_c_economies},
              {"plan_c_grid", grid_json(m.experiments.plan_c_grid)},
              {"plan_c_truth_target", m.experiments.plan_c_truth_target},
              {"plan_c_max_halvings", m.experiments.plan_c_max_halvings},
              {"plan_d_entropy", m.experiments.plan_d_entropy},
              {"plan_d_width", m.experiments.plan_d_width}};
  if (m.experiments.boundary_alpha)
    exp["boundary_alpha"] = *m.experiments.boundary_alpha;
  if (m.experiments.boundary_eps)
    exp["boundary_eps"] = *m.experiments.boundary_eps;
  if (m.experiments.plan_d_alpha)
    exp["plan_d_alpha"] = *m.experiments.plan_d_alpha;
  if (m.experiments.plan_d_eps) exp["plan_d_eps"] = *m.experiments.plan_d_eps;
  j["experiments"] = exp;
  j["lab"] = {{"sampler",
               {{"min_agents", m.lab.sampler.min_agents},
                {"max_agents", m.lab.sampler.max_agents},
                {"a_lo", m.lab.sampler.a_lo},
                {"a_hi", m.lab.sampler.a_hi},
                {"b_lo", m.lab.sampler.b_lo},
                {"b_hi", m.lab.sampler.b_hi},
                {"c_lo", m.lab.sampler.c_lo},
                {"c_hi", m.lab.sampler.c_hi},
                {"e_lo", m.lab.sampler.e_lo},
                {"e_hi", m.lab.sampler.e_hi},
                {"cap_lo", m.lab.sampler.cap_lo},
                {"cap_hi", m.lab.sampler.cap_hi},
                {"flat_prob", m.lab.sampler.flat_prob},
                {"no_trade_prob", m.lab.sampler.no_trade_prob}}},
              {"grid", grid_json(m.lab.grid)},
              {"n_economies", m.lab.n_economies},
              {"alpha_list", m.lab.alpha_list},
              {"rho_list", m.lab.rho_list},
              {"n_mc", m.lab.n_mc},
              {"threshold_economies", m.lab.threshold_economies}};
  return j;
}

Manifest default_manifest() { return Manifest{}; }

void apply_full_profile(Manifest& m) {
  m.economy.n_agents = 12;
  m.experiments.alpha_grid = {0.5, 0.6, 0.7, 0.8, 0.9};
  m.experiments.eps_grid = {0.5, 1.0, 1.5, 2.0};
  m.training.episodes_train *= 4;
  m.training.sustain_checkpoints = 20;
  m.ppo.batch_size = 1024;
}

}  // namespace pvl
