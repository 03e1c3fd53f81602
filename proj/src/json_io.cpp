#include "pvl/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pvl {

namespace fs = std::filesystem;

void atomic_write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string role_name(Role r) {
  switch (r) {
    case Role::Buyer: return "buyer";
    case Role::Seller: return "seller";
    case Role::Prosumer: return "prosumer";
  }
  return "prosumer";
}

Role role_from(const std::string& s) {
  if (s == "buyer") return Role::Buyer;
  if (s == "seller") return Role::Seller;
  if (s == "prosumer") return Role::Prosumer;
  throw std::invalid_argument("economy.v1: unknown role_hint '" + s + "'");
}

std::string side_name(Side s) {
  switch (s) {
    case Side::Buyer: return "buyer";
    case Side::Seller: return "seller";
    case Side::None: return "none";
  }
  return "none";
}

}  // namespace

json economy_to_json(const EconomyInstance& econ) {
  json agents = json::array();
  for (const AgentType& ag : econ.agents) {
    agents.push_back({{"id", ag.id},
                      {"role_hint", role_name(ag.role_hint)},
                      {"a", ag.a},
                      {"b", ag.b},
                      {"c", ag.c},
                      {"e", ag.e},
                      {"cap_demand", ag.cap_demand},
                      {"cap_supply", ag.cap_supply}});
  }
  return json{{"schema", "economy.v1"}, {"slot", econ.slot},
              {"agents", agents}};
}

EconomyInstance economy_from_json(const json& j) {
  if (j.value("schema", "") != "economy.v1")
    throw std::invalid_argument("economy_from_json: schema != economy.v1");
  EconomyInstance econ;
  econ.slot = j.value("slot", 0);
  for (const json& a : j.at("agents")) {
    AgentType ag;
    ag.id = a.at("id").get<int>();
    ag.role_hint = role_from(a.at("role_hint").get<std::string>());
    ag.a = a.at("a").get<double>();
    ag.b = a.at("b").get<double>();
    ag.c = a.at("c").get<double>();
    ag.e = a.at("e").get<double>();
    ag.cap_demand = a.at("cap_demand").get<double>();
    ag.cap_supply = a.at("cap_supply").get<double>();
    econ.agents.push_back(ag);
  }
  return econ;
}

json outcome_to_json(const MarketOutcome& outcome,
                     const EconomyInstance& econ) {
  json agents = json::array();
  for (std::size_t k = 0; k < outcome.agents.size(); ++k) {
    const AgentOutcome& ao = outcome.agents[k];
    agents.push_back({{"id", econ.agents[k].id},
                      {"side", side_name(ao.side)},
                      {"quantity", ao.quantity},
                      {"payment", ao.payment},
                      {"utility", ao.utility}});
  }
  return json{{"schema", "outcome.v1"},
              {"welfare", outcome.welfare},
              {"clearing_price", outcome.clearing_price},
              {"budget_imbalance", outcome.budget_imbalance},
              {"agents", agents}};
}

std::string detections_csv_header() {
  return "slot,agent,v_prime,bid,deviated,detected";
}

std::string detection_csv_row(int slot, const DetectionRecord& rec) {
  std::ostringstream ss;
  ss << slot << ',' << rec.agent << ',' << rec.true_marginal << ','
     << rec.bid_price << ',' << (rec.deviated ? 1 : 0) << ',' << rec.detected;
  return ss.str();
}

json episode_header(const std::string& manifest_hash, std::uint64_t seed,
                    std::uint64_t run_id) {
  return json{{"schema", "episode.v1"},
              {"manifest_hash", manifest_hash},
              {"seed", seed},
              {"run_id", run_id}};
}

json slot_record(int slot, const SlotResult& res, const GridState& state) {
  json bids = json::array();
  for (const BidAction& b : res.bids)
    bids.push_back({{"price", b.price}, {"qty", b.quantity}});
  json detections = json::array();
  for (const DetectionRecord& d : res.detections)
    detections.push_back({{"agent", d.agent},
                          {"v_prime", d.true_marginal},
                          {"bid", d.bid_price},
                          {"observed", d.observed_price},
                          {"deviated", d.deviated},
                          {"detected", d.detected}});
  json payments = json::array(), quantities = json::array();
  for (const AgentOutcome& ao : res.outcome.agents) {
    payments.push_back(ao.payment);
    quantities.push_back(ao.side == Side::Seller ? -ao.quantity
                                                 : ao.quantity);
  }
  return json{{"slot", slot},
              {"bids", bids},
              {"welfare", res.outcome.welfare},
              {"clearing_price", res.outcome.clearing_price},
              {"payments", payments},
              {"quantities", quantities},
              {"detections", detections},
              {"rewards", res.rewards},
              {"soc", state.soc}};
}

namespace {

json linear_to_json(const Linear& l) {
  return json{{"in", l.in}, {"out", l.out}, {"W", l.W}, {"b", l.b}};
}

Linear linear_from_json(const json& j) {
  Linear l;
  l.in = j.at("in").get<int>();
  l.out = j.at("out").get<int>();
  l.W = j.at("W").get<std::vector<double>>();
  l.b = j.at("b").get<std::vector<double>>();
  if (l.W.size() != static_cast<std::size_t>(l.in) * l.out ||
      l.b.size() != static_cast<std::size_t>(l.out))
    throw std::invalid_argument("policy.v1: layer shape mismatch");
  return l;
}

}  // namespace

json policies_to_json(const std::vector<PolicyNet>& policies,
                      const ObsNormalizer& normalizer,
                      const std::string& manifest_hash, std::uint64_t seed,
                      bool shared_backbone) {
  json agents = json::array();
  for (const PolicyNet& net : policies) {
    json entry = {{"mu", linear_to_json(net.heads.mu)},
                  {"value", linear_to_json(net.heads.value)},
                  {"log_std", net.heads.log_std}};
    if (!shared_backbone) {
      entry["l1"] = linear_to_json(net.backbone->l1);
      entry["l2"] = linear_to_json(net.backbone->l2);
    }
    agents.push_back(entry);
  }
  json out = {{"schema", "policy.v1"},
              {"manifest_hash", manifest_hash},
              {"seed", seed},
              {"obs_dim", policies.empty() ? 0 : policies[0].backbone->obs_dim},
              {"hidden", policies.empty() ? 0 : policies[0].backbone->hidden},
              {"act_dim", policies.empty() ? 2 : policies[0].act_dim},
              {"sharing", shared_backbone ? "shared-backbone" : "independent"},
              {"agents", agents},
              {"obs_norm", {{"mean", normalizer.mean()},
                            {"m2", normalizer.m2()},
                            {"count", normalizer.count()}}}};
  if (shared_backbone && !policies.empty()) {
    out["backbone"] = {{"l1", linear_to_json(policies[0].backbone->l1)},
                       {"l2", linear_to_json(policies[0].backbone->l2)}};
  }
  return out;
}

void policies_from_json(const json& j, std::vector<PolicyNet>& policies,
                        ObsNormalizer& normalizer) {
  if (j.value("schema", "") != "policy.v1")
    throw std::invalid_argument("policies_from_json: schema != policy.v1");
  const int obs_dim = j.at("obs_dim").get<int>();
  const int hidden = j.at("hidden").get<int>();
  const int act_dim = j.at("act_dim").get<int>();
  const bool shared = j.at("sharing").get<std::string>() == "shared-backbone";

  std::shared_ptr<Backbone> shared_bb;
  if (shared) {
    shared_bb = std::make_shared<Backbone>();
    shared_bb->obs_dim = obs_dim;
    shared_bb->hidden = hidden;
    shared_bb->l1 = linear_from_json(j.at("backbone").at("l1"));
    shared_bb->l2 = linear_from_json(j.at("backbone").at("l2"));
  }

  policies.clear();
  for (const json& entry : j.at("agents")) {
    PolicyNet net;
    net.act_dim = act_dim;
    if (shared) {
      net.backbone = shared_bb;
    } else {
      net.backbone = std::make_shared<Backbone>();
      net.backbone->obs_dim = obs_dim;
      net.backbone->hidden = hidden;
      net.backbone->l1 = linear_from_json(entry.at("l1"));
      net.backbone->l2 = linear_from_json(entry.at("l2"));
    }
    net.heads.mu = linear_from_json(entry.at("mu"));
    net.heads.value = linear_from_json(entry.at("value"));
    net.heads.log_std = entry.at("log_std").get<std::vector<double>>();
    policies.push_back(std::move(net));
  }

  const json& norm = j.at("obs_norm");
  normalizer = ObsNormalizer(obs_dim);
  normalizer.restore(norm.at("mean").get<std::vector<double>>(),
                     norm.at("m2").get<std::vector<double>>(),
                     norm.at("count").get<double>());
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace pvl
