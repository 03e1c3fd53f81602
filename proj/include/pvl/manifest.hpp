#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvl/enforcement.hpp"
#include "pvl/grid_sim.hpp"
#include "pvl/incentive_lab.hpp"
#include "pvl/ppo.hpp"
#include "pvl/trainer.hpp"

namespace pvl {

// Learning-free verification settings (the `verify` subcommand).
struct LabConfig {
  EconomySampler sampler;
  DeviationGrid grid;
  int n_economies = 100;
  std::vector<double> alpha_list = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> rho_list = {1.0, 0.7, 0.5};
  int n_mc = 10000;
  int threshold_economies = 12;  // economies per rho for threshold checks
};

struct ExperimentsConfig {
  std::vector<double> alpha_grid = {0.5, 0.7, 0.9};
  std::vector<double> eps_grid = {1.0, 2.0};
  std::vector<double> gamma_grid = {0.90, 0.95, 0.99};
  std::vector<double> entropy_grid = {0.005, 0.01, 0.02};
  std::vector<int> width_grid = {64, 128};
  std::vector<double> pi_multipliers = {0.5, 1.0, 2.0};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  double plan_a_pi = -1.0;  // < 0 derives it from the boundary threshold
  double plan_a_gamma = 0.95;
  std::optional<double> boundary_alpha;  // plan B cell override
  std::optional<double> boundary_eps;
  std::string plan_c_mode = "scripted";  // scripted | rl
  int plan_c_economies = 24;
  DeviationGrid plan_c_grid{41, 1.5, 11, 0.5, 1.5};
  double plan_c_truth_target = 0.9;
  int plan_c_max_halvings = 7;
  std::optional<double> plan_d_alpha;
  std::optional<double> plan_d_eps;
  std::vector<double> plan_d_entropy = {0.005, 0.02};
  std::vector<int> plan_d_width = {64, 128};
};

struct Manifest {
  std::uint64_t seed = 1;
  MechanismConfig mechanism;
  ApproxParams approx;
  PhysicalParams physical;
  EnvEconomyConfig economy;
  PpoConfig ppo;
  TrainingConfig training;
  ExperimentsConfig experiments;
  LabConfig lab;
  std::string hash;  // FNV-1a of the canonical document, filled on load
};

// Parse + schema-validate (unknown keys rejected) + hash.
Manifest load_manifest(const std::filesystem::path& path);
Manifest manifest_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const Manifest& m);
std::string hash_json(const nlohmann::json& j);

// The shipped defaults (what configs/default.json contains).
Manifest default_manifest();

// Full-scale profile per the experiment tables: 12 agents, complete alpha
// and epsilon grids, longer training.
void apply_full_profile(Manifest& m);

}  // namespace pvl
