#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvl/grid_sim.hpp"
#include "pvl/mechanism.hpp"
#include "pvl/policy.hpp"

namespace pvl {

using json = nlohmann::json;

// Write-temp-then-rename; partial results never clobber completed files.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

std::string read_file(const std::filesystem::path& path);

// economy.v1
json economy_to_json(const EconomyInstance& econ);
EconomyInstance economy_from_json(const json& j);

// outcome.v1 (per-agent totals, payments, welfare, clearing price)
json outcome_to_json(const MarketOutcome& outcome,
                     const EconomyInstance& econ);

// detections.csv rows
std::string detections_csv_header();
std::string detection_csv_row(int slot, const DetectionRecord& rec);

// episode.v1 JSONL: header line then one record per slot
json episode_header(const std::string& manifest_hash, std::uint64_t seed,
                    std::uint64_t run_id);
json slot_record(int slot, const SlotResult& res, const GridState& state);

// policy.v1 checkpoint: shape header + flat parameter dumps + normalizer
json policies_to_json(const std::vector<PolicyNet>& policies,
                      const ObsNormalizer& normalizer,
                      const std::string& manifest_hash, std::uint64_t seed,
                      bool shared_backbone);
void policies_from_json(const json& j, std::vector<PolicyNet>& policies,
                        ObsNormalizer& normalizer);

std::string csv_escape(const std::string& s);

}  // namespace pvl
