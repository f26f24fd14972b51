// Copyright 2026 The timebin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Experiment configuration, noise presets, and the named scenarios driven by
// the `simulate` tool.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "timebin/analysis.hpp"
#include "timebin/montecarlo.hpp"

namespace timebin {

enum class Scenario : std::uint8_t { RabiScan, PrepVerify, EntangleScan, Chsh, EfficiencyBudget };

/// "rabi-scan", "prep-verify", "entangle-scan", "chsh", "efficiency-budget".
Scenario parse_scenario(const std::string& name);
const char* scenario_name(Scenario s);

/// Noise, loss chain, and detector values bundled under a name.
struct Preset {
    std::string name;
    NoiseConfig noise;
    LossChain losses;
    DetectorModel detector;
};

/// "ideal" or "paper-calibrated". Throws ConfigError for anything else.
Preset preset(const std::string& name);
std::vector<std::string> preset_names();

/// Bell settings in degrees.
struct ChshAngles {
    double alpha = 22.5;
    double alpha_star = 67.5;
    double beta = 45.0;
    double beta_star = 0.0;
};

inline constexpr std::uint64_t kDefaultShots = 100000;

struct ExperimentConfig {
    Scenario scenario = Scenario::Chsh;
    std::string preset = "ideal";
    NoiseConfig noise;
    LossChain losses;
    DetectorModel detector;
    std::uint64_t shots = kDefaultShots;  // per settings pair and grid point
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
    /// Scan grid: analyzer phase (rad) or pulse duration (ns) depending on
    /// the scenario. Empty selects the scenario default.
    std::vector<double> grid;
    ChshAngles chsh;

    void validate() const;
};

/// Scenario defaults on top of the "ideal" preset.
ExperimentConfig default_config(Scenario s);

/// Throws ConfigError naming the offending field (e.g. "losses.retrieval")
/// for unknown keys, wrong types, out-of-range values, or unknown presets.
/// Explicit noise/losses/detector fields override the preset's values.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Throws ConfigError if the file is missing or is not valid JSON.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved config; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

/// Default grid: 24 phases over [0, 2pi) or durations 0..184 ns in 4 ns steps.
std::vector<double> default_grid(Scenario s);
/// n evenly spaced phases over [0, 2pi).
std::vector<double> phase_grid(std::size_t n);

/// Scan plans used by the scenarios. Retrieval efficiency is taken from
/// losses.retrieval.
ScanPlan prep_verify_plan(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det);
/// Eigenbasis pair (theta = 0 on both) then the superposition pair
/// (theta = pi/4 on both); register-2 phi is scanned.
ScanPlan entangle_scan_plan(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det);
/// Four-detector arrangement at the four Bell settings, in chsh_S order.
ScanPlan chsh_plan(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det, const ChshAngles& angles);
/// Skip-variant duration scans of the r1 pulse (r2 off) and the r2 pulse (r1 off).
std::array<ScanPlan, 2> rabi_scan_plans(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det);

/// V1 (pooled and flat-line), V2 from the coincidence fringe, and the
/// fidelity bound for an entangle-scan (eigenbasis entry 0, superposition entry 1).
struct EntanglementEstimates {
    Estimate v1;
    Estimate v1_flat;
    FringeFit v2;
    Estimate fidelity;
};

EntanglementEstimates estimate_entanglement(const std::vector<CountsTable>& tables, const std::vector<double>& grid,
                                            int port_parity);

struct ScanSeries {
    std::string name;
    std::string variable;  // grid variable name
    std::vector<double> grid;
    std::vector<CountsTable> tables;
};

struct ResultBundle {
    nlohmann::json summary;  // config echo, estimates, metadata
    std::vector<ScanSeries> series;
};

/// Deterministic in (config, master_seed) apart from runtime metadata.
/// Throws ConfigError for invalid configs and FitError when an estimator fails.
ResultBundle run_scenario(const ExperimentConfig& config);

/// Columns: series, point, grid_value, setting, outcome1, outcome2, count.
std::string counts_csv(const ResultBundle& bundle);
/// Writes result.json and counts.csv into `dir`, creating it if needed.
void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir);

inline constexpr const char* kOutDirEnv = "TIMEBIN_OUT_DIR";
/// $TIMEBIN_OUT_DIR if set and non-empty, otherwise "results".
std::filesystem::path default_output_dir();

}  // namespace timebin
