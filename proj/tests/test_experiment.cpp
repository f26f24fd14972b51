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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>

#include "timebin/calibration.hpp"
#include "timebin/errors.hpp"
#include "timebin/experiment.hpp"

namespace timebin {
namespace {

using json = nlohmann::json;

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(LoadConfig, MinimalChshGetsDefaults) {
    const auto c = parse_config(json{{"scenario", "chsh"}});
    EXPECT_EQ(c.scenario, Scenario::Chsh);
    EXPECT_EQ(c.shots, 100000u);
    EXPECT_EQ(c.preset, "ideal");
    EXPECT_DOUBLE_EQ(c.losses.end_to_end(), 1.0);
    EXPECT_DOUBLE_EQ(c.chsh.alpha, 22.5);
}

TEST(LoadConfig, OutOfRangeEfficiencyNamesField) {
    const auto msg = config_error({{"scenario", "chsh"}, {"losses", {{"retrieval", 1.3}}}});
    EXPECT_NE(msg.find("losses.retrieval"), std::string::npos) << msg;
}

TEST(LoadConfig, CalibratedPresetPopulated) {
    const auto c = parse_config({{"scenario", "chsh"}, {"preset", "paper-calibrated"}});
    const auto k = frozen_calibration();
    EXPECT_DOUBLE_EQ(c.noise.rydberg_dephasing, k.rydberg_dephasing);
    EXPECT_DOUBLE_EQ(c.detector.dark_count_prob, k.dark_count_prob);
    EXPECT_DOUBLE_EQ(c.detector.afterpulse_prob, k.afterpulse_prob);
    EXPECT_EQ(c.detector.port_swap, k.port_swap);
    EXPECT_DOUBLE_EQ(c.losses.retrieval, 0.13);
    EXPECT_NEAR(c.losses.end_to_end(), 0.90 * 0.13 * 0.69 * 0.77 * 0.47 * 0.60, 1e-15);
}

TEST(LoadConfig, ExplicitSectionsOverridePreset) {
    const auto c = parse_config({{"scenario", "entangle-scan"},
                                 {"preset", "paper-calibrated"},
                                 {"noise", {{"rydberg_dephasing", 0.1}}},
                                 {"detector", {{"port_swap", {false, false}}}}});
    EXPECT_DOUBLE_EQ(c.noise.rydberg_dephasing, 0.1);
    EXPECT_EQ(c.detector.port_swap, (std::array<bool, 2>{false, false}));
    EXPECT_DOUBLE_EQ(c.detector.dark_count_prob, frozen_calibration().dark_count_prob);
}

TEST(LoadConfig, Rejections) {
    EXPECT_NE(config_error({{"scenario", "chsh"}, {"shot", 10}}).find("shot"), std::string::npos);
    EXPECT_NE(config_error({{"scenario", "chsh"}, {"noise", {{"dephasing", 0.1}}}}).find("noise.dephasing"),
              std::string::npos);
    EXPECT_NE(config_error({{"scenario", "bell"}}).find("unknown scenario"), std::string::npos);
    EXPECT_NE(config_error({{"scenario", "chsh"}, {"preset", "lab"}}).find("preset"), std::string::npos);
    EXPECT_NE(config_error(json::object()).find("scenario"), std::string::npos);
    EXPECT_NE(config_error({{"scenario", "chsh"}, {"shots", 0}}).find("shots"), std::string::npos);
    EXPECT_NE(config_error({{"scenario", "chsh"}, {"shots", -5}}).find("shots"), std::string::npos);
    EXPECT_NE(config_error({{"scenario", "chsh"}, {"detector", {{"mode", "three"}}}}).find("detector.mode"),
              std::string::npos);
    EXPECT_NE(config_error({{"scenario", "rabi-scan"}, {"grid", {0.0, 500.0}}}).find("grid"), std::string::npos);
    EXPECT_NE(config_error({{"scenario", "chsh"}, {"noise", {{"werner_visibility", "high"}}}}).find("noise.werner_visibility"),
              std::string::npos);
}

TEST(LoadConfig, GridForms) {
    const auto a = parse_config({{"scenario", "prep-verify"}, {"grid", {{"start", 0.0}, {"stop", 1.0}, {"points", 5}}}});
    EXPECT_EQ(a.grid, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
    const auto b = parse_config(
        {{"scenario", "prep-verify"}, {"grid", {{"start", 0.0}, {"stop", 4.0}, {"points", 4}, {"endpoint", false}}}});
    EXPECT_EQ(b.grid, (std::vector<double>{0.0, 1.0, 2.0, 3.0}));
}

TEST(LoadConfig, FileErrors) {
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
    const auto path = std::filesystem::temp_directory_path() / "timebin_bad_config.json";
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(load_config(path), ConfigError);
    std::ofstream(path) << R"({"scenario": "chsh", "shots": 1000})";
    EXPECT_EQ(load_config(path).shots, 1000u);
}

TEST(RunScenario, PrepVerifyIdeal) {
    auto c = default_config(Scenario::PrepVerify);
    const auto r = run_scenario(c);
    EXPECT_GT(r.summary["fringe"]["visibility"].get<double>(), 0.999);
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.series[0].tables.size(), 24u);
}

TEST(RunScenario, ChshIdeal) {
    auto c = default_config(Scenario::Chsh);
    c.shots = 200000;
    const auto r = run_scenario(c);
    const double s = r.summary["S"].get<double>(), sigma = r.summary["sigma_S"].get<double>();
    EXPECT_NEAR(s, 2 * std::sqrt(2.0), 5 * sigma);
    ASSERT_EQ(r.summary["correlations"].size(), 4u);
}

TEST(RunScenario, OutputsCarryReportedQuantities) {
    const std::map<Scenario, std::vector<std::string>> keys = {
        {Scenario::RabiScan, {"rabi"}},
        {Scenario::PrepVerify, {"fringe"}},
        {Scenario::EntangleScan, {"V1", "V1_flat_line", "V2", "fidelity_bound"}},
        {Scenario::Chsh, {"correlations", "S", "sigma_S", "violation_sigmas"}},
        {Scenario::EfficiencyBudget, {"detection_probability_register1", "chain_product"}},
    };
    for (const auto& [s, want] : keys) {
        auto c = default_config(s);
        c.shots = 20000;
        const auto r = run_scenario(c);
        for (const auto& k : want) EXPECT_TRUE(r.summary.contains(k)) << scenario_name(s) << " lacks " << k;
        for (const char* k : {"config", "series", "metadata"}) EXPECT_TRUE(r.summary.contains(k));
    }
    auto c = default_config(Scenario::RabiScan);
    const auto r = run_scenario(c);
    EXPECT_NEAR(r.summary["rabi"]["r1"]["pi_time_ns"].get<double>(), 92.95, 0.5);
    EXPECT_NEAR(r.summary["rabi"]["r2"]["pi_time_ns"].get<double>(), 92.18, 0.5);
}

TEST(RunScenario, EchoedConfigReproducesCounts) {
    auto c = parse_config({{"scenario", "entangle-scan"}, {"preset", "paper-calibrated"}, {"shots", 50000},
                           {"master_seed", 77}, {"threads", 3}});
    const auto first = run_scenario(c);
    const auto again = run_scenario(parse_config(first.summary["config"]));
    EXPECT_EQ(counts_csv(first), counts_csv(again));
    EXPECT_EQ(first.summary["config"], again.summary["config"]);
}

TEST(RunScenario, DifferentSeedsDiffer) {
    auto c = default_config(Scenario::EntangleScan);
    c.shots = 1000;
    const auto a = counts_csv(run_scenario(c));
    c.master_seed = 1;
    EXPECT_NE(counts_csv(run_scenario(c)), a);
}

TEST(Bundle, CsvLayoutAndFiles) {
    auto c = default_config(Scenario::Chsh);
    c.shots = 1000;
    const auto r = run_scenario(c);
    const auto csv = counts_csv(r);
    EXPECT_EQ(csv.rfind("series,point,grid_value,setting,outcome1,outcome2,count\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 9);
    const auto dir = std::filesystem::temp_directory_path() / "timebin_bundle_test";
    std::filesystem::remove_all(dir);
    write_bundle(r, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "result.json"));
    std::ifstream in(dir / "counts.csv");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(text, csv);
    std::ifstream js(dir / "result.json");
    EXPECT_EQ(json::parse(js)["S"], r.summary["S"]);
}

TEST(Bundle, OutputDirFromEnvironment) {
    ::setenv(kOutDirEnv, "/tmp/timebin_env_out", 1);
    EXPECT_EQ(default_output_dir(), std::filesystem::path("/tmp/timebin_env_out"));
    ::unsetenv(kOutDirEnv);
    EXPECT_EQ(default_output_dir(), std::filesystem::path("results"));
}

TEST(Calibration, FrozenPresetHitsVisibilityWindows) {
    const auto p = evaluate_calibration(frozen_calibration());
    EXPECT_TRUE(p.visibilities_in_window);
    EXPECT_NEAR(p.fidelity, 0.878, 0.010);
    EXPECT_NEAR(p.fidelity, fidelity_bound(p.v1, p.v2), 1e-12);
}

TEST(Calibration, IdealKnobsGiveIdealValues) {
    const auto p = evaluate_calibration(CalibrationKnobs{});
    EXPECT_NEAR(p.v1, 1.0, 1e-9);
    EXPECT_NEAR(p.v2, 1.0, 1e-6);
    EXPECT_NEAR(p.s, 2 * std::sqrt(2.0), 1e-6);
}

TEST(Calibration, SearchPicksClosestFeasiblePoint) {
    CalibrationGrid g;
    g.dephasing = {0.0, 0.03};
    g.dark_count = {1e-3};
    g.afterpulse = {0.0};
    g.port_swap = {{false, true}};
    const auto r = calibrate(g);
    EXPECT_EQ(r.evaluated, 2u);
    EXPECT_EQ(r.best.knobs, frozen_calibration());
}

}  // namespace
}  // namespace timebin
