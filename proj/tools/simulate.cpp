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

// simulate <scenario> --config <path> --seed <u64> --shots <n> --out <dir>
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "timebin/errors.hpp"
#include "timebin/experiment.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void print_summary(const nlohmann::json& s) {
    for (const char* key : {"fringe", "V1", "V1_flat_line", "V2", "fidelity_bound", "S", "sigma_S", "violation_sigmas",
                            "detection_probability_register1", "rabi"}) {
        if (s.contains(key)) std::cout << key << ": " << s.at(key).dump() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-bin entanglement simulator"};
    std::string scenario;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> shots;
    std::optional<unsigned> threads;
    std::string out_dir;
    app.add_option("scenario", scenario, "rabi-scan | prep-verify | entangle-scan | chsh | efficiency-budget")->required();
    app.add_option("--config", config_path, "JSON experiment configuration");
    app.add_option("--seed", seed, "master seed (overrides the config)");
    app.add_option("--shots", shots, "shots per settings pair and grid point (overrides the config)");
    app.add_option("--threads", threads, "sampling worker threads");
    app.add_option("--out", out_dir, std::string("output directory (default $") + timebin::kOutDirEnv + " or ./results)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    timebin::ExperimentConfig config;
    try {
        const auto s = timebin::parse_scenario(scenario);
        config = config_path.empty() ? timebin::default_config(s) : timebin::load_config(config_path);
        if (config.scenario != s) {
            throw timebin::ConfigError(std::string("scenario: config file describes '") +
                                       timebin::scenario_name(config.scenario) + "', command line asks for '" +
                                       scenario + "'");
        }
        if (seed) config.master_seed = *seed;
        if (shots) config.shots = *shots;
        if (threads) config.threads = *threads;
        config.validate();
    } catch (const timebin::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    const std::filesystem::path out = out_dir.empty() ? timebin::default_output_dir() : std::filesystem::path(out_dir);
    try {
        const auto bundle = timebin::run_scenario(config);
        timebin::write_bundle(bundle, out);
        print_summary(bundle.summary);
        std::cout << "wrote " << (out / "result.json").string() << " and " << (out / "counts.csv").string() << '\n';
    } catch (const timebin::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
