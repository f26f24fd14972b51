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

#include "timebin/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include "timebin/calibration.hpp"
#include "timebin/errors.hpp"

namespace timebin {

using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path.empty() ? "config" : path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known) fail(join(path, key), "unknown key");
    }
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

void read_range(const json& obj, const std::string& path, const char* key, double lo, double hi, double& out) {
    if (!obj.contains(key)) return;
    const std::string p = join(path, key);
    const double x = number(obj.at(key), p);
    if (!(x >= lo && x <= hi)) {
        std::ostringstream msg;
        msg << "must be in [" << lo << ", " << hi << "], got " << x;
        fail(p, msg.str());
    }
    out = x;
}

void read_positive(const json& obj, const std::string& path, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const std::string p = join(path, key);
    const double x = number(obj.at(key), p);
    if (!(x > 0.0)) fail(p, "must be positive");
    out = x;
}

std::uint64_t read_count(const json& v, const std::string& path, std::uint64_t min) {
    std::uint64_t n = 0;
    if (v.is_number_unsigned()) {
        n = v.get<std::uint64_t>();
    } else if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) fail(path, "must be non-negative");
        n = std::uint64_t(v.get<std::int64_t>());
    } else if (v.is_number_float()) {
        const double x = v.get<double>();
        if (!(x >= 0.0 && x < 1.8e19 && std::floor(x) == x)) fail(path, "expected a non-negative integer");
        n = std::uint64_t(x);
    } else {
        fail(path, "expected a non-negative integer");
    }
    if (n < min) fail(path, "must be >= " + std::to_string(min));
    return n;
}

void parse_noise(const json& j, NoiseConfig& n) {
    const std::string path = "noise";
    require_object(j, path);
    reject_unknown(j, path, {"blockade_leakage", "rydberg_dephasing", "pulse_area_error", "werner_visibility",
                             "atom_count", "pi_time_r1_ns", "pi_time_r2_ns"});
    read_range(j, path, "blockade_leakage", 0.0, 1.0, n.blockade_leakage);
    read_range(j, path, "rydberg_dephasing", 0.0, 1.0, n.rydberg_dephasing);
    read_range(j, path, "pulse_area_error", -0.999999, 1.0, n.pulse_area_error);
    read_range(j, path, "werner_visibility", 0.0, 1.0, n.werner_visibility);
    read_positive(j, path, "pi_time_r1_ns", n.atoms.pi_time_r1_ns);
    read_positive(j, path, "pi_time_r2_ns", n.atoms.pi_time_r2_ns);
    if (j.contains("atom_count")) n.atoms.atom_count = read_count(j.at("atom_count"), join(path, "atom_count"), 0);
}

void parse_losses(const json& j, LossChain& l) {
    const std::string path = "losses";
    require_object(j, path);
    reject_unknown(j, path, {"preparation", "retrieval", "fiber_coupling", "aom_deflection", "mz_transmission",
                             "detector_efficiency"});
    read_range(j, path, "preparation", 0.0, 1.0, l.preparation);
    read_range(j, path, "retrieval", 0.0, 1.0, l.retrieval);
    read_range(j, path, "fiber_coupling", 0.0, 1.0, l.fiber_coupling);
    read_range(j, path, "aom_deflection", 0.0, 1.0, l.aom_deflection);
    read_range(j, path, "mz_transmission", 0.0, 1.0, l.mz_transmission);
    read_range(j, path, "detector_efficiency", 0.0, 1.0, l.detector_efficiency);
}

const char* mode_name(DetectorMode m) {
    return m == DetectorMode::FourDetector ? "four_detector" : "two_detector_multiplexed";
}

void parse_detector(const json& j, DetectorModel& d) {
    const std::string path = "detector";
    require_object(j, path);
    reject_unknown(j, path, {"dark_count_prob", "afterpulse_prob", "port_swap", "mode"});
    read_range(j, path, "dark_count_prob", 0.0, 1.0, d.dark_count_prob);
    read_range(j, path, "afterpulse_prob", 0.0, 1.0, d.afterpulse_prob);
    if (j.contains("port_swap")) {
        const auto& ps = j.at("port_swap");
        if (!ps.is_array() || ps.size() != 2 || !ps[0].is_boolean() || !ps[1].is_boolean()) {
            fail("detector.port_swap", "expected [bool, bool]");
        }
        d.port_swap = {ps[0].get<bool>(), ps[1].get<bool>()};
    }
    if (j.contains("mode")) {
        const auto& m = j.at("mode");
        if (!m.is_string()) fail("detector.mode", "expected a string");
        const auto s = m.get<std::string>();
        if (s == "two_detector_multiplexed") {
            d.mode = DetectorMode::TwoDetectorMultiplexed;
        } else if (s == "four_detector") {
            d.mode = DetectorMode::FourDetector;
        } else {
            fail("detector.mode", "unknown mode '" + s + "' (two_detector_multiplexed, four_detector)");
        }
    }
}

std::vector<double> parse_grid(const json& j) {
    const std::string path = "grid";
    std::vector<double> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    } else if (j.is_object()) {
        reject_unknown(j, path, {"start", "stop", "points", "endpoint"});
        for (const char* k : {"start", "stop", "points"}) {
            if (!j.contains(k)) fail(join(path, k), "required");
        }
        const double start = number(j.at("start"), "grid.start");
        const double stop = number(j.at("stop"), "grid.stop");
        const auto n = read_count(j.at("points"), "grid.points", 1);
        if (n > 100000) fail("grid.points", "must be <= 100000");
        bool endpoint = true;
        if (j.contains("endpoint")) {
            if (!j.at("endpoint").is_boolean()) fail("grid.endpoint", "expected a bool");
            endpoint = j.at("endpoint").get<bool>();
        }
        const double div = endpoint ? double(n > 1 ? n - 1 : 1) : double(n);
        for (std::uint64_t i = 0; i < n; ++i) out.push_back(start + (stop - start) * double(i) / div);
    } else {
        fail(path, "expected an array of numbers or {start, stop, points[, endpoint]}");
    }
    if (out.empty()) fail(path, "must not be empty");
    return out;
}

void parse_chsh(const json& j, ChshAngles& a) {
    const std::string path = "chsh";
    require_object(j, path);
    reject_unknown(j, path, {"alpha_deg", "alpha_star_deg", "beta_deg", "beta_star_deg"});
    read_range(j, path, "alpha_deg", 0.0, 90.0, a.alpha);
    read_range(j, path, "alpha_star_deg", 0.0, 90.0, a.alpha_star);
    read_range(j, path, "beta_deg", 0.0, 90.0, a.beta);
    read_range(j, path, "beta_star_deg", 0.0, 90.0, a.beta_star);
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"error", e.error}}; }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json fringe_json(const FringeFit& f) {
    return {{"visibility", f.visibility},
            {"visibility_error", f.visibility_error},
            {"raw_visibility", f.raw_visibility},
            {"phase_offset", f.phase_offset},
            {"mean_level", f.mean_level},
            {"minus_visibility", f.minus_visibility},
            {"minus_visibility_error", f.minus_visibility_error},
            {"minus_phase_offset", f.minus_phase_offset},
            {"ports_consistent", f.ports_consistent}};
}

json setting_json(const AnalyzerSetting& s) { return {{"theta", s.theta}, {"phi", s.phi}}; }

json series_json(const ScanSeries& s) {
    json points = json::array();
    for (std::size_t i = 0; i < s.tables.size(); ++i) {
        json entries = json::array();
        for (const auto& e : s.tables[i].entries) {
            entries.push_back({{"setting1", setting_json(e.setting1)},
                               {"setting2", setting_json(e.setting2)},
                               {"shots", e.shots},
                               {"counts", e.n}});
        }
        points.push_back({{"grid_value", s.grid[i]}, {"entries", entries}});
    }
    return {{"name", s.name}, {"variable", s.variable}, {"points", points}};
}

ProtocolConfig with_noise(ProtocolConfig p, const NoiseConfig& noise) {
    p.noise = noise;
    return p;
}

AnalyzerSetting setting(double theta, double phi, Register reg) { return AnalyzerSetting{theta, phi, reg}; }

}  // namespace

Scenario parse_scenario(const std::string& name) {
    for (Scenario s : {Scenario::RabiScan, Scenario::PrepVerify, Scenario::EntangleScan, Scenario::Chsh,
                       Scenario::EfficiencyBudget}) {
        if (name == scenario_name(s)) return s;
    }
    throw ConfigError("unknown scenario '" + name +
                      "' (rabi-scan, prep-verify, entangle-scan, chsh, efficiency-budget)");
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::RabiScan: return "rabi-scan";
        case Scenario::PrepVerify: return "prep-verify";
        case Scenario::EntangleScan: return "entangle-scan";
        case Scenario::Chsh: return "chsh";
        case Scenario::EfficiencyBudget: return "efficiency-budget";
    }
    return "?";
}

Preset preset(const std::string& name) {
    if (name == "ideal") return Preset{"ideal", {}, {}, {}};
    if (name == "paper-calibrated") return calibrated_preset(frozen_calibration());
    throw ConfigError("preset: unknown preset '" + name + "' (ideal, paper-calibrated)");
}

std::vector<std::string> preset_names() { return {"ideal", "paper-calibrated"}; }

void ExperimentConfig::validate() const {
    noise.validate();
    losses.validate();
    detector.validate();
    if (shots == 0) throw ConfigError("shots: must be >= 1");
    if (threads == 0) throw ConfigError("threads: must be >= 1");
    if (scenario == Scenario::RabiScan) {
        const double max_t = 2.0 * std::min(noise.atoms.pi_time_r1_ns, noise.atoms.pi_time_r2_ns);
        for (double t : grid) {
            if (!(t >= 0.0 && t <= max_t)) {
                std::ostringstream msg;
                msg << "grid: pulse durations must be in [0, " << max_t << "] ns, got " << t;
                throw ConfigError(msg.str());
            }
        }
    }
    for (double a : {chsh.alpha, chsh.alpha_star, chsh.beta, chsh.beta_star}) {
        if (!(a >= 0.0 && a <= 90.0)) throw ConfigError("chsh: angles must be in [0, 90] degrees");
    }
}

ExperimentConfig default_config(Scenario s) {
    ExperimentConfig c;
    c.scenario = s;
    return c;
}

ExperimentConfig parse_config(const json& j) {
    require_object(j, "");
    reject_unknown(j, "", {"scenario", "preset", "noise", "losses", "detector", "shots", "master_seed", "threads",
                           "grid", "chsh"});
    if (!j.contains("scenario")) fail("scenario", "required");
    if (!j.at("scenario").is_string()) fail("scenario", "expected a string");
    ExperimentConfig c;
    c.scenario = parse_scenario(j.at("scenario").get<std::string>());

    if (j.contains("preset")) {
        if (!j.at("preset").is_string()) fail("preset", "expected a string");
        c.preset = j.at("preset").get<std::string>();
    }
    const Preset p = preset(c.preset);
    c.noise = p.noise;
    c.losses = p.losses;
    c.detector = p.detector;

    if (j.contains("noise")) parse_noise(j.at("noise"), c.noise);
    if (j.contains("losses")) parse_losses(j.at("losses"), c.losses);
    if (j.contains("detector")) parse_detector(j.at("detector"), c.detector);
    if (j.contains("shots")) c.shots = read_count(j.at("shots"), "shots", 1);
    if (j.contains("master_seed")) c.master_seed = read_count(j.at("master_seed"), "master_seed", 0);
    if (j.contains("threads")) {
        const auto t = read_count(j.at("threads"), "threads", 1);
        if (t > 1024) fail("threads", "must be <= 1024");
        c.threads = unsigned(t);
    }
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
    if (j.contains("chsh")) parse_chsh(j.at("chsh"), c.chsh);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
    const auto& a = c.noise.atoms;
    return {{"scenario", scenario_name(c.scenario)},
            {"preset", c.preset},
            {"noise",
             {{"blockade_leakage", c.noise.blockade_leakage},
              {"rydberg_dephasing", c.noise.rydberg_dephasing},
              {"pulse_area_error", c.noise.pulse_area_error},
              {"werner_visibility", c.noise.werner_visibility},
              {"atom_count", a.atom_count},
              {"pi_time_r1_ns", a.pi_time_r1_ns},
              {"pi_time_r2_ns", a.pi_time_r2_ns}}},
            {"losses",
             {{"preparation", c.losses.preparation},
              {"retrieval", c.losses.retrieval},
              {"fiber_coupling", c.losses.fiber_coupling},
              {"aom_deflection", c.losses.aom_deflection},
              {"mz_transmission", c.losses.mz_transmission},
              {"detector_efficiency", c.losses.detector_efficiency}}},
            {"detector",
             {{"dark_count_prob", c.detector.dark_count_prob},
              {"afterpulse_prob", c.detector.afterpulse_prob},
              {"port_swap", c.detector.port_swap},
              {"mode", mode_name(c.detector.mode)}}},
            {"shots", c.shots},
            {"master_seed", c.master_seed},
            {"threads", c.threads},
            {"grid", c.grid.empty() ? default_grid(c.scenario) : c.grid},
            {"chsh",
             {{"alpha_deg", c.chsh.alpha},
              {"alpha_star_deg", c.chsh.alpha_star},
              {"beta_deg", c.chsh.beta},
              {"beta_star_deg", c.chsh.beta_star}}}};
}

std::vector<double> phase_grid(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = 2 * kPi * double(i) / double(n);
    return g;
}

std::vector<double> default_grid(Scenario s) {
    switch (s) {
        case Scenario::PrepVerify:
        case Scenario::EntangleScan: return phase_grid(24);
        case Scenario::RabiScan: {
            std::vector<double> g;
            for (int i = 0; i <= 46; ++i) g.push_back(4.0 * i);
            return g;
        }
        case Scenario::Chsh:
        case Scenario::EfficiencyBudget: return {0.0};
    }
    return {};
}

ScanPlan prep_verify_plan(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det) {
    ScanPlan plan;
    plan.protocol = with_noise(ProtocolConfig::skip_entangle_phase(losses.retrieval), noise);
    plan.losses = losses;
    plan.detector = det;
    plan.settings = {{setting(0.0, 0.0, Register::One), setting(kPi / 4, 0.0, Register::Two)}};
    plan.variable = ScanVariable::AnalyzerPhase;
    plan.scanned_register = Register::Two;
    return plan;
}

ScanPlan entangle_scan_plan(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det) {
    ScanPlan plan;
    plan.protocol = with_noise(ProtocolConfig::full(losses.retrieval), noise);
    plan.losses = losses;
    plan.detector = det;
    plan.settings = {{setting(0.0, 0.0, Register::One), setting(0.0, 0.0, Register::Two)},
                     {setting(kPi / 4, 0.0, Register::One), setting(kPi / 4, 0.0, Register::Two)}};
    plan.variable = ScanVariable::AnalyzerPhase;
    plan.scanned_register = Register::Two;
    return plan;
}

ScanPlan chsh_plan(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det, const ChshAngles& a) {
    ScanPlan plan;
    plan.protocol = with_noise(ProtocolConfig::full(losses.retrieval), noise);
    plan.losses = losses;
    plan.detector = det;
    plan.detector.mode = DetectorMode::FourDetector;
    auto pair = [](double t1, double t2) {
        return std::pair{setting(deg(t1), 0.0, Register::One), setting(deg(t2), 0.0, Register::Two)};
    };
    plan.settings = {pair(a.alpha, a.beta), pair(a.alpha_star, a.beta), pair(a.alpha, a.beta_star),
                     pair(a.alpha_star, a.beta_star)};
    plan.variable = ScanVariable::AnalyzerPhase;
    plan.scanned_register = Register::Two;
    return plan;
}

std::array<ScanPlan, 2> rabi_scan_plans(const NoiseConfig& noise, const LossChain& losses, const DetectorModel& det) {
    std::array<ScanPlan, 2> plans;
    for (std::size_t k = 0; k < 2; ++k) {
        ScanPlan& plan = plans[k];
        plan.protocol = with_noise(ProtocolConfig::skip_entangle_phase(losses.retrieval), noise);
        plan.protocol.prepare[1 - k].area = 0.0;
        plan.losses = losses;
        plan.detector = det;
        plan.settings = {{setting(0.0, 0.0, Register::One), setting(0.0, 0.0, Register::Two)}};
        plan.variable = ScanVariable::PulseDuration;
        plan.scanned_pulse = k;
    }
    return plans;
}

EntanglementEstimates estimate_entanglement(const std::vector<CountsTable>& tables, const std::vector<double>& grid,
                                            int port_parity) {
    if (tables.size() != grid.size()) throw std::invalid_argument("estimate_entanglement: grid/table size mismatch");
    std::vector<SettingsCounts> eigen;
    std::vector<FringeSample> fringe;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (tables[i].entries.size() < 2) throw std::invalid_argument("estimate_entanglement: expected two settings");
        eigen.push_back(tables[i].entries[0]);
        fringe.push_back(coincidence_fringe_sample(grid[i], tables[i].entries[1], port_parity));
    }
    EntanglementEstimates e;
    e.v1 = pooled_visibility(eigen, port_parity);
    e.v1_flat = flat_line_visibility(eigen, port_parity);
    e.v2 = fit_fringe(fringe);
    e.fidelity = fidelity_bound(Estimate{std::clamp(e.v1.value, 0.0, 1.0), e.v1.error},
                                Estimate{e.v2.visibility, e.v2.visibility_error});
    return e;
}

ResultBundle run_scenario(const ExperimentConfig& input) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = input;
    if (c.grid.empty()) c.grid = default_grid(c.scenario);
    c.validate();

    const SeedPolicy seeds{c.master_seed, c.threads};
    ResultBundle out;
    json& s = out.summary;
    s["config"] = to_json(c);
    const int parity = c.detector.port_parity();

    switch (c.scenario) {
        case Scenario::PrepVerify: {
            const ScanPlan plan = prep_verify_plan(c.noise, c.losses, c.detector);
            ScanSeries series{"fringe", scan_variable_name(plan.variable), c.grid, scan(plan, c.grid, c.shots, seeds)};
            std::vector<FringeSample> samples;
            for (std::size_t i = 0; i < c.grid.size(); ++i) {
                const auto& e = series.tables[i].entries[0];
                samples.push_back(FringeSample{c.grid[i], double(e.clicks(Register::Two, Outcome::Plus)),
                                               double(e.clicks(Register::Two, Outcome::Minus))});
            }
            s["fringe"] = fringe_json(fit_fringe(samples));
            out.series.push_back(std::move(series));
            break;
        }
        case Scenario::EntangleScan: {
            const ScanPlan plan = entangle_scan_plan(c.noise, c.losses, c.detector);
            ScanSeries series{"entangle", scan_variable_name(plan.variable), c.grid, scan(plan, c.grid, c.shots, seeds)};
            const EntanglementEstimates e = estimate_entanglement(series.tables, c.grid, parity);
            s["V1"] = estimate_json(e.v1);
            s["V1_flat_line"] = estimate_json(e.v1_flat);
            s["V2"] = {{"value", e.v2.visibility}, {"error", e.v2.visibility_error}};
            s["V2_fringe"] = fringe_json(e.v2);
            s["fidelity_bound"] = estimate_json(e.fidelity);
            s["port_parity"] = parity;
            out.series.push_back(std::move(series));
            break;
        }
        case Scenario::Chsh: {
            const ScanPlan plan = chsh_plan(c.noise, c.losses, c.detector, c.chsh);
            const std::vector<double> grid = {0.0};
            ScanSeries series{"chsh", scan_variable_name(plan.variable), grid, scan(plan, grid, c.shots, seeds)};
            const auto& a = c.chsh;
            const BellResult r =
                chsh_from_table(series.tables[0], deg(a.alpha), deg(a.alpha_star), deg(a.beta), deg(a.beta_star));
            const double angles[4][2] = {
                {a.alpha, a.beta}, {a.alpha_star, a.beta}, {a.alpha, a.beta_star}, {a.alpha_star, a.beta_star}};
            json ev = json::array();
            for (int k = 0; k < 4; ++k) {
                ev.push_back({{"alpha_deg", angles[k][0]},
                              {"beta_deg", angles[k][1]},
                              {"E", r.E[k].value},
                              {"error", r.E[k].error},
                              {"parallel", r.E[k].parallel},
                              {"cross", r.E[k].cross}});
            }
            s["correlations"] = ev;
            s["S"] = r.S;
            s["sigma_S"] = r.sigma_S;
            s["violation_sigmas"] = r.violation_sigmas;
            out.series.push_back(std::move(series));
            break;
        }
        case Scenario::EfficiencyBudget: {
            ScanPlan plan = entangle_scan_plan(c.noise, c.losses, c.detector);
            plan.settings.resize(1);
            const std::vector<double> grid = {0.0};
            ScanSeries series{"efficiency", scan_variable_name(plan.variable), grid, scan(plan, grid, c.shots, seeds)};
            const auto& e = series.tables[0].entries[0];
            auto rate = [&](std::uint64_t k) {
                const double p = double(k) / double(e.shots);
                return Estimate{p, std::sqrt(p * (1 - p) / double(e.shots))};
            };
            const auto clicks = [&](Register r) { return e.clicks(r, Outcome::Plus) + e.clicks(r, Outcome::Minus); };
            s["detection_probability_register1"] = estimate_json(rate(clicks(Register::One)));
            s["detection_probability_register2"] = estimate_json(rate(clicks(Register::Two)));
            s["coincidence_probability"] = estimate_json(rate(e.coincidences()));
            s["chain"] = s["config"]["losses"];
            s["chain_product"] = c.losses.end_to_end();
            out.series.push_back(std::move(series));
            break;
        }
        case Scenario::RabiScan: {
            const auto plans = rabi_scan_plans(c.noise, c.losses, c.detector);
            const double eff = c.losses.end_to_end();
            if (!(eff > 0.0)) throw ConfigError("losses: end-to-end efficiency is zero, nothing to detect");
            const std::uint64_t effective = std::max<std::uint64_t>(1, std::uint64_t(std::llround(double(c.shots) * eff)));
            const char* names[2] = {"r1", "r2"};
            for (std::size_t k = 0; k < 2; ++k) {
                ScanSeries series{names[k], scan_variable_name(plans[k].variable), c.grid,
                                  scan(plans[k], c.grid, c.shots, seeds)};
                // r1 populates E', r2 populates L'; at theta = 0 those are the
                // plus and minus ports before any relabeling.
                const bool plus = (k == 0) != c.detector.port_swap[1];
                std::vector<RabiSample> samples;
                for (std::size_t i = 0; i < c.grid.size(); ++i) {
                    const auto& e = series.tables[i].entries[0];
                    const auto n = e.clicks(Register::Two, plus ? Outcome::Plus : Outcome::Minus);
                    samples.push_back({c.grid[i], double(n) / (double(c.shots) * eff)});
                }
                const RabiFit f = fit_rabi(samples, effective);
                s["rabi"][names[k]] = {{"pi_time_ns", f.pi_time},
                                       {"pi_time_error_ns", f.pi_time_error},
                                       {"omega", f.omega},
                                       {"omega_error", f.omega_error},
                                       {"decay_time_ns", finite_or_null(f.decay_time)},
                                       {"amplitude", f.amplitude},
                                       {"offset", f.offset},
                                       {"residual_norm", f.residual_norm},
                                       {"chi2", f.chi2}};
                out.series.push_back(std::move(series));
            }
            break;
        }
    }

    json series = json::array();
    std::uint64_t total = 0;
    for (const auto& ser : out.series) {
        series.push_back(series_json(ser));
        for (const auto& t : ser.tables) total += t.total_shots();
    }
    s["series"] = std::move(series);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s["metadata"] = {{"version", "0.1.0"}, {"elapsed_seconds", elapsed}, {"threads", c.threads}, {"total_shots", total}};
    return out;
}

std::string counts_csv(const ResultBundle& bundle) {
    std::string out = "series,point,grid_value,setting,outcome1,outcome2,count\n";
    char buf[256];
    for (const auto& s : bundle.series) {
        for (std::size_t i = 0; i < s.tables.size(); ++i) {
            const auto& entries = s.tables[i].entries;
            for (std::size_t k = 0; k < entries.size(); ++k) {
                for (Outcome a : kOutcomes) {
                    for (Outcome b : kOutcomes) {
                        std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%zu,%s,%s,%llu\n", s.name.c_str(), i, s.grid[i], k,
                                      outcome_name(a), outcome_name(b),
                                      static_cast<unsigned long long>(entries[k](a, b)));
                        out += buf;
                    }
                }
            }
        }
    }
    return out;
}

void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "result.json");
        if (!f) throw std::runtime_error("cannot write " + (dir / "result.json").string());
        f << bundle.summary.dump(2) << '\n';
    }
    std::ofstream f(dir / "counts.csv");
    if (!f) throw std::runtime_error("cannot write " + (dir / "counts.csv").string());
    f << counts_csv(bundle);
}

std::filesystem::path default_output_dir() {
    const char* env = std::getenv(kOutDirEnv);
    if (env != nullptr && *env != '\0') return env;
    return "results";
}

}  // namespace timebin
