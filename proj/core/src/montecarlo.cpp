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

#include "timebin/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>

#include "timebin/errors.hpp"

namespace timebin {

namespace {

constexpr std::uint64_t kPointSalt = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSettingSalt = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kShotSalt = 0x8CB92BA72F3D8DD7ULL;

constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t SeedPolicy::stream_key(std::uint64_t point, std::uint64_t setting) const {
    return mix(mix(master_seed ^ (kPointSalt * (point + 1))) ^ (kSettingSalt * (setting + 1)));
}

ShotRng::ShotRng(std::uint64_t key, std::uint64_t shot) : state_(mix(key ^ (kShotSalt * (shot + 1)))) {}

std::uint64_t ShotRng::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
}

std::uint64_t SettingsCounts::sum() const {
    std::uint64_t s = 0;
    for (const auto& row : n) {
        for (auto x : row) s += x;
    }
    return s;
}

std::uint64_t SettingsCounts::coincidences() const {
    std::uint64_t s = 0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) s += n[a][b];
    }
    return s;
}

std::uint64_t SettingsCounts::clicks(Register reg, Outcome o) const {
    std::uint64_t s = 0;
    for (int i = 0; i < 3; ++i) s += reg == Register::One ? n[int(o)][i] : n[i][int(o)];
    return s;
}

std::uint64_t CountsTable::total_shots() const {
    std::uint64_t s = 0;
    for (const auto& e : entries) s += e.shots;
    return s;
}

namespace {

struct Sampler {
    std::array<double, 9> cdf{};
    const DetectorModel* det = nullptr;
    std::uint64_t key = 0;
    std::size_t settings_index = 0;

    Sampler(const OutcomeDistribution& dist, const DetectorModel& d, std::uint64_t k, std::size_t si)
        : det(&d), key(k), settings_index(si) {
        double acc = 0.0;
        for (int i = 0; i < 9; ++i) {
            acc += std::max(0.0, dist.p[i / 3][i % 3]);
            cdf[i] = acc;
        }
        for (double& c : cdf) c /= acc;
        cdf[8] = 1.0;
    }

    ShotRecord draw(std::uint64_t shot) const {
        ShotRng rng(key, shot);
        const double u = rng.uniform();
        int k = 0;
        while (k < 8 && u >= cdf[k]) ++k;
        ShotRecord r;
        r.shot = shot;
        r.settings_index = settings_index;
        r.reg1 = Outcome(k / 3);
        r.reg2 = Outcome(k % 3);
        if (det->mode == DetectorMode::TwoDetectorMultiplexed && det->afterpulse_prob > 0.0 &&
            r.reg1 != Outcome::None) {
            if (rng.uniform() < det->afterpulse_prob) {
                r.afterpulse[1] = true;
                if (r.reg2 == Outcome::None) {
                    r.reg2 = r.reg1;
                } else if (r.reg2 != r.reg1 && rng.uniform() < 0.5) {
                    r.reg2 = r.reg1;
                }
            }
        }
        return r;
    }
};

}  // namespace

ShotRecord sample_shot(const OutcomeDistribution& dist, const DetectorModel& det, const SeedPolicy& seeds,
                       std::uint64_t point, std::size_t settings_index, std::uint64_t shot) {
    return Sampler(dist, det, seeds.stream_key(point, settings_index), settings_index).draw(shot);
}

SettingsCounts sample_counts(const OutcomeDistribution& dist, std::uint64_t shots, const DetectorModel& det,
                             const SeedPolicy& seeds, std::uint64_t point, std::size_t settings_index) {
    if (shots == 0) throw ConfigError("sample_counts: shots must be >= 1");
    det.validate();
    dist.validate();
    const Sampler sampler(dist, det, seeds.stream_key(point, settings_index), settings_index);

    const unsigned workers = std::max(1u, std::min<unsigned>(seeds.threads, unsigned(std::min<std::uint64_t>(shots, 1u << 16))));
    std::vector<std::array<std::array<std::uint64_t, 3>, 3>> partial(workers);
    auto work = [&](unsigned w) {
        const std::uint64_t begin = shots * w / workers;
        const std::uint64_t end = shots * (w + 1) / workers;
        auto& local = partial[w];
        for (std::uint64_t s = begin; s < end; ++s) {
            const ShotRecord r = sampler.draw(s);
            ++local[int(r.reg1)][int(r.reg2)];
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    SettingsCounts out;
    out.setting1 = dist.setting1;
    out.setting2 = dist.setting2;
    out.shots = shots;
    for (const auto& local : partial) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) out.n[a][b] += local[a][b];
        }
    }
    return out;
}

CountsTable sample_table(const std::vector<OutcomeDistribution>& dists, std::uint64_t shots,
                         const DetectorModel& det, const SeedPolicy& seeds, std::uint64_t point) {
    CountsTable t;
    t.entries.reserve(dists.size());
    for (std::size_t i = 0; i < dists.size(); ++i) t.entries.push_back(sample_counts(dists[i], shots, det, seeds, point, i));
    return t;
}

ScanVariable parse_scan_variable(const std::string& name) {
    if (name == "analyzer_phase") return ScanVariable::AnalyzerPhase;
    if (name == "pulse_area") return ScanVariable::PulseArea;
    if (name == "pulse_duration") return ScanVariable::PulseDuration;
    throw ConfigError("unknown scan variable '" + name + "'");
}

const char* scan_variable_name(ScanVariable v) {
    switch (v) {
        case ScanVariable::AnalyzerPhase: return "analyzer_phase";
        case ScanVariable::PulseArea: return "pulse_area";
        case ScanVariable::PulseDuration: return "pulse_duration";
    }
    return "?";
}

DensityOperator detected_state(const ProtocolConfig& protocol, const LossChain& losses) {
    DensityOperator rho = run_protocol(protocol);
    if (losses.transmission() < 1.0) {
        rho = apply_losses(rho, losses, Register::One);
        rho = apply_losses(rho, losses, Register::Two);
    }
    return rho;
}

namespace {

void check_plan(const ScanPlan& plan, const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("scan grid is empty");
    if (plan.settings.empty()) throw ConfigError("scan needs at least one settings pair");
    if (plan.variable != ScanVariable::AnalyzerPhase) {
        if (plan.protocol.variant != ProtocolVariant::SkipEntanglePhase) {
            throw ConfigError(std::string("scan variable ") + scan_variable_name(plan.variable) +
                              " is only defined for the skip_entangle_phase variant");
        }
        if (plan.scanned_pulse >= plan.protocol.prepare.size()) throw ConfigError("scanned pulse index out of range");
    }
}

ProtocolConfig at_grid_point(const ScanPlan& plan, double value) {
    ProtocolConfig cfg = plan.protocol;
    if (plan.variable == ScanVariable::AnalyzerPhase) return cfg;
    PulseSpec& pulse = cfg.prepare[plan.scanned_pulse];
    if (plan.variable == ScanVariable::PulseArea) {
        pulse.area = value;
    } else {
        const auto& atoms = cfg.noise.atoms;
        const double pi_time = pulse.target == RydbergLevel::R1 ? atoms.pi_time_r1_ns : atoms.pi_time_r2_ns;
        if (value < 0.0) throw ConfigError("pulse duration must be non-negative");
        pulse.area = std::numbers::pi * value / pi_time;
    }
    return cfg;
}

std::vector<OutcomeDistribution> distributions_at(const ScanPlan& plan, const DensityOperator& rho, double value) {
    std::vector<OutcomeDistribution> out;
    out.reserve(plan.settings.size());
    for (auto [s1, s2] : plan.settings) {
        if (plan.variable == ScanVariable::AnalyzerPhase) {
            (plan.scanned_register == Register::One ? s1 : s2).phi = wrap_phase(value);
        }
        out.push_back(joint_click_distribution(rho, s1, s2, plan.detector));
    }
    return out;
}

}  // namespace

std::vector<CountsTable> scan(const ScanPlan& plan, const std::vector<double>& grid, std::uint64_t shots,
                              const SeedPolicy& seeds) {
    check_plan(plan, grid);
    std::vector<CountsTable> tables;
    tables.reserve(grid.size());
    std::optional<DensityOperator> fixed;
    if (plan.variable == ScanVariable::AnalyzerPhase) fixed = detected_state(plan.protocol, plan.losses);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const DensityOperator rho = fixed ? *fixed : detected_state(at_grid_point(plan, grid[i]), plan.losses);
        tables.push_back(sample_table(distributions_at(plan, rho, grid[i]), shots, plan.detector, seeds, i));
    }
    return tables;
}

std::vector<std::vector<OutcomeDistribution>> scan_distributions(const ScanPlan& plan, const std::vector<double>& grid) {
    check_plan(plan, grid);
    std::vector<std::vector<OutcomeDistribution>> out;
    std::optional<DensityOperator> fixed;
    if (plan.variable == ScanVariable::AnalyzerPhase) fixed = detected_state(plan.protocol, plan.losses);
    for (double v : grid) {
        const DensityOperator rho = fixed ? *fixed : detected_state(at_grid_point(plan, v), plan.losses);
        auto dists = distributions_at(plan, rho, v);
        for (auto& d : dists) d = with_afterpulse_expectation(d, plan.detector);
        out.push_back(std::move(dists));
    }
    return out;
}

}  // namespace timebin
