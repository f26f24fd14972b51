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

// Shot-by-shot sampling of detector clicks with reproducible substreams.
//
// Substream rule: every shot draws from a counter-based generator keyed by
// (master_seed, point index, settings index, shot index):
//   key   = mix(mix(master_seed ^ kPointSalt * (point + 1)) ^ kSettingSalt * (setting + 1))
//   state = mix(key ^ kShotSalt * (shot + 1))
// followed by splitmix64 steps. No shot depends on any other, so the counts
// are identical for any partition of shots among worker threads.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "timebin/optics.hpp"
#include "timebin/protocol.hpp"

namespace timebin {

struct SeedPolicy {
    std::uint64_t master_seed = 0;
    unsigned threads = 1;

    std::uint64_t stream_key(std::uint64_t point, std::uint64_t setting) const;
};

/// splitmix64 generator seeded from one substream state.
class ShotRng {
  public:
    ShotRng(std::uint64_t key, std::uint64_t shot);
    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

struct ShotRecord {
    std::uint64_t shot = 0;
    std::size_t settings_index = 0;
    Outcome reg1 = Outcome::None;
    Outcome reg2 = Outcome::None;
    /// Afterpulse fired into window k (0: register-1 window, 1: register-2 window).
    std::array<bool, 2> afterpulse{};
};

/// Coincidence counts for one settings pair: [reg1 outcome][reg2 outcome].
struct SettingsCounts {
    AnalyzerSetting setting1;
    AnalyzerSetting setting2;
    std::array<std::array<std::uint64_t, 3>, 3> n{};
    std::uint64_t shots = 0;

    std::uint64_t operator()(Outcome a, Outcome b) const { return n[int(a)][int(b)]; }
    std::uint64_t sum() const;
    /// Post-selected coincidences (both registers clicked).
    std::uint64_t coincidences() const;
    std::uint64_t clicks(Register reg, Outcome o) const;
    bool operator==(const SettingsCounts&) const = default;
};

/// Counts for every settings pair measured at one grid point.
struct CountsTable {
    std::vector<SettingsCounts> entries;

    std::uint64_t total_shots() const;
    bool operator==(const CountsTable&) const = default;
};

/// One shot. Depth-1 afterpulse (window 1 -> window 2) in multiplexed mode.
ShotRecord sample_shot(const OutcomeDistribution& dist, const DetectorModel& det, const SeedPolicy& seeds,
                       std::uint64_t point, std::size_t settings_index, std::uint64_t shot);

/// Samples `shots` shots for one distribution. Throws ConfigError for zero shots.
SettingsCounts sample_counts(const OutcomeDistribution& dist, std::uint64_t shots, const DetectorModel& det,
                             const SeedPolicy& seeds, std::uint64_t point = 0, std::size_t settings_index = 0);

/// Samples every distribution at one grid point into a CountsTable.
CountsTable sample_table(const std::vector<OutcomeDistribution>& dists, std::uint64_t shots,
                         const DetectorModel& det, const SeedPolicy& seeds, std::uint64_t point);

enum class ScanVariable : std::uint8_t { AnalyzerPhase, PulseArea, PulseDuration };

ScanVariable parse_scan_variable(const std::string& name);
const char* scan_variable_name(ScanVariable v);

/// What is measured at every grid point, and which knob the grid drives.
struct ScanPlan {
    ProtocolConfig protocol;
    LossChain losses;
    DetectorModel detector;
    /// Settings pairs measured at every grid point (register 1, register 2).
    std::vector<std::pair<AnalyzerSetting, AnalyzerSetting>> settings;
    ScanVariable variable = ScanVariable::AnalyzerPhase;
    /// AnalyzerPhase: register whose phi is replaced by the grid value.
    Register scanned_register = Register::Two;
    /// PulseArea / PulseDuration: index into protocol.prepare of the driven pulse.
    std::size_t scanned_pulse = 0;
};

/// One CountsTable per grid point, each from independent substreams:
/// run_protocol -> apply_losses -> joint_click_distribution -> sample_counts.
std::vector<CountsTable> scan(const ScanPlan& plan, const std::vector<double>& grid, std::uint64_t shots,
                              const SeedPolicy& seeds);

/// Exact click distributions (afterpulse folded in) for every grid point and
/// settings pair: the infinite-shot limit of scan().
std::vector<std::vector<OutcomeDistribution>> scan_distributions(const ScanPlan& plan, const std::vector<double>& grid);

/// Final state after losses on both registers for a protocol config.
DensityOperator detected_state(const ProtocolConfig& protocol, const LossChain& losses);

}  // namespace timebin
