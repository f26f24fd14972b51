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

// Time-bin analyzer, loss chain, and detector model. A setting (theta, phi)
// projects a register onto
//   |theta, phi>      = cos(theta)|E> + e^{i phi} sin(theta)|L>      (plus port)
//   |theta, phi>^perp = sin(theta)|E> - e^{i phi} cos(theta)|L>      (minus port)
// and the vacuum (no click).

#include <array>
#include <cstdint>
#include <string>

#include "timebin/hilbert.hpp"

namespace timebin {

struct AnalyzerSetting {
    double theta = 0.0;  // [0, pi/2]
    double phi = 0.0;    // [0, 2pi)
    Register reg = Register::One;

    void validate() const;
    bool operator==(const AnalyzerSetting&) const = default;
};

struct LossChain {
    double preparation = 1.0;
    double retrieval = 1.0;  // consumed by the protocol's retrieval channels
    double fiber_coupling = 1.0;
    double aom_deflection = 1.0;
    double mz_transmission = 1.0;
    double detector_efficiency = 1.0;

    /// Transmission applied by apply_losses (everything except retrieval).
    double transmission() const {
        return preparation * fiber_coupling * aom_deflection * mz_transmission * detector_efficiency;
    }
    /// End-to-end single-photon detection probability.
    double end_to_end() const { return transmission() * retrieval; }

    void validate() const;

    /// Efficiency budget of the experiment: 0.90 / 0.13 / 0.69 / 0.77 / 0.47 / 0.60.
    static LossChain measured_budget();
};

enum class DetectorMode : std::uint8_t {
    /// SPD1/SPD2 shared by both photons in consecutive windows; afterpulses
    /// couple the register-1 window to the register-2 window.
    TwoDetectorMultiplexed,
    /// SPD1/SPD2 for register 1, SPD3/SPD4 for register 2; no afterpulse coupling.
    FourDetector,
};

struct DetectorModel {
    double dark_count_prob = 0.0;  // per register window
    double afterpulse_prob = 0.0;  // window k click -> spurious click in window k+1, same detector
    /// Per-register relabeling of the plus/minus ports.
    std::array<bool, 2> port_swap = {false, false};
    DetectorMode mode = DetectorMode::TwoDetectorMultiplexed;

    void validate() const;
    /// +1 or -1: sign relating label correlations to basis correlations.
    int port_parity() const { return port_swap[0] != port_swap[1] ? -1 : 1; }
    /// Detector id (1..4) seen by a port of a register.
    int detector_id(Register reg, bool plus_port) const;
};

enum class Outcome : std::uint8_t { Plus = 0, Minus = 1, None = 2 };

inline constexpr std::array<Outcome, 3> kOutcomes = {Outcome::Plus, Outcome::Minus, Outcome::None};

const char* outcome_name(Outcome o);

/// Joint outcome probabilities for a pair of settings, indexed [a][b] with
/// a for register 1 and b for register 2.
struct OutcomeDistribution {
    AnalyzerSetting setting1;
    AnalyzerSetting setting2;
    std::array<std::array<double, 3>, 3> p{};

    double operator()(Outcome a, Outcome b) const { return p[int(a)][int(b)]; }
    double total() const;
    /// Marginal probability of a click (either port) on a register.
    double click_probability(Register reg) const;
    void validate() const;
};

/// {plus, minus, vacuum} effects on a 3-mode register; they sum to identity.
std::array<Eigen::Matrix3cd, 3> measurement_effects(const AnalyzerSetting& setting);

/// Amplitude damping of E and L toward Vac with transmission T = chain.transmission().
KrausChannel loss_channel(double transmission, Register reg);
DensityOperator apply_losses(const DensityOperator& rho, const LossChain& chain, Register reg);

/// Born-rule joint distribution with dark counts and port relabeling applied.
/// Afterpulsing is a sampling-time effect (see montecarlo). Throws
/// std::invalid_argument if both settings refer to the same register.
OutcomeDistribution joint_click_distribution(const DensityOperator& rho, const AnalyzerSetting& s1,
                                             const AnalyzerSetting& s2, const DetectorModel& det);

/// Expected distribution after depth-1 afterpulsing in multiplexed mode;
/// identical to the input for the four-detector arrangement. A spurious click
/// on the detector that already fired is absorbed; a double click is assigned
/// to either port with probability 1/2.
OutcomeDistribution with_afterpulse_expectation(const OutcomeDistribution& dist, const DetectorModel& det);

}  // namespace timebin
