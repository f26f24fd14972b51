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

// Three-phase time-bin entanglement protocol on the blockaded ensemble:
//   prepare:  pi/2 on r1, pi on r2                     -> (|R1> + |R2>)/sqrt2
//   entangle: retrieve r1 -> (reg1, E), patch r1,
//             retrieve r2 -> (reg1, L), patch r2       -> (|R1,E> + |R2,L>)/sqrt2
//   readout:  retrieve r1 -> (reg2, E'), r2 -> (reg2, L')
// The skip variant drops the entangle phase, mapping the prepared atomic
// superposition directly onto register 2.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "timebin/hilbert.hpp"

namespace timebin {

enum class RydbergLevel : std::uint8_t { R1 = 1, R2 = 2 };

constexpr AtomLevel to_atom(RydbergLevel r) { return r == RydbergLevel::R1 ? AtomLevel::R1 : AtomLevel::R2; }
constexpr RydbergLevel other(RydbergLevel r) { return r == RydbergLevel::R1 ? RydbergLevel::R2 : RydbergLevel::R1; }

struct PulseSpec {
    RydbergLevel target = RydbergLevel::R1;
    double area = 0.0;   // radians, [0, 2pi]
    double phase = 0.0;  // radians, [0, 2pi)
    std::string label;

    void validate() const;
};

struct RetrievalSpec {
    RydbergLevel source = RydbergLevel::R1;
    Register reg = Register::One;
    PhotonMode mode = PhotonMode::E;
    double efficiency = 1.0;

    void validate() const;
};

struct AtomMetadata {
    std::uint64_t atom_count = 0;  // bookkeeping only; never enters the dynamics
    double pi_time_r1_ns = 92.95;
    double pi_time_r2_ns = 92.18;
};

struct NoiseConfig {
    double blockade_leakage = 0.0;   // transfer probability to D per blocked pulse
    double rydberg_dephasing = 0.0;  // gamma per protocol step
    double pulse_area_error = 0.0;   // fractional, multiplies every pulse area
    /// Depolarizing channel on {R1,R2} x {E,L} inserted just before readout;
    /// 1 disables it.
    double werner_visibility = 1.0;
    AtomMetadata atoms;

    void validate() const;
};

enum class ProtocolVariant : std::uint8_t { Full, SkipEntanglePhase };
enum class Phase : std::uint8_t { Prepare, Entangle, Readout };

using ProtocolStep = std::variant<PulseSpec, RetrievalSpec>;

struct ProtocolConfig {
    ProtocolVariant variant = ProtocolVariant::Full;
    std::vector<PulseSpec> prepare;
    std::vector<ProtocolStep> entangle;
    std::vector<RetrievalSpec> readout;
    NoiseConfig noise;
    Phase halt_after = Phase::Readout;

    /// Canonical sequence with every retrieval at `retrieval_efficiency`.
    static ProtocolConfig full(double retrieval_efficiency = 1.0);
    static ProtocolConfig skip_entangle_phase(double retrieval_efficiency = 1.0);

    /// Throws ConfigError when the sequence deviates from the variant's
    /// structure, a retrieval slot is reused, or a value is out of range.
    void validate() const;
};

/// Pulse + blockade leakage as a Kraus channel.
KrausChannel pulse_channel(const PulseSpec& pulse, const NoiseConfig& noise);
DensityOperator collective_pulse(const DensityOperator& rho, const PulseSpec& pulse, const NoiseConfig& noise);

KrausChannel retrieval_channel(const RetrievalSpec& spec);
/// Throws ConfigError if the target (register, mode) slot is already populated.
DensityOperator retrieve(const DensityOperator& rho, const RetrievalSpec& spec);

/// Time-bin label of a basis state: sign(#late - #early), where R1/E/E' are
/// early and R2/L/L' are late.
int branch_label(int basis_index);

KrausChannel dephasing_channel(double gamma_step);
DensityOperator dephase_step(const DensityOperator& rho, double gamma_step);

DensityOperator run_protocol(const ProtocolConfig& config);

/// Relative phase of the late branch with respect to the early branch,
/// computed from pulse phases: sum over r2-targeting pulses minus sum over
/// r1-targeting pulses, restricted to the pulses that act on the surviving
/// branches (all of them for the full variant; the two preparation pulses for
/// the skip variant). Returned in [0, 2pi).
double branch_phase(const ProtocolConfig& config);

/// Noise-free target of run_protocol for the given config's phases and halt
/// point: Eq.-(1)-type atom-photon state after the entangle phase,
/// (|G,E,E'> + e^{i psi}|G,L,L'>)/sqrt2 after full readout, and
/// (|G,Vac,E'> + e^{i phi}|G,Vac,L'>)/sqrt2 for the skip variant.
PureState ideal_state(const ProtocolConfig& config);

/// Wraps an angle into [0, 2pi).
double wrap_phase(double phase);

}  // namespace timebin
