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

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "timebin/errors.hpp"
#include "timebin/protocol.hpp"

namespace timebin {
namespace {

using testing::idx;
using testing::ket;
using testing::projector;

constexpr double kPi = std::numbers::pi;
constexpr auto G = AtomLevel::G;
constexpr auto R1 = AtomLevel::R1;
constexpr auto R2 = AtomLevel::R2;
constexpr auto D = AtomLevel::D;
constexpr auto Vac = PhotonMode::Vac;
constexpr auto E = PhotonMode::E;
constexpr auto L = PhotonMode::L;

DensityOperator basis_rho(AtomLevel a, PhotonMode p1 = Vac, PhotonMode p2 = Vac) {
    return pure_to_density(PureState::basis(a, p1, p2));
}

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

TEST(CollectivePulse, ZeroAreaIsIdentity) {
    std::mt19937_64 rng(11);
    const DensityOperator rho(testing::random_density(rng));
    for (auto target : {RydbergLevel::R1, RydbergLevel::R2}) {
        const auto out = collective_pulse(rho, PulseSpec{target, 0.0, 1.3, "zero"}, NoiseConfig{});
        EXPECT_LT(max_diff(out.matrix(), rho.matrix()), 1e-14);
    }
}

TEST(CollectivePulse, PreparationSequenceGivesEqualSuperposition) {
    // pi/2 on r1: |G> -> (|G> + |R1>)/sqrt2; pi on r2: |G> -> |R2>, R1 blockaded.
    auto rho = collective_pulse(basis_rho(G), PulseSpec{RydbergLevel::R1, kPi / 2, 0.0, ""}, NoiseConfig{});
    rho = collective_pulse(rho, PulseSpec{RydbergLevel::R2, kPi, 0.0, ""}, NoiseConfig{});
    const Matrix expected = projector(ket({{1.0, idx(R1, Vac, Vac)}, {1.0, idx(R2, Vac, Vac)}}));
    EXPECT_LT(max_diff(rho.matrix(), expected), 1e-14);
}

TEST(CollectivePulse, RotationConvention) {
    const double theta = 1.1, phi = 0.7;
    const auto out = collective_pulse(basis_rho(G), PulseSpec{RydbergLevel::R1, theta, phi, ""}, NoiseConfig{});
    const Vector v = ket({{std::cos(theta / 2), idx(G, Vac, Vac)},
                          {std::polar(1.0, phi) * std::sin(theta / 2), idx(R1, Vac, Vac)}});
    EXPECT_LT(max_diff(out.matrix(), projector(v)), 1e-14);
    // |R> -> -e^{-i phi} sin|G> + cos|R>
    const auto back = collective_pulse(basis_rho(R1), PulseSpec{RydbergLevel::R1, theta, phi, ""}, NoiseConfig{});
    const Vector w = ket({{-std::polar(1.0, -phi) * std::sin(theta / 2), idx(G, Vac, Vac)},
                          {std::cos(theta / 2), idx(R1, Vac, Vac)}});
    EXPECT_LT(max_diff(back.matrix(), projector(w)), 1e-14);
}

TEST(CollectivePulse, BlockadedLevelUnchanged) {
    const auto out = collective_pulse(basis_rho(R2), PulseSpec{RydbergLevel::R1, kPi, 0.0, ""}, NoiseConfig{});
    EXPECT_LT(max_diff(out.matrix(), basis_rho(R2).matrix()), 1e-15);
}

TEST(CollectivePulse, LeakageToErrorSink) {
    NoiseConfig noise;
    noise.blockade_leakage = 0.1;
    const auto out = collective_pulse(basis_rho(R2), PulseSpec{RydbergLevel::R1, kPi, 0.0, ""}, noise);
    EXPECT_NEAR(out.population(R2, Vac, Vac), 0.9, 1e-14);
    EXPECT_NEAR(out.population(D, Vac, Vac), 0.1, 1e-14);
    const auto small = collective_pulse(basis_rho(R2), PulseSpec{RydbergLevel::R1, 1.0, 0.0, ""}, noise);
    EXPECT_NEAR(small.population(R2, Vac, Vac), 1.0, 1e-14);
}

TEST(CollectivePulse, ErrorSinkInvariant) {
    NoiseConfig noise;
    noise.blockade_leakage = 0.3;
    noise.pulse_area_error = 0.05;
    const auto out = collective_pulse(basis_rho(D, E, L), PulseSpec{RydbergLevel::R2, kPi, 0.4, ""}, noise);
    EXPECT_NEAR(out.population(D, E, L), 1.0, 1e-14);
}

TEST(CollectivePulse, AreaErrorScalesRotation) {
    NoiseConfig noise;
    noise.pulse_area_error = 0.1;
    const auto out = collective_pulse(basis_rho(G), PulseSpec{RydbergLevel::R1, kPi / 2, 0.0, ""}, noise);
    EXPECT_NEAR(out.population(R1, Vac, Vac), std::pow(std::sin(1.1 * kPi / 4), 2), 1e-14);
}

TEST(Retrieve, LosslessCase) {
    const auto out = retrieve(basis_rho(R1), RetrievalSpec{RydbergLevel::R1, Register::One, E, 1.0});
    EXPECT_LT(max_diff(out.matrix(), basis_rho(G, E, Vac).matrix()), 1e-15);
}

TEST(Retrieve, PartialEfficiency) {
    const auto out = retrieve(basis_rho(R1), RetrievalSpec{RydbergLevel::R1, Register::One, E, 0.13});
    Matrix expected = 0.13 * basis_rho(G, E, Vac).matrix() + 0.87 * basis_rho(G).matrix();
    EXPECT_LT(max_diff(out.matrix(), expected), 1e-15);
}

TEST(Retrieve, ActsOnMatchingBranchOnly) {
    const auto rho = pure_to_density(PureState(ket({{1.0, idx(R1, Vac, Vac)}, {1.0, idx(R2, Vac, Vac)}})));
    const auto out = retrieve(rho, RetrievalSpec{RydbergLevel::R1, Register::One, E, 1.0});
    const Matrix expected = projector(ket({{1.0, idx(G, E, Vac)}, {1.0, idx(R2, Vac, Vac)}}));
    EXPECT_LT(max_diff(out.matrix(), expected), 1e-15);
}

TEST(Retrieve, ErrorSinkNeverRetrieved) {
    for (auto src : {RydbergLevel::R1, RydbergLevel::R2}) {
        const auto out = retrieve(basis_rho(D), RetrievalSpec{src, Register::Two, L, 1.0});
        EXPECT_NEAR(out.population(D, Vac, Vac), 1.0, 1e-15);
    }
}

TEST(Retrieve, PopulatedSlotRejected) {
    EXPECT_THROW(retrieve(basis_rho(R1, E, Vac), RetrievalSpec{RydbergLevel::R1, Register::One, E, 1.0}), ConfigError);
}

TEST(Retrieve, ChannelComplete) {
    for (double eta : {0.0, 0.13, 0.5, 1.0}) {
        EXPECT_LT(retrieval_channel(RetrievalSpec{RydbergLevel::R2, Register::Two, L, eta}).completeness_error(), 1e-12);
    }
}

TEST(Dephasing, ZeroIsIdentity) {
    std::mt19937_64 rng(12);
    const DensityOperator rho(testing::random_density(rng));
    EXPECT_LT(max_diff(dephase_step(rho, 0.0).matrix(), rho.matrix()), 1e-14);
}

TEST(Dephasing, FullDampingOfRydbergSuperposition) {
    const auto rho = pure_to_density(PureState(ket({{1.0, idx(R1, Vac, Vac)}, {1.0, idx(R2, Vac, Vac)}})));
    const auto out = dephase_step(rho, 1.0);
    Matrix expected = 0.5 * (basis_rho(R1).matrix() + basis_rho(R2).matrix());
    EXPECT_LT(max_diff(out.matrix(), expected), 1e-14);
}

TEST(Dephasing, BellCoherenceScalesBySqrtOneMinusGamma) {
    const int a = idx(R1, E, Vac), b = idx(R2, L, Vac);
    const auto rho = pure_to_density(PureState(ket({{1.0, a}, {1.0, b}})));
    const auto out = dephase_step(rho, 0.19);
    EXPECT_NEAR(std::abs(out(a, b)), 0.5 * std::sqrt(0.81), 1e-14);
    EXPECT_NEAR(std::abs(out(a, b)), 0.45, 1e-14);
    EXPECT_NEAR(out(a, a).real(), 0.5, 1e-15);
    EXPECT_NEAR(out(b, b).real(), 0.5, 1e-15);
}

TEST(Dephasing, PhotonPairCoherence) {
    const int a = idx(G, E, E), b = idx(G, L, L);
    const auto out = dephase_step(pure_to_density(PureState(ket({{1.0, a}, {1.0, b}}))), 0.36);
    EXPECT_NEAR(std::abs(out(a, b)), 0.5 * 0.8, 1e-14);
}

TEST(Dephasing, OutOfRangeRejected) {
    EXPECT_THROW(dephasing_channel(1.2), ConfigError);
    EXPECT_THROW(dephasing_channel(-0.1), ConfigError);
}

TEST(RunProtocol, IdealHaltAfterEntangle) {
    auto cfg = ProtocolConfig::full();
    cfg.halt_after = Phase::Entangle;
    const auto rho = run_protocol(cfg);
    const PureState eq1(ket({{1.0, idx(R1, E, Vac)}, {1.0, idx(R2, L, Vac)}}));
    EXPECT_GE(state_fidelity(rho, eq1), 1.0 - 1e-12);
}

TEST(RunProtocol, IdealFullReadout) {
    const auto rho = run_protocol(ProtocolConfig::full());
    const PureState target(ket({{1.0, idx(G, E, E)}, {1.0, idx(G, L, L)}}));
    EXPECT_GE(state_fidelity(rho, target), 1.0 - 1e-12);
}

TEST(RunProtocol, IdealSkipVariant) {
    const auto rho = run_protocol(ProtocolConfig::skip_entangle_phase());
    const PureState target(ket({{1.0, idx(G, Vac, E)}, {1.0, idx(G, Vac, L)}}));
    EXPECT_GE(state_fidelity(rho, target), 1.0 - 1e-12);
}

TEST(RunProtocol, ReadoutEfficiencySetsRegister2PhotonProbability) {
    auto cfg = ProtocolConfig::full(1.0);
    for (auto& r : cfg.readout) r.efficiency = 0.13;
    const auto red = partial_trace(run_protocol(cfg), Subsystem::Photon2);
    EXPECT_NEAR(1.0 - red(0, 0).real(), 0.13, 1e-12);
}

TEST(RunProtocol, DeterministicSinglePhotonInRegister1) {
    auto cfg = ProtocolConfig::full();
    cfg.halt_after = Phase::Entangle;
    const auto red = partial_trace(run_protocol(cfg), Subsystem::Photon1);
    EXPECT_NEAR(red(1, 1).real() + red(2, 2).real(), 1.0, 1e-12);
    EXPECT_NEAR(red(0, 0).real(), 0.0, 1e-12);
}

TEST(RunProtocol, BlockadeKeepsErrorSinkEmpty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> area(0.0, 2 * kPi), phase(0.0, 2 * kPi - 1e-9);
    for (int trial = 0; trial < 20; ++trial) {
        auto cfg = ProtocolConfig::full(0.7);
        for (auto& p : cfg.prepare) {
            p.area = area(rng);
            p.phase = phase(rng);
        }
        for (auto& s : cfg.entangle) {
            if (auto* p = std::get_if<PulseSpec>(&s)) {
                p->area = area(rng);
                p->phase = phase(rng);
            }
        }
        cfg.noise.rydberg_dephasing = 0.1;
        const auto rho = run_protocol(cfg);
        double d = 0.0;
        for (int i = 27; i < 36; ++i) d += rho(i, i).real();
        EXPECT_NEAR(d, 0.0, 1e-14);
        EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
    }
}

TEST(RunProtocol, PatchRecreatesExcitationWithPhotonRecorded) {
    // Hand composition on the R1 branch: retrieve -> |G,E>, pi pulse (phase 0) -> |R1,E>.
    auto rho = retrieve(basis_rho(R1), RetrievalSpec{RydbergLevel::R1, Register::One, E, 1.0});
    rho = collective_pulse(rho, PulseSpec{RydbergLevel::R1, kPi, 0.0, "patch"}, NoiseConfig{});
    EXPECT_LT(max_diff(rho.matrix(), basis_rho(R1, E, Vac).matrix()), 1e-14);
}

TEST(RunProtocol, PhaseBookkeepingMatchesHandDerivation) {
    // R1 branch collects e^{i(b1 + c1)}, R2 branch e^{i(b2 + c2)}.
    const double b1 = 0.3, b2 = 1.7, c1 = 2.2, c2 = 0.4;
    auto cfg = ProtocolConfig::full();
    cfg.prepare[0].phase = b1;
    cfg.prepare[1].phase = b2;
    std::get<PulseSpec>(cfg.entangle[1]).phase = c1;
    std::get<PulseSpec>(cfg.entangle[3]).phase = c2;
    const double psi = std::fmod(b2 + c2 - b1 - c1 + 4 * kPi, 2 * kPi);
    EXPECT_NEAR(branch_phase(cfg), psi, 1e-12);
    const auto rho = run_protocol(cfg);
    EXPECT_NEAR(std::arg(rho(idx(G, L, L), idx(G, E, E))), std::remainder(psi, 2 * kPi), 1e-12);
    EXPECT_GE(state_fidelity(rho, ideal_state(cfg)), 1.0 - 1e-12);
}

TEST(RunProtocol, PhaseCovarianceOfPreparation) {
    const double delta = 0.9;
    auto cfg = ProtocolConfig::skip_entangle_phase();
    cfg.prepare[1].phase = delta;
    const auto rho = run_protocol(cfg);
    EXPECT_NEAR(std::arg(rho(idx(G, Vac, L), idx(G, Vac, E))), delta, 1e-12);
}

TEST(RunProtocol, TracePreservedWithAllNoise) {
    auto cfg = ProtocolConfig::full(0.4);
    cfg.noise.blockade_leakage = 0.05;
    cfg.noise.rydberg_dephasing = 0.2;
    cfg.noise.pulse_area_error = -0.03;
    cfg.noise.werner_visibility = 0.8;
    const auto rho = run_protocol(cfg);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
    EXPECT_GE(rho.min_eigenvalue(), -1e-9);
}

TEST(ProtocolConfig, RetrievalBeforePreparationRejected) {
    auto cfg = ProtocolConfig::full();
    cfg.prepare.clear();
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_THROW(run_protocol(cfg), ConfigError);
}

TEST(ProtocolConfig, OutOfOrderEntangleRejected) {
    auto cfg = ProtocolConfig::full();
    std::swap(cfg.entangle[0], cfg.entangle[2]);
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ProtocolConfig, ReusedSlotRejected) {
    auto cfg = ProtocolConfig::full();
    cfg.readout[1].mode = E;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ProtocolConfig, RangesChecked) {
    auto cfg = ProtocolConfig::full();
    cfg.prepare[0].area = 7.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = ProtocolConfig::full(1.3);
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = ProtocolConfig::full();
    cfg.noise.atoms.pi_time_r1_ns = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace timebin
