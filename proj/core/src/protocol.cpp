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

#include "timebin/protocol.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include "timebin/errors.hpp"

namespace timebin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

const char* name(RydbergLevel r) { return r == RydbergLevel::R1 ? "r1" : "r2"; }

std::string describe(const ProtocolStep& step) {
    std::ostringstream s;
    if (const auto* p = std::get_if<PulseSpec>(&step)) {
        s << "pulse on " << name(p->target);
    } else {
        const auto& r = std::get<RetrievalSpec>(step);
        s << "retrieval " << name(r.source) << " -> (reg" << int(r.reg) << ", "
          << (r.mode == PhotonMode::E ? "E" : r.mode == PhotonMode::L ? "L" : "Vac") << ")";
    }
    return s.str();
}

bool matches(const ProtocolStep& step, const ProtocolStep& want) {
    if (step.index() != want.index()) return false;
    if (const auto* p = std::get_if<PulseSpec>(&step)) return p->target == std::get<PulseSpec>(want).target;
    const auto& r = std::get<RetrievalSpec>(step);
    const auto& w = std::get<RetrievalSpec>(want);
    return r.source == w.source && r.reg == w.reg && r.mode == w.mode;
}

std::vector<ProtocolStep> canonical_entangle(double eta) {
    return {RetrievalSpec{RydbergLevel::R1, Register::One, PhotonMode::E, eta},
            PulseSpec{RydbergLevel::R1, std::numbers::pi, 0.0, "patch r1"},
            RetrievalSpec{RydbergLevel::R2, Register::One, PhotonMode::L, eta},
            PulseSpec{RydbergLevel::R2, std::numbers::pi, 0.0, "patch r2"}};
}

std::vector<PulseSpec> canonical_prepare() {
    return {PulseSpec{RydbergLevel::R1, std::numbers::pi / 2, 0.0, "prepare r1"},
            PulseSpec{RydbergLevel::R2, std::numbers::pi, 0.0, "prepare r2"}};
}

std::vector<RetrievalSpec> canonical_readout(double eta) {
    return {RetrievalSpec{RydbergLevel::R1, Register::Two, PhotonMode::E, eta},
            RetrievalSpec{RydbergLevel::R2, Register::Two, PhotonMode::L, eta}};
}

// Projector pieces used by the retrieval channel. `slot` selects the mode on
// the chosen register, other register untouched.
int with_register(int index, Register reg, PhotonMode mode) {
    BasisLabel l = basis_label(index);
    if (reg == Register::One) l.p1 = mode; else l.p2 = mode;
    return basis_index(l.atom, l.p1, l.p2);
}

PhotonMode register_mode(int index, Register reg) {
    const BasisLabel l = basis_label(index);
    return reg == Register::One ? l.p1 : l.p2;
}

}  // namespace

double wrap_phase(double phase) {
    double p = std::fmod(phase, kTwoPi);
    if (p < 0) p += kTwoPi;
    if (p >= kTwoPi) p -= kTwoPi;
    return p;
}

void PulseSpec::validate() const {
    if (!(area >= 0.0 && area <= kTwoPi + 1e-12)) {
        throw ConfigError("pulse '" + label + "': area must be in [0, 2pi], got " + std::to_string(area));
    }
    if (!(phase >= 0.0 && phase < kTwoPi)) {
        throw ConfigError("pulse '" + label + "': phase must be in [0, 2pi), got " + std::to_string(phase));
    }
}

void RetrievalSpec::validate() const {
    if (!in_unit(efficiency)) throw ConfigError("retrieval efficiency must be in [0,1], got " + std::to_string(efficiency));
    if (mode == PhotonMode::Vac) throw ConfigError("retrieval target mode must be E or L");
}

void NoiseConfig::validate() const {
    if (!in_unit(blockade_leakage)) throw ConfigError("noise.blockade_leakage must be in [0,1]");
    if (!in_unit(rydberg_dephasing)) throw ConfigError("noise.rydberg_dephasing must be in [0,1]");
    if (!in_unit(werner_visibility)) throw ConfigError("noise.werner_visibility must be in [0,1]");
    if (!(pulse_area_error > -1.0 && pulse_area_error <= 1.0)) throw ConfigError("noise.pulse_area_error must be in (-1,1]");
    if (!(atoms.pi_time_r1_ns > 0.0) || !(atoms.pi_time_r2_ns > 0.0)) throw ConfigError("noise.atoms pi times must be positive");
}

ProtocolConfig ProtocolConfig::full(double retrieval_efficiency) {
    ProtocolConfig c;
    c.variant = ProtocolVariant::Full;
    c.prepare = canonical_prepare();
    c.entangle = canonical_entangle(retrieval_efficiency);
    c.readout = canonical_readout(retrieval_efficiency);
    return c;
}

ProtocolConfig ProtocolConfig::skip_entangle_phase(double retrieval_efficiency) {
    ProtocolConfig c;
    c.variant = ProtocolVariant::SkipEntanglePhase;
    c.prepare = canonical_prepare();
    c.readout = canonical_readout(retrieval_efficiency);
    return c;
}

void ProtocolConfig::validate() const {
    noise.validate();
    for (const auto& p : prepare) p.validate();
    for (const auto& s : entangle) std::visit([](const auto& x) { x.validate(); }, s);
    for (const auto& r : readout) r.validate();

    if (prepare.empty()) {
        if (!entangle.empty() || !readout.empty()) throw ConfigError("retrieval before preparation: prepare phase is empty");
        throw ConfigError("prepare phase is empty");
    }

    std::set<std::pair<int, int>> slots;
    auto claim = [&](const RetrievalSpec& r) {
        if (!slots.emplace(int(r.reg), int(r.mode)).second) {
            throw ConfigError("retrieval slot (reg" + std::to_string(int(r.reg)) + ", mode " +
                              std::to_string(int(r.mode)) + ") used more than once");
        }
    };
    for (const auto& s : entangle) {
        if (const auto* r = std::get_if<RetrievalSpec>(&s)) claim(*r);
    }
    for (const auto& r : readout) claim(r);

    const auto want_prepare = canonical_prepare();
    if (prepare.size() != want_prepare.size()) throw ConfigError("prepare phase must be [pulse r1, pulse r2]");
    for (std::size_t i = 0; i < prepare.size(); ++i) {
        if (prepare[i].target != want_prepare[i].target) throw ConfigError("prepare phase must be [pulse r1, pulse r2]");
    }

    const auto want_readout = canonical_readout(1.0);
    if (readout.size() != want_readout.size()) {
        throw ConfigError("readout phase must be [retrieval r1 -> (reg2, E), retrieval r2 -> (reg2, L)]");
    }
    for (std::size_t i = 0; i < readout.size(); ++i) {
        if (!matches(readout[i], want_readout[i])) {
            throw ConfigError("readout step " + std::to_string(i) + " is a " + describe(readout[i]) +
                              "; expected " + describe(want_readout[i]));
        }
    }

    if (variant == ProtocolVariant::SkipEntanglePhase) {
        if (!entangle.empty()) throw ConfigError("skip_entangle_phase variant must have an empty entangle phase");
        return;
    }
    const auto want = canonical_entangle(1.0);
    if (entangle.size() != want.size()) throw ConfigError("entangle phase must have 4 steps (retrieve/patch r1, retrieve/patch r2)");
    for (std::size_t i = 0; i < entangle.size(); ++i) {
        if (!matches(entangle[i], want[i])) {
            throw ConfigError("entangle step " + std::to_string(i) + " is a " + describe(entangle[i]) + "; expected " +
                              describe(want[i]));
        }
    }
}

KrausChannel pulse_channel(const PulseSpec& pulse, const NoiseConfig& noise) {
    pulse.validate();
    const double theta = pulse.area * (1.0 + noise.pulse_area_error);
    const int g = int(AtomLevel::G);
    const int t = int(to_atom(pulse.target));
    const int o = int(to_atom(other(pulse.target)));
    const double eps = pulse.area >= std::numbers::pi / 2 ? noise.blockade_leakage : 0.0;

    const cplx e_iphi = std::polar(1.0, pulse.phase);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);

    // |G> -> c|G> + e^{i phi} s|R_t>,  |R_t> -> -e^{-i phi} s|G> + c|R_t>.
    Matrix k0 = Matrix::Zero(kAtomDim, kAtomDim);
    k0(g, g) = c;
    k0(t, g) = e_iphi * s;
    k0(g, t) = -std::conj(e_iphi) * s;
    k0(t, t) = c;
    k0(o, o) = std::sqrt(1.0 - eps);
    k0(int(AtomLevel::D), int(AtomLevel::D)) = 1.0;

    std::vector<Matrix> ops{embed_atom(k0)};
    if (eps > 0.0) {
        Matrix k1 = Matrix::Zero(kAtomDim, kAtomDim);
        k1(int(AtomLevel::D), o) = std::sqrt(eps);
        ops.push_back(embed_atom(k1));
    }
    return KrausChannel(std::move(ops));
}

DensityOperator collective_pulse(const DensityOperator& rho, const PulseSpec& pulse, const NoiseConfig& noise) {
    return apply_channel(rho, pulse_channel(pulse, noise));
}

KrausChannel retrieval_channel(const RetrievalSpec& spec) {
    spec.validate();
    const int src = int(to_atom(spec.source));
    const double eta = spec.efficiency;

    // K_succ: |R_src, Vac> -> sqrt(eta)|G, mode>, identity elsewhere except
    // that the (never populated) slot |G, mode> is sent back to |R_src, Vac>
    // so the operator stays a contraction; K_fail: |R_src, Vac> -> sqrt(1-eta)|G, Vac>.
    Matrix succ = Matrix::Zero(kJointDim, kJointDim);
    Matrix fail = Matrix::Zero(kJointDim, kJointDim);
    for (int i = 0; i < kJointDim; ++i) {
        const BasisLabel l = basis_label(i);
        const PhotonMode m = register_mode(i, spec.reg);
        const bool is_source = int(l.atom) == src && m == PhotonMode::Vac;
        const bool is_target = l.atom == AtomLevel::G && m == spec.mode;
        if (is_source) {
            const int to_photon = basis_index(AtomLevel::G, l.p1, l.p2);
            const int photon = with_register(to_photon, spec.reg, spec.mode);
            succ(photon, i) = std::sqrt(eta);
            fail(to_photon, i) = std::sqrt(1.0 - eta);
        } else if (is_target) {
            const int back = with_register(basis_index(to_atom(spec.source), l.p1, l.p2), spec.reg, PhotonMode::Vac);
            succ(back, i) = 1.0;
        } else {
            succ(i, i) = 1.0;
        }
    }
    std::vector<Matrix> ops{std::move(succ)};
    if (eta < 1.0) ops.push_back(std::move(fail));
    return KrausChannel(std::move(ops));
}

DensityOperator retrieve(const DensityOperator& rho, const RetrievalSpec& spec) {
    double occupied = 0.0;
    for (int i = 0; i < kJointDim; ++i) {
        if (register_mode(i, spec.reg) == spec.mode) occupied += rho.matrix()(i, i).real();
    }
    if (occupied > 1e-12) {
        throw ConfigError("retrieval into (reg" + std::to_string(int(spec.reg)) + ", mode " +
                          std::to_string(int(spec.mode)) + ") which is already populated");
    }
    return apply_channel(rho, retrieval_channel(spec));
}

int branch_label(int index) {
    const BasisLabel l = basis_label(index);
    int late = 0, early = 0;
    early += l.atom == AtomLevel::R1;
    late += l.atom == AtomLevel::R2;
    early += l.p1 == PhotonMode::E;
    late += l.p1 == PhotonMode::L;
    early += l.p2 == PhotonMode::E;
    late += l.p2 == PhotonMode::L;
    return (late > early) - (late < early);
}

KrausChannel dephasing_channel(double gamma_step) {
    if (!in_unit(gamma_step)) throw ConfigError("dephasing gamma_step must be in [0,1], got " + std::to_string(gamma_step));
    // Random relative phase +-chi between the early and late branches, split
    // symmetrically against the neutral states. Early/late coherences scale by
    // cos(chi) = sqrt(1 - gamma); this is the weakest completely positive
    // choice for the early/neutral and late/neutral coherences.
    const double chi = std::acos(std::sqrt(1.0 - gamma_step));
    Matrix plus = Matrix::Zero(kJointDim, kJointDim);
    Matrix minus = Matrix::Zero(kJointDim, kJointDim);
    for (int i = 0; i < kJointDim; ++i) {
        const int b = branch_label(i);
        plus(i, i) = std::polar(1.0 / std::sqrt(2.0), 0.5 * chi * b);
        minus(i, i) = std::polar(1.0 / std::sqrt(2.0), -0.5 * chi * b);
    }
    return KrausChannel({std::move(plus), std::move(minus)});
}

DensityOperator dephase_step(const DensityOperator& rho, double gamma_step) {
    return apply_channel(rho, dephasing_channel(gamma_step));
}

DensityOperator run_protocol(const ProtocolConfig& config) {
    config.validate();
    const NoiseConfig& noise = config.noise;
    const bool dephase = noise.rydberg_dephasing > 0.0;
    const KrausChannel deph = dephasing_channel(noise.rydberg_dephasing);

    DensityOperator rho = pure_to_density(PureState::basis(AtomLevel::G, PhotonMode::Vac, PhotonMode::Vac));
    auto step = [&](const ProtocolStep& s) {
        if (const auto* p = std::get_if<PulseSpec>(&s)) {
            rho = collective_pulse(rho, *p, noise);
        } else {
            rho = retrieve(rho, std::get<RetrievalSpec>(s));
        }
        if (dephase) rho = apply_channel(rho, deph);
    };

    for (const auto& p : config.prepare) step(p);
    if (config.halt_after == Phase::Prepare) return rho;
    for (const auto& s : config.entangle) step(s);
    if (config.halt_after == Phase::Entangle) return rho;
    if (noise.werner_visibility < 1.0) rho = apply_channel(rho, depolarizing_atom_photon(noise.werner_visibility));
    for (const auto& r : config.readout) step(r);
    return rho;
}

double branch_phase(const ProtocolConfig& config) {
    double late = 0.0, early = 0.0;
    auto add = [&](const PulseSpec& p) { (p.target == RydbergLevel::R2 ? late : early) += p.phase; };
    for (const auto& p : config.prepare) add(p);
    if (config.variant == ProtocolVariant::Full && config.halt_after != Phase::Prepare) {
        for (const auto& s : config.entangle) {
            if (const auto* p = std::get_if<PulseSpec>(&s)) add(*p);
        }
    }
    return wrap_phase(late - early);
}

PureState ideal_state(const ProtocolConfig& config) {
    const cplx rel = std::polar(1.0, branch_phase(config));
    const cplx h = 1.0 / std::sqrt(2.0);
    using A = AtomLevel;
    using M = PhotonMode;
    if (config.halt_after == Phase::Prepare) {
        return PureState::superposition({{h, {A::R1, M::Vac, M::Vac}}, {h * rel, {A::R2, M::Vac, M::Vac}}});
    }
    if (config.variant == ProtocolVariant::SkipEntanglePhase) {
        if (config.halt_after == Phase::Entangle) {
            return PureState::superposition({{h, {A::R1, M::Vac, M::Vac}}, {h * rel, {A::R2, M::Vac, M::Vac}}});
        }
        return PureState::superposition({{h, {A::G, M::Vac, M::E}}, {h * rel, {A::G, M::Vac, M::L}}});
    }
    if (config.halt_after == Phase::Entangle) {
        return PureState::superposition({{h, {A::R1, M::E, M::Vac}}, {h * rel, {A::R2, M::L, M::Vac}}});
    }
    return PureState::superposition({{h, {A::G, M::E, M::E}}, {h * rel, {A::G, M::L, M::L}}});
}

}  // namespace timebin
