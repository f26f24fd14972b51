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

#include "timebin/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "timebin/errors.hpp"

namespace timebin {

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void AnalyzerSetting::validate() const {
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 2 + 1e-12)) {
        throw ConfigError("analyzer theta must be in [0, pi/2], got " + std::to_string(theta));
    }
    if (!(phi >= 0.0 && phi < 2 * std::numbers::pi)) {
        throw ConfigError("analyzer phi must be in [0, 2pi), got " + std::to_string(phi));
    }
}

void LossChain::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"preparation", preparation},         {"retrieval", retrieval},
        {"fiber_coupling", fiber_coupling},   {"aom_deflection", aom_deflection},
        {"mz_transmission", mz_transmission}, {"detector_efficiency", detector_efficiency},
    };
    for (const auto& [name, v] : fields) {
        if (!in_unit(v)) throw ConfigError(std::string("loss_chain.") + name + " must be in [0,1], got " + std::to_string(v));
    }
}

LossChain LossChain::measured_budget() { return LossChain{0.90, 0.13, 0.69, 0.77, 0.47, 0.60}; }

void DetectorModel::validate() const {
    if (!in_unit(dark_count_prob)) throw ConfigError("detector.dark_count_prob must be in [0,1]");
    if (!in_unit(afterpulse_prob)) throw ConfigError("detector.afterpulse_prob must be in [0,1]");
}

int DetectorModel::detector_id(Register reg, bool plus_port) const {
    const bool swapped = port_swap[reg == Register::One ? 0 : 1];
    const int base = (mode == DetectorMode::FourDetector && reg == Register::Two) ? 3 : 1;
    return base + ((plus_port != swapped) ? 0 : 1);
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Plus: return "plus";
        case Outcome::Minus: return "minus";
        case Outcome::None: return "none";
    }
    return "?";
}

double OutcomeDistribution::total() const {
    double t = 0.0;
    for (const auto& row : p) {
        for (double x : row) t += x;
    }
    return t;
}

double OutcomeDistribution::click_probability(Register reg) const {
    double c = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            const int mine = reg == Register::One ? a : b;
            if (mine != int(Outcome::None)) c += p[a][b];
        }
    }
    return c;
}

void OutcomeDistribution::validate() const {
    for (const auto& row : p) {
        for (double x : row) {
            if (!(x >= -1e-12)) throw InvalidStateError("negative outcome probability");
        }
    }
    if (std::abs(total() - 1.0) > 1e-9) throw InvalidStateError("outcome distribution does not sum to 1");
}

std::array<Eigen::Matrix3cd, 3> measurement_effects(const AnalyzerSetting& setting) {
    setting.validate();
    const double c = std::cos(setting.theta), s = std::sin(setting.theta);
    const cplx ph = std::polar(1.0, setting.phi);
    Eigen::Vector3cd plus = Eigen::Vector3cd::Zero();
    Eigen::Vector3cd minus = Eigen::Vector3cd::Zero();
    plus(int(PhotonMode::E)) = c;
    plus(int(PhotonMode::L)) = ph * s;
    minus(int(PhotonMode::E)) = s;
    minus(int(PhotonMode::L)) = -ph * c;
    Eigen::Matrix3cd vac = Eigen::Matrix3cd::Zero();
    vac(int(PhotonMode::Vac), int(PhotonMode::Vac)) = 1.0;
    return {plus * plus.adjoint(), minus * minus.adjoint(), vac};
}

KrausChannel loss_channel(double transmission, Register reg) {
    if (!in_unit(transmission)) throw ConfigError("transmission must be in [0,1]");
    const int vac = int(PhotonMode::Vac), e = int(PhotonMode::E), l = int(PhotonMode::L);
    Matrix k0 = Matrix::Zero(kModeDim, kModeDim);
    k0(vac, vac) = 1.0;
    k0(e, e) = k0(l, l) = std::sqrt(transmission);
    Matrix ke = Matrix::Zero(kModeDim, kModeDim);
    ke(vac, e) = std::sqrt(1.0 - transmission);
    Matrix kl = Matrix::Zero(kModeDim, kModeDim);
    kl(vac, l) = std::sqrt(1.0 - transmission);
    return KrausChannel({embed_register(k0, reg), embed_register(ke, reg), embed_register(kl, reg)});
}

DensityOperator apply_losses(const DensityOperator& rho, const LossChain& chain, Register reg) {
    chain.validate();
    return apply_channel(rho, loss_channel(chain.transmission(), reg));
}

OutcomeDistribution joint_click_distribution(const DensityOperator& rho, const AnalyzerSetting& s1,
                                             const AnalyzerSetting& s2, const DetectorModel& det) {
    if (s1.reg == s2.reg) throw std::invalid_argument("joint_click_distribution: both settings on the same register");
    det.validate();
    const AnalyzerSetting& first = s1.reg == Register::One ? s1 : s2;
    const AnalyzerSetting& second = s1.reg == Register::One ? s2 : s1;
    const auto m1 = measurement_effects(first);
    const auto m2 = measurement_effects(second);
    const DensityOperator photons = partial_trace(rho, Subsystem::Photon1 | Subsystem::Photon2);

    OutcomeDistribution born;
    born.setting1 = first;
    born.setting2 = second;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            Eigen::Matrix<cplx, 9, 9> effect;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) effect.block<3, 3>(3 * i, 3 * j) = m1[a](i, j) * m2[b];
            }
            born.p[a][b] = std::max(0.0, (effect * photons.matrix()).trace().real());
        }
    }

    // Dark counts: a silent register window fires a random port with prob d.
    const double d = det.dark_count_prob;
    auto dark = [d](int o) {
        std::array<double, 3> out{};
        if (o == int(Outcome::None)) {
            out[int(Outcome::Plus)] = out[int(Outcome::Minus)] = d / 2;
            out[int(Outcome::None)] = 1.0 - d;
        } else {
            out[o] = 1.0;
        }
        return out;
    };
    auto relabel = [](int o, bool swap) {
        if (!swap || o == int(Outcome::None)) return o;
        return o == int(Outcome::Plus) ? int(Outcome::Minus) : int(Outcome::Plus);
    };

    OutcomeDistribution out;
    out.setting1 = first;
    out.setting2 = second;
    for (int a = 0; a < 3; ++a) {
        const auto da = dark(a);
        for (int b = 0; b < 3; ++b) {
            const auto db = dark(b);
            for (int x = 0; x < 3; ++x) {
                for (int y = 0; y < 3; ++y) {
                    out.p[relabel(x, det.port_swap[0])][relabel(y, det.port_swap[1])] += born.p[a][b] * da[x] * db[y];
                }
            }
        }
    }
    const double t = out.total();
    if (t <= 0.0) throw InvalidStateError("outcome distribution has zero total weight");
    for (auto& row : out.p) {
        for (double& x : row) x /= t;
    }
    return out;
}

OutcomeDistribution with_afterpulse_expectation(const OutcomeDistribution& dist, const DetectorModel& det) {
    if (det.mode != DetectorMode::TwoDetectorMultiplexed || det.afterpulse_prob == 0.0) return dist;
    const double q = det.afterpulse_prob;
    // Labels here are already physical ports, and both registers share the
    // same two detectors, so "same detector" means "same label".
    OutcomeDistribution out = dist;
    for (int a = 0; a < 2; ++a) {
        const int other = 1 - a;
        const double silent = dist.p[a][int(Outcome::None)];
        out.p[a][int(Outcome::None)] -= q * silent;
        out.p[a][a] += q * silent;
        const double clash = dist.p[a][other];
        out.p[a][other] -= 0.5 * q * clash;
        out.p[a][a] += 0.5 * q * clash;
    }
    return out;
}

}  // namespace timebin
