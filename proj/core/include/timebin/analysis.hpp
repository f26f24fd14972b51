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

// Estimators from coincidence counts: Rabi and fringe fits, the
// two-visibility fidelity bound, correlation values, and CHSH S.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "timebin/montecarlo.hpp"

namespace timebin {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

struct RabiSample {
    double duration_ns = 0.0;
    double excitation = 0.0;  // observed excitation frequency in [0, 1]
};

/// P(t) = offset + (amplitude / 2) * (1 - cos(omega t) * exp(-t / decay_time)).
struct RabiFit {
    double omega = 0.0;  // rad/ns
    double omega_error = 0.0;
    double decay_rate = 0.0;  // 1/ns; may come out slightly negative on noisy data
    double decay_time = 0.0;  // ns; +inf when decay_rate <= 0
    double amplitude = 0.0;
    double offset = 0.0;
    double pi_time = 0.0;  // pi / omega
    double pi_time_error = 0.0;
    double residual_norm = 0.0;  // unweighted L2 norm of residuals
    double chi2 = 0.0;           // weighted by binomial variances

    double model(double t_ns) const;
};

/// Coarse (omega, decay) grid with linear (offset, amplitude) solve, then
/// Levenberg-Marquardt over all four parameters. Residuals are weighted by
/// binomial variances at `shots_per_point`. Throws FitError for fewer than 8
/// points, a constant series, or a failed refinement.
RabiFit fit_rabi(std::span<const RabiSample> series, std::uint64_t shots_per_point);

struct FringeSample {
    double phase = 0.0;
    double counts_plus = 0.0;
    double counts_minus = 0.0;
};

/// C(phi) = C0 (1 + V cos(phi - phi0)) fitted to the plus port; the minus
/// port is fitted with the opposite sign and cross-checked.
struct FringeFit {
    double visibility = 0.0;  // clamped into [0, 1]
    double visibility_error = 0.0;
    double raw_visibility = 0.0;
    double phase_offset = 0.0;
    double mean_level = 0.0;
    double minus_visibility = 0.0;
    double minus_visibility_error = 0.0;
    double minus_phase_offset = 0.0;
    /// Plus and minus visibilities agree within 3 combined standard errors and
    /// their phase offsets within 3 combined standard errors of the phase.
    bool ports_consistent = true;
};

/// Throws FitError for fewer than 5 points, phases spanning less than a full
/// turn, or a series without counts.
FringeFit fit_fringe(std::span<const FringeSample> series);

/// (1 + V1 + 2 V2) / 4. Throws std::invalid_argument outside [0, 1].
double fidelity_bound(double v1, double v2);
/// With sigma_F = sqrt(sigma_V1^2 + 4 sigma_V2^2) / 4.
Estimate fidelity_bound(Estimate v1, Estimate v2);

struct Correlation {
    double value = 0.0;
    double error = 0.0;
    std::uint64_t parallel = 0;
    std::uint64_t cross = 0;
};

/// E = (N_par - N_cross) / (N_par + N_cross) over post-selected coincidences,
/// sigma_E = sqrt((1 - E^2) / N). Labels are used as recorded. Throws
/// FitError when there are no coincidences.
Correlation correlation_E(const SettingsCounts& counts);

struct BellResult {
    /// Order: (alpha, beta), (alpha*, beta), (alpha, beta*), (alpha*, beta*).
    std::array<Correlation, 4> E{};
    double S = 0.0;
    double sigma_S = 0.0;
    double violation_sigmas = 0.0;
};

/// S = |E(a,b) + E(a*,b) + E(a,b*) - E(a*,b*)|, sigma_S = sqrt(sum sigma_E^2).
/// Throws std::invalid_argument unless exactly four correlations are given.
BellResult chsh_S(std::span<const Correlation> E);

/// Looks up the four settings pairs (angles in radians) in a table and
/// evaluates chsh_S. Throws std::invalid_argument for a missing setting.
BellResult chsh_from_table(const CountsTable& table, double alpha, double alpha_star, double beta, double beta_star);

/// Pooled eigenbasis visibility over a set of counts, sign-corrected by the
/// detector port parity; error from binomial propagation.
Estimate pooled_visibility(std::span<const SettingsCounts> counts, int port_parity);

/// Inverse-variance weighted flat-line fit of per-point visibilities.
Estimate flat_line_visibility(std::span<const SettingsCounts> counts, int port_parity);

/// Parallel / cross coincidence totals (port-parity corrected) as a fringe sample.
FringeSample coincidence_fringe_sample(double phase, const SettingsCounts& counts, int port_parity);

}  // namespace timebin
