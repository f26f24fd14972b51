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

// Coarse grid search fixing the free noise magnitudes of the
// "paper-calibrated" preset against the measured visibilities and Bell value.
// Predictions are evaluated on exact expected counts, so the search itself is
// free of sampling noise.

#include <array>
#include <cstddef>
#include <vector>

#include "timebin/experiment.hpp"

namespace timebin {

struct CalibrationKnobs {
    double rydberg_dephasing = 0.0;
    double dark_count_prob = 0.0;
    double afterpulse_prob = 0.0;
    std::array<bool, 2> port_swap = {false, false};

    bool operator==(const CalibrationKnobs&) const = default;
};

/// Target value and half-width of the accepted window.
struct CalibrationTargets {
    Estimate v1{0.890, 0.020};
    Estimate v2{0.811, 0.020};
    Estimate s{2.17, 0.06};
};

struct CalibrationPoint {
    CalibrationKnobs knobs;
    double v1 = 0.0;
    double v2 = 0.0;
    double fidelity = 0.0;
    double s = 0.0;
    bool visibilities_in_window = false;
    bool s_in_window = false;
};

struct CalibrationGrid {
    std::vector<double> dephasing;
    std::vector<double> dark_count;
    std::vector<double> afterpulse;
    std::vector<std::array<bool, 2>> port_swap;

    std::size_t size() const { return dephasing.size() * dark_count.size() * afterpulse.size() * port_swap.size(); }
    static CalibrationGrid coarse();
};

struct CalibrationResult {
    CalibrationPoint best;
    std::size_t evaluated = 0;
    /// Points with both visibilities inside their windows.
    std::size_t visibility_feasible = 0;
    /// Points with all three quantities inside their windows.
    std::size_t fully_feasible = 0;
    /// Largest S among visibility-feasible points (0 if there are none).
    double max_feasible_s = 0.0;
};

/// Preset built from the measured loss budget with the given knobs.
Preset calibrated_preset(const CalibrationKnobs& knobs);

/// Expected V1, V2, F, and S for a preset: entangle-scan in the preset's
/// detector mode, chsh in the four-detector arrangement.
CalibrationPoint evaluate_calibration(const CalibrationKnobs& knobs, const CalibrationTargets& targets = {});

/// Among points whose visibilities fall inside their windows, picks the one
/// with S closest to target; without such points, the smallest normalized
/// squared distance over all three. Ties keep the earlier grid point.
CalibrationResult calibrate(const CalibrationGrid& grid, const CalibrationTargets& targets = {});

/// Knobs shipped with the "paper-calibrated" preset (output of
/// calibrate(CalibrationGrid::coarse())).
CalibrationKnobs frozen_calibration();

}  // namespace timebin
