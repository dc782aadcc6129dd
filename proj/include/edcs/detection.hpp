// Copyright 2026 The EDCS Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>

namespace edcs {

/// Non-ideal balanced heterodyne receiver.
///
/// Quantum efficiency and fringe visibility combine into a single loss
/// channel of transmittance QE * visibility^2 (visibility is the amplitude
/// overlap between signal and LO modes).  Electrical noise is white and adds
/// to the measured variance; `std::nullopt` disables it.
struct DetectionImperfections {
    double quantum_efficiency = 1.0;
    double fringe_visibility = 1.0;
    std::optional<double> electrical_noise_db_below_vacuum;

    static DetectionImperfections ideal() { return {}; }

    double efficiency() const { return quantum_efficiency * fringe_visibility * fringe_visibility; }
    /// Electrical noise variance in shot-noise units (0 when disabled).
    double electrical_variance() const;
    void validate() const;

    bool operator==(const DetectionImperfections&) const = default;
};

}  // namespace edcs
