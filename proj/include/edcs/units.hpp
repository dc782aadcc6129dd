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

#include <cmath>

// Every unit conversion used by the simulator lives here.
namespace edcs::units {

inline constexpr double kSpeedOfLightCmPerS = 2.99792458e10;
inline constexpr double kBoltzmann = 1.380649e-23;       // J/K
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kPascalPerAtm = 101325.0;
inline constexpr double kTorrPerAtm = 760.0;
inline constexpr double kSecondRadiationConstant = 1.4387769;  // cm K  (hc/k)
inline constexpr double kReferenceTemperature = 296.0;          // K, line-list reference

constexpr double torr_to_atm(double torr) { return torr / kTorrPerAtm; }
constexpr double torr_to_pascal(double torr) { return torr_to_atm(torr) * kPascalPerAtm; }
constexpr double wavenumber_to_hz(double per_cm) { return per_cm * kSpeedOfLightCmPerS; }
constexpr double hz_to_wavenumber(double hz) { return hz / kSpeedOfLightCmPerS; }

/// Ideal-gas number density in molecules/cm^3.
inline double number_density_per_cm3(double pressure_torr, double temperature_k) {
    const double per_m3 = torr_to_pascal(pressure_torr) / (kBoltzmann * temperature_k);
    return per_m3 * 1e-6;
}

/// Power ratio from decibels: 10^(db/10).
inline double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }
inline double ratio_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace edcs::units
