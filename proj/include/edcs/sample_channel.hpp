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

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edcs/error.hpp"

namespace edcs {

/// One molecular transition, HITRAN-style units at the 296 K reference.
struct SpectralLine {
    double center_hz = 0.0;
    /// Integrated intensity, cm^-1 / (molecule cm^-2).
    double strength = 0.0;
    /// Pressure-broadening HWHM coefficients, cm^-1 / atm.
    double gamma_air = 0.0;
    double gamma_self = 0.0;
    /// Temperature exponent of the air-broadening coefficient.
    double n_air = 0.75;
    /// Molecular mass for the Doppler width, amu.
    double mass_amu = 0.0;
    /// Lower-state energy, cm^-1 (0 disables the Boltzmann correction).
    double lower_energy_cm1 = 0.0;

    void validate() const;
};

struct GasCell {
    double path_length_cm = 0.0;
    double pressure_torr = 0.0;
    double temperature_k = 296.0;
    double mole_fraction = 1.0;

    void validate() const;

    bool operator==(const GasCell&) const = default;
};

/// Line-list CSV.  A header row names the columns; required columns are
/// center_hz, strength, gamma_air, gamma_self, mass_amu, optional ones
/// n_air and lower_energy_cm1.  Blank lines and lines starting with '#' are
/// skipped.  Returns lines sorted by center frequency.
std::vector<SpectralLine> parse_line_list(std::istream& is);
std::vector<SpectralLine> ingest_line_list(const std::filesystem::path& path);
void write_line_list(std::ostream& os, std::span<const SpectralLine> lines);

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
std::complex<double> faddeeva(std::complex<double> z);

/// Area-normalized Voigt profile (1/Hz).
double voigt_profile(double detuning_hz, double lorentz_hwhm_hz, double gauss_sigma_hz);

struct LineShape {
    double lorentz_hwhm_hz = 0.0;
    double gauss_sigma_hz = 0.0;
    /// Temperature-scaled intensity, cm^-1 / (molecule cm^-2).
    double strength = 0.0;
};

/// Widths and intensity of `line` inside `cell`.
LineShape line_shape(const SpectralLine& line, const GasCell& cell);

/// -ln T at `freq_hz`.
double absorbance(double freq_hz, const GasCell& cell, std::span<const SpectralLine> lines);
double transmittance(double freq_hz, const GasCell& cell, std::span<const SpectralLine> lines);

/// Depth (dB) at the strongest line center.
double peak_depth_db(const GasCell& cell, std::span<const SpectralLine> lines);

struct CalibratedLines {
    std::vector<SpectralLine> lines;
    double strength_scale = 1.0;
};

/// Rescales all strengths so the strongest line center absorbs `target_db`.
CalibratedLines calibrate_peak_depth(std::span<const SpectralLine> lines, const GasCell& cell,
                                     double target_db);

struct TransmittancePoint {
    double freq_hz = 0.0;
    double transmittance = 1.0;
    double sigma = 0.0;
};

/// CSV: freq_hz,transmittance,sigma
std::vector<TransmittancePoint> read_transmittance_csv(std::istream& is);
void write_transmittance_csv(std::ostream& os, std::span<const TransmittancePoint> points);

enum class CellParam { mole_fraction, pressure };
std::string to_string(CellParam p);
CellParam cell_param_from_string(const std::string& s);

struct FitOptions {
    std::vector<CellParam> free{CellParam::mole_fraction};
    int max_iterations = 200;
    /// Stop when max |J' r| falls below this (chi^2 gradient / 2).
    double gradient_tolerance = 1e-10;
    /// ... or when the relative parameter step falls below this.
    double step_tolerance = 1e-13;
};

struct FitResult {
    /// Estimates are unconstrained: a noisy fit may return mole_fraction > 1.
    GasCell cell;
    std::vector<CellParam> free;
    std::vector<double> values;
    std::vector<double> sigmas;
    Eigen::MatrixXd covariance;
    std::vector<double> residuals;  ///< (model - measured) / sigma per point
    double chi2 = 0.0;
    double runs_test_z = 0.0;  ///< Wald-Wolfowitz z-score of residual signs
    int iterations = 0;
    bool converged = false;
};

/// Raised when the iteration budget runs out; carries the best point found.
class FitNotConverged : public NumericError {
public:
    FitNotConverged(const std::string& what, FitResult best)
        : NumericError(what), best_(std::move(best)) {}
    const FitResult& best() const noexcept { return best_; }

private:
    FitResult best_;
};

/// Weighted Levenberg-Marquardt fit of the free cell parameters; path
/// length, temperature and non-free parameters are taken from `initial`.
/// Uncertainties are sqrt(diag((J'J)^-1)) in the sigma-weighted residuals.
FitResult fit_cell_params(std::span<const TransmittancePoint> measured,
                          std::span<const SpectralLine> lines, const GasCell& initial,
                          const FitOptions& options = {});

/// Wald-Wolfowitz runs test on the signs of `values`; |z| > 1.96 rejects
/// randomness at the 5% level.
double runs_test_z(std::span<const double> values);

void write_fit_json(std::ostream& os, const FitResult& fit);

}  // namespace edcs
