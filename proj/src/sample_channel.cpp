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

#include "edcs/sample_channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "edcs/units.hpp"

namespace edcs {

void SpectralLine::validate() const {
    if (!(center_hz > 0.0) || !std::isfinite(center_hz)) throw InvalidArgument("line center must be > 0");
    if (!(strength >= 0.0) || !std::isfinite(strength)) throw InvalidArgument("line strength must be >= 0");
    if (!(gamma_air > 0.0) || !(gamma_self > 0.0))
        throw InvalidArgument("line broadening coefficients must be > 0");
    if (!(mass_amu > 0.0)) throw InvalidArgument("molecular mass must be > 0");
    if (!std::isfinite(n_air) || !(lower_energy_cm1 >= 0.0))
        throw InvalidArgument("bad temperature-scaling parameters");
}

void GasCell::validate() const {
    if (!(path_length_cm > 0.0)) throw InvalidArgument("path length must be > 0");
    if (!(pressure_torr > 0.0)) throw InvalidArgument("pressure must be > 0");
    if (!(temperature_k > 0.0)) throw InvalidArgument("temperature must be > 0");
    if (!(mole_fraction >= 0.0 && mole_fraction <= 1.0))
        throw InvalidArgument("mole fraction must lie in [0, 1]");
}

// ---------------------------------------------------------------- line lists

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

bool skippable(const std::string& line) {
    const auto b = line.find_first_not_of(" \t\r");
    return b == std::string::npos || line[b] == '#';
}

double parse_number(const std::string& s, std::size_t line_no, const std::string& column) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw IoError(fmt::format("line {}: column '{}' is not a number: '{}'", line_no, column, s));
    return v;
}

}  // namespace

std::vector<SpectralLine> parse_line_list(std::istream& is) {
    static const std::array<const char*, 5> kRequired{"center_hz", "strength", "gamma_air",
                                                      "gamma_self", "mass_amu"};
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> columns;
    while (std::getline(is, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto names = split_csv(line);
        for (std::size_t i = 0; i < names.size(); ++i) columns[names[i]] = i;
        break;
    }
    if (columns.empty()) throw IoError("line list has no header row");
    for (const char* name : kRequired)
        if (!columns.contains(name))
            throw IoError(fmt::format("line list header lacks column '{}'", name));
    const std::size_t width = columns.size();

    std::vector<SpectralLine> out;
    while (std::getline(is, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto cells = split_csv(line);
        if (cells.size() != width)
            throw IoError(fmt::format("line {}: expected {} fields, got {}", line_no, width,
                                      cells.size()));
        auto get = [&](const char* name, std::optional<double> fallback = std::nullopt) {
            const auto it = columns.find(name);
            if (it == columns.end()) return *fallback;
            return parse_number(cells[it->second], line_no, name);
        };
        SpectralLine l;
        l.center_hz = get("center_hz");
        l.strength = get("strength");
        l.gamma_air = get("gamma_air");
        l.gamma_self = get("gamma_self");
        l.mass_amu = get("mass_amu");
        l.n_air = get("n_air", 0.75);
        l.lower_energy_cm1 = get("lower_energy_cm1", 0.0);
        try {
            l.validate();
        } catch (const InvalidArgument& e) {
            throw IoError(fmt::format("line {}: {}", line_no, e.what()));
        }
        out.push_back(l);
    }
    if (out.empty()) throw IoError("no spectral lines");
    std::stable_sort(out.begin(), out.end(),
                     [](const SpectralLine& a, const SpectralLine& b) { return a.center_hz < b.center_hz; });
    return out;
}

std::vector<SpectralLine> ingest_line_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open line list " + path.string());
    return parse_line_list(in);
}

void write_line_list(std::ostream& os, std::span<const SpectralLine> lines) {
    os << "center_hz,strength,gamma_air,gamma_self,n_air,mass_amu,lower_energy_cm1\n";
    for (const auto& l : lines)
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", l.center_hz,
                          l.strength, l.gamma_air, l.gamma_self, l.n_air, l.mass_amu,
                          l.lower_energy_cm1);
}

// ------------------------------------------------------------------ Faddeeva

namespace {

// Weideman's rational expansion
//   w(z) ~ 2 p(Z) / (L - iz)^2 + 1 / (sqrt(pi) (L - iz)),   Z = (L + iz) / (L - iz),
// with a degree N-1 polynomial p whose coefficients come from a DFT of
// exp(-t^2)(L^2 + t^2) on the grid t = L tan(theta / 2).  N = 40 keeps the
// relative error near 1e-12 on the region where it is used.
constexpr int kWeidemanTerms = 40;

struct WeidemanCoefficients {
    double l = 0.0;
    std::array<double, kWeidemanTerms> a{};

    WeidemanCoefficients() {
        constexpr int n = kWeidemanTerms;
        constexpr int m = 2 * n;
        constexpr int m2 = 2 * m;
        l = std::sqrt(n / std::numbers::sqrt2);
        // f has length 2M: f[0] = 0, then k = -M+1 .. M-1.
        std::array<double, m2> f{};
        for (int k = -m + 1; k <= m - 1; ++k) {
            const double theta = k * std::numbers::pi / m;
            const double t = l * std::tan(theta / 2.0);
            f[k + m] = std::exp(-t * t) * (l * l + t * t);
        }
        std::array<double, m2> shifted{};
        for (int j = 0; j < m2; ++j) shifted[j] = f[(j + m) % m2];
        for (int q = 1; q <= n; ++q) {
            double re = 0.0;
            for (int j = 0; j < m2; ++j)
                re += shifted[j] * std::cos(2.0 * std::numbers::pi * j * q / m2);
            a[q - 1] = re / m2;
        }
    }
};

std::complex<double> faddeeva_weideman(std::complex<double> z) {
    static const WeidemanCoefficients c;
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> denom = c.l - i * z;
    const std::complex<double> big_z = (c.l + i * z) / denom;
    std::complex<double> p = 0.0;
    for (int k = kWeidemanTerms - 1; k >= 0; --k) p = p * big_z + c.a[k];
    return 2.0 * p / (denom * denom) + 1.0 / (std::sqrt(std::numbers::pi) * denom);
}

// Laplace continued fraction, accurate for large |z|.
std::complex<double> faddeeva_continued_fraction(std::complex<double> z) {
    constexpr int kTerms = 60;
    std::complex<double> tail = z;
    for (int k = kTerms; k >= 1; --k) tail = z - (0.5 * k) / tail;
    return std::complex<double>(0.0, 1.0 / std::sqrt(std::numbers::pi)) / tail;
}

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
    if (z.imag() < 0.0) throw InvalidArgument("faddeeva: Im z must be >= 0");
    if (std::abs(z) > 12.0) return faddeeva_continued_fraction(z);
    return faddeeva_weideman(z);
}

double voigt_profile(double detuning_hz, double lorentz_hwhm_hz, double gauss_sigma_hz) {
    if (!(lorentz_hwhm_hz > 0.0) || !(gauss_sigma_hz > 0.0))
        throw InvalidArgument("Voigt widths must be > 0");
    const double scale = gauss_sigma_hz * std::numbers::sqrt2;
    const std::complex<double> z(detuning_hz / scale, lorentz_hwhm_hz / scale);
    return faddeeva(z).real() / (gauss_sigma_hz * std::sqrt(2.0 * std::numbers::pi));
}

// ---------------------------------------------------------------- absorption

namespace {

// No validation: the fitter evaluates trial points outside the physical box.
LineShape line_shape_unchecked(const SpectralLine& line, const GasCell& cell) {
    using namespace units;
    const double t = cell.temperature_k;
    const double p_atm = torr_to_atm(cell.pressure_torr);
    const double p_self = cell.mole_fraction * p_atm;
    const double gamma_cm = std::pow(kReferenceTemperature / t, line.n_air) *
                            (line.gamma_air * (p_atm - p_self) + line.gamma_self * p_self);
    const double mass_kg = line.mass_amu * kAtomicMassUnit;
    const double c_m = kSpeedOfLightCmPerS * 1e-2;
    const double sigma = line.center_hz * std::sqrt(kBoltzmann * t / (mass_kg * c_m * c_m));
    // Linear-molecule rotational partition function (Q ~ T) and a Boltzmann
    // factor on the lower state; stimulated emission is neglected.
    double s = line.strength * (kReferenceTemperature / t);
    if (line.lower_energy_cm1 > 0.0)
        s *= std::exp(-kSecondRadiationConstant * line.lower_energy_cm1 *
                      (1.0 / t - 1.0 / kReferenceTemperature));
    return {wavenumber_to_hz(gamma_cm), sigma, s};
}

double absorbance_unchecked(double freq_hz, const GasCell& cell,
                            std::span<const SpectralLine> lines) {
    if (cell.mole_fraction == 0.0) return 0.0;
    const double column = units::number_density_per_cm3(cell.pressure_torr, cell.temperature_k) *
                          cell.mole_fraction * cell.path_length_cm;
    double sum = 0.0;
    for (const auto& line : lines) {
        const LineShape shape = line_shape_unchecked(line, cell);
        if (shape.strength == 0.0) continue;
        // Profile per Hz -> per cm^-1.
        const double phi = voigt_profile(freq_hz - line.center_hz, shape.lorentz_hwhm_hz,
                                         shape.gauss_sigma_hz) *
                           units::kSpeedOfLightCmPerS;
        sum += shape.strength * phi;
    }
    return sum * column;
}

}  // namespace

LineShape line_shape(const SpectralLine& line, const GasCell& cell) {
    line.validate();
    cell.validate();
    return line_shape_unchecked(line, cell);
}

double absorbance(double freq_hz, const GasCell& cell, std::span<const SpectralLine> lines) {
    cell.validate();
    return absorbance_unchecked(freq_hz, cell, lines);
}

double transmittance(double freq_hz, const GasCell& cell, std::span<const SpectralLine> lines) {
    return std::exp(-absorbance(freq_hz, cell, lines));
}

double peak_depth_db(const GasCell& cell, std::span<const SpectralLine> lines) {
    double best = 0.0;
    for (const auto& l : lines) best = std::max(best, absorbance(l.center_hz, cell, lines));
    return 10.0 * std::log10(std::numbers::e) * best;
}

CalibratedLines calibrate_peak_depth(std::span<const SpectralLine> lines, const GasCell& cell,
                                     double target_db) {
    if (!(target_db > 0.0)) throw InvalidArgument("target depth must be > 0 dB");
    const double current = peak_depth_db(cell, lines);
    if (!(current > 0.0)) throw InvalidArgument("line list produces no absorption in this cell");
    CalibratedLines out{{lines.begin(), lines.end()}, target_db / current};
    // Absorbance is linear in every strength, so one rescale is exact.
    for (auto& l : out.lines) l.strength *= out.strength_scale;
    return out;
}

// --------------------------------------------------------- transmittance I/O

std::vector<TransmittancePoint> read_transmittance_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<TransmittancePoint> out;
    while (std::getline(is, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto cells = split_csv(line);
        if (!header) {
            if (cells.size() < 3 || cells[0] != "freq_hz" || cells[1] != "transmittance" ||
                cells[2] != "sigma")
                throw IoError("transmittance CSV header must start with freq_hz,transmittance,sigma");
            header = true;
            continue;
        }
        if (cells.size() < 3) throw IoError(fmt::format("line {}: expected 3 fields", line_no));
        out.push_back({parse_number(cells[0], line_no, "freq_hz"),
                       parse_number(cells[1], line_no, "transmittance"),
                       parse_number(cells[2], line_no, "sigma")});
    }
    if (out.empty()) throw IoError("transmittance CSV has no data rows");
    return out;
}

void write_transmittance_csv(std::ostream& os, std::span<const TransmittancePoint> points) {
    os << "freq_hz,transmittance,sigma\n";
    for (const auto& p : points)
        os << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.freq_hz, p.transmittance, p.sigma);
}

// ------------------------------------------------------------------- fitting

std::string to_string(CellParam p) {
    return p == CellParam::mole_fraction ? "mole_fraction" : "pressure";
}

CellParam cell_param_from_string(const std::string& s) {
    if (s == "mole_fraction") return CellParam::mole_fraction;
    if (s == "pressure") return CellParam::pressure;
    throw InvalidArgument("unknown cell parameter '" + s + "'");
}

double runs_test_z(std::span<const double> values) {
    std::size_t pos = 0, neg = 0, runs = 0;
    int prev = 0;
    for (double v : values) {
        if (v == 0.0) continue;
        const int sign = v > 0.0 ? 1 : -1;
        (sign > 0 ? pos : neg)++;
        if (sign != prev) ++runs;
        prev = sign;
    }
    const double n1 = static_cast<double>(pos), n2 = static_cast<double>(neg);
    const double n = n1 + n2;
    if (n1 == 0.0 || n2 == 0.0) return std::numeric_limits<double>::infinity();
    const double mean = 2.0 * n1 * n2 / n + 1.0;
    const double var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    return (static_cast<double>(runs) - mean) / std::sqrt(var);
}

namespace {

GasCell with_params(GasCell cell, const std::vector<CellParam>& free, const Eigen::VectorXd& x) {
    for (std::size_t i = 0; i < free.size(); ++i) {
        if (free[i] == CellParam::mole_fraction) cell.mole_fraction = x(i);
        else cell.pressure_torr = x(i);
    }
    return cell;
}

bool admissible(const GasCell& cell) { return cell.mole_fraction >= 0.0 && cell.pressure_torr > 0.0; }

Eigen::VectorXd residual_vector(std::span<const TransmittancePoint> data,
                                std::span<const SpectralLine> lines, const GasCell& cell) {
    Eigen::VectorXd r(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        r(i) = (std::exp(-absorbance_unchecked(data[i].freq_hz, cell, lines)) - data[i].transmittance) /
               data[i].sigma;
    return r;
}

Eigen::MatrixXd jacobian(std::span<const TransmittancePoint> data, std::span<const SpectralLine> lines,
                         const GasCell& base, const std::vector<CellParam>& free,
                         const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(data.size(), x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = 1e-6 * std::max(std::abs(x(k)), 1e-3);
        Eigen::VectorXd up = x, down = x;
        up(k) += h;
        down(k) -= h;
        if (!admissible(with_params(base, free, down))) {
            down = x;
            j.col(k) = (residual_vector(data, lines, with_params(base, free, up)) -
                        residual_vector(data, lines, with_params(base, free, down))) / h;
        } else {
            j.col(k) = (residual_vector(data, lines, with_params(base, free, up)) -
                        residual_vector(data, lines, with_params(base, free, down))) / (2.0 * h);
        }
    }
    return j;
}

}  // namespace

FitResult fit_cell_params(std::span<const TransmittancePoint> measured,
                          std::span<const SpectralLine> lines, const GasCell& initial,
                          const FitOptions& options) {
    initial.validate();
    if (options.free.empty()) throw InvalidArgument("no free parameters to fit");
    for (std::size_t i = 0; i < options.free.size(); ++i)
        for (std::size_t k = i + 1; k < options.free.size(); ++k)
            if (options.free[i] == options.free[k]) throw InvalidArgument("duplicate free parameter");
    if (measured.size() < options.free.size())
        throw InvalidArgument("fewer data points than free parameters");
    for (const auto& p : measured)
        if (!(p.sigma > 0.0) || !std::isfinite(p.transmittance))
            throw InvalidArgument("every data point needs a finite value and sigma > 0");
    if (lines.empty()) throw InvalidArgument("empty line list");

    const auto& free = options.free;
    const Eigen::Index np = static_cast<Eigen::Index>(free.size());
    Eigen::VectorXd x(np);
    for (Eigen::Index i = 0; i < np; ++i)
        x(i) = free[i] == CellParam::mole_fraction ? initial.mole_fraction : initial.pressure_torr;

    Eigen::VectorXd r = residual_vector(measured, lines, with_params(initial, free, x));
    double chi2 = r.squaredNorm();
    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    Eigen::MatrixXd j;
    for (; iter < options.max_iterations; ++iter) {
        j = jacobian(measured, lines, initial, free, x);
        const Eigen::VectorXd g = j.transpose() * r;
        if (g.cwiseAbs().maxCoeff() < options.gradient_tolerance || chi2 == 0.0) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd jtj = j.transpose() * j;
        if (jtj.diagonal().minCoeff() <= 0.0)
            throw NumericError("degenerate Jacobian: a free parameter does not affect the model");
        bool accepted = false;
        double step_size = 0.0;
        while (lambda < 1e12) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal();
            const Eigen::VectorXd dx = a.ldlt().solve(-g);
            const Eigen::VectorXd trial = x + dx;
            const GasCell cell = with_params(initial, free, trial);
            if (admissible(cell)) {
                const Eigen::VectorXd rt = residual_vector(measured, lines, cell);
                const double chi2_t = rt.squaredNorm();
                if (chi2_t <= chi2) {
                    step_size = (dx.cwiseAbs().array() / x.cwiseAbs().array().max(1e-12)).maxCoeff();
                    x = trial;
                    r = rt;
                    chi2 = chi2_t;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!accepted || step_size < options.step_tolerance) {
            // No downhill step remains: we are at the minimum to working precision.
            converged = true;
            j = jacobian(measured, lines, initial, free, x);
            break;
        }
    }

    FitResult out;
    out.cell = with_params(initial, free, x);
    out.free = free;
    out.values.assign(x.data(), x.data() + x.size());
    out.residuals.assign(r.data(), r.data() + r.size());
    out.chi2 = chi2;
    out.iterations = iter;
    out.converged = converged;
    out.runs_test_z = runs_test_z(out.residuals);
    if (j.size() == 0) j = jacobian(measured, lines, initial, free, x);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (!lu.isInvertible() || jtj.diagonal().minCoeff() <= 0.0)
        throw NumericError("degenerate Jacobian at the solution; parameters are not identifiable");
    out.covariance = lu.inverse();
    for (Eigen::Index i = 0; i < np; ++i) out.sigmas.push_back(std::sqrt(out.covariance(i, i)));
    if (!converged)
        throw FitNotConverged(fmt::format("fit did not converge in {} iterations (chi2 = {:.6g})",
                                          options.max_iterations, chi2),
                              out);
    return out;
}

void write_fit_json(std::ostream& os, const FitResult& fit) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < fit.free.size(); ++i)
        params[to_string(fit.free[i])] = {{"value", fit.values[i]}, {"sigma", fit.sigmas[i]}};
    j["parameters"] = params;
    j["cell"] = {{"path_length_cm", fit.cell.path_length_cm},
                 {"pressure_torr", fit.cell.pressure_torr},
                 {"temperature_k", fit.cell.temperature_k},
                 {"mole_fraction", fit.cell.mole_fraction}};
    nlohmann::ordered_json cov = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) row.push_back(fit.covariance(r, c));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    j["chi2"] = fit.chi2;
    j["dof"] = static_cast<long long>(fit.residuals.size()) - static_cast<long long>(fit.free.size());
    j["runs_test_z"] = fit.runs_test_z;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["residuals"] = fit.residuals;
    os << j.dump(2) << "\n";
}

}  // namespace edcs
