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

#include "edcs/heterodyne.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "edcs/error.hpp"

namespace edcs {

QuadratureSelector lo_selector(const CombConfig& lo, int pair_index) {
    lo.validate();
    const auto a_n = lo.amplitude(pair_index);
    const auto a_m = lo.amplitude(-pair_index);
    QuadratureSelector sel{{std::abs(a_n), std::abs(a_m)}, {std::arg(a_n), std::arg(a_m)}};
    if (sel.norm() == 0.0)
        throw InvalidArgument("LO has no power on lines +-" + std::to_string(pair_index));
    return sel;
}

BeatnoteRecord beatnote_model(const PairState& pair, const QuadratureSelector& sel, double eta_n,
                              double eta_neg, const DetectionImperfections& imp,
                              double delta_f_rep_hz) {
    imp.validate();
    const double eta_det = imp.efficiency();
    const PairState detected = apply_loss(apply_loss(pair, eta_n, eta_neg), eta_det, eta_det);
    const Moments m = quadrature_variance(detected, sel);
    const auto proj = projected_means(detected, sel);
    BeatnoteRecord rec;
    rec.index = pair.pair_index();
    rec.rf_freq_hz = rec.index * delta_f_rep_hz;
    rec.mean_amp = proj[0] + std::conj(proj[1]);
    rec.noise_var = m.variance + imp.electrical_variance();
    rec.eta_n = eta_n;
    rec.eta_neg = eta_neg;
    return rec;
}

BeatnoteRecord beatnote_model(const PairState& pair, const CombConfig& lo, double eta_n,
                              double eta_neg, const DetectionImperfections& imp,
                              double delta_f_rep_hz) {
    return beatnote_model(pair, lo_selector(lo, pair.pair_index()), eta_n, eta_neg, imp,
                          delta_f_rep_hz);
}

AliasResolution resolve_aliasing_two_shot(const BeatnoteRecord& shot_plus,
                                          const BeatnoteRecord& shot_minus) {
    if (shot_plus.index != shot_minus.index)
        throw InvalidArgument("two-shot records refer to different beat notes");
    AliasResolution out;
    out.alpha_neg = 0.5 * (shot_plus.mean_amp + shot_minus.mean_amp);
    out.alpha_n = 0.5 * (shot_plus.mean_amp - shot_minus.mean_amp);
    return out;
}

AliasResolution resolve_aliasing_iq(std::span<const double> time_series, double sample_rate_hz,
                                    int n, double delta_f_hz) {
    if (time_series.empty()) throw InvalidArgument("empty time series");
    if (!(sample_rate_hz > 0.0) || !(delta_f_hz > 0.0) || n < 1)
        throw InvalidArgument("resolve_aliasing_iq needs positive fs, delta_f and n >= 1");
    const double f = n * delta_f_hz;
    if (f >= sample_rate_hz / 2.0) throw InvalidArgument("beat frequency at or above Nyquist");
    const std::size_t count = time_series.size();
    const double w = 2.0 * std::numbers::pi * f / sample_rate_hz;
    double i_acc = 0.0, q_acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double phase = w * static_cast<double>(k);
        i_acc += time_series[k] * std::cos(phase);
        q_acc += time_series[k] * std::sin(phase);
    }
    const double i_amp = 2.0 * i_acc / static_cast<double>(count);
    const double q_amp = 2.0 * q_acc / static_cast<double>(count);

    AliasResolution out;
    out.alpha_n = {i_amp, 0.0};
    out.alpha_neg = {0.0, -q_amp};
    const double cycles = f * static_cast<double>(count) / sample_rate_hz;
    out.integer_period = std::abs(cycles - std::round(cycles)) < 1e-9 * std::max(1.0, cycles);
    // Cross-talk between the cos and sin projections of a tone over a
    // non-integer window is bounded by 1 / (2 pi cycles).
    out.leakage_bound = out.integer_period ? 0.0 : 1.0 / (2.0 * std::numbers::pi * cycles);
    return out;
}

QuadratureSelector adaptive_lo_weights(const PairState& pair, double eta_n, double eta_neg,
                                       const DetectionImperfections& imp) {
    imp.validate();
    const auto [theta_n, theta_m] = squeezed_quadrature_phases(pair);
    const double eta_det = imp.efficiency();
    const PairState detected = apply_loss(apply_loss(pair, eta_n, eta_neg), eta_det, eta_det);

    // Covariance of the two single-mode quadratures picked by the phases.
    const Vec2 u_n(std::cos(theta_n), std::sin(theta_n));
    const Vec2 u_m(std::cos(theta_m), std::sin(theta_m));
    Mat2 v;
    v(0, 0) = u_n.dot(detected.block_n() * u_n);
    v(1, 1) = u_m.dot(detected.block_neg() * u_m);
    v(0, 1) = v(1, 0) = u_n.dot(detected.block_cross() * u_m);
    v += imp.electrical_variance() * Mat2::Identity();

    // RF signal template: line n enters the phasor directly, line -n conjugated.
    const QuadratureSelector unit{{1.0, 0.0}, {theta_n, theta_m}};
    const QuadratureSelector unit_m{{0.0, 1.0}, {theta_n, theta_m}};
    std::complex<double> z_n = projected_means(detected, unit)[0];
    std::complex<double> z_m = std::conj(projected_means(detected, unit_m)[1]);
    if (std::abs(z_n) == 0.0 && std::abs(z_m) == 0.0) {
        z_n = std::sqrt(eta_n * eta_det);
        z_m = std::sqrt(eta_neg * eta_det);
    }
    if (std::abs(z_n) == 0.0 && std::abs(z_m) == 0.0)
        return QuadratureSelector::balanced(theta_n, theta_m);

    // max_w |w . z|^2 / (w' V w): top generalized eigenvector of (P, V) with
    // P = Re z Re z' + Im z Im z'.
    const Vec2 re(z_n.real(), z_m.real());
    const Vec2 im(z_n.imag(), z_m.imag());
    const Mat2 p = re * re.transpose() + im * im.transpose();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> ges(p, v);
    Vec2 w = ges.eigenvectors().col(1);
    if (w.sum() < 0.0) w = -w;

    QuadratureSelector out{{w(0), w(1)}, {theta_n, theta_m}};
    for (int i = 0; i < 2; ++i) {
        if (out.weights[i] < 0.0) {
            out.weights[i] = -out.weights[i];
            out.phases[i] += std::numbers::pi;
        }
        if (std::abs(out.weights[i]) < 1e-15 * w.norm()) out.weights[i] = 0.0;
    }
    const double norm = out.norm();
    out.weights[0] /= norm;
    out.weights[1] /= norm;
    return out;
}

double snr_amplitude(const BeatnoteRecord& rec, std::size_t n_averages) {
    if (n_averages < 1) throw InvalidArgument("n_averages must be >= 1");
    if (!(rec.noise_var > 0.0)) throw InvalidArgument("beat note noise variance must be > 0");
    return std::abs(rec.mean_amp) / std::sqrt(rec.noise_var / static_cast<double>(n_averages));
}

void write_beatnote_csv(std::ostream& os, std::span<const BeatnoteRecord> records) {
    os << "index,rf_freq_hz,mean_re,mean_im,noise_var,eta_n,eta_neg\n";
    for (const auto& r : records)
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.index,
                          r.rf_freq_hz, r.mean_amp.real(), r.mean_amp.imag(), r.noise_var, r.eta_n,
                          r.eta_neg);
}

std::vector<BeatnoteRecord> read_beatnote_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("beat note CSV is empty");
    std::vector<BeatnoteRecord> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(row, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("beat note CSV line " + std::to_string(line_no) + ": bad number '" +
                              cell + "'");
            }
        }
        if (v.size() != 7)
            throw IoError("beat note CSV line " + std::to_string(line_no) + ": expected 7 columns");
        out.push_back({static_cast<int>(v[0]), v[1], {v[2], v[3]}, v[4], v[5], v[6]});
    }
    return out;
}

}  // namespace edcs
