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

#include "edcs/comb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "edcs/error.hpp"
#include "edcs/units.hpp"

namespace edcs {

CombConfig CombConfig::uniform(CombRole role, double center_freq_hz, double line_spacing_hz,
                               double offset_spacing_hz, int n_pairs,
                               std::complex<double> amplitude) {
    CombConfig c;
    c.role = role;
    c.center_freq_hz = center_freq_hz;
    c.line_spacing_hz = line_spacing_hz;
    c.offset_spacing_hz = offset_spacing_hz;
    c.n_pairs = n_pairs;
    c.amplitudes.assign(static_cast<std::size_t>(std::max(n_pairs, 0)) * 2, amplitude);
    c.validate();
    return c;
}

void CombConfig::validate() const {
    if (n_pairs < 1) throw InvalidArgument("comb needs n_pairs >= 1");
    if (!(line_spacing_hz > 0.0)) throw InvalidArgument("comb line_spacing must be > 0");
    if (!(std::abs(offset_spacing_hz) < line_spacing_hz / 2.0))
        throw InvalidArgument("comb |offset_spacing| must be below line_spacing / 2");
    if (amplitudes.size() != static_cast<std::size_t>(2 * n_pairs))
        throw InvalidArgument("comb needs exactly 2 * n_pairs line amplitudes");
    if (!std::isfinite(center_freq_hz) || !std::isfinite(amplitude_scale) || amplitude_scale < 0.0)
        throw InvalidArgument("comb center frequency and amplitude scale must be finite");
}

std::size_t CombConfig::slot(int line) const {
    if (line == 0 || std::abs(line) > n_pairs) {
        std::ostringstream os;
        os << "comb has no line " << line << " (n_pairs = " << n_pairs << ")";
        throw InvalidArgument(os.str());
    }
    return line < 0 ? static_cast<std::size_t>(line + n_pairs)
                    : static_cast<std::size_t>(n_pairs + line - 1);
}

std::complex<double> CombConfig::amplitude(int line) const {
    return amplitude_scale * amplitudes.at(slot(line));
}

double CombConfig::line_frequency(int line) const {
    slot(line);
    return center_freq_hz + line * (line_spacing_hz + offset_spacing_hz);
}

std::vector<double> CombConfig::line_frequencies() const {
    std::vector<double> out;
    out.reserve(2 * n_pairs);
    for (int n = -n_pairs; n <= n_pairs; ++n)
        if (n != 0) out.push_back(line_frequency(n));
    return out;
}

std::pair<double, double> EntangledCombSpec::pair_db(int pair) const {
    if (profile == SqueezingProfile::flat_top) return {squeeze_db.at(0), antisqueeze_db.at(0)};
    if (pair < 1 || static_cast<std::size_t>(pair) > squeeze_db.size())
        throw InvalidArgument("no squeezing entry for pair " + std::to_string(pair));
    return {squeeze_db[pair - 1], antisqueeze_db[pair - 1]};
}

void EntangledCombSpec::validate(int n_pairs) const {
    if (!(tap_ratio > 0.0 && tap_ratio <= 1.0)) throw InvalidArgument("tap_ratio must lie in (0, 1]");
    if (squeeze_db.size() != antisqueeze_db.size())
        throw InvalidArgument("squeeze_db and antisqueeze_db lengths differ");
    const std::size_t expected =
        profile == SqueezingProfile::flat_top ? 1 : static_cast<std::size_t>(n_pairs);
    if (squeeze_db.size() != expected) {
        std::ostringstream os;
        os << "expected " << expected << " squeezing entries, got " << squeeze_db.size();
        throw InvalidArgument(os.str());
    }
    for (std::size_t i = 0; i < squeeze_db.size(); ++i)
        if (squeeze_db[i] < 0.0 || antisqueeze_db[i] < squeeze_db[i])
            throw InvalidArgument("pair " + std::to_string(i + 1) +
                                  ": need antisqueeze_db >= squeeze_db >= 0");
}

MixedTmsv pair_source_parameters(const EntangledCombSpec& spec, int pair,
                                 const DetectionImperfections& detection) {
    const auto [sq, anti] = spec.pair_db(pair);
    if (sq == 0.0 && anti == 0.0) return {0.0, 1.0};
    if (sq == 0.0) throw InvalidArgument("anti-squeezing without squeezing is infeasible");
    if (spec.reference == ReferencePlane::state) return mixed_tmsv_from_measured(sq, anti);

    detection.validate();
    const double e = detection.electrical_variance();
    const double chain = spec.tap_ratio * detection.efficiency();
    auto to_state = [&](double ratio) {
        const double at_receiver = ratio * (1.0 + e) - e;
        return (at_receiver - (1.0 - chain)) / chain;
    };
    const double vs = to_state(units::db_to_ratio(-sq));
    const double va = to_state(units::db_to_ratio(anti));
    if (!(vs > 0.0)) {
        std::ostringstream os;
        os << "pair " << pair << ": " << sq
           << " dB of detected squeezing exceeds what the detection chain can deliver";
        throw InvalidArgument(os.str());
    }
    return mixed_tmsv_from_variances(vs, va);
}

namespace {

void check_classical(const EntangledCombSpec& spec, const CombConfig& classical) {
    classical.validate();
    if (classical.role != CombRole::classical)
        throw InvalidArgument("displacement comb must have the classical role");
    spec.validate(classical.n_pairs);
}

}  // namespace

EntangledComb build_entangled_comb(const EntangledCombSpec& spec, const CombConfig& classical,
                                   const DetectionImperfections& detection) {
    check_classical(spec, classical);
    const double reflect = std::sqrt(1.0 - spec.tap_ratio);
    EntangledComb out;
    out.pairs.reserve(classical.n_pairs);
    for (int n = 1; n <= classical.n_pairs; ++n) {
        PairState pair = mixed_tmsv_state(pair_source_parameters(spec, n, detection), n);
        pair = apply_loss(pair, spec.tap_ratio, spec.tap_ratio);
        pair = displace(pair, reflect * classical.amplitude(n), reflect * classical.amplitude(-n));
        out.pairs.push_back(std::move(pair));
    }
    out.central = SingleModeState::squeezed(spec.central_squeeze_db, spec.central_antisqueeze_db);
    return out;
}

std::vector<PairState> build_classical_comb(const EntangledCombSpec& spec,
                                            const CombConfig& classical) {
    check_classical(spec, classical);
    const double reflect = std::sqrt(1.0 - spec.tap_ratio);
    std::vector<PairState> out;
    for (int n = 1; n <= classical.n_pairs; ++n)
        out.push_back(displace(PairState::vacuum(n), reflect * classical.amplitude(n),
                               reflect * classical.amplitude(-n)));
    return out;
}

namespace {

struct PhaseObjective {
    Mat2 a, b, c;

    static Vec2 u(double t) { return {std::cos(t), std::sin(t)}; }
    static Vec2 du(double t) { return {-std::sin(t), std::cos(t)}; }

    double value(double t1, double t2) const {
        const Vec2 u1 = u(t1), u2 = u(t2);
        return 0.5 * (u1.dot(a * u1) + u2.dot(b * u2)) + u1.dot(c * u2);
    }

    // One damped Newton step; falls back to gradient descent off the convex region.
    std::pair<double, double> step(double t1, double t2) const {
        const Vec2 u1 = u(t1), u2 = u(t2), d1 = du(t1), d2 = du(t2);
        const Vec2 g(d1.dot(a * u1) + d1.dot(c * u2), d2.dot(b * u2) + u1.dot(c * d2));
        Mat2 h;
        h(0, 0) = -u1.dot(a * u1) + d1.dot(a * d1) - u1.dot(c * u2);
        h(1, 1) = -u2.dot(b * u2) + d2.dot(b * d2) - u1.dot(c * u2);
        h(0, 1) = h(1, 0) = d1.dot(c * d2);
        Vec2 delta;
        Eigen::SelfAdjointEigenSolver<Mat2> es(h);
        if (es.eigenvalues().minCoeff() > 1e-14) {
            delta = -h.ldlt().solve(g);
        } else {
            const double scale = std::max(1e-12, h.cwiseAbs().maxCoeff());
            delta = -g / scale;
        }
        double lambda = 1.0;
        const double f0 = value(t1, t2);
        while (lambda > 1e-6 && value(t1 + lambda * delta(0), t2 + lambda * delta(1)) > f0)
            lambda *= 0.5;
        return {t1 + lambda * delta(0), t2 + lambda * delta(1)};
    }
};

double wrap_phase(double t) {
    const double two_pi = 2.0 * std::numbers::pi;
    t = std::fmod(t, two_pi);
    return t < 0.0 ? t + two_pi : t;
}

}  // namespace

std::pair<double, double> squeezed_quadrature_phases(const PairState& pair) {
    const PhaseObjective obj{pair.block_n(), pair.block_neg(), pair.block_cross()};

    // Exact when both local blocks are proportional to the identity: the cross
    // term u1' C u2 is minimized by the top singular pair of C.
    Eigen::JacobiSVD<Mat2> svd(obj.c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec2 left = svd.matrixU().col(0);
    const Vec2 right = -svd.matrixV().col(0);
    std::vector<std::pair<double, double>> starts{
        {std::atan2(left(1), left(0)), std::atan2(right(1), right(0))}};
    constexpr int kCoarse = 24;
    std::pair<double, double> best_grid{0.0, 0.0};
    double best_grid_value = obj.value(0.0, 0.0);
    for (int i = 0; i < kCoarse; ++i)
        for (int j = 0; j < kCoarse; ++j) {
            const double t1 = 2.0 * std::numbers::pi * i / kCoarse;
            const double t2 = 2.0 * std::numbers::pi * j / kCoarse;
            if (const double v = obj.value(t1, t2); v < best_grid_value) {
                best_grid_value = v;
                best_grid = {t1, t2};
            }
        }
    starts.push_back(best_grid);

    std::pair<double, double> best = starts.front();
    double best_value = obj.value(best.first, best.second);
    for (auto p : starts) {
        for (int it = 0; it < 50; ++it) {
            const auto next = obj.step(p.first, p.second);
            const bool done = std::abs(next.first - p.first) + std::abs(next.second - p.second) < 1e-15;
            p = next;
            if (done) break;
        }
        if (const double v = obj.value(p.first, p.second); v < best_value) {
            best_value = v;
            best = p;
        }
    }
    return {wrap_phase(best.first), wrap_phase(best.second)};
}

CombConfig align_lo_phases(const std::vector<PairState>& pairs, const CombConfig& lo) {
    lo.validate();
    if (lo.role != CombRole::lo) throw InvalidArgument("align_lo_phases needs an LO comb");
    if (pairs.size() != static_cast<std::size_t>(lo.n_pairs))
        throw InvalidArgument("pair count does not match LO comb");
    CombConfig out = lo;
    for (const PairState& pair : pairs) {
        const int n = pair.pair_index();
        const double mag_n = std::abs(lo.amplitudes.at(lo.slot(n)));
        const double mag_m = std::abs(lo.amplitudes.at(lo.slot(-n)));
        double mag = std::sqrt(0.5 * (mag_n * mag_n + mag_m * mag_m));
        if (mag == 0.0) mag = 1.0;
        const auto [theta_n, theta_m] = squeezed_quadrature_phases(pair);
        out.amplitudes[out.slot(n)] = std::polar(mag, theta_n);
        out.amplitudes[out.slot(-n)] = std::polar(mag, theta_m);
    }
    return out;
}

CombConfig matched_classical_comb(const CombConfig& lo, double magnitude, double offset_spacing_hz,
                                  bool quadrature_split) {
    lo.validate();
    CombConfig out = lo;
    out.role = CombRole::classical;
    out.offset_spacing_hz = offset_spacing_hz;
    out.amplitude_scale = 1.0;
    for (int n = 1; n <= lo.n_pairs; ++n) {
        out.amplitudes[out.slot(n)] = std::polar(magnitude, lo.phase(n));
        const double split = quadrature_split ? -std::numbers::pi / 2.0 : 0.0;
        out.amplitudes[out.slot(-n)] = std::polar(magnitude, lo.phase(-n) + split);
    }
    out.validate();
    return out;
}

std::vector<CombConfig> sweep_centers(const CombConfig& base, int n_sweeps, double step_hz) {
    base.validate();
    if (n_sweeps < 1) throw InvalidArgument("n_sweeps must be >= 1");
    if (n_sweeps == 1) return {base};
    if (!(step_hz > 0.0)) throw InvalidArgument("sweep step must be > 0");
    if (step_hz >= base.line_spacing_hz)
        throw InvalidArgument("sweep step must be smaller than the line spacing");
    std::vector<CombConfig> out;
    out.reserve(n_sweeps);
    for (int k = 0; k < n_sweeps; ++k) {
        CombConfig c = base;
        c.center_freq_hz = base.center_freq_hz + k * step_hz;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<double> union_line_frequencies(const std::vector<CombConfig>& configs) {
    std::vector<double> out;
    for (const auto& c : configs) {
        const auto f = c.line_frequencies();
        out.insert(out.end(), f.begin(), f.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<double, double>> coverage_gaps(const std::vector<double>& lines,
                                                     double half_span_hz) {
    if (half_span_hz < 0.0) throw InvalidArgument("sweep half span must be >= 0");
    std::vector<double> sorted = lines;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> gaps;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double reach = sorted[i - 1] + half_span_hz;
        const double start = sorted[i] - half_span_hz;
        // Sub-millihertz slivers are rounding, not gaps.
        if (start - reach > 1e-3) gaps.emplace_back(reach, start);
    }
    return gaps;
}

}  // namespace edcs
