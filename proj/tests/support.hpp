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


// Shared fixtures and brute-force oracles for the test suites.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "edcs/comb.hpp"
#include "edcs/detection.hpp"
#include "edcs/gaussian.hpp"
#include "edcs/metrics.hpp"

namespace edcs::testing {

// Measured per-pair squeezing / anti-squeezing of the five-pair comb (dB).
inline constexpr std::array<double, 5> kMeasuredSqueezeDb{2.8, 2.6, 2.5, 2.3, 2.1};
inline constexpr std::array<double, 5> kMeasuredAntisqueezeDb{13.3, 12.3, 11.3, 10.3, 9.3};

inline constexpr double kLineSpacingHz = 17.565e9;
inline constexpr double kDeltaFRepHz = 4e6;

inline DetectionImperfections lab_detection() {
    DetectionImperfections d;
    d.quantum_efficiency = 0.88;
    d.fringe_visibility = 0.97;
    d.electrical_noise_db_below_vacuum = 18.0;
    return d;
}

inline EntangledCombSpec measured_squeezing(ReferencePlane plane) {
    EntangledCombSpec s;
    s.profile = SqueezingProfile::measured;
    s.reference = plane;
    s.squeeze_db.assign(kMeasuredSqueezeDb.begin(), kMeasuredSqueezeDb.end());
    s.antisqueeze_db.assign(kMeasuredAntisqueezeDb.begin(), kMeasuredAntisqueezeDb.end());
    s.tap_ratio = 0.99;
    return s;
}

inline EntangledCombSpec flat_top(double sq, double anti) {
    EntangledCombSpec s;
    s.profile = SqueezingProfile::flat_top;
    s.squeeze_db = {sq};
    s.antisqueeze_db = {anti};
    s.tap_ratio = 0.99;
    return s;
}

inline Scenario make_scenario(EntangledCombSpec spec, DetectionImperfections det, int n_pairs = 5) {
    Scenario sc;
    sc.entangled = std::move(spec);
    sc.lo = CombConfig::uniform(CombRole::lo, 196.187e12, kLineSpacingHz, 0.0, n_pairs, 1.0);
    sc.signal_amplitude = 10.0;
    sc.signal_offset_spacing_hz = kDeltaFRepHz;
    sc.detection = det;
    return sc;
}

// Draws quadrature vectors from N(mean, cov) by Cholesky factorization.
class GaussianSampler {
public:
    GaussianSampler(const Vec4& mean, const Mat4& cov, std::uint64_t seed)
        : mean_(mean), chol_(cov.llt().matrixL()), engine_(seed) {}

    Vec4 operator()() {
        Vec4 z;
        for (int i = 0; i < 4; ++i) z(i) = normal_(engine_);
        return mean_ + chol_ * z;
    }
    double standard_normal() { return normal_(engine_); }

private:
    Vec4 mean_;
    Mat4 chol_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

// Sample variance of the projection onto `v` after sending each mode through
// an explicit beam splitter whose open port carries fresh vacuum.
inline double beam_splitter_chain_variance(const PairState& state, const std::vector<Vec2>& etas,
                                           const Vec4& v, int n, std::uint64_t seed) {
    GaussianSampler draw(state.mean(), state.cov(), seed);
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        Vec4 x = draw();
        for (const Vec2& eta : etas)
            for (int i = 0; i < 4; ++i) {
                const double e = eta(i / 2);
                x(i) = std::sqrt(e) * x(i) + std::sqrt(1.0 - e) * draw.standard_normal();
            }
        const double q = v.dot(x);
        sum += q;
        sum_sq += q * q;
    }
    const double mean = sum / n;
    return sum_sq / n - mean * mean;
}

inline Vec4 selector_vector(const QuadratureSelector& sel) {
    const double norm = sel.norm();
    return {sel.weights[0] / norm * std::cos(sel.phases[0]),
            sel.weights[0] / norm * std::sin(sel.phases[0]),
            sel.weights[1] / norm * std::cos(sel.phases[1]),
            sel.weights[1] / norm * std::sin(sel.phases[1])};
}

}  // namespace edcs::testing
