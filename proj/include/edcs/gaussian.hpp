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

// Gaussian states of independent (n, -n) comb-line pairs.
//
// Conventions used throughout the library:
//   * Quadratures are ordered (x_n, p_n, x_{-n}, p_{-n}).
//   * Shot-noise units: the vacuum covariance is the identity, so the
//     standard quantum limit is the literal constant 1.
//   * A coherent displacement alpha shifts the mean of (x, p) by
//     (sqrt(2) Re alpha, sqrt(2) Im alpha).
//   * The two-mode squeezed vacuum has cross-correlations
//     <x_n x_{-n}> = +sinh(2r), <p_n p_{-n}> = -sinh(2r).  The squeezed
//     joint quadratures are therefore (x_n - x_{-n})/sqrt(2) and
//     (p_n + p_{-n})/sqrt(2), each with variance exp(-2r).  In selector
//     terms: equal weights with phases (0, pi) pick the squeezed quadrature,
//     phases (pi/2, 3pi/2) the anti-squeezed one.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace edcs {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalityTolerance = 1e-9;

/// Mean and covariance of one (n, -n) mode pair.  Immutable once built;
/// construction rejects non-symmetric or unphysical covariances.
class PairState {
public:
    PairState(Vec4 mean, Mat4 cov, int pair_index);

    static PairState vacuum(int pair_index);

    const Vec4& mean() const noexcept { return mean_; }
    const Mat4& cov() const noexcept { return cov_; }
    int pair_index() const noexcept { return pair_index_; }

    /// Symplectic eigenvalues (nu_minus, nu_plus); both >= 1 for a physical state.
    std::array<double, 2> symplectic_eigenvalues() const;

    /// Block accessors: A = mode n, B = mode -n, C = cross block (n rows, -n columns).
    Mat2 block_n() const { return cov_.block<2, 2>(0, 0); }
    Mat2 block_neg() const { return cov_.block<2, 2>(2, 2); }
    Mat2 block_cross() const { return cov_.block<2, 2>(0, 2); }

private:
    Vec4 mean_;
    Mat4 cov_;
    int pair_index_;
};

/// Single-mode Gaussian state.  Used only for the central comb line.
class SingleModeState {
public:
    SingleModeState(Vec2 mean, Mat2 cov);

    static SingleModeState vacuum() { return {Vec2::Zero(), Mat2::Identity()}; }
    /// Squeezed along x with the given measured levels (dB below / above vacuum).
    static SingleModeState squeezed(double squeeze_db, double antisqueeze_db);

    const Vec2& mean() const noexcept { return mean_; }
    const Mat2& cov() const noexcept { return cov_; }

private:
    Vec2 mean_;
    Mat2 cov_;
};

/// Measured quadrature Q = sum_i w_i (x_i cos th_i + p_i sin th_i) / |w|.
/// Index 0 is line n, index 1 is line -n.
struct QuadratureSelector {
    std::array<double, 2> weights{1.0, 1.0};
    std::array<double, 2> phases{0.0, 0.0};

    static QuadratureSelector balanced(double phase_n, double phase_neg) {
        return {{1.0, 1.0}, {phase_n, phase_neg}};
    }
    double norm() const;
    void validate() const;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Pure TMSV followed by symmetric loss eta (the impurity model).
struct MixedTmsv {
    double r = 0.0;
    double eta = 1.0;
};

PairState tmsv_state(double r, int pair_index);

/// Solves eta*e^{-2r} + 1 - eta = 10^{-S/10}, eta*e^{2r} + 1 - eta = 10^{A/10}.
/// Requires antisqueeze_db >= squeeze_db > 0.
MixedTmsv mixed_tmsv_from_measured(double squeeze_db, double antisqueeze_db);

/// Same solve, in variance units (squeezed_var < 1 < antisqueezed_var).
MixedTmsv mixed_tmsv_from_variances(double squeezed_var, double antisqueezed_var);

/// tmsv_state(r) followed by apply_loss(eta, eta).
PairState mixed_tmsv_state(const MixedTmsv& params, int pair_index);

PairState displace(const PairState& state, std::complex<double> alpha_n,
                   std::complex<double> alpha_neg);

/// Independent pure-loss channels of power transmittance eta on each mode.
PairState apply_loss(const PairState& state, double eta_n, double eta_neg);

Moments quadrature_variance(const PairState& state, const QuadratureSelector& sel);

/// Complex projection (x + i p) e^{-i theta} w / |w| of each mode's mean.
/// Re(sum) is the quadrature mean; the complex values carry the RF phase.
std::array<std::complex<double>, 2> projected_means(const PairState& state,
                                                    const QuadratureSelector& sel);

/// I.i.d. draws of the selected quadrature.  Deterministic in `seed`.
std::vector<double> sample_quadrature(const PairState& state, const QuadratureSelector& sel,
                                      std::size_t n_samples, std::uint64_t seed);

}  // namespace edcs
