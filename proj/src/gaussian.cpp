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

#include "edcs/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "edcs/error.hpp"
#include "edcs/units.hpp"
#include "rng.hpp"

namespace edcs {
namespace {

bool all_finite(const auto& m) { return m.allFinite(); }

void check_unit_interval(double eta, const char* name) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        std::ostringstream os;
        os << name << " must lie in [0, 1], got " << eta;
        throw InvalidArgument(os.str());
    }
}

}  // namespace

PairState::PairState(Vec4 mean, Mat4 cov, int pair_index)
    : mean_(std::move(mean)), cov_(std::move(cov)), pair_index_(pair_index) {
    if (pair_index_ < 1) throw InvalidArgument("pair index must be >= 1");
    if (!all_finite(mean_) || !all_finite(cov_)) throw InvalidArgument("non-finite pair state");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance)
        throw InvalidArgument("pair covariance is not symmetric");
    if (cov_.llt().info() != Eigen::Success)
        throw InvalidArgument("pair covariance is not positive definite");
    const auto nu = symplectic_eigenvalues();
    if (nu[0] < 1.0 - kPhysicalityTolerance) {
        std::ostringstream os;
        os << "pair covariance violates the uncertainty principle (nu_min = " << nu[0] << ")";
        throw InvalidArgument(os.str());
    }
}

PairState PairState::vacuum(int pair_index) {
    return {Vec4::Zero(), Mat4::Identity(), pair_index};
}

std::array<double, 2> PairState::symplectic_eigenvalues() const {
    // With V = L L', the antisymmetric L' Omega L is similar to Omega V, so its
    // singular values are the symplectic eigenvalues, each twice.  The SVD
    // resolves them to absolute precision even when they are degenerate
    // (pure states), which the closed-form invariants do not.
    Mat4 omega = Mat4::Zero();
    omega(0, 1) = omega(2, 3) = 1.0;
    omega(1, 0) = omega(3, 2) = -1.0;
    const Eigen::LLT<Mat4> llt(cov_);
    if (llt.info() != Eigen::Success) return {0.0, 0.0};
    const Mat4 l = llt.matrixL();
    const Vec4 sv = Eigen::JacobiSVD<Mat4>(l.transpose() * omega * l).singularValues();
    return {0.5 * (sv(2) + sv(3)), 0.5 * (sv(0) + sv(1))};
}

SingleModeState::SingleModeState(Vec2 mean, Mat2 cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (!all_finite(mean_) || !all_finite(cov_)) throw InvalidArgument("non-finite single-mode state");
    if (std::abs(cov_(0, 1) - cov_(1, 0)) > kSymmetryTolerance)
        throw InvalidArgument("single-mode covariance is not symmetric");
    if (cov_.llt().info() != Eigen::Success)
        throw InvalidArgument("single-mode covariance is not positive definite");
    if (std::sqrt(cov_.determinant()) < 1.0 - kPhysicalityTolerance)
        throw InvalidArgument("single-mode covariance violates the uncertainty principle");
}

SingleModeState SingleModeState::squeezed(double squeeze_db, double antisqueeze_db) {
    if (squeeze_db < 0.0 || antisqueeze_db < squeeze_db)
        throw InvalidArgument("single-mode squeezing requires antisqueeze_db >= squeeze_db >= 0");
    Mat2 cov = Mat2::Zero();
    cov(0, 0) = units::db_to_ratio(-squeeze_db);
    cov(1, 1) = units::db_to_ratio(antisqueeze_db);
    return {Vec2::Zero(), cov};
}

double QuadratureSelector::norm() const { return std::hypot(weights[0], weights[1]); }

void QuadratureSelector::validate() const {
    for (double v : {weights[0], weights[1], phases[0], phases[1]})
        if (!std::isfinite(v)) throw InvalidArgument("non-finite quadrature selector");
    if (norm() == 0.0) throw InvalidArgument("quadrature selector has zero weight norm");
}

PairState tmsv_state(double r, int pair_index) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("squeezing parameter r must be >= 0");
    const double c = std::cosh(2.0 * r);
    const double s = std::sinh(2.0 * r);
    Mat4 cov = Mat4::Zero();
    cov.diagonal().setConstant(c);
    cov(0, 2) = cov(2, 0) = s;
    cov(1, 3) = cov(3, 1) = -s;
    return {Vec4::Zero(), cov, pair_index};
}

MixedTmsv mixed_tmsv_from_variances(double squeezed_var, double antisqueezed_var) {
    if (!(squeezed_var > 0.0 && squeezed_var < 1.0))
        throw InvalidArgument("squeezed variance must lie in (0, 1)");
    if (!(antisqueezed_var > 1.0) || !std::isfinite(antisqueezed_var))
        throw InvalidArgument("anti-squeezed variance must exceed 1");
    // Purity loss cannot remove anti-squeezing faster than squeezing:
    // eta <= 1 is equivalent to squeezed_var * antisqueezed_var >= 1.
    if (squeezed_var * antisqueezed_var < 1.0 - 1e-12) {
        std::ostringstream os;
        os << "infeasible squeezing pair: product of variances " << squeezed_var * antisqueezed_var
           << " < 1 would need purity eta > 1";
        throw InvalidArgument(os.str());
    }
    // With u = e^{2r}: eta (1/u - 1) = s - 1 and eta (u - 1) = a - 1, so u = (a - 1)/(1 - s).
    const double u = (antisqueezed_var - 1.0) / (1.0 - squeezed_var);
    const double eta = std::min(1.0, (antisqueezed_var - 1.0) / (u - 1.0));
    return {0.5 * std::log(u), eta};
}

MixedTmsv mixed_tmsv_from_measured(double squeeze_db, double antisqueeze_db) {
    if (!(squeeze_db > 0.0)) throw InvalidArgument("squeeze_db must be > 0");
    if (antisqueeze_db < squeeze_db) {
        std::ostringstream os;
        os << "infeasible squeezing pair: anti-squeezing " << antisqueeze_db
           << " dB is below squeezing " << squeeze_db << " dB";
        throw InvalidArgument(os.str());
    }
    return mixed_tmsv_from_variances(units::db_to_ratio(-squeeze_db),
                                     units::db_to_ratio(antisqueeze_db));
}

PairState mixed_tmsv_state(const MixedTmsv& params, int pair_index) {
    return apply_loss(tmsv_state(params.r, pair_index), params.eta, params.eta);
}

PairState displace(const PairState& state, std::complex<double> alpha_n,
                   std::complex<double> alpha_neg) {
    if (!std::isfinite(alpha_n.real()) || !std::isfinite(alpha_n.imag()) ||
        !std::isfinite(alpha_neg.real()) || !std::isfinite(alpha_neg.imag()))
        throw InvalidArgument("non-finite displacement");
    if (alpha_n == 0.0 && alpha_neg == 0.0) return state;
    const double k = std::numbers::sqrt2;
    Vec4 mean = state.mean();
    mean(0) += k * alpha_n.real();
    mean(1) += k * alpha_n.imag();
    mean(2) += k * alpha_neg.real();
    mean(3) += k * alpha_neg.imag();
    return {mean, state.cov(), state.pair_index()};
}

PairState apply_loss(const PairState& state, double eta_n, double eta_neg) {
    check_unit_interval(eta_n, "eta_n");
    check_unit_interval(eta_neg, "eta_neg");
    if (eta_n == 1.0 && eta_neg == 1.0) return state;
    const Vec4 g(std::sqrt(eta_n), std::sqrt(eta_n), std::sqrt(eta_neg), std::sqrt(eta_neg));
    // V -> G V G + (I - G^2); cross blocks pick up sqrt(eta_n eta_neg).
    Mat4 cov = g.asDiagonal() * state.cov() * g.asDiagonal();
    cov.diagonal() += (Vec4::Ones() - g.cwiseProduct(g));
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {g.cwiseProduct(state.mean()), cov, state.pair_index()};
}

namespace {

Vec4 selector_vector(const QuadratureSelector& sel) {
    const double norm = sel.norm();
    const double wn = sel.weights[0] / norm;
    const double wm = sel.weights[1] / norm;
    return {wn * std::cos(sel.phases[0]), wn * std::sin(sel.phases[0]),
            wm * std::cos(sel.phases[1]), wm * std::sin(sel.phases[1])};
}

}  // namespace

Moments quadrature_variance(const PairState& state, const QuadratureSelector& sel) {
    sel.validate();
    const Vec4 v = selector_vector(sel);
    return {v.dot(state.mean()), v.dot(state.cov() * v)};
}

std::array<std::complex<double>, 2> projected_means(const PairState& state,
                                                    const QuadratureSelector& sel) {
    sel.validate();
    const double norm = sel.norm();
    std::array<std::complex<double>, 2> out;
    for (int i = 0; i < 2; ++i) {
        const std::complex<double> z(state.mean()(2 * i), state.mean()(2 * i + 1));
        out[i] = sel.weights[i] / norm * z * std::polar(1.0, -sel.phases[i]);
    }
    return out;
}

std::vector<double> sample_quadrature(const PairState& state, const QuadratureSelector& sel,
                                      std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
    const Moments m = quadrature_variance(state, sel);
    auto engine = detail::make_engine(seed);
    std::normal_distribution<double> normal(m.mean, std::sqrt(m.variance));
    std::vector<double> out(n_samples);
    for (double& x : out) x = normal(engine);
    return out;
}

}  // namespace edcs
