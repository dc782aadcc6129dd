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


#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "edcs/comb.hpp"
#include "edcs/error.hpp"
#include "edcs/gaussian.hpp"
#include "support.hpp"

namespace edcs {
namespace {

using std::numbers::pi;

CombConfig classical_comb(int n_pairs, std::complex<double> amp) {
    return CombConfig::uniform(CombRole::classical, 196e12, testing::kLineSpacingHz, 4e6, n_pairs,
                               amp);
}

CombConfig lo_comb(int n_pairs) {
    return CombConfig::uniform(CombRole::lo, 196e12, testing::kLineSpacingHz, 0.0, n_pairs, 1.0);
}

double min_variance_by_grid(const PairState& s, int steps) {
    double best = 1e300;
    for (int i = 0; i < steps; ++i)
        for (int j = 0; j < steps; ++j) {
            const QuadratureSelector sel =
                QuadratureSelector::balanced(2 * pi * i / steps, 2 * pi * j / steps);
            best = std::min(best, quadrature_variance(s, sel).variance);
        }
    return best;
}

TEST(CombConfig, ValidatesInvariants) {
    EXPECT_THROW(CombConfig::uniform(CombRole::lo, 0, 1e9, 0, 0, 1.0), InvalidArgument);
    EXPECT_THROW(CombConfig::uniform(CombRole::lo, 0, -1e9, 0, 1, 1.0), InvalidArgument);
    EXPECT_THROW(CombConfig::uniform(CombRole::lo, 0, 1e9, 0.5e9, 1, 1.0), InvalidArgument);
    const CombConfig c = classical_comb(3, 1.0);
    EXPECT_THROW(c.amplitude(0), InvalidArgument);
    EXPECT_THROW(c.amplitude(4), InvalidArgument);
    EXPECT_DOUBLE_EQ(c.line_frequency(2) - c.line_frequency(1), testing::kLineSpacingHz + 4e6);
}

TEST(BuildEntangled, ZeroSqueezingIsCoherentComb) {
    EntangledCombSpec spec = testing::flat_top(0.0, 0.0);
    spec.tap_ratio = 0.9;
    const std::complex<double> alpha{3.0, -1.0};
    const auto comb = build_entangled_comb(spec, classical_comb(4, alpha));
    ASSERT_EQ(comb.pairs.size(), 4u);
    const double k = std::sqrt(2.0) * std::sqrt(1.0 - 0.9);
    for (const auto& p : comb.pairs) {
        EXPECT_EQ(p.cov(), Mat4::Identity());
        EXPECT_NEAR(p.mean()(0), k * alpha.real(), 1e-12);
        EXPECT_NEAR(p.mean()(1), k * alpha.imag(), 1e-12);
    }
    // The classical baseline builder gives the same states.
    const auto classical = build_classical_comb(spec, classical_comb(4, alpha));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(classical[i].mean(), comb.pairs[i].mean());
}

TEST(BuildEntangled, MeasuredPairsDegradedByTap) {
    const EntangledCombSpec spec = testing::measured_squeezing(ReferencePlane::state);
    const auto comb = build_entangled_comb(spec, classical_comb(5, 10.0));
    for (int n = 1; n <= 5; ++n) {
        const PairState& p = comb.pairs[n - 1];
        const auto [sq, anti] = spec.pair_db(n);
        const double before = std::pow(10.0, -sq / 10.0);
        EXPECT_GE(before, std::pow(10.0, -0.28) - 1e-12);
        EXPECT_LE(before, std::pow(10.0, -0.21) + 1e-12);
        const double after = min_variance_by_grid(p, 180);
        EXPECT_NEAR(after, 0.99 * before + 0.01, 1e-3) << n;
        EXPECT_GT(after, before);
        EXPECT_GE(p.symplectic_eigenvalues()[0], 1.0 - 1e-9);
    }
}

TEST(BuildEntangled, FullTransmissionTapCarriesNoDisplacement) {
    EntangledCombSpec spec = testing::flat_top(3.0, 6.0);
    spec.tap_ratio = 1.0;
    for (const auto& p : build_entangled_comb(spec, classical_comb(2, 1e6)).pairs)
        EXPECT_EQ(p.mean(), Vec4::Zero());
}

TEST(BuildEntangled, Errors) {
    const EntangledCombSpec spec = testing::measured_squeezing(ReferencePlane::state);
    EXPECT_THROW(build_entangled_comb(spec, classical_comb(4, 1.0)), InvalidArgument);
    EXPECT_THROW(build_entangled_comb(spec, lo_comb(5)), InvalidArgument);
    EntangledCombSpec bad = testing::flat_top(5.0, 4.0);
    EXPECT_THROW(build_entangled_comb(bad, classical_comb(1, 1.0)), InvalidArgument);
}

TEST(BuildEntangled, DetectorPlaneDeEmbedding) {
    // Beyond what the detection chain can deliver.
    EntangledCombSpec spec = testing::flat_top(12.0, 15.0);
    spec.reference = ReferencePlane::detector;
    EXPECT_THROW(pair_source_parameters(spec, 1, testing::lab_detection()), InvalidArgument);
}

TEST(AlignLo, UnsqueezedPairsGiveUnitVariance) {
    const std::vector<PairState> pairs{PairState::vacuum(1), PairState::vacuum(2)};
    const CombConfig lo = align_lo_phases(pairs, lo_comb(2));
    for (int n = 1; n <= 2; ++n) {
        const QuadratureSelector sel = QuadratureSelector::balanced(lo.phase(n), lo.phase(-n));
        EXPECT_NEAR(quadrature_variance(pairs[n - 1], sel).variance, 1.0, 1e-12);
    }
}

TEST(AlignLo, ReachesAnalyticMinimumFromAdversarialStart) {
    const PairState pair = tmsv_state(0.3, 1);
    CombConfig lo = lo_comb(1);
    // Start on the anti-squeezed quadrature with unbalanced amplitudes.
    lo.amplitudes = {std::polar(0.3, 0.0), std::polar(2.0, 0.0)};
    const CombConfig aligned = align_lo_phases({pair}, lo);
    EXPECT_NEAR(std::abs(aligned.amplitude(1)), std::abs(aligned.amplitude(-1)), 1e-12);
    const QuadratureSelector sel =
        QuadratureSelector::balanced(aligned.phase(1), aligned.phase(-1));
    EXPECT_NEAR(quadrature_variance(pair, sel).variance, std::exp(-0.6), 1e-9);

    const QuadratureSelector broken =
        QuadratureSelector::balanced(aligned.phase(1) + pi / 2, aligned.phase(-1));
    EXPECT_GE(quadrature_variance(pair, broken).variance, 1.0);
}

TEST(AlignLo, AchievesGlobalGridMinimum) {
    // Rotated, mixed and displaced pairs so the optimum is not at a grid node.
    std::vector<PairState> pairs;
    pairs.push_back(displace(mixed_tmsv_state(mixed_tmsv_from_measured(2.5, 11.0), 1), 1.0, 2.0));
    pairs.push_back(apply_loss(tmsv_state(0.6, 2), 0.4, 0.95));
    {
        Mat4 rot = Mat4::Identity();
        const double a = 0.37;
        rot.block<2, 2>(0, 0) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        const PairState t = tmsv_state(0.5, 3);
        pairs.emplace_back(Vec4::Zero(), rot * t.cov() * rot.transpose(), 3);
    }
    const CombConfig lo = align_lo_phases(pairs, lo_comb(3));
    for (const PairState& p : pairs) {
        const int n = p.pair_index();
        const double got =
            quadrature_variance(p, QuadratureSelector::balanced(lo.phase(n), lo.phase(-n))).variance;
        EXPECT_LE(got, min_variance_by_grid(p, 100) + 1e-12) << n;
        EXPECT_LT(got, 1.0);
    }
}

TEST(AlignLo, RejectsMismatch) {
    EXPECT_THROW(align_lo_phases({PairState::vacuum(1)}, lo_comb(2)), InvalidArgument);
    EXPECT_THROW(align_lo_phases({PairState::vacuum(1)}, classical_comb(1, 1.0)), InvalidArgument);
}

TEST(Sweep, SingleSweepIsBase) {
    const CombConfig base = lo_comb(5);
    const auto s = sweep_centers(base, 1, 1e6);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], base);
    EXPECT_THROW(sweep_centers(base, 0, 1e6), InvalidArgument);
    EXPECT_THROW(sweep_centers(base, 3, testing::kLineSpacingHz), InvalidArgument);
}

TEST(Sweep, FiftySweepsGiveFiveHundredLines) {
    const double step = testing::kLineSpacingHz / 50.0;
    EXPECT_NEAR(step, 351.3e6, 1.0);
    const auto lines = union_line_frequencies(sweep_centers(lo_comb(5), 50, step));
    ASSERT_EQ(lines.size(), 500u);
    std::vector<double> diffs;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        EXPECT_GT(lines[i] - lines[i - 1], 1.0);
        diffs.push_back(lines[i] - lines[i - 1]);
    }
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    EXPECT_NEAR(diffs[diffs.size() / 2], 350e6, 2e6);
}

TEST(Sweep, RfFillInCoverage) {
    const double step = testing::kLineSpacingHz / 50.0;
    const auto sweeps = sweep_centers(lo_comb(5), 50, step);
    std::vector<double> upper, lower;
    for (double f : union_line_frequencies(sweeps)) (f > 196e12 ? upper : lower).push_back(f);
    for (const auto* side : {&upper, &lower}) {
        EXPECT_TRUE(coverage_gaps(*side, step / 2.0 + 1.0).empty());
        // A +-175 MHz fill-in leaves only the rounding slivers of the 351.3 MHz grid.
        for (const auto& [a, b] : coverage_gaps(*side, 175e6)) EXPECT_LT(b - a, 1.31e6);
    }
}

}  // namespace
}  // namespace edcs
