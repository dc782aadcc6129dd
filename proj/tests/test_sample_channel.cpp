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
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <gtest/gtest.h>
#include <json.hpp>

#include "edcs/comb.hpp"
#include "edcs/error.hpp"
#include "edcs/sample_channel.hpp"
#include "edcs/units.hpp"

namespace edcs {
namespace {

using std::numbers::pi;

const std::filesystem::path kFixture = std::filesystem::path(EDCS_SOURCE_DIR) / "data/hcn_2nu3.csv";

GasCell reference_cell() { return {17.5, 25.0, 296.0, 1.0}; }

// Direct convolution of a Lorentzian with a Gaussian.
double voigt_by_convolution(double x, double gamma, double sigma) {
    auto integrand = [&](double t) {
        const double g = std::exp(-t * t / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * pi));
        const double d = x - t;
        return g * gamma / (pi * (d * d + gamma * gamma));
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, -14 * sigma, 14 * sigma, 20, 1e-14, &err);
}

double integrate_profile(double gamma, double sigma) {
    boost::math::quadrature::sinh_sinh<double> integrator;
    const double scale = gamma + sigma;
    return integrator.integrate(
        [&](double u) { return scale * voigt_profile(u * scale, gamma, sigma); }, 1e-12);
}

std::vector<double> fixture_centers_by_hand() {
    std::ifstream in(kFixture);
    std::string line;
    std::vector<double> out;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        out.push_back(std::stod(line.substr(0, line.find(','))));
    }
    return out;
}

TEST(LineList, EmptyDataRejected) {
    std::stringstream ss("center_hz,strength,gamma_air,gamma_self,mass_amu\n# nothing\n");
    try {
        parse_line_list(ss);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("no spectral lines"), std::string::npos);
    }
}

TEST(LineList, SingleRowEchoes) {
    std::stringstream ss(
        "mass_amu,center_hz,strength,gamma_air,gamma_self,lower_energy_cm1\n"
        "27.01,1.95e14,1.5e-20,0.1,0.15,12.5\n");
    const auto lines = parse_line_list(ss);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0].center_hz, 1.95e14);
    EXPECT_EQ(lines[0].strength, 1.5e-20);
    EXPECT_EQ(lines[0].gamma_air, 0.1);
    EXPECT_EQ(lines[0].gamma_self, 0.15);
    EXPECT_EQ(lines[0].mass_amu, 27.01);
    EXPECT_EQ(lines[0].lower_energy_cm1, 12.5);
    EXPECT_EQ(lines[0].n_air, 0.75);
}

TEST(LineList, MalformedRowReportsLineNumber) {
    std::stringstream ss(
        "center_hz,strength,gamma_air,gamma_self,mass_amu\n"
        "1.95e14,1e-20,0.1,0.1,27\n"
        "1.96e14,abc,0.1,0.1,27\n");
    try {
        parse_line_list(ss);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    std::stringstream neg(
        "center_hz,strength,gamma_air,gamma_self,mass_amu\n1.95e14,-1,0.1,0.1,27\n");
    EXPECT_THROW(parse_line_list(neg), IoError);
    std::stringstream missing("center_hz,strength\n1,2\n");
    EXPECT_THROW(parse_line_list(missing), IoError);
    EXPECT_THROW(ingest_line_list("/nonexistent/lines.csv"), IoError);
}

TEST(LineList, FixtureMatchesFile) {
    const auto lines = ingest_line_list(kFixture);
    auto centers = fixture_centers_by_hand();
    ASSERT_EQ(lines.size(), 25u);
    ASSERT_EQ(centers.size(), 25u);
    std::sort(centers.begin(), centers.end());
    for (std::size_t i = 0; i < lines.size(); ++i) EXPECT_EQ(lines[i].center_hz, centers[i]);
    EXPECT_TRUE(std::is_sorted(lines.begin(), lines.end(),
                               [](auto& a, auto& b) { return a.center_hz < b.center_hz; }));
    // The band sits near 1.53 um.
    EXPECT_GT(lines.front().center_hz, 1.9e14);
    EXPECT_LT(lines.back().center_hz, 2.0e14);
}

TEST(LineList, WriteParseRoundTrip) {
    const auto lines = ingest_line_list(kFixture);
    std::stringstream ss;
    write_line_list(ss, lines);
    const auto back = parse_line_list(ss);
    ASSERT_EQ(back.size(), lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        EXPECT_EQ(back[i].center_hz, lines[i].center_hz);
        EXPECT_EQ(back[i].strength, lines[i].strength);
    }
}

TEST(Units, Conversions) {
    EXPECT_DOUBLE_EQ(units::torr_to_atm(760.0), 1.0);
    EXPECT_NEAR(units::torr_to_pascal(25.0), 3333.0592105263158, 1e-9);
    EXPECT_DOUBLE_EQ(units::wavenumber_to_hz(1.0), 29979245800.0);
    EXPECT_DOUBLE_EQ(units::hz_to_wavenumber(29979245800.0), 1.0);
    // Loschmidt-like check: 1 atm at 273.15 K is 2.6868e19 molecules/cm^3.
    EXPECT_NEAR(units::number_density_per_cm3(760.0, 273.15) / 2.6867811e19, 1.0, 1e-6);
    EXPECT_NEAR(units::ratio_to_db(units::db_to_ratio(3.0)), 3.0, 1e-14);
}

TEST(Faddeeva, KnownValues) {
    // w(0) = 1; w(i y) = erfcx(y) on the imaginary axis.
    EXPECT_NEAR(std::abs(faddeeva({0.0, 0.0}) - 1.0), 0.0, 1e-13);
    for (double y : {0.01, 0.5, 1.0, 3.0, 20.0}) {
        const double erfcx = std::exp(y * y) * std::erfc(y);
        EXPECT_NEAR(faddeeva({0.0, y}).real() / erfcx, 1.0, 1e-10) << y;
    }
    // Re w(x) = exp(-x^2) on the real axis.
    for (double x : {0.3, 1.0, 2.5}) EXPECT_NEAR(faddeeva({x, 0.0}).real(), std::exp(-x * x), 1e-12);
    EXPECT_THROW(faddeeva({0.0, -1.0}), InvalidArgument);
}

TEST(Voigt, LorentzianLimit) {
    const double gamma = 1e9;
    EXPECT_NEAR(voigt_profile(0.0, gamma, 1e-3 * gamma) * pi * gamma, 1.0, 1e-6);
}

TEST(Voigt, GaussianLimit) {
    const double sigma = 2e8;
    EXPECT_NEAR(voigt_profile(0.0, 1e-7 * sigma, sigma) * sigma * std::sqrt(2 * pi), 1.0, 1e-6);
}

TEST(Voigt, MatchesConvolutionOracle) {
    const double w = 1e8;
    for (double x : {0.0, 0.3, 1.0, 2.7, 8.0, 30.0}) {
        const double oracle = voigt_by_convolution(x * w, w, w);
        EXPECT_NEAR(voigt_profile(x * w, w, w) / oracle, 1.0, 1e-8) << x;
    }
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 30; ++i) {
        const double gamma = std::pow(10.0, u(rng)), sigma = std::pow(10.0, u(rng));
        const double x = 3 * u(rng) * (gamma + sigma);
        EXPECT_NEAR(voigt_profile(x, gamma, sigma) / voigt_by_convolution(x, gamma, sigma), 1.0,
                    1e-8);
    }
}

TEST(Voigt, NormalizedForRandomWidths) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        const double gamma = 1e8 * std::pow(10.0, u(rng)), sigma = 1e8 * std::pow(10.0, u(rng));
        EXPECT_NEAR(integrate_profile(gamma, sigma), 1.0, 1e-6) << gamma << " " << sigma;
    }
    EXPECT_THROW(voigt_profile(0.0, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(voigt_profile(0.0, 1.0, -1.0), InvalidArgument);
}

TEST(Transmittance, ZeroMoleFractionIsTransparent) {
    const auto lines = ingest_line_list(kFixture);
    GasCell cell = reference_cell();
    cell.mole_fraction = 0.0;
    for (const auto& l : lines) EXPECT_EQ(transmittance(l.center_hz, cell, lines), 1.0);
}

TEST(Transmittance, BeerLambertAndMonotonicity) {
    const auto lines = ingest_line_list(kFixture);
    const GasCell cell = reference_cell();
    GasCell twice = cell;
    twice.path_length_cm *= 2;
    GasCell dilute = cell;
    dilute.mole_fraction = 0.4;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(lines.front().center_hz, lines.back().center_hz);
    for (int i = 0; i < 200; ++i) {
        const double f = u(rng);
        const double t = transmittance(f, cell, lines);
        EXPECT_GT(t, 0.0);
        EXPECT_LE(t, 1.0);
        EXPECT_NEAR(transmittance(f, twice, lines), t * t, 1e-14);
        EXPECT_GE(transmittance(f, dilute, lines), t);
        // Log-transmittance is additive over lines.
        double sum = 0.0;
        for (const auto& l : lines) sum += absorbance(f, cell, std::span(&l, 1));
        EXPECT_NEAR(absorbance(f, cell, lines), sum, 1e-12 * std::max(1.0, sum));
    }
    GasCell bad = cell;
    bad.pressure_torr = 0.0;
    EXPECT_THROW(transmittance(lines[0].center_hz, bad, lines), InvalidArgument);
    bad = cell;
    bad.mole_fraction = 1.5;
    EXPECT_THROW(transmittance(lines[0].center_hz, bad, lines), InvalidArgument);
}

TEST(Transmittance, FixtureCalibratedToThreeDb) {
    const auto lines = ingest_line_list(kFixture);
    const GasCell cell = reference_cell();
    const auto cal = calibrate_peak_depth(lines, cell, 3.0);
    EXPECT_NEAR(peak_depth_db(cell, cal.lines), 3.0, 1e-9);
    EXPECT_GT(cal.strength_scale, 0.0);
    // Calibrating an already calibrated list is the identity.
    EXPECT_NEAR(calibrate_peak_depth(cal.lines, cell, 3.0).strength_scale, 1.0, 1e-9);
    double deepest = 1.0;
    for (const auto& l : cal.lines) deepest = std::min(deepest, transmittance(l.center_hz, cell, cal.lines));
    EXPECT_NEAR(-10 * std::log10(deepest), 3.0, 1e-9);
}

TEST(LineShape, PressureAndDopplerWidths) {
    SpectralLine l{1.96e14, 1e-20, 0.1, 0.2, 0.7, 27.0, 0.0};
    GasCell cell{10.0, 76.0, 296.0, 0.5};
    const LineShape s = line_shape(l, cell);
    const double hwhm_cm = 0.1 * (0.1 * 0.5 + 0.2 * 0.5);
    EXPECT_NEAR(s.lorentz_hwhm_hz, units::wavenumber_to_hz(hwhm_cm), 1e-3);
    const double sigma = 1.96e14 / 2.99792458e8 *
                         std::sqrt(units::kBoltzmann * 296.0 / (27.0 * units::kAtomicMassUnit));
    EXPECT_NEAR(s.gauss_sigma_hz / sigma, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(s.strength, 1e-20);
}

std::vector<TransmittancePoint> synthetic(const std::vector<double>& freqs, const GasCell& truth,
                                          std::span<const SpectralLine> lines, double rel_noise,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<TransmittancePoint> out;
    for (double f : freqs) {
        const double t = transmittance(f, truth, lines);
        const double sigma = rel_noise > 0.0 ? rel_noise * t : 1e-3;
        out.push_back({f, t * (1.0 + rel_noise * n01(rng)), sigma});
    }
    return out;
}

std::vector<double> sweep_grid(const std::vector<SpectralLine>& lines) {
    // 500 sweep-union frequencies centred so the strongest line is sampled.
    const auto strongest = *std::max_element(
        lines.begin(), lines.end(), [](auto& a, auto& b) { return a.strength < b.strength; });
    const double frep = 17.565e9;
    const CombConfig base = CombConfig::uniform(CombRole::lo, strongest.center_hz - 2 * frep, frep,
                                                0.0, 5, 1.0);
    return union_line_frequencies(sweep_centers(base, 50, frep / 50));
}

TEST(Fit, FixedPointAtTruth) {
    const auto lines = ingest_line_list(kFixture);
    const GasCell truth{17.5, 25.0, 296.0, 0.8};
    const auto data = synthetic(sweep_grid(lines), truth, lines, 0.0, 1);
    const FitResult fit = fit_cell_params(data, lines, truth);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.cell.mole_fraction / 0.8, 1.0, 1e-10);
}

TEST(Fit, ConvergesFromFactorTwo) {
    const auto lines = ingest_line_list(kFixture);
    const GasCell truth{17.5, 25.0, 296.0, 0.45};
    const auto data = synthetic(sweep_grid(lines), truth, lines, 0.0, 1);
    GasCell init = truth;
    init.mole_fraction = 0.9;
    FitResult fit = fit_cell_params(data, lines, init);
    EXPECT_NEAR(fit.cell.mole_fraction / 0.45, 1.0, 1e-6);

    FitOptions both;
    both.free = {CellParam::mole_fraction, CellParam::pressure};
    init.pressure_torr = 30.0;
    fit = fit_cell_params(data, lines, init, both);
    EXPECT_NEAR(fit.cell.mole_fraction / 0.45, 1.0, 1e-6);
    EXPECT_NEAR(fit.cell.pressure_torr / 25.0, 1.0, 1e-6);
    EXPECT_EQ(fit.covariance.rows(), 2);
}

TEST(Fit, NoisyCoverageAndWhiteResiduals) {
    const auto lines = ingest_line_list(kFixture);
    const GasCell truth = reference_cell();
    const auto grid = sweep_grid(lines);
    int covered = 0;
    constexpr int kSeeds = 20;
    for (int s = 0; s < kSeeds; ++s) {
        const FitResult fit = fit_cell_params(synthetic(grid, truth, lines, 0.01, 100 + s), lines,
                                              truth);
        if (std::abs(fit.cell.mole_fraction - 1.0) <= 3 * fit.sigmas[0]) ++covered;
        if (s == 0) {
            EXPECT_LT(std::abs(fit.runs_test_z), 1.96);
            EXPECT_NEAR(fit.chi2 / (grid.size() - 1), 1.0, 0.2);
            EXPECT_EQ(fit.residuals.size(), grid.size());
        }
    }
    EXPECT_GE(covered, 18);
}

TEST(Fit, Errors) {
    const auto lines = ingest_line_list(kFixture);
    const GasCell truth = reference_cell();
    auto data = synthetic(sweep_grid(lines), truth, lines, 0.0, 1);
    FitOptions opts;
    opts.free = {};
    EXPECT_THROW(fit_cell_params(data, lines, truth, opts), InvalidArgument);
    std::vector<TransmittancePoint> none;
    EXPECT_THROW(fit_cell_params(none, lines, truth), InvalidArgument);
    data[3].sigma = 0.0;
    EXPECT_THROW(fit_cell_params(data, lines, truth), InvalidArgument);

    // With zero strengths the model does not depend on the mole fraction.
    auto dark = lines;
    for (auto& l : dark) l.strength = 0.0;
    data[3].sigma = 0.01;
    EXPECT_THROW(fit_cell_params(data, dark, truth), NumericError);

    GasCell init = truth;
    init.mole_fraction = 0.2;
    data = synthetic(sweep_grid(lines), truth, lines, 0.0, 1);
    FitOptions one;
    one.max_iterations = 1;
    try {
        fit_cell_params(data, lines, init, one);
        FAIL();
    } catch (const FitNotConverged& e) {
        EXPECT_FALSE(e.best().converged);
        EXPECT_EQ(e.best().iterations, 1);
    }
}

TEST(Fit, JsonHasDocumentedFields) {
    const auto lines = ingest_line_list(kFixture);
    const auto data = synthetic(sweep_grid(lines), reference_cell(), lines, 0.01, 3);
    std::stringstream ss;
    write_fit_json(ss, fit_cell_params(data, lines, reference_cell()));
    const auto j = nlohmann::json::parse(ss.str());
    for (const char* key : {"parameters", "cell", "covariance", "chi2", "dof", "runs_test_z",
                            "iterations", "converged", "residuals"})
        EXPECT_TRUE(j.contains(key)) << key;
}

TEST(TransmittanceCsv, RoundTrip) {
    std::vector<TransmittancePoint> pts{{1.9e14, 0.5, 0.01}, {1.91e14, 0.9, 0.02}};
    std::stringstream ss;
    write_transmittance_csv(ss, pts);
    const auto back = read_transmittance_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].freq_hz, 1.91e14);
    EXPECT_EQ(back[0].transmittance, 0.5);
    std::stringstream bad("a,b,c\n1,2,3\n");
    EXPECT_THROW(read_transmittance_csv(bad), IoError);
}

TEST(RunsTest, DetectsStructure) {
    std::vector<double> alternating, blocks;
    for (int i = 0; i < 100; ++i) {
        alternating.push_back(i % 2 ? 1.0 : -1.0);
        blocks.push_back(i < 50 ? 1.0 : -1.0);
    }
    EXPECT_GT(runs_test_z(alternating), 5.0);
    EXPECT_LT(runs_test_z(blocks), -5.0);
}

}  // namespace
}  // namespace edcs
