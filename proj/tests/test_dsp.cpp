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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "edcs/comb.hpp"
#include "edcs/dsp.hpp"
#include "edcs/error.hpp"
#include "edcs/metrics.hpp"
#include "edcs/sample_channel.hpp"
#include "edcs/units.hpp"
#include "support.hpp"

namespace edcs {
namespace {

constexpr double kFs = 100e6;
constexpr double kRbw = 100e3;
constexpr double kDf = 4e6;

SynthesisOptions noiseless() {
    SynthesisOptions o;
    o.include_noise = false;
    return o;
}

BeatnoteRecord tone(int n, std::complex<double> amp, double var = 1.0) {
    BeatnoteRecord r;
    r.index = n;
    r.rf_freq_hz = n * kDf;
    r.mean_amp = amp;
    r.noise_var = var;
    return r;
}

std::vector<BeatnoteRecord> measured_records() {
    return arm_records(testing::make_scenario(testing::measured_squeezing(ReferencePlane::state), {}),
                       Arm::edcs);
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("edcs_dsp_" + name);
}

std::vector<char> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Synthesize, EmptyNoiselessIsZero) {
    const Interferogram ifg = synthesize({}, kFs, 1e-4, {}, noiseless(), 1);
    ASSERT_EQ(ifg.samples.size(), 10000u);
    for (double s : ifg.samples) EXPECT_EQ(s, 0.0);
}

TEST(Synthesize, SingleToneRecoveredExactly) {
    const std::vector<BeatnoteRecord> recs{tone(1, 1.0)};
    const Interferogram ifg = synthesize(recs, kFs, 1e-3, {}, noiseless(), 1);
    const Spectrum s = average_spectra(segment_and_fft(ifg, kRbw));
    const auto beats = extract_beatnotes(s, kDf, 1);
    EXPECT_NEAR(beats[0].amplitude, 1.0, 1e-9);
    EXPECT_NEAR(beats[0].noise_floor, 0.0, 1e-20);
}

TEST(Synthesize, NoiselessAmplitudesExact) {
    std::vector<BeatnoteRecord> recs;
    for (int n = 1; n <= 5; ++n) recs.push_back(tone(n, std::polar(0.2 * n, 0.7 * n)));
    for (Window w : {Window::rectangular, Window::hann}) {
        const Interferogram ifg = synthesize(recs, kFs, 1e-3, {}, noiseless(), 1);
        const auto beats = extract_beatnotes(average_spectra(segment_and_fft(ifg, kRbw, w)), kDf, 5);
        for (int n = 1; n <= 5; ++n) EXPECT_NEAR(beats[n - 1].amplitude, 0.2 * n, 1e-9);
    }
}

TEST(Synthesize, RejectsAliasingAndBadDurations) {
    EXPECT_THROW(synthesize(std::vector{tone(13, 1.0)}, kFs, 1e-3, {}, {}, 1), InvalidArgument);
    EXPECT_THROW(synthesize({}, kFs, 1.0005e-6, {}, {}, 1), InvalidArgument);
    EXPECT_THROW(sample_count(kFs, 0.0), InvalidArgument);
}

TEST(Synthesize, DeterministicPerSeed) {
    const auto recs = measured_records();
    const auto a = synthesize(recs, kFs, 1e-3, {}, {}, 42);
    const auto b = synthesize(recs, kFs, 1e-3, {}, {}, 42);
    const auto c = synthesize(recs, kFs, 1e-3, {}, {}, 43);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_NE(a.samples, c.samples);

    const auto pa = temp_path("det_a.bin"), pb = temp_path("det_b.bin");
    write_interferogram(pa, a);
    write_interferogram(pb, b);
    EXPECT_EQ(slurp(pa), slurp(pb));
    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
}

TEST(Synthesize, FloorsMatchConfiguredVariance) {
    // 100 seeds; each extracts the five local floors from 100 averaged segments.
    const auto recs = measured_records();
    constexpr int kSeeds = 100;
    std::vector<std::vector<double>> floors(5);
    for (int seed = 0; seed < kSeeds; ++seed) {
        const auto ifg = synthesize(recs, kFs, 1e-3, {}, {}, 1000 + seed);
        const auto beats = extract_beatnotes(average_spectra(segment_and_fft(ifg, kRbw)), kDf, 5);
        for (int n = 0; n < 5; ++n) floors[n].push_back(beats[n].noise_floor);
    }
    for (int n = 0; n < 5; ++n) {
        const auto& f = floors[n];
        const double mean = std::accumulate(f.begin(), f.end(), 0.0) / kSeeds;
        double var = 0.0;
        for (double x : f) var += (x - mean) * (x - mean);
        const double sem = std::sqrt(var / (kSeeds - 1) / kSeeds);
        EXPECT_LT(std::abs(mean - recs[n].noise_var), 3 * sem) << "beat " << n + 1;
    }
}

TEST(Segmentation, ReplicationSegmentCounts) {
    EXPECT_EQ(sample_count(kFs, 0.5) / static_cast<std::size_t>(kFs / 100e3), 50'000u);
    EXPECT_EQ(sample_count(kFs, 0.5) / static_cast<std::size_t>(kFs / 10e3), 5'000u);
    const auto ifg = synthesize({}, kFs, 2e-3, {}, {}, 1);
    EXPECT_EQ(segment_and_fft(ifg, 100e3).size(), 200u);
    EXPECT_EQ(segment_and_fft(ifg, 10e3).size(), 20u);
    EXPECT_EQ(segment_and_fft(ifg, 100e3, Window::rectangular, 7).size(), 7u);
    EXPECT_THROW(segment_and_fft(ifg, 100.0), InvalidArgument);  // longer than the record
    EXPECT_THROW(segment_and_fft(ifg, 3e7), InvalidArgument);    // non-integer length
}

TEST(Segmentation, WhiteNoiseUnitBinPower) {
    const auto ifg = synthesize({}, kFs, 10e-3, {}, {}, 5);
    for (Window w : {Window::rectangular, Window::hann}) {
        const Spectrum s = average_spectra(segment_and_fft(ifg, kRbw, w));
        const double mean =
            std::accumulate(s.power.begin() + 1, s.power.end() - 1, 0.0) / (s.power.size() - 2);
        EXPECT_NEAR(mean, 1.0, 0.02);
    }
}

TEST(Segmentation, ParsevalConsistency) {
    const auto ifg = synthesize(measured_records(), kFs, 1e-3, {}, {}, 9);
    const auto spectra = segment_and_fft(ifg, kRbw);
    const std::size_t len = spectra[0].segment_length;
    for (std::size_t i = 0; i < 5; ++i) {
        double ms = 0.0;
        for (std::size_t t = 0; t < len; ++t) ms += ifg.samples[i * len + t] * ifg.samples[i * len + t];
        ms /= static_cast<double>(len);
        EXPECT_NEAR(spectra[i].total_power() / ms, 1.0, 1e-12);
    }
    // Hann: total power is the windowed mean square over mean(w^2), which
    // equals the variance of white noise in expectation.
    const auto white = synthesize({}, kFs, 10e-3, {}, {}, 9);
    const Spectrum h = average_spectra(segment_and_fft(white, kRbw, Window::hann));
    double var = 0.0;
    for (double x : white.samples) var += x * x;
    var /= static_cast<double>(white.samples.size());
    EXPECT_NEAR(h.total_power() / var, 1.0, 0.02);
}

TEST(Averaging, IdentityAndGridMismatch) {
    const auto ifg = synthesize({}, kFs, 1e-3, {}, {}, 3);
    const auto spectra = segment_and_fft(ifg, kRbw);
    const Spectrum one = average_spectra(std::span(spectra).first(1));
    EXPECT_EQ(one.power, spectra[0].power);
    EXPECT_EQ(one.n_averaged, 1);
    const auto other = segment_and_fft(ifg, 2 * kRbw);
    const std::vector<Spectrum> mixed{spectra[0], other[0]};
    EXPECT_THROW(average_spectra(mixed), InvalidArgument);
    EXPECT_THROW(average_spectra(std::span<const Spectrum>{}), InvalidArgument);
}

TEST(Averaging, FloorStdScalesInverseSqrtM) {
    const auto ifg = synthesize({}, kFs, 10e-3, {}, {}, 17);
    const std::vector<int> ms{1, 10, 100, 1000};
    const auto avgs = cumulative_averages(ifg, kRbw, Window::rectangular, ms);
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const auto& p = avgs[i].power;
        const double mean = std::accumulate(p.begin() + 1, p.end() - 1, 0.0) / (p.size() - 2);
        double var = 0.0;
        for (std::size_t k = 1; k + 1 < p.size(); ++k) var += (p[k] - mean) * (p[k] - mean);
        const double sd = std::sqrt(var / (p.size() - 3));
        EXPECT_NEAR(sd * std::sqrt(ms[i]), 1.0, 0.2) << "M = " << ms[i];
    }
    // Cumulative averaging equals averaging the first M segments directly.
    const auto direct = average_spectra(segment_and_fft(ifg, kRbw, Window::rectangular, 10));
    for (std::size_t k = 0; k < direct.power.size(); ++k)
        EXPECT_NEAR(avgs[1].power[k], direct.power[k], 1e-12 * (1 + direct.power[k]));
    EXPECT_THROW(cumulative_averages(ifg, kRbw, Window::rectangular, std::vector{10, 5}),
                 InvalidArgument);
    EXPECT_THROW(cumulative_averages(ifg, kRbw, Window::rectangular, std::vector{2000}),
                 InvalidArgument);
}

TEST(Extract, OffGridAndEdge) {
    const auto ifg = synthesize({}, kFs, 1e-3, {}, {}, 3);
    const Spectrum s = average_spectra(segment_and_fft(ifg, kRbw));
    EXPECT_THROW(extract_beatnotes(s, 4.05e6, 1), InvalidArgument);
    EXPECT_THROW(extract_beatnotes(s, 0.5e6, 1), InvalidArgument);   // too close to DC
    EXPECT_THROW(extract_beatnotes(s, 4e6, 13), InvalidArgument);    // beyond the band
}

TEST(Extract, EdcsFloorsBelowClassicalBySqueezing) {
    const Scenario sc =
        testing::make_scenario(testing::measured_squeezing(ReferencePlane::state), {});
    const auto edcs = arm_records(sc, Arm::edcs);
    const auto dcs = arm_records(sc, Arm::classical);
    const auto ie = synthesize(edcs, kFs, 10e-3, {}, {}, 21);
    const auto ic = synthesize(dcs, kFs, 10e-3, {}, {}, 21);
    const auto be = extract_beatnotes(average_spectra(segment_and_fft(ie, kRbw)), kDf, 5);
    const auto bc = extract_beatnotes(average_spectra(segment_and_fft(ic, kRbw)), kDf, 5);
    for (int n = 0; n < 5; ++n) {
        const double configured = units::ratio_to_db(dcs[n].noise_var / edcs[n].noise_var);
        const double measured = units::ratio_to_db(bc[n].noise_floor / be[n].noise_floor);
        EXPECT_NEAR(measured, configured, 0.3) << n + 1;
        EXPECT_NEAR(be[n].amplitude, std::abs(edcs[n].mean_amp), 5 * be[n].amplitude_sigma);
    }
}

TEST(Extract, AbsentSignalLooksLikeFloor) {
    constexpr int kTrials = 200;
    constexpr int kM = 100;
    int exceed = 0;
    double ratio = 0.0;
    for (int t = 0; t < kTrials; ++t) {
        const auto ifg = synthesize(std::vector{tone(2, 0.0)}, kFs, 1e-3, {}, {}, 500 + t);
        const Spectrum s = average_spectra(segment_and_fft(ifg, kRbw));
        const auto b = extract_beatnotes(s, kDf, 2)[1];
        const double p = s.power[static_cast<std::size_t>(2 * kDf / kRbw)];
        ratio += p / b.noise_floor;
        if (p > b.noise_floor * (1.0 + 3.0 / std::sqrt(kM))) ++exceed;
    }
    EXPECT_NEAR(ratio / kTrials, 1.0, 0.05);
    EXPECT_LE(exceed, 4);
}

TEST(Transmittance, IdenticalRunsGiveUnity) {
    const auto ifg = synthesize(measured_records(), kFs, 1e-3, {}, {}, 2);
    const auto b = extract_beatnotes(average_spectra(segment_and_fft(ifg, kRbw)), kDf, 5);
    for (const auto& e : estimate_transmittance(b, b)) EXPECT_EQ(e.eta, 1.0);
    auto zero = b;
    zero[2].amplitude = 0.0;
    EXPECT_THROW(estimate_transmittance(b, zero), InvalidArgument);
    EXPECT_THROW(estimate_transmittance(b, std::span(b).first(3)), InvalidArgument);
}

TEST(Transmittance, ThreeDbLine) {
    const double eta = units::db_to_ratio(-3.0);
    const auto ref = synthesize(std::vector{tone(1, 1.0)}, kFs, 10e-3, {}, {}, 4);
    const auto smp = synthesize(std::vector{tone(1, std::sqrt(eta))}, kFs, 10e-3, {}, {}, 5);
    const auto br = extract_beatnotes(average_spectra(segment_and_fft(ref, kRbw)), kDf, 1);
    const auto bs = extract_beatnotes(average_spectra(segment_and_fft(smp, kRbw)), kDf, 1);
    const auto est = estimate_transmittance(bs, br)[0];
    EXPECT_NEAR(eta, 0.501, 1e-3);
    EXPECT_NEAR(est.eta, eta, 3 * est.sigma);
    EXPECT_LT(est.sigma, 0.02);
}

TEST(Transmittance, HcnFixtureRoundTrip) {
    // 50 sweep positions of ten beat notes each; every beat carries one line.
    const auto lines = ingest_line_list(std::filesystem::path(EDCS_SOURCE_DIR) / "data/hcn_2nu3.csv");
    const GasCell cell{17.5, 25.0, 296.0, 1.0};
    const double frep = testing::kLineSpacingHz;
    const auto strongest = *std::max_element(
        lines.begin(), lines.end(), [](auto& a, auto& b) { return a.strength < b.strength; });
    const CombConfig base =
        CombConfig::uniform(CombRole::lo, strongest.center_hz - 5.5 * frep, frep, 0.0, 5, 1.0);
    int inside = 0, total = 0;
    double chi2 = 0.0;
    for (int sweep = 0; sweep < 50; ++sweep) {
        const auto freqs = sweep_centers(base, 50, frep / 50)[sweep].line_frequencies();
        std::vector<BeatnoteRecord> smp, ref;
        for (int i = 0; i < 10; ++i) {
            ref.push_back(tone(i + 1, 1.0));
            smp.push_back(tone(i + 1, std::sqrt(transmittance(freqs[i], cell, lines))));
        }
        const auto bs = extract_beatnotes(
            average_spectra(segment_and_fft(synthesize(smp, kFs, 2e-3, {}, {}, 2 * sweep), kRbw)),
            kDf, 10);
        const auto br = extract_beatnotes(
            average_spectra(segment_and_fft(synthesize(ref, kFs, 2e-3, {}, {}, 2 * sweep + 1), kRbw)),
            kDf, 10);
        const auto est = estimate_transmittance(bs, br);
        for (int i = 0; i < 10; ++i) {
            const double truth = transmittance(freqs[i], cell, lines);
            const double z = (est[i].eta - truth) / est[i].sigma;
            chi2 += z * z;
            if (std::abs(z) <= 3.0) ++inside;
            ++total;
        }
    }
    EXPECT_EQ(total, 500);
    EXPECT_GE(inside, 475);
    // The error bars are honest, not merely generous.
    EXPECT_NEAR(chi2 / total, 1.0, 0.2);
}

TEST(PhaseNoise, JitterVarianceAndEffects) {
    const PhaseNoiseModel pn;
    EXPECT_NEAR(pn.jitter_variance(5), 2.0 * 25 * std::pow(10.0, -7.5) / 10e-6, 1e-15);
    PhaseNoiseModel bad;
    bad.segment_duration_s = 0.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);

    SynthesisOptions opt = noiseless();
    opt.phase_noise = pn;
    const std::vector<BeatnoteRecord> recs{tone(5, 1.0)};
    const auto ifg = synthesize(recs, kFs, 10e-3, {}, opt, 8);
    // Jitter is constant over each 10 us segment: the power spectrum is blind to it ...
    const auto b = extract_beatnotes(average_spectra(segment_and_fft(ifg, kRbw)), kDf, 5);
    EXPECT_NEAR(b[4].amplitude, 1.0, 1e-9);
    // ... while coherent demodulation over the record loses exp(-var/2).
    const auto iq = resolve_aliasing_iq(ifg.samples, kFs, 5, kDf);
    const double expected = std::exp(-0.5 * pn.jitter_variance(5));
    EXPECT_NEAR(std::abs(iq.alpha_n + iq.alpha_neg), expected, 0.03);
    EXPECT_LT(expected, 0.95);
}

TEST(InterferogramFile, RoundTripAndLayout) {
    Interferogram ifg = synthesize(measured_records(), kFs, 1e-4, {}, {}, 77);
    const auto p = temp_path("rt.bin");
    write_interferogram(p, ifg);
    EXPECT_EQ(std::filesystem::file_size(p), kInterferogramHeaderBytes + 8 * ifg.samples.size());
    const auto bytes = slurp(p);
    EXPECT_EQ(std::string(bytes.data(), 7), "EDCSIFG");
    const Interferogram back = read_interferogram(p);
    EXPECT_EQ(back.samples, ifg.samples);
    EXPECT_EQ(back.seed, 77u);
    EXPECT_EQ(back.sample_rate_hz, kFs);
    EXPECT_EQ(back.duration_s, 1e-4);

    {
        std::ofstream app(p, std::ios::binary | std::ios::app);
        app.put('x');
    }
    EXPECT_THROW(read_interferogram(p), IoError);
    {
        std::ofstream trunc(p, std::ios::binary | std::ios::trunc);
        trunc.write(bytes.data(), 100);
    }
    EXPECT_THROW(read_interferogram(p), IoError);
    {
        std::ofstream magic(p, std::ios::binary | std::ios::trunc);
        auto copy = bytes;
        copy[0] = 'X';
        magic.write(copy.data(), static_cast<std::streamsize>(copy.size()));
    }
    EXPECT_THROW(read_interferogram(p), IoError);
    std::filesystem::remove(p);
    EXPECT_THROW(read_interferogram(p), IoError);
}

TEST(SpectrumCsv, Header) {
    const auto ifg = synthesize({}, kFs, 1e-4, {}, {}, 1);
    std::stringstream ss;
    write_spectrum_csv(ss, average_spectra(segment_and_fft(ifg, kRbw)));
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "freq_hz,power");
    int rows = 0;
    for (std::string line; std::getline(ss, line);) ++rows;
    EXPECT_EQ(rows, 501);
}

}  // namespace
}  // namespace edcs
