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


// Interferogram synthesis and processing.
//
// Normalization: a stationary record whose per-sample variance is v has an
// expected periodogram bin power of v for every window, so the SQL floor sits
// at 1.  A real tone a*cos(2 pi f t + phi) on a bin centre is read back as
// amplitude a.

#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "edcs/detection.hpp"
#include "edcs/heterodyne.hpp"

namespace edcs {

/// Gaussian phase jitter, drawn once per segment, on every beat note.  The
/// jitter variance of beat n is 2 n^2 10^{L/10} / T_seg: a white phase-noise
/// plateau L (dBc/Hz, referred to beat n = 1) integrated over the segment
/// bandwidth, scaled by n^2.
struct PhaseNoiseModel {
    double level_dbc_hz = -75.0;
    double segment_duration_s = 10e-6;

    double jitter_variance(int n) const;
    void validate() const;

    bool operator==(const PhaseNoiseModel&) const = default;
};

struct SynthesisOptions {
    /// Each beat note's noise_var applies within +-kernel_halfwidth_hz of its
    /// frequency; the floor elsewhere is 1 plus electrical noise.
    double kernel_halfwidth_hz = 2e6;
    bool include_noise = true;
    std::optional<PhaseNoiseModel> phase_noise;
};

struct Interferogram {
    double sample_rate_hz = 0.0;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> samples;
    /// Hash of the producing configuration (0 when synthesized ad hoc).
    std::uint64_t config_hash = 0;

    std::size_t expected_length() const;
    void validate() const;
};

/// Record length for (fs, duration); throws unless it is an integer.
std::size_t sample_count(double sample_rate_hz, double duration_s);

Interferogram synthesize(std::span<const BeatnoteRecord> records, double sample_rate_hz,
                         double duration_s, const DetectionImperfections& imp,
                         const SynthesisOptions& options, std::uint64_t seed);

enum class Window { rectangular, hann };

struct Spectrum {
    double rbw_hz = 0.0;
    double sample_rate_hz = 0.0;
    Window window = Window::rectangular;
    std::size_t segment_length = 0;
    /// Sum of window samples and of their squares.
    double window_sum = 0.0;
    double window_sum_sq = 0.0;
    /// One-sided bins k = 0 .. segment_length/2, frequency k * rbw_hz.
    std::vector<double> power;
    int n_averaged = 1;

    double frequency(std::size_t bin) const { return static_cast<double>(bin) * rbw_hz; }
    /// Mean-square of the windowed segment, normalized so that white noise
    /// of variance v returns v for any window (exact for rectangular).
    double total_power() const;
};

/// Non-overlapping segments of length fs/rbw, one periodogram each.  At most
/// max_segments are transformed (0 = all).
std::vector<Spectrum> segment_and_fft(const Interferogram& ifg, double rbw_hz,
                                      Window window = Window::rectangular,
                                      std::size_t max_segments = 0);

Spectrum average_spectra(std::span<const Spectrum> spectra);

/// Running averages of the first M segments for each M in m_list (ascending),
/// without holding every periodogram in memory.
std::vector<Spectrum> cumulative_averages(const Interferogram& ifg, double rbw_hz, Window window,
                                          std::span<const int> m_list);

struct ExtractedBeat {
    int n = 0;
    double freq_hz = 0.0;
    double amplitude = 0.0;
    /// Median of neighbouring bins, corrected for the median's bias.
    double noise_floor = 0.0;
    /// Standard deviation of `amplitude` implied by the local floor.
    double amplitude_sigma = 0.0;
};

/// Bins closer than kGuardBins to the beat are skipped; the next
/// kFloorBins on either side estimate the local floor.
inline constexpr int kGuardBins = 2;
inline constexpr int kFloorBins = 8;

std::vector<ExtractedBeat> extract_beatnotes(const Spectrum& spec, double delta_f_hz, int n_max);

struct TransmittanceEstimate {
    int n = 0;
    double freq_hz = 0.0;
    double eta = 0.0;
    double sigma = 0.0;
};

std::vector<TransmittanceEstimate> estimate_transmittance(std::span<const ExtractedBeat> sample,
                                                          std::span<const ExtractedBeat> reference);

/// Binary layout (little-endian): "EDCSIFG\0", u32 version = 1, u32 reserved,
/// f64 sample rate, f64 duration, u64 seed, u64 sample count, then f64 samples.
void write_interferogram(const std::filesystem::path& path, const Interferogram& ifg);
Interferogram read_interferogram(const std::filesystem::path& path);
inline constexpr std::size_t kInterferogramHeaderBytes = 48;

void write_spectrum_csv(std::ostream& os, const Spectrum& spec);

}  // namespace edcs
