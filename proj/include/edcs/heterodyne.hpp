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

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "edcs/comb.hpp"
#include "edcs/detection.hpp"
#include "edcs/gaussian.hpp"

namespace edcs {

/// RF observable of pair n: a tone at n * delta_f_rep plus noise.
///
/// mean_amp is the complex RF phasor: the detector output carries
/// Re(mean_amp * exp(i 2 pi rf_freq t)).  Line n contributes its projected
/// mean directly, line -n contributes the complex conjugate (it beats at the
/// mirrored frequency), which is the source of the +-n aliasing.
struct BeatnoteRecord {
    int index = 0;
    double rf_freq_hz = 0.0;
    std::complex<double> mean_amp{};
    /// Measured quadrature variance, SQL = 1.
    double noise_var = 1.0;
    double eta_n = 1.0;
    double eta_neg = 1.0;
};

/// LO-defined selector for pair n: weights |LO_n|, |LO_-n| and phases arg LO.
QuadratureSelector lo_selector(const CombConfig& lo, int pair_index);

/// sample loss -> detection loss (QE * vis^2) -> LO-weighted joint quadrature
/// -> + electrical noise.
BeatnoteRecord beatnote_model(const PairState& pair, const QuadratureSelector& sel, double eta_n,
                              double eta_neg, const DetectionImperfections& imp,
                              double delta_f_rep_hz = 0.0);

BeatnoteRecord beatnote_model(const PairState& pair, const CombConfig& lo, double eta_n,
                              double eta_neg, const DetectionImperfections& imp,
                              double delta_f_rep_hz = 0.0);

struct AliasResolution {
    /// RF-phasor contributions of line n and line -n (the latter is the
    /// conjugate of the line's projected displacement).
    std::complex<double> alpha_n{};
    std::complex<double> alpha_neg{};
    /// False when the window is not an integer number of beat periods.
    bool integer_period = true;
    /// Worst-case relative I/Q cross-talk for the window used (0 when integer).
    double leakage_bound = 0.0;
};

/// Two shots with +alpha_n and -alpha_n on the positive-index lines:
/// alpha_neg = (plus + minus)/2, alpha_n = (plus - minus)/2.
AliasResolution resolve_aliasing_two_shot(const BeatnoteRecord& shot_plus,
                                          const BeatnoteRecord& shot_minus);

/// Lock-in demodulation at n * delta_f: I = (2/N) sum x cos, Q = (2/N) sum x sin.
/// Line n is read from I, line -n from Q (alpha_neg = -i Q).
AliasResolution resolve_aliasing_iq(std::span<const double> time_series, double sample_rate_hz,
                                     int n, double delta_f_hz);

/// Weights maximizing |signal|^2 / noise_var for the pair after losses; the
/// phases stay on the squeezed quadrature.  Signal template: the pair's
/// projected displacement scaled by sqrt(eta), or sqrt(eta) itself when the
/// pair carries no displacement.
QuadratureSelector adaptive_lo_weights(const PairState& pair, double eta_n, double eta_neg,
                                       const DetectionImperfections& imp);

/// |mean_amp| / sqrt(noise_var / n_averages).
double snr_amplitude(const BeatnoteRecord& rec, std::size_t n_averages);

/// CSV: index,rf_freq_hz,mean_re,mean_im,noise_var,eta_n,eta_neg
void write_beatnote_csv(std::ostream& os, std::span<const BeatnoteRecord> records);
std::vector<BeatnoteRecord> read_beatnote_csv(std::istream& is);

}  // namespace edcs
