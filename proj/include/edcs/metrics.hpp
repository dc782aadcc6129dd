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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edcs/comb.hpp"
#include "edcs/detection.hpp"
#include "edcs/dsp.hpp"
#include "edcs/heterodyne.hpp"
#include "edcs/sample_channel.hpp"

namespace edcs {

// ------------------------------------------------------------ SNR measures

struct LineAdvantage {
    int n = 0;
    /// 10 log10(var_dcs / var_edcs).
    double power_db = 0.0;
    /// 20 log10(snr_edcs / snr_dcs) with amplitude SNRs.
    double amplitude_db = 0.0;
};

struct SnrAdvantage {
    std::vector<LineAdvantage> lines;
    /// 10 log10(sum var_dcs / sum var_edcs).
    double aggregate_power_db = 0.0;
    /// 20 log10 of the ratio of RMS amplitude SNRs.
    double aggregate_amplitude_db = 0.0;
};

SnrAdvantage snr_advantage(std::span<const BeatnoteRecord> edcs, std::span<const BeatnoteRecord> dcs,
                           std::size_t n_averages);

/// Root-mean-square of the per-line amplitude SNRs.
double aggregate_snr(std::span<const BeatnoteRecord> records, std::size_t n_averages);
double aggregate_snr(std::span<const double> per_line_snr);

/// snr * (2 n_pairs) / sqrt(tau).
double quality_factor(double snr_amp, int n_pairs, double tau_s);

// ---------------------------------------------------------------- scenarios

/// A signal comb (displaced entangled pairs or displaced vacuum) read out by
/// an LO comb.  The LO is phase-aligned to the squeezed quadratures and the
/// displacement comb is matched to the LO, so the beat-note means lie on the
/// measured quadrature.
struct Scenario {
    EntangledCombSpec entangled;
    CombConfig lo;
    /// Per-line magnitude of the displacement comb before the tap.
    double signal_amplitude = 10.0;
    /// Signal-comb offset; the beat spacing is |signal - LO| offset.
    double signal_offset_spacing_hz = 4e6;
    DetectionImperfections detection;

    double delta_f_rep_hz() const;
    void validate() const;
};

enum class Arm { edcs, classical };
enum class LoMode { balanced, adaptive };

struct PairTransmission {
    double eta_n = 1.0;
    double eta_neg = 1.0;
};

struct PreparedScenario {
    std::vector<PairState> edcs;
    std::vector<PairState> classical;
    CombConfig lo;
    CombConfig signal;
};

/// `minus` flips the sign of the displacement on every +n line: the second
/// shot of the two-shot alias-resolution protocol.
enum class Shot { plus, minus };

PreparedScenario prepare(const Scenario& scenario, Shot shot = Shot::plus);

/// Beat-note records of one arm.  `transmission` is empty (lossless) or holds
/// one entry per pair.  The classical arm always uses the balanced LO.
std::vector<BeatnoteRecord> arm_records(const Scenario& scenario, const PreparedScenario& prepared,
                                        Arm arm, std::span<const PairTransmission> transmission = {},
                                        LoMode mode = LoMode::balanced);
std::vector<BeatnoteRecord> arm_records(const Scenario& scenario, Arm arm,
                                        std::span<const PairTransmission> transmission = {},
                                        LoMode mode = LoMode::balanced);

/// Per-pair cell transmission at the signal comb's line frequencies.
std::vector<PairTransmission> cell_transmission(const CombConfig& signal, const GasCell& cell,
                                                std::span<const SpectralLine> lines);

/// The same (eta_n, eta_neg) on every pair.
std::vector<PairTransmission> uniform_transmission(int n_pairs, double eta_n, double eta_neg);

// ----------------------------------------------------------------- UAR sweep

/// Fractions of pairs with none, exactly one, or both lines attenuated when
/// 1/(uar + 1) of all lines are.  Attenuated lines are spread over as many
/// pairs as possible: an absorption feature on one side of the centre takes
/// out one partner of each pair it touches.
struct AttenuationMix {
    double none = 1.0;
    double one = 0.0;
    double both = 0.0;
};
AttenuationMix attenuation_mix(double uar);

struct UarPoint {
    double uar = 0.0;
    double depth_db = 0.0;
    double snr_edcs = 0.0;
    double snr_dcs = 0.0;
    double advantage_db = 0.0;
    double snr_edcs_adaptive = 0.0;
    double advantage_adaptive_db = 0.0;
};

struct UarSweepResult {
    std::vector<UarPoint> points;  ///< uar-major, in input order
    double lossless_advantage_db = 0.0;
};

/// Beat-note-model sweep of the aggregate SNR, weighted by attenuation_mix.
UarSweepResult uar_sweep(const Scenario& scenario, std::span<const double> uar_values,
                         std::span<const double> depths_db, unsigned threads = 1);

// ------------------------------------------------------ pipeline experiments

struct PipelineOptions {
    double sample_rate_hz = 100e6;
    double duration_s = 10e-3;
    double rbw_hz = 100e3;
    Window window = Window::rectangular;
    SynthesisOptions synthesis;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct RobustnessRow {
    double depth_db = 0.0;
    double snr_edcs = 0.0;
    double snr_dcs = 0.0;
    double advantage_db = 0.0;
    /// The same quantities from the beat-note model alone.
    double analytic_snr_edcs = 0.0;
    double analytic_snr_dcs = 0.0;
    double analytic_advantage_db = 0.0;
};

struct RobustnessOptions {
    double uar = 10.0;
    int n_seeds = 8;
    int n_averages = 100;
};

/// Full synthesize -> extract pipeline at each depth.  The same noise
/// realizations are reused across arms and depths.
std::vector<RobustnessRow> absorption_robustness(const Scenario& scenario,
                                                 std::span<const double> depths_db,
                                                 const RobustnessOptions& robustness,
                                                 const PipelineOptions& pipeline);

struct PrecisionPoint {
    int m = 0;
    double edcs = 0.0;
    double dcs = 0.0;
};

struct SpeedupResult {
    double target_precision = 0.0;
    /// Averages needed to reach the target; fractional values come from
    /// log-log interpolation between measured points.
    double m_dcs = 0.0;
    double m_edcs = 0.0;
    double speedup = 0.0;
    double analytic_speedup = 0.0;
    std::vector<PrecisionPoint> curve;
};

struct SpeedupOptions {
    std::vector<int> m_list{10, 30, 100, 300, 1000};
    int n_seeds = 20;
    /// The classical precision at this M sets the target (0 = largest M).
    int target_m = 0;
};

/// Precision = RMS over lines of the across-seed standard deviation of the
/// transmittance estimate.  `sample` is the per-pair transmission of the
/// cell (empty = none).  Throws NumericError when the EDCS curve never
/// reaches the target.
SpeedupResult precision_vs_averages(const Scenario& scenario,
                                    std::span<const PairTransmission> sample,
                                    const SpeedupOptions& speedup, const PipelineOptions& pipeline);

}  // namespace edcs
