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
#include <utility>
#include <vector>

#include "edcs/detection.hpp"
#include "edcs/gaussian.hpp"

namespace edcs {

enum class CombRole { entangled, classical, lo };

/// Spectral description of one comb.  Lines are indexed n = +-1 ... +-N; the
/// n = 0 carrier is not part of the beat-note set.  Line n sits at
/// center + n * (line_spacing + offset_spacing).
struct CombConfig {
    CombRole role = CombRole::classical;
    double center_freq_hz = 0.0;
    double line_spacing_hz = 0.0;
    double offset_spacing_hz = 0.0;
    int n_pairs = 0;
    /// Complex field amplitude per line, stored -N..-1 then +1..+N.
    std::vector<std::complex<double>> amplitudes;
    /// Uniform amplitude scale applied on top of `amplitudes` (power reduction knob).
    double amplitude_scale = 1.0;

    static CombConfig uniform(CombRole role, double center_freq_hz, double line_spacing_hz,
                              double offset_spacing_hz, int n_pairs,
                              std::complex<double> amplitude);

    void validate() const;
    /// Storage slot of line n (n in +-1..+-N).
    std::size_t slot(int line) const;
    /// Scaled amplitude of line n.
    std::complex<double> amplitude(int line) const;
    double phase(int line) const { return std::arg(amplitude(line)); }
    double line_frequency(int line) const;
    /// All 2N line frequencies, ascending.
    std::vector<double> line_frequencies() const;

    bool operator==(const CombConfig&) const = default;
};

enum class SqueezingProfile { measured, flat_top };

/// Where the squeezing figures in an EntangledCombSpec are referenced.
///   state    - they describe the pair state itself (before the tap).
///   detector - they are what the detection chain reports relative to its own
///              vacuum level; the builder removes tap loss, detection loss and
///              electrical noise so the beat-note model reproduces them.
enum class ReferencePlane { state, detector };

struct EntangledCombSpec {
    SqueezingProfile profile = SqueezingProfile::measured;
    ReferencePlane reference = ReferencePlane::state;
    /// Per pair for `measured`; a single value for `flat_top`.
    std::vector<double> squeeze_db;
    std::vector<double> antisqueeze_db;
    /// Power transmissivity of the displacement beam splitter for the entangled comb.
    double tap_ratio = 0.99;
    /// Central line squeezing.  The central line only carries phase locks.
    double central_squeeze_db = 0.0;
    double central_antisqueeze_db = 0.0;

    /// (squeeze_db, antisqueeze_db) for pair n (1-based).
    std::pair<double, double> pair_db(int pair) const;
    void validate(int n_pairs) const;

    bool operator==(const EntangledCombSpec&) const = default;
};

struct EntangledComb {
    std::vector<PairState> pairs;
    /// Phase-reference only; never produces a beat note.
    SingleModeState central = SingleModeState::vacuum();
};

/// Mixed-TMSV parameters for pair n of `spec`, including any de-embedding.
MixedTmsv pair_source_parameters(const EntangledCombSpec& spec, int pair,
                                 const DetectionImperfections& detection);

/// TMSV (from dB values) -> tap loss -> displacement by sqrt(1 - tap) * classical line.
/// `detection` is consulted only when spec.reference == detector.
EntangledComb build_entangled_comb(const EntangledCombSpec& spec, const CombConfig& classical,
                                   const DetectionImperfections& detection = {});

/// Classical-DCS baseline: the same displacements on vacuum.
std::vector<PairState> build_classical_comb(const EntangledCombSpec& spec,
                                            const CombConfig& classical);

/// Optimal (theta_n, theta_-n) for equal weights: minimizes the measured
/// joint-quadrature variance.
std::pair<double, double> squeezed_quadrature_phases(const PairState& pair);

/// LO whose per-line phases select each pair's squeezed joint quadrature and
/// whose two lines per pair carry equal magnitude.
CombConfig align_lo_phases(const std::vector<PairState>& pairs, const CombConfig& lo);

/// Classical comb with the given magnitude whose line phases match the LO,
/// so every displacement adds coherently to its beat note.  With
/// `quadrature_split` the -n lines are offset by -pi/2, which places the
/// +n and -n contributions on the cosine and sine RF quadratures.
CombConfig matched_classical_comb(const CombConfig& lo, double magnitude, double offset_spacing_hz,
                                  bool quadrature_split = false);

/// Center-frequency sweep: config k is `base` shifted by k * step_hz.
std::vector<CombConfig> sweep_centers(const CombConfig& base, int n_sweeps, double step_hz);

/// Sorted union of all line frequencies across configs.
std::vector<double> union_line_frequencies(const std::vector<CombConfig>& configs);

/// Frequency intervals not reached when every line is swept continuously by
/// +-half_span_hz, restricted to [first line, last line].
std::vector<std::pair<double, double>> coverage_gaps(const std::vector<double>& lines,
                                                     double half_span_hz);

}  // namespace edcs
