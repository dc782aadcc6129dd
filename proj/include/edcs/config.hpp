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


// Run configuration: one JSON document per experiment, versioned by
// `schema_version`.  Unknown keys are rejected; every error names the path of
// the offending key.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edcs/comb.hpp"
#include "edcs/detection.hpp"
#include "edcs/dsp.hpp"
#include "edcs/metrics.hpp"
#include "edcs/sample_channel.hpp"

namespace edcs {

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind { edcs, classical_dcs };

struct CombSection {
    int n_pairs = 5;
    double center_freq_hz = 194.4e12;
    double line_spacing_hz = 350e6;
    double lo_offset_spacing_hz = 0.0;
    double signal_offset_spacing_hz = 4e6;
    double lo_amplitude = 1.0;
    double signal_amplitude = 10.0;
    EntangledCombSpec squeezing;

    bool operator==(const CombSection&) const = default;
};

struct CellSection {
    /// Relative paths resolve against the directory of the config file.
    std::string line_list;
    GasCell cell;
    /// Rescale line strengths so the deepest line reaches this depth.
    std::optional<double> peak_depth_db;

    bool operator==(const CellSection&) const = default;
};

struct DspSection {
    double sample_rate_hz = 100e6;
    double duration_s = 10e-3;
    double rbw_hz = 100e3;
    Window window = Window::rectangular;
    double kernel_halfwidth_hz = 2e6;
    std::optional<PhaseNoiseModel> phase_noise;
    /// Segments averaged by `simulate` (0 = all).
    int n_averages = 0;

    bool operator==(const DspSection&) const = default;
};

struct SpeedupSection {
    std::vector<int> m_list{10, 30, 100, 300, 1000};
    int n_seeds = 20;
    int target_m = 0;

    bool operator==(const SpeedupSection&) const = default;
};

struct RobustnessSection {
    double uar = 10.0;
    std::vector<double> depths_db{0.0, 0.1, 0.25, 3.0};
    int n_seeds = 4;
    int n_averages = 100;

    bool operator==(const RobustnessSection&) const = default;
};

struct UarSweepSection {
    std::vector<double> uar_values{1, 2, 3, 5, 10, 20, 50, 100};
    std::vector<double> depths_db{0, 0.1, 0.25, 0.5, 1, 2, 3};

    bool operator==(const UarSweepSection&) const = default;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    ScenarioKind scenario = ScenarioKind::edcs;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    unsigned threads = 1;
    CombSection comb;
    DetectionImperfections detection;
    std::optional<CellSection> cell;
    DspSection dsp;
    std::optional<SpeedupSection> speedup;
    std::optional<RobustnessSection> robustness;
    std::optional<UarSweepSection> uar_sweep;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates.  Throws ConfigError.
RunConfig parse_run_config(const std::string& text);
/// Reads a file; unreadable files raise IoError, bad content ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& cfg);
/// FNV-1a of the canonical serialization, ignoring output_dir and threads.
std::uint64_t config_hash(const RunConfig& cfg);

/// Semantic checks beyond the schema (squeezing feasibility, grids).
void validate(const RunConfig& cfg);

Scenario to_scenario(const RunConfig& cfg);
PipelineOptions to_pipeline_options(const RunConfig& cfg);

}  // namespace edcs
