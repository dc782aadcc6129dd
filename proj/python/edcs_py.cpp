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


#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "edcs/comb.hpp"
#include "edcs/config.hpp"
#include "edcs/dsp.hpp"
#include "edcs/error.hpp"
#include "edcs/gaussian.hpp"
#include "edcs/heterodyne.hpp"
#include "edcs/metrics.hpp"
#include "edcs/sample_channel.hpp"

namespace py = pybind11;
using namespace edcs;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

}  // namespace

PYBIND11_MODULE(_edcs, m) {
    m.doc() = "Entangled dual-comb spectroscopy simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    // Gaussian core.
    py::class_<MixedTmsv>(m, "MixedTmsv")
        .def_readonly("r", &MixedTmsv::r)
        .def_readonly("eta", &MixedTmsv::eta);
    py::class_<PairState>(m, "PairState")
        .def_property_readonly("mean", &PairState::mean)
        .def_property_readonly("cov", &PairState::cov)
        .def_property_readonly("pair_index", &PairState::pair_index)
        .def("symplectic_eigenvalues", &PairState::symplectic_eigenvalues);
    py::class_<QuadratureSelector>(m, "QuadratureSelector")
        .def(py::init([](std::array<double, 2> w, std::array<double, 2> p) { return QuadratureSelector{w, p}; }),
             py::arg("weights") = std::array<double, 2>{1.0, 1.0}, py::arg("phases") = std::array<double, 2>{0.0, 0.0})
        .def_readwrite("weights", &QuadratureSelector::weights)
        .def_readwrite("phases", &QuadratureSelector::phases);
    m.def("tmsv_state", &tmsv_state, py::arg("r"), py::arg("pair_index") = 1);
    m.def("mixed_tmsv_from_measured", &mixed_tmsv_from_measured, py::arg("squeeze_db"), py::arg("antisqueeze_db"));
    m.def("mixed_tmsv_state", &mixed_tmsv_state, py::arg("params"), py::arg("pair_index") = 1);
    m.def("apply_loss", &apply_loss, py::arg("state"), py::arg("eta_n"), py::arg("eta_neg"));
    m.def("displace", &displace, py::arg("state"), py::arg("alpha_n"), py::arg("alpha_neg"));
    m.def(
        "quadrature_variance",
        [](const PairState& s, const QuadratureSelector& sel) { return quadrature_variance(s, sel).variance; },
        py::arg("state"), py::arg("selector"));
    m.def(
        "sample_quadrature",
        [](const PairState& s, const QuadratureSelector& sel, std::size_t n, std::uint64_t seed) {
            return to_array(sample_quadrature(s, sel, n, seed));
        },
        py::arg("state"), py::arg("selector"), py::arg("n_samples"), py::arg("seed"));

    // Beat notes.
    py::class_<BeatnoteRecord>(m, "BeatnoteRecord")
        .def(py::init<>())
        .def_readwrite("index", &BeatnoteRecord::index)
        .def_readwrite("rf_freq_hz", &BeatnoteRecord::rf_freq_hz)
        .def_readwrite("mean_amp", &BeatnoteRecord::mean_amp)
        .def_readwrite("noise_var", &BeatnoteRecord::noise_var);
    py::class_<AliasResolution>(m, "AliasResolution")
        .def_readonly("alpha_n", &AliasResolution::alpha_n)
        .def_readonly("alpha_neg", &AliasResolution::alpha_neg)
        .def_readonly("integer_period", &AliasResolution::integer_period);
    m.def("resolve_aliasing_two_shot", &resolve_aliasing_two_shot, py::arg("shot_plus"), py::arg("shot_minus"));
    m.def(
        "resolve_aliasing_iq",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs, int n, double df) {
            return resolve_aliasing_iq(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), fs, n, df);
        },
        py::arg("time_series"), py::arg("sample_rate_hz"), py::arg("n"), py::arg("delta_f_hz"));

    // Configs and scenarios.
    py::class_<RunConfig>(m, "RunConfig")
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def("serialize", &serialize_run_config)
        .def("hash", &config_hash);
    m.def("load_run_config", &load_run_config, py::arg("path"));
    m.def("parse_run_config", &parse_run_config, py::arg("text"));

    py::class_<Scenario>(m, "Scenario").def_property_readonly("delta_f_rep_hz", &Scenario::delta_f_rep_hz);
    m.def("to_scenario", &to_scenario, py::arg("config"));
    m.def(
        "beatnote_records",
        [](const Scenario& sc, bool classical) {
            return arm_records(sc, classical ? Arm::classical : Arm::edcs);
        },
        py::arg("scenario"), py::arg("classical") = false);
    m.def(
        "snr_advantage_db",
        [](const Scenario& sc) {
            const auto a = snr_advantage(arm_records(sc, Arm::edcs), arm_records(sc, Arm::classical), 1);
            std::vector<double> per_line;
            for (const auto& l : a.lines) per_line.push_back(l.power_db);
            return py::dict(py::arg("per_line_power_db") = per_line,
                            py::arg("aggregate_power_db") = a.aggregate_power_db,
                            py::arg("aggregate_amplitude_db") = a.aggregate_amplitude_db);
        },
        py::arg("scenario"));

    // DSP.
    m.def(
        "synthesize",
        [](const std::vector<BeatnoteRecord>& recs, double fs, double duration, std::uint64_t seed) {
            return to_array(synthesize(recs, fs, duration, {}, {}, seed).samples);
        },
        py::arg("records"), py::arg("sample_rate_hz"), py::arg("duration_s"), py::arg("seed"));
    m.def(
        "extract_beatnotes",
        [](const std::vector<BeatnoteRecord>& recs, double fs, double duration, double rbw, double df,
           std::uint64_t seed) {
            const auto ifg = synthesize(recs, fs, duration, {}, {}, seed);
            const auto beats = extract_beatnotes(average_spectra(segment_and_fft(ifg, rbw)), df,
                                                 static_cast<int>(recs.size()));
            py::list out;
            for (const auto& b : beats)
                out.append(py::dict(py::arg("n") = b.n, py::arg("freq_hz") = b.freq_hz,
                                    py::arg("amplitude") = b.amplitude, py::arg("noise_floor") = b.noise_floor,
                                    py::arg("amplitude_sigma") = b.amplitude_sigma));
            return out;
        },
        py::arg("records"), py::arg("sample_rate_hz"), py::arg("duration_s"), py::arg("rbw_hz"),
        py::arg("delta_f_hz"), py::arg("seed"));

    // Sample channel.
    py::class_<SpectralLine>(m, "SpectralLine")
        .def_readonly("center_hz", &SpectralLine::center_hz)
        .def_readonly("strength", &SpectralLine::strength);
    py::class_<GasCell>(m, "GasCell")
        .def(py::init([](double l, double p, double t, double x) { return GasCell{l, p, t, x}; }),
             py::arg("path_length_cm"), py::arg("pressure_torr"), py::arg("temperature_k") = 296.0,
             py::arg("mole_fraction") = 1.0)
        .def_readwrite("path_length_cm", &GasCell::path_length_cm)
        .def_readwrite("pressure_torr", &GasCell::pressure_torr)
        .def_readwrite("temperature_k", &GasCell::temperature_k)
        .def_readwrite("mole_fraction", &GasCell::mole_fraction);
    m.def("ingest_line_list", &ingest_line_list, py::arg("path"));
    m.def("voigt_profile", &voigt_profile, py::arg("detuning_hz"), py::arg("lorentz_hwhm_hz"),
          py::arg("gauss_sigma_hz"));
    m.def(
        "transmittance",
        [](double f, const GasCell& cell, const std::vector<SpectralLine>& lines) {
            return transmittance(f, cell, lines);
        },
        py::arg("freq_hz"), py::arg("cell"), py::arg("lines"));
    m.def(
        "peak_depth_db",
        [](const GasCell& cell, const std::vector<SpectralLine>& lines) { return peak_depth_db(cell, lines); },
        py::arg("cell"), py::arg("lines"));
}
