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


// edcs: command-line front end.
//
// Exit codes: 0 success, 2 configuration or argument error, 3 numerical
// failure (including fit non-convergence), 4 file I/O error.

#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "edcs/config.hpp"
#include "edcs/dsp.hpp"
#include "edcs/error.hpp"
#include "edcs/gaussian.hpp"
#include "edcs/heterodyne.hpp"
#include "edcs/metrics.hpp"
#include "edcs/sample_channel.hpp"
#include "edcs/units.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace edcs;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<unsigned> threads;
};

struct Loaded {
    RunConfig cfg;
    fs::path config_dir;
    fs::path out_dir;
};

Loaded load(const std::string& path, const Overrides& o) {
    Loaded l{load_run_config(path), fs::absolute(path).parent_path(), {}};
    if (o.seed) l.cfg.seed = *o.seed;
    if (o.output_dir) l.cfg.output_dir = *o.output_dir;
    if (o.threads) l.cfg.threads = *o.threads;
    validate(l.cfg);
    l.out_dir = l.cfg.output_dir;
    std::error_code ec;
    fs::create_directories(l.out_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", l.out_dir.string(), ec.message()));
    return l;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw IoError("cannot write " + p.string());
    return os;
}

std::string hash_hex(const RunConfig& cfg) { return fmt::format("{:016x}", config_hash(cfg)); }

std::vector<SpectralLine> cell_lines(const Loaded& l) {
    fs::path p = l.cfg.cell->line_list;
    if (p.is_relative()) p = l.config_dir / p;
    auto lines = ingest_line_list(p);
    if (l.cfg.cell->peak_depth_db)
        lines = calibrate_peak_depth(lines, l.cfg.cell->cell, *l.cfg.cell->peak_depth_db).lines;
    return lines;
}

Arm arm_of(const RunConfig& cfg) {
    return cfg.scenario == ScenarioKind::edcs ? Arm::edcs : Arm::classical;
}

// ------------------------------------------------------------ squeeze-report

int cmd_squeeze_report(const Loaded& l) {
    const Scenario scenario = to_scenario(l.cfg);
    const PreparedScenario prepared = prepare(scenario);
    const auto& pairs = arm_of(l.cfg) == Arm::edcs ? prepared.edcs : prepared.classical;
    const double e = scenario.detection.electrical_variance();
    const double eta_det = scenario.detection.efficiency();
    auto os = open_out(l.out_dir / "squeeze_report.csv");
    const std::string header = "pair,squeeze_db,antisqueeze_db,source_r,source_eta\n";
    os << header;
    std::cout << header;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const int n = pairs[i].pair_index();
        // Referenced to the classical floor 1 + e, as a spectrum analyser shows it.
        const PairState detected = apply_loss(pairs[i], eta_det, eta_det);
        const auto [tn, tm] = squeezed_quadrature_phases(detected);
        const double half_pi = std::numbers::pi / 2.0;
        const double v_sq = quadrature_variance(detected, QuadratureSelector::balanced(tn, tm)).variance;
        const double v_anti =
            quadrature_variance(detected, QuadratureSelector::balanced(tn + half_pi, tm + half_pi)).variance;
        MixedTmsv src{0.0, 1.0};
        if (arm_of(l.cfg) == Arm::edcs) src = pair_source_parameters(scenario.entangled, n, scenario.detection);
        const std::string row = fmt::format(
            "{},{:.6f},{:.6f},{:.9g},{:.9g}\n", n, -units::ratio_to_db((v_sq + e) / (1.0 + e)) + 0.0,
            units::ratio_to_db((v_anti + e) / (1.0 + e)) + 0.0, src.r, src.eta);
        os << row;
        std::cout << row;
    }
    return kOk;
}

// ------------------------------------------------------------------ simulate

struct ShotSet {
    Interferogram ifg;
    std::vector<BeatnoteRecord> records;
};

int cmd_simulate(const Loaded& l) {
    const auto& cfg = l.cfg;
    const Scenario scenario = to_scenario(cfg);
    const PipelineOptions opt = to_pipeline_options(cfg);
    const Arm arm = arm_of(cfg);
    const std::uint64_t hash = config_hash(cfg);
    const int n_pairs = cfg.comb.n_pairs;
    const double df = scenario.delta_f_rep_hz();

    const PreparedScenario plus = prepare(scenario, Shot::plus);
    std::vector<PairTransmission> transmission;
    std::vector<SpectralLine> lines;
    if (cfg.cell) {
        lines = cell_lines(l);
        transmission = cell_transmission(plus.signal, cfg.cell->cell, lines);
    }

    auto run = [&](const PreparedScenario& prep, std::span<const PairTransmission> t,
                   std::uint64_t stream) {
        ShotSet s;
        s.records = arm_records(scenario, prep, arm, t);
        s.ifg = synthesize(s.records, opt.sample_rate_hz, opt.duration_s, scenario.detection,
                           opt.synthesis, cfg.seed + stream);
        s.ifg.config_hash = hash;
        return s;
    };

    // Primary measurement: the sample (or the bare comb when no cell is set).
    const ShotSet main = run(plus, transmission, 0);
    write_interferogram(l.out_dir / "interferogram.bin", main.ifg);
    {
        auto os = open_out(l.out_dir / "beatnotes.csv");
        write_beatnote_csv(os, main.records);
    }
    const std::size_t n_segments =
        static_cast<std::size_t>(std::llround(cfg.dsp.duration_s * cfg.dsp.rbw_hz));
    const int m = cfg.dsp.n_averages == 0 ? static_cast<int>(n_segments) : cfg.dsp.n_averages;
    const std::vector<int> m_list{m};
    const Spectrum spec = cumulative_averages(main.ifg, opt.rbw_hz, opt.window, m_list).front();
    {
        auto os = open_out(l.out_dir / "spectrum.csv");
        write_spectrum_csv(os, spec);
    }
    const auto beats = extract_beatnotes(spec, df, n_pairs);
    {
        auto os = open_out(l.out_dir / "extracted.csv");
        os << "n,freq_hz,amplitude,noise_floor,amplitude_sigma,noise_floor_db\n";
        for (const auto& b : beats)
            os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.6f}\n", b.n, b.freq_hz, b.amplitude,
                              b.noise_floor, b.amplitude_sigma, units::ratio_to_db(b.noise_floor));
    }

    ordered_json summary;
    summary["config_hash"] = fmt::format("{:016x}", hash);
    summary["scenario"] = arm == Arm::edcs ? "edcs" : "classical-dcs";
    summary["seed"] = cfg.seed;
    summary["n_samples"] = main.ifg.samples.size();
    summary["interferogram_bytes"] = kInterferogramHeaderBytes + 8 * main.ifg.samples.size();
    summary["n_averaged"] = spec.n_averaged;
    summary["rbw_hz"] = spec.rbw_hz;
    ordered_json floors = ordered_json::array();
    for (const auto& b : beats) floors.push_back({{"n", b.n}, {"noise_floor", b.noise_floor}});
    summary["beat_floors"] = floors;

    if (cfg.cell) {
        // Two-shot alias resolution on sample and reference (cell removed):
        // the minus shot flips the displacement of every +n line.
        const PreparedScenario minus = prepare(scenario, Shot::minus);
        const ShotSet sample_minus = run(minus, transmission, 1);
        const ShotSet ref_plus = run(plus, {}, 2);
        const ShotSet ref_minus = run(minus, {}, 3);
        const auto n_samples = static_cast<double>(main.ifg.samples.size());
        auto phasors = [&](const ShotSet& a, const ShotSet& b) {
            std::vector<AliasResolution> out;
            for (int n = 1; n <= n_pairs; ++n) {
                const auto pa = resolve_aliasing_iq(a.ifg.samples, opt.sample_rate_hz, n, df);
                const auto pb = resolve_aliasing_iq(b.ifg.samples, opt.sample_rate_hz, n, df);
                BeatnoteRecord ra, rb;
                ra.index = rb.index = n;
                ra.mean_amp = pa.alpha_n + pa.alpha_neg;
                rb.mean_amp = pb.alpha_n + pb.alpha_neg;
                out.push_back(resolve_aliasing_two_shot(ra, rb));
            }
            return out;
        };
        const auto s = phasors(main, sample_minus);
        const auto r = phasors(ref_plus, ref_minus);
        std::vector<TransmittancePoint> points;
        for (int n = 1; n <= n_pairs; ++n) {
            // Phasor noise per shot is 2v/N per component; averaging two shots halves it.
            const double v = beats[n - 1].noise_floor;
            const double sigma_a = std::sqrt(v / n_samples);
            auto point = [&](double f, std::complex<double> as, std::complex<double> ar) {
                const double a_s = std::abs(as), a_r = std::abs(ar);
                if (!(a_r > 0.0)) throw NumericError(fmt::format("reference line {} has no signal", n));
                const double eta = (a_s / a_r) * (a_s / a_r);
                const double sigma = 2.0 * (a_s / a_r) * std::hypot(sigma_a / a_r, a_s * sigma_a / (a_r * a_r));
                points.push_back({f, eta, sigma});
            };
            point(plus.signal.line_frequency(n), s[n - 1].alpha_n, r[n - 1].alpha_n);
            point(plus.signal.line_frequency(-n), s[n - 1].alpha_neg, r[n - 1].alpha_neg);
        }
        std::sort(points.begin(), points.end(),
                  [](const auto& a, const auto& b) { return a.freq_hz < b.freq_hz; });
        auto os = open_out(l.out_dir / "transmittance.csv");
        write_transmittance_csv(os, points);
        summary["transmittance_points"] = points.size();
    }
    auto os = open_out(l.out_dir / "simulate.json");
    os << summary.dump(2) << "\n";
    std::cout << fmt::format("simulate: {} samples, {} segments averaged, outputs in {}\n",
                             main.ifg.samples.size(), spec.n_averaged, l.out_dir.string());
    return kOk;
}

// ----------------------------------------------------------------------- fit

struct FitArgs {
    std::string spectrum;
    std::string lines;
    std::string output = "fit.json";
    double path_length_cm = 0.0;
    double pressure_torr = 0.0;
    double temperature_k = 296.0;
    double mole_fraction = 1.0;
    std::vector<std::string> free{"mole_fraction"};
    int max_iterations = 200;
};

int cmd_fit(const FitArgs& a) {
    std::ifstream in(a.spectrum);
    if (!in) throw IoError("cannot open " + a.spectrum);
    const auto data = read_transmittance_csv(in);
    const auto lines = ingest_line_list(a.lines);
    GasCell prior{a.path_length_cm, a.pressure_torr, a.temperature_k, a.mole_fraction};
    try {
        prior.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("cell priors", e.what());
    }
    FitOptions options;
    options.free.clear();
    for (const auto& f : a.free) options.free.push_back(cell_param_from_string(f));
    options.max_iterations = a.max_iterations;
    try {
        const FitResult fit = fit_cell_params(data, lines, prior, options);
        auto os = open_out(a.output);
        write_fit_json(os, fit);
        for (std::size_t i = 0; i < fit.free.size(); ++i)
            std::cout << fmt::format("{} = {:.9g} +- {:.3g}\n", to_string(fit.free[i]), fit.values[i],
                                     fit.sigmas[i]);
        std::cout << fmt::format("chi2 = {:.6g} for {} points\n", fit.chi2, fit.residuals.size());
    } catch (const FitNotConverged& e) {
        auto os = open_out(a.output);
        write_fit_json(os, e.best());
        throw;
    }
    return kOk;
}

// ------------------------------------------------------------------- speedup

int cmd_speedup(const Loaded& l) {
    const auto& cfg = l.cfg;
    if (!cfg.speedup) throw ConfigError("speedup", "section required by the speedup command");
    const Scenario scenario = to_scenario(cfg);
    std::vector<PairTransmission> sample;
    if (cfg.cell) sample = cell_transmission(prepare(scenario).signal, cfg.cell->cell, cell_lines(l));
    SpeedupOptions so;
    so.m_list = cfg.speedup->m_list;
    so.n_seeds = cfg.speedup->n_seeds;
    so.target_m = cfg.speedup->target_m;
    const SpeedupResult r = precision_vs_averages(scenario, sample, so, to_pipeline_options(cfg));

    ordered_json j;
    j["config_hash"] = hash_hex(cfg);
    j["target_precision"] = r.target_precision;
    j["m_dcs"] = r.m_dcs;
    j["m_edcs"] = r.m_edcs;
    j["speedup"] = r.speedup;
    j["analytic_speedup"] = r.analytic_speedup;
    ordered_json curve = ordered_json::array();
    for (const auto& p : r.curve) curve.push_back({{"m", p.m}, {"precision_edcs", p.edcs}, {"precision_dcs", p.dcs}});
    j["curve"] = curve;
    {
        auto os = open_out(l.out_dir / "speedup.json");
        os << j.dump(2) << "\n";
    }
    auto os = open_out(l.out_dir / "speedup.csv");
    os << "# config_hash " << hash_hex(cfg) << "\nm,precision_edcs,precision_dcs\n";
    for (const auto& p : r.curve) os << fmt::format("{},{:.9g},{:.9g}\n", p.m, p.edcs, p.dcs);
    std::cout << fmt::format("speedup = {:.4f} (analytic {:.4f}); M_edcs = {:.1f} vs M_dcs = {:.0f}\n",
                             r.speedup, r.analytic_speedup, r.m_edcs, r.m_dcs);
    return kOk;
}

// ----------------------------------------------------------------- uar-sweep

int cmd_uar_sweep(const Loaded& l) {
    const auto& cfg = l.cfg;
    if (!cfg.uar_sweep && !cfg.robustness)
        throw ConfigError("uar_sweep", "section required by the uar-sweep command");
    const Scenario scenario = to_scenario(cfg);
    ordered_json j;
    j["config_hash"] = hash_hex(cfg);
    if (cfg.uar_sweep) {
        const auto r = uar_sweep(scenario, cfg.uar_sweep->uar_values, cfg.uar_sweep->depths_db, cfg.threads);
        auto os = open_out(l.out_dir / "uar_sweep.csv");
        os << "# config_hash " << hash_hex(cfg) << "\n"
           << "uar,depth_db,snr_edcs,snr_dcs,advantage_db,snr_edcs_adaptive,advantage_adaptive_db\n";
        ordered_json pts = ordered_json::array();
        for (const auto& p : r.points) {
            os << fmt::format("{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", p.uar, p.depth_db,
                              p.snr_edcs, p.snr_dcs, p.advantage_db, p.snr_edcs_adaptive,
                              p.advantage_adaptive_db);
            pts.push_back({{"uar", p.uar},
                           {"depth_db", p.depth_db},
                           {"advantage_db", p.advantage_db},
                           {"advantage_adaptive_db", p.advantage_adaptive_db}});
        }
        j["lossless_advantage_db"] = r.lossless_advantage_db;
        j["uar_sweep"] = pts;
        std::cout << fmt::format("uar-sweep: {} grid points, lossless advantage {:.3f} dB\n",
                                 r.points.size(), r.lossless_advantage_db);
    }
    if (cfg.robustness) {
        RobustnessOptions ro{cfg.robustness->uar, cfg.robustness->n_seeds, cfg.robustness->n_averages};
        const auto rows = absorption_robustness(scenario, cfg.robustness->depths_db, ro, to_pipeline_options(cfg));
        auto os = open_out(l.out_dir / "robustness.csv");
        os << "# config_hash " << hash_hex(cfg) << "\n"
           << "depth_db,snr_edcs,snr_dcs,advantage_db,analytic_snr_edcs,analytic_snr_dcs,analytic_advantage_db\n";
        ordered_json rj = ordered_json::array();
        for (const auto& r : rows) {
            os << fmt::format("{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.depth_db, r.snr_edcs,
                              r.snr_dcs, r.advantage_db, r.analytic_snr_edcs, r.analytic_snr_dcs,
                              r.analytic_advantage_db);
            rj.push_back({{"depth_db", r.depth_db},
                          {"advantage_db", r.advantage_db},
                          {"analytic_advantage_db", r.analytic_advantage_db}});
            std::cout << fmt::format("depth {:.2f} dB: advantage {:.3f} dB (analytic {:.3f} dB)\n",
                                     r.depth_db, r.advantage_db, r.analytic_advantage_db);
        }
        j["robustness"] = rj;
    }
    auto os = open_out(l.out_dir / "uar_sweep.json");
    os << j.dump(2) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entangled dual-comb spectroscopy simulator"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub, std::string& config) {
        sub->add_option("config", config, "Run configuration (JSON)")->required();
        sub->add_option("--seed", o.seed, "Override the configured seed");
        sub->add_option("-o,--output-dir", o.output_dir, "Override the output directory");
        sub->add_option("-j,--threads", o.threads, "Worker threads (0 = all cores)");
    };
    std::string config;
    auto* squeeze = app.add_subcommand("squeeze-report", "Per-pair squeezing / anti-squeezing table");
    add_common(squeeze, config);
    auto* simulate = app.add_subcommand("simulate", "Synthesize interferograms and process them");
    add_common(simulate, config);
    auto* speedup = app.add_subcommand("speedup", "Precision versus averages, EDCS against classical");
    add_common(speedup, config);
    auto* uar = app.add_subcommand("uar-sweep", "UAR sweep and absorption robustness");
    add_common(uar, config);

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit cell parameters to a transmittance spectrum");
    fit->add_option("--spectrum", fa.spectrum, "CSV with freq_hz,transmittance,sigma")->required();
    fit->add_option("--lines", fa.lines, "Line-list CSV")->required();
    fit->add_option("--path-length-cm", fa.path_length_cm)->required();
    fit->add_option("--pressure-torr", fa.pressure_torr)->required();
    fit->add_option("--temperature-k", fa.temperature_k);
    fit->add_option("--mole-fraction", fa.mole_fraction, "Starting value");
    fit->add_option("--free", fa.free, "Free parameters: mole_fraction, pressure")->delimiter(',');
    fit->add_option("--max-iterations", fa.max_iterations);
    fit->add_option("-o,--output", fa.output, "Output JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*fit) return cmd_fit(fa);
        const Loaded l = load(config, o);
        if (*squeeze) return cmd_squeeze_report(l);
        if (*simulate) return cmd_simulate(l);
        if (*speedup) return cmd_speedup(l);
        if (*uar) return cmd_uar_sweep(l);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kConfig;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumeric;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
