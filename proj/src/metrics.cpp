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


#include "edcs/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "edcs/error.hpp"
#include "edcs/units.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace edcs {

// ------------------------------------------------------------ SNR measures

SnrAdvantage snr_advantage(std::span<const BeatnoteRecord> edcs, std::span<const BeatnoteRecord> dcs,
                           std::size_t n_averages) {
    if (edcs.size() != dcs.size() || edcs.empty())
        throw InvalidArgument("snr_advantage needs matched, non-empty line sets");
    SnrAdvantage out;
    double var_e = 0.0, var_d = 0.0;
    for (std::size_t i = 0; i < edcs.size(); ++i) {
        if (edcs[i].index != dcs[i].index)
            throw InvalidArgument(fmt::format("line mismatch: {} vs {}", edcs[i].index, dcs[i].index));
        LineAdvantage l;
        l.n = edcs[i].index;
        l.power_db = units::ratio_to_db(dcs[i].noise_var / edcs[i].noise_var);
        const double se = snr_amplitude(edcs[i], n_averages);
        const double sd = snr_amplitude(dcs[i], n_averages);
        l.amplitude_db = (se > 0.0 && sd > 0.0) ? 20.0 * std::log10(se / sd) : 0.0;
        var_e += edcs[i].noise_var;
        var_d += dcs[i].noise_var;
        out.lines.push_back(l);
    }
    out.aggregate_power_db = units::ratio_to_db(var_d / var_e);
    const double agg_e = aggregate_snr(edcs, n_averages);
    const double agg_d = aggregate_snr(dcs, n_averages);
    out.aggregate_amplitude_db = (agg_e > 0.0 && agg_d > 0.0) ? 20.0 * std::log10(agg_e / agg_d) : 0.0;
    return out;
}

double aggregate_snr(std::span<const double> per_line_snr) {
    if (per_line_snr.empty()) throw InvalidArgument("no lines to aggregate");
    double sum = 0.0;
    for (double s : per_line_snr) sum += s * s;
    return std::sqrt(sum / static_cast<double>(per_line_snr.size()));
}

double aggregate_snr(std::span<const BeatnoteRecord> records, std::size_t n_averages) {
    std::vector<double> snr;
    for (const auto& r : records) snr.push_back(snr_amplitude(r, n_averages));
    return aggregate_snr(snr);
}

double quality_factor(double snr_amp, int n_pairs, double tau_s) {
    if (!(tau_s > 0.0)) throw InvalidArgument("integration time must be > 0");
    if (n_pairs < 1) throw InvalidArgument("n_pairs must be >= 1");
    if (!(snr_amp > 0.0)) throw InvalidArgument("SNR must be > 0");
    return snr_amp * (2.0 * n_pairs) / std::sqrt(tau_s);
}

// ---------------------------------------------------------------- scenarios

double Scenario::delta_f_rep_hz() const { return std::abs(signal_offset_spacing_hz - lo.offset_spacing_hz); }

void Scenario::validate() const {
    lo.validate();
    entangled.validate(lo.n_pairs);
    detection.validate();
    if (!(signal_amplitude >= 0.0) || !std::isfinite(signal_amplitude))
        throw InvalidArgument("signal amplitude must be finite and >= 0");
    if (!(delta_f_rep_hz() > 0.0))
        throw InvalidArgument("signal and LO offsets must differ to produce beat notes");
    if (std::abs(signal_offset_spacing_hz) >= lo.line_spacing_hz / 2.0)
        throw InvalidArgument("signal offset must be below half the line spacing");
}

PreparedScenario prepare(const Scenario& scenario, Shot shot) {
    scenario.validate();
    const CombConfig empty =
        matched_classical_comb(scenario.lo, 0.0, scenario.signal_offset_spacing_hz);
    const auto bare = build_entangled_comb(scenario.entangled, empty, scenario.detection).pairs;
    PreparedScenario out;
    out.lo = align_lo_phases(bare, scenario.lo);
    out.signal = matched_classical_comb(out.lo, scenario.signal_amplitude,
                                        scenario.signal_offset_spacing_hz);
    if (shot == Shot::minus)
        for (int n = 1; n <= out.signal.n_pairs; ++n)
            out.signal.amplitudes[out.signal.slot(n)] *= -1.0;
    out.edcs = build_entangled_comb(scenario.entangled, out.signal, scenario.detection).pairs;
    out.classical = build_classical_comb(scenario.entangled, out.signal);
    return out;
}

std::vector<BeatnoteRecord> arm_records(const Scenario& scenario, const PreparedScenario& prepared,
                                        Arm arm, std::span<const PairTransmission> transmission,
                                        LoMode mode) {
    const auto& pairs = arm == Arm::edcs ? prepared.edcs : prepared.classical;
    if (!transmission.empty() && transmission.size() != pairs.size())
        throw InvalidArgument(fmt::format("transmission has {} entries for {} pairs",
                                          transmission.size(), pairs.size()));
    const double df = scenario.delta_f_rep_hz();
    std::vector<BeatnoteRecord> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const PairTransmission t = transmission.empty() ? PairTransmission{} : transmission[i];
        const auto sel = (arm == Arm::edcs && mode == LoMode::adaptive)
                             ? adaptive_lo_weights(pairs[i], t.eta_n, t.eta_neg, scenario.detection)
                             : lo_selector(prepared.lo, pairs[i].pair_index());
        out.push_back(beatnote_model(pairs[i], sel, t.eta_n, t.eta_neg, scenario.detection, df));
    }
    return out;
}

std::vector<BeatnoteRecord> arm_records(const Scenario& scenario, Arm arm,
                                        std::span<const PairTransmission> transmission, LoMode mode) {
    return arm_records(scenario, prepare(scenario), arm, transmission, mode);
}

std::vector<PairTransmission> cell_transmission(const CombConfig& signal, const GasCell& cell,
                                                std::span<const SpectralLine> lines) {
    std::vector<PairTransmission> out;
    for (int n = 1; n <= signal.n_pairs; ++n)
        out.push_back({transmittance(signal.line_frequency(n), cell, lines),
                       transmittance(signal.line_frequency(-n), cell, lines)});
    return out;
}

std::vector<PairTransmission> uniform_transmission(int n_pairs, double eta_n, double eta_neg) {
    if (n_pairs < 1) throw InvalidArgument("n_pairs must be >= 1");
    return std::vector<PairTransmission>(static_cast<std::size_t>(n_pairs), {eta_n, eta_neg});
}

// ----------------------------------------------------------------- UAR sweep

AttenuationMix attenuation_mix(double uar) {
    if (!(uar >= 0.0)) throw InvalidArgument("UAR must be >= 0");
    const double f = std::isinf(uar) ? 0.0 : 1.0 / (uar + 1.0);
    AttenuationMix m;
    m.both = std::max(0.0, 2.0 * f - 1.0);
    m.one = std::min(2.0 * f, 2.0 - 2.0 * f);
    m.none = 1.0 - m.one - m.both;
    return m;
}

namespace {

// The four ways a pair can meet the sample, in a fixed order.
enum PairClass { kNone, kPlusLossy, kMinusLossy, kBothLossy, kClassCount };

PairTransmission class_transmission(int c, double eta) {
    switch (c) {
        case kPlusLossy: return {eta, 1.0};
        case kMinusLossy: return {1.0, eta};
        case kBothLossy: return {eta, eta};
        default: return {1.0, 1.0};
    }
}

std::array<double, kClassCount> class_weights(const AttenuationMix& m) {
    return {m.none, m.one / 2.0, m.one / 2.0, m.both};
}

// Mean over lines of SNR^2 for every pair class, from the beat-note model.
std::array<double, kClassCount> class_mean_snr2(const Scenario& scenario,
                                                const PreparedScenario& prepared, Arm arm,
                                                LoMode mode, double eta) {
    std::array<double, kClassCount> out{};
    const int n_pairs = static_cast<int>(prepared.edcs.size());
    for (int c = 0; c < kClassCount; ++c) {
        const auto t = class_transmission(c, eta);
        const auto recs =
            arm_records(scenario, prepared, arm, uniform_transmission(n_pairs, t.eta_n, t.eta_neg), mode);
        const double s = aggregate_snr(recs, 1);
        out[c] = s * s;
    }
    return out;
}

double mixed_snr(const std::array<double, kClassCount>& snr2, const AttenuationMix& mix) {
    const auto w = class_weights(mix);
    double sum = 0.0;
    for (int c = 0; c < kClassCount; ++c) sum += w[c] * snr2[c];
    return std::sqrt(sum);
}

double amplitude_db(double a, double b) { return 20.0 * std::log10(a / b); }

}  // namespace

UarSweepResult uar_sweep(const Scenario& scenario, std::span<const double> uar_values,
                         std::span<const double> depths_db, unsigned threads) {
    for (double u : uar_values)
        if (!(u >= 0.0)) throw InvalidArgument("UAR values must be >= 0");
    for (double d : depths_db)
        if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidArgument("depths must be finite and >= 0");
    const PreparedScenario prepared = prepare(scenario);

    struct DepthModel {
        std::array<double, kClassCount> edcs, dcs, adaptive;
    };
    std::vector<DepthModel> models(depths_db.size());
    detail::parallel_for(depths_db.size(), threads, [&](std::size_t i) {
        const double eta = units::db_to_ratio(-depths_db[i]);
        models[i] = {class_mean_snr2(scenario, prepared, Arm::edcs, LoMode::balanced, eta),
                     class_mean_snr2(scenario, prepared, Arm::classical, LoMode::balanced, eta),
                     class_mean_snr2(scenario, prepared, Arm::edcs, LoMode::adaptive, eta)};
    });

    UarSweepResult out;
    out.lossless_advantage_db = amplitude_db(aggregate_snr(arm_records(scenario, prepared, Arm::edcs), 1),
                                             aggregate_snr(arm_records(scenario, prepared, Arm::classical), 1));
    for (double uar : uar_values) {
        const auto mix = attenuation_mix(uar);
        for (std::size_t i = 0; i < depths_db.size(); ++i) {
            UarPoint p;
            p.uar = uar;
            p.depth_db = depths_db[i];
            p.snr_edcs = mixed_snr(models[i].edcs, mix);
            p.snr_dcs = mixed_snr(models[i].dcs, mix);
            p.snr_edcs_adaptive = mixed_snr(models[i].adaptive, mix);
            p.advantage_db = amplitude_db(p.snr_edcs, p.snr_dcs);
            p.advantage_adaptive_db = amplitude_db(p.snr_edcs_adaptive, p.snr_dcs);
            out.points.push_back(p);
        }
    }
    return out;
}

// ------------------------------------------------------ pipeline experiments

namespace {

std::vector<ExtractedBeat> run_pipeline(std::span<const BeatnoteRecord> records,
                                        const Scenario& scenario, const PipelineOptions& opt,
                                        std::span<const int> m_list, std::uint64_t seed,
                                        std::vector<std::vector<ExtractedBeat>>* per_m = nullptr) {
    const Interferogram ifg = synthesize(records, opt.sample_rate_hz, opt.duration_s,
                                         scenario.detection, opt.synthesis, seed);
    const auto spectra = cumulative_averages(ifg, opt.rbw_hz, opt.window, m_list);
    const int n_max = static_cast<int>(records.size());
    if (per_m) {
        per_m->clear();
        for (const auto& s : spectra)
            per_m->push_back(extract_beatnotes(s, scenario.delta_f_rep_hz(), n_max));
        return per_m->back();
    }
    return extract_beatnotes(spectra.back(), scenario.delta_f_rep_hz(), n_max);
}

// Pipeline amplitude SNR divided by snr_amplitude(rec, M) for the window used.
double pipeline_snr_scale(const PipelineOptions& opt) {
    const std::size_t n = sample_count(opt.sample_rate_hz, 1.0 / opt.rbw_hz);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = opt.window == Window::hann
                             ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n))
                             : 1.0;
        sum += w;
        sum_sq += w * w;
    }
    return sum / std::sqrt(2.0 * sum_sq);
}

}  // namespace

std::vector<RobustnessRow> absorption_robustness(const Scenario& scenario,
                                                 std::span<const double> depths_db,
                                                 const RobustnessOptions& robustness,
                                                 const PipelineOptions& pipeline_options) {
    if (robustness.n_seeds < 1) throw InvalidArgument("need at least one seed");
    if (robustness.n_averages < 1) throw InvalidArgument("need at least one average");
    // Synthesize exactly the segments that get averaged.
    PipelineOptions pipeline = pipeline_options;
    pipeline.duration_s = robustness.n_averages / pipeline.rbw_hz;
    for (double d : depths_db)
        if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidArgument("depths must be finite and >= 0");
    const PreparedScenario prepared = prepare(scenario);
    const auto mix = attenuation_mix(robustness.uar);
    const int n_pairs = static_cast<int>(prepared.edcs.size());
    const std::array<int, 1> m_list{robustness.n_averages};
    const std::size_t n_depths = depths_db.size();

    // snr2[seed][arm][depth][class]: mean over lines of pipeline SNR^2.
    using ClassSnr = std::array<double, kClassCount>;
    std::vector<std::array<std::vector<ClassSnr>, 2>> snr2(robustness.n_seeds);
    detail::parallel_for(static_cast<std::size_t>(robustness.n_seeds), pipeline.threads, [&](std::size_t s) {
        const std::uint64_t seed = detail::derive_seed(pipeline.seed, s);
        for (int a = 0; a < 2; ++a) {
            const Arm arm = a == 0 ? Arm::edcs : Arm::classical;
            auto& table = snr2[s][a];
            table.assign(n_depths, ClassSnr{});
            std::vector<double> lossless;
            const auto run = [&](const PairTransmission& t) {
                const auto recs = arm_records(scenario, prepared, arm,
                                              uniform_transmission(n_pairs, t.eta_n, t.eta_neg));
                const auto beats = run_pipeline(recs, scenario, pipeline, m_list, seed);
                double sum = 0.0;
                for (const auto& b : beats) sum += std::pow(b.amplitude / b.amplitude_sigma, 2);
                return sum / static_cast<double>(beats.size());
            };
            const double none = run({});
            for (std::size_t d = 0; d < n_depths; ++d) {
                const double eta = units::db_to_ratio(-depths_db[d]);
                table[d][kNone] = none;
                for (int c = kPlusLossy; c < kClassCount; ++c) {
                    const bool needed = (c == kBothLossy ? mix.both : mix.one) > 0.0;
                    table[d][c] = needed ? run(class_transmission(c, eta)) : 0.0;
                }
            }
        }
    });

    const double scale = pipeline_snr_scale(pipeline) * std::sqrt(robustness.n_averages);
    std::vector<RobustnessRow> out;
    for (std::size_t d = 0; d < n_depths; ++d) {
        RobustnessRow row;
        row.depth_db = depths_db[d];
        std::array<ClassSnr, 2> mean{};
        for (const auto& per_seed : snr2)
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < kClassCount; ++c) mean[a][c] += per_seed[a][d][c] / robustness.n_seeds;
        row.snr_edcs = mixed_snr(mean[0], mix);
        row.snr_dcs = mixed_snr(mean[1], mix);
        row.advantage_db = amplitude_db(row.snr_edcs, row.snr_dcs);
        const double eta = units::db_to_ratio(-depths_db[d]);
        row.analytic_snr_edcs =
            scale * mixed_snr(class_mean_snr2(scenario, prepared, Arm::edcs, LoMode::balanced, eta), mix);
        row.analytic_snr_dcs =
            scale * mixed_snr(class_mean_snr2(scenario, prepared, Arm::classical, LoMode::balanced, eta), mix);
        row.analytic_advantage_db = amplitude_db(row.analytic_snr_edcs, row.analytic_snr_dcs);
        out.push_back(row);
    }
    return out;
}

namespace {

// log-log interpolation of the M at which `curve` reaches `target`.
double crossing(std::span<const int> m, std::span<const double> curve, double target) {
    for (std::size_t j = 0; j < curve.size(); ++j) {
        if (curve[j] > target) continue;
        // Below target already at the first point: extrapolate on the first segment.
        const std::size_t hi = j == 0 ? 1 : j;
        const std::size_t lo = hi - 1;
        const double x0 = std::log(m[lo]), x1 = std::log(m[hi]);
        const double y0 = std::log(curve[lo]), y1 = std::log(curve[hi]);
        if (y1 == y0) return m[j];
        return std::exp(x0 + (std::log(target) - y0) * (x1 - x0) / (y1 - y0));
    }
    return -1.0;
}

double analytic_estimate_variance(std::span<const BeatnoteRecord> sample,
                                  std::span<const BeatnoteRecord> reference) {
    double sum = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double as = std::norm(sample[i].mean_amp);
        const double ar = std::norm(reference[i].mean_amp);
        if (!(ar > 0.0)) throw InvalidArgument("reference beat note has no signal");
        const double eta = as / ar;
        sum += 4.0 * eta * eta * (sample[i].noise_var / std::max(as, 1e-300) + reference[i].noise_var / ar);
    }
    return sum;
}

}  // namespace

SpeedupResult precision_vs_averages(const Scenario& scenario,
                                    std::span<const PairTransmission> sample,
                                    const SpeedupOptions& speedup, const PipelineOptions& pipeline) {
    const auto& m_list = speedup.m_list;
    if (m_list.size() < 2) throw InvalidArgument("need at least two averaging counts");
    if (speedup.n_seeds < 10) throw InvalidArgument("need at least 10 seeds per point");
    const int target_m = speedup.target_m == 0 ? m_list.back() : speedup.target_m;
    const auto target_it = std::find(m_list.begin(), m_list.end(), target_m);
    if (target_it == m_list.end()) throw InvalidArgument("target_m must be one of m_list");
    const auto target_index = static_cast<std::size_t>(target_it - m_list.begin());

    const PreparedScenario prepared = prepare(scenario);
    const std::size_t n_lines = prepared.edcs.size();
    const std::size_t n_m = m_list.size();
    const auto n_seeds = static_cast<std::size_t>(speedup.n_seeds);

    std::array<std::vector<BeatnoteRecord>, 2> sample_recs, ref_recs;
    for (int a = 0; a < 2; ++a) {
        const Arm arm = a == 0 ? Arm::edcs : Arm::classical;
        sample_recs[a] = arm_records(scenario, prepared, arm, sample);
        ref_recs[a] = arm_records(scenario, prepared, arm);
    }

    // eta[seed][arm][m][line]
    std::vector<std::array<std::vector<std::vector<double>>, 2>> eta(n_seeds);
    detail::parallel_for(n_seeds, pipeline.threads, [&](std::size_t s) {
        // Both arms see the same noise draws (common random numbers).
        const std::uint64_t seed_sample = detail::derive_seed(pipeline.seed, s, 0);
        const std::uint64_t seed_ref = detail::derive_seed(pipeline.seed, s, 1);
        for (int a = 0; a < 2; ++a) {
            std::vector<std::vector<ExtractedBeat>> bs, br;
            run_pipeline(sample_recs[a], scenario, pipeline, m_list, seed_sample, &bs);
            run_pipeline(ref_recs[a], scenario, pipeline, m_list, seed_ref, &br);
            auto& out = eta[s][a];
            out.resize(n_m);
            for (std::size_t k = 0; k < n_m; ++k)
                for (const auto& e : estimate_transmittance(bs[k], br[k])) out[k].push_back(e.eta);
        }
    });

    SpeedupResult result;
    std::array<std::vector<double>, 2> curves;
    for (int a = 0; a < 2; ++a) {
        for (std::size_t k = 0; k < n_m; ++k) {
            double mean_var = 0.0;
            for (std::size_t l = 0; l < n_lines; ++l) {
                double mean = 0.0;
                for (std::size_t s = 0; s < n_seeds; ++s) mean += eta[s][a][k][l];
                mean /= static_cast<double>(n_seeds);
                double var = 0.0;
                for (std::size_t s = 0; s < n_seeds; ++s) var += std::pow(eta[s][a][k][l] - mean, 2);
                mean_var += var / static_cast<double>(n_seeds - 1);
            }
            curves[a].push_back(std::sqrt(mean_var / static_cast<double>(n_lines)));
        }
    }
    for (std::size_t k = 0; k < n_m; ++k) result.curve.push_back({m_list[k], curves[0][k], curves[1][k]});
    result.target_precision = curves[1][target_index];
    result.m_dcs = target_m;
    result.m_edcs = crossing(m_list, curves[0], result.target_precision);
    if (!(result.m_edcs > 0.0))
        throw NumericError(fmt::format(
            "EDCS precision {:.4g} at M = {} never reaches the classical target {:.4g}; "
            "extend the averaging list",
            curves[0].back(), m_list.back(), result.target_precision));
    result.speedup = result.m_dcs / result.m_edcs;
    result.analytic_speedup = analytic_estimate_variance(sample_recs[1], ref_recs[1]) /
                              analytic_estimate_variance(sample_recs[0], ref_recs[0]);
    return result;
}

}  // namespace edcs
