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


#include "edcs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "edcs/error.hpp"

namespace edcs {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Walks one JSON object, records which keys were consumed and rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <class T>
    void opt(const std::string& key, T& out) {
        seen_.insert(key);
        if (has(key)) out = convert<T>(j_.at(key), join(path_, key));
    }

    template <class T>
    void opt(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        if (has(key)) out = convert<T>(j_.at(key), join(path_, key));
        else out.reset();
    }

    template <class T>
    void req(const std::string& key, T& out) {
        if (!has(key)) throw ConfigError(join(path_, key), "required key is missing");
        opt(key, out);
    }

    std::optional<Reader> section(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return std::nullopt;
        return Reader(j_.at(key), join(path_, key));
    }

    const std::string& path() const { return path_; }
    std::string at(const std::string& key) const { return join(path_, key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.contains(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }

    template <class T>
    static T convert(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(path, "expected a number");
            return v.get<double>();
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(path, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, unsigned>) {
            if (!v.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
            const auto u = v.get<std::uint64_t>();
            if (u > std::numeric_limits<T>::max()) throw ConfigError(path, "integer out of range");
            return static_cast<T>(u);
        } else if constexpr (std::is_same_v<T, int>) {
            if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
            const auto i = v.get<std::int64_t>();
            if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
                throw ConfigError(path, "integer out of range");
            return static_cast<int>(i);
        } else {
            // std::vector<U>
            using U = typename T::value_type;
            if (!v.is_array()) throw ConfigError(path, "expected an array");
            T out;
            for (std::size_t i = 0; i < v.size(); ++i)
                out.push_back(convert<U>(v[i], fmt::format("{}[{}]", path, i)));
            return out;
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class E>
E parse_enum(const std::string& value, const std::string& path,
             std::initializer_list<std::pair<const char*, E>> names) {
    std::string options;
    for (const auto& [name, e] : names) {
        if (value == name) return e;
        options += options.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(path, fmt::format("'{}' is not one of: {}", value, options));
}

const char* name_of(ScenarioKind k) { return k == ScenarioKind::edcs ? "edcs" : "classical-dcs"; }
const char* name_of(SqueezingProfile p) { return p == SqueezingProfile::measured ? "measured" : "flat-top"; }
const char* name_of(ReferencePlane r) { return r == ReferencePlane::state ? "state" : "detector"; }
const char* name_of(Window w) { return w == Window::rectangular ? "rectangular" : "hann"; }

void read_squeezing(Reader r, EntangledCombSpec& s) {
    std::string profile = name_of(s.profile), plane = name_of(s.reference);
    r.opt("profile", profile);
    s.profile = parse_enum<SqueezingProfile>(profile, r.at("profile"),
                                             {{"measured", SqueezingProfile::measured},
                                              {"flat-top", SqueezingProfile::flat_top}});
    r.opt("reference_plane", plane);
    s.reference = parse_enum<ReferencePlane>(
        plane, r.at("reference_plane"),
        {{"state", ReferencePlane::state}, {"detector", ReferencePlane::detector}});
    r.req("squeeze_db", s.squeeze_db);
    r.req("antisqueeze_db", s.antisqueeze_db);
    r.opt("tap_ratio", s.tap_ratio);
    r.opt("central_squeeze_db", s.central_squeeze_db);
    r.opt("central_antisqueeze_db", s.central_antisqueeze_db);
    r.finish();
}

void read_comb(Reader r, CombSection& c) {
    r.opt("n_pairs", c.n_pairs);
    r.opt("center_freq_hz", c.center_freq_hz);
    r.opt("line_spacing_hz", c.line_spacing_hz);
    r.opt("lo_offset_spacing_hz", c.lo_offset_spacing_hz);
    r.opt("signal_offset_spacing_hz", c.signal_offset_spacing_hz);
    r.opt("lo_amplitude", c.lo_amplitude);
    r.opt("signal_amplitude", c.signal_amplitude);
    auto sq = r.section("squeezing");
    if (!sq) throw ConfigError(r.at("squeezing"), "required key is missing");
    read_squeezing(*sq, c.squeezing);
    r.finish();
}

void read_detection(Reader r, DetectionImperfections& d) {
    r.opt("quantum_efficiency", d.quantum_efficiency);
    r.opt("fringe_visibility", d.fringe_visibility);
    r.opt("electrical_noise_db_below_vacuum", d.electrical_noise_db_below_vacuum);
    r.finish();
}

void read_cell(Reader r, CellSection& c) {
    r.req("line_list", c.line_list);
    r.req("path_length_cm", c.cell.path_length_cm);
    r.req("pressure_torr", c.cell.pressure_torr);
    r.opt("temperature_k", c.cell.temperature_k);
    r.opt("mole_fraction", c.cell.mole_fraction);
    r.opt("peak_depth_db", c.peak_depth_db);
    r.finish();
}

void read_dsp(Reader r, DspSection& d) {
    r.opt("sample_rate_hz", d.sample_rate_hz);
    r.opt("duration_s", d.duration_s);
    r.opt("rbw_hz", d.rbw_hz);
    std::string window = name_of(d.window);
    r.opt("window", window);
    d.window = parse_enum<Window>(window, r.at("window"),
                                  {{"rectangular", Window::rectangular}, {"hann", Window::hann}});
    r.opt("kernel_halfwidth_hz", d.kernel_halfwidth_hz);
    r.opt("n_averages", d.n_averages);
    d.phase_noise.reset();
    if (auto pn = r.section("phase_noise")) {
        PhaseNoiseModel m;
        pn->opt("level_dbc_hz", m.level_dbc_hz);
        pn->opt("segment_duration_s", m.segment_duration_s);
        pn->finish();
        d.phase_noise = m;
    }
    r.finish();
}

ordered_json write_squeezing(const EntangledCombSpec& s) {
    return {{"profile", name_of(s.profile)},
            {"reference_plane", name_of(s.reference)},
            {"squeeze_db", s.squeeze_db},
            {"antisqueeze_db", s.antisqueeze_db},
            {"tap_ratio", s.tap_ratio},
            {"central_squeeze_db", s.central_squeeze_db},
            {"central_antisqueeze_db", s.central_antisqueeze_db}};
}

// Re-throws semantic errors from the library with a config path attached.
template <class F>
void at_path(const std::string& path, F&& check) {
    try {
        check();
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("not valid JSON: ") + e.what());
    }
    Reader r(root, "");
    RunConfig cfg;
    r.req("schema_version", cfg.schema_version);
    if (cfg.schema_version != kSchemaVersion)
        throw ConfigError("schema_version", fmt::format("unsupported version {} (expected {})",
                                                        cfg.schema_version, kSchemaVersion));
    std::string scenario = name_of(cfg.scenario);
    r.opt("scenario", scenario);
    cfg.scenario = parse_enum<ScenarioKind>(
        scenario, "scenario", {{"edcs", ScenarioKind::edcs}, {"classical-dcs", ScenarioKind::classical_dcs}});
    r.opt("seed", cfg.seed);
    r.opt("output_dir", cfg.output_dir);
    r.opt("threads", cfg.threads);
    auto comb = r.section("comb");
    if (!comb) throw ConfigError("comb", "required key is missing");
    read_comb(*comb, cfg.comb);
    if (auto d = r.section("detection")) read_detection(*d, cfg.detection);
    if (auto c = r.section("cell")) {
        CellSection cell;
        read_cell(*c, cell);
        cfg.cell = cell;
    }
    if (auto d = r.section("dsp")) read_dsp(*d, cfg.dsp);
    if (auto s = r.section("speedup")) {
        SpeedupSection sp;
        s->opt("m_list", sp.m_list);
        s->opt("n_seeds", sp.n_seeds);
        s->opt("target_m", sp.target_m);
        s->finish();
        cfg.speedup = sp;
    }
    if (auto s = r.section("robustness")) {
        RobustnessSection rb;
        s->opt("uar", rb.uar);
        s->opt("depths_db", rb.depths_db);
        s->opt("n_seeds", rb.n_seeds);
        s->opt("n_averages", rb.n_averages);
        s->finish();
        cfg.robustness = rb;
    }
    if (auto s = r.section("uar_sweep")) {
        UarSweepSection u;
        s->opt("uar_values", u.uar_values);
        s->opt("depths_db", u.depths_db);
        s->finish();
        cfg.uar_sweep = u;
    }
    r.finish();
    validate(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
    ordered_json j;
    j["schema_version"] = cfg.schema_version;
    j["scenario"] = name_of(cfg.scenario);
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["threads"] = cfg.threads;
    const auto& c = cfg.comb;
    j["comb"] = {{"n_pairs", c.n_pairs},
                 {"center_freq_hz", c.center_freq_hz},
                 {"line_spacing_hz", c.line_spacing_hz},
                 {"lo_offset_spacing_hz", c.lo_offset_spacing_hz},
                 {"signal_offset_spacing_hz", c.signal_offset_spacing_hz},
                 {"lo_amplitude", c.lo_amplitude},
                 {"signal_amplitude", c.signal_amplitude},
                 {"squeezing", write_squeezing(c.squeezing)}};
    ordered_json det = {{"quantum_efficiency", cfg.detection.quantum_efficiency},
                        {"fringe_visibility", cfg.detection.fringe_visibility}};
    if (cfg.detection.electrical_noise_db_below_vacuum)
        det["electrical_noise_db_below_vacuum"] = *cfg.detection.electrical_noise_db_below_vacuum;
    j["detection"] = det;
    if (cfg.cell) {
        ordered_json cell = {{"line_list", cfg.cell->line_list},
                             {"path_length_cm", cfg.cell->cell.path_length_cm},
                             {"pressure_torr", cfg.cell->cell.pressure_torr},
                             {"temperature_k", cfg.cell->cell.temperature_k},
                             {"mole_fraction", cfg.cell->cell.mole_fraction}};
        if (cfg.cell->peak_depth_db) cell["peak_depth_db"] = *cfg.cell->peak_depth_db;
        j["cell"] = cell;
    }
    const auto& d = cfg.dsp;
    ordered_json dsp = {{"sample_rate_hz", d.sample_rate_hz},   {"duration_s", d.duration_s},
                        {"rbw_hz", d.rbw_hz},                   {"window", name_of(d.window)},
                        {"kernel_halfwidth_hz", d.kernel_halfwidth_hz}, {"n_averages", d.n_averages}};
    if (d.phase_noise)
        dsp["phase_noise"] = {{"level_dbc_hz", d.phase_noise->level_dbc_hz},
                              {"segment_duration_s", d.phase_noise->segment_duration_s}};
    j["dsp"] = dsp;
    if (cfg.speedup)
        j["speedup"] = {{"m_list", cfg.speedup->m_list},
                        {"n_seeds", cfg.speedup->n_seeds},
                        {"target_m", cfg.speedup->target_m}};
    if (cfg.robustness)
        j["robustness"] = {{"uar", cfg.robustness->uar},
                           {"depths_db", cfg.robustness->depths_db},
                           {"n_seeds", cfg.robustness->n_seeds},
                           {"n_averages", cfg.robustness->n_averages}};
    if (cfg.uar_sweep)
        j["uar_sweep"] = {{"uar_values", cfg.uar_sweep->uar_values},
                          {"depths_db", cfg.uar_sweep->depths_db}};
    return j.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // Where results go and how many cores make them do not change them.
    RunConfig canonical = cfg;
    canonical.output_dir = ".";
    canonical.threads = 1;
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : serialize_run_config(canonical)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

void validate(const RunConfig& cfg) {
    if (cfg.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    const auto& c = cfg.comb;
    if (c.n_pairs < 1) throw ConfigError("comb.n_pairs", "must be >= 1");
    if (!(c.lo_amplitude > 0.0)) throw ConfigError("comb.lo_amplitude", "must be > 0");
    at_path("comb", [&] { to_scenario(cfg).lo.validate(); });
    at_path("detection", [&] { cfg.detection.validate(); });
    at_path("comb.squeezing", [&] {
        c.squeezing.validate(c.n_pairs);
        for (int n = 1; n <= c.n_pairs; ++n) (void)pair_source_parameters(c.squeezing, n, cfg.detection);
    });
    at_path("comb", [&] { (void)prepare(to_scenario(cfg)); });

    const auto& d = cfg.dsp;
    at_path("dsp", [&] { (void)sample_count(d.sample_rate_hz, d.duration_s); });
    at_path("dsp.rbw_hz", [&] { (void)sample_count(d.sample_rate_hz, 1.0 / d.rbw_hz); });
    const double segments = d.duration_s * d.rbw_hz;
    if (segments < 1.0 - 1e-9) throw ConfigError("dsp.rbw_hz", "segment is longer than the record");
    if (!(d.kernel_halfwidth_hz >= 0.0)) throw ConfigError("dsp.kernel_halfwidth_hz", "must be >= 0");
    if (d.n_averages < 0 || d.n_averages > std::llround(segments))
        throw ConfigError("dsp.n_averages", "must lie in [0, number of segments]");
    if (d.phase_noise) at_path("dsp.phase_noise", [&] { d.phase_noise->validate(); });
    const double top_beat = c.n_pairs * std::abs(c.signal_offset_spacing_hz - c.lo_offset_spacing_hz);
    if (top_beat >= d.sample_rate_hz / 2.0)
        throw ConfigError("dsp.sample_rate_hz", fmt::format("highest beat note at {} Hz aliases", top_beat));

    if (cfg.cell) {
        at_path("cell", [&] { cfg.cell->cell.validate(); });
        if (cfg.cell->line_list.empty()) throw ConfigError("cell.line_list", "must not be empty");
        if (cfg.cell->peak_depth_db && !(*cfg.cell->peak_depth_db > 0.0))
            throw ConfigError("cell.peak_depth_db", "must be > 0");
    }
    if (cfg.speedup) {
        const auto& m = cfg.speedup->m_list;
        if (m.size() < 2) throw ConfigError("speedup.m_list", "needs at least two entries");
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i] < 1 || (i > 0 && m[i] <= m[i - 1]))
                throw ConfigError(fmt::format("speedup.m_list[{}]", i), "must be positive and ascending");
        if (m.back() > std::llround(segments))
            throw ConfigError("speedup.m_list", "largest M exceeds the segments in dsp.duration_s");
        if (cfg.speedup->n_seeds < 10) throw ConfigError("speedup.n_seeds", "must be >= 10");
        if (cfg.speedup->target_m != 0 &&
            std::find(m.begin(), m.end(), cfg.speedup->target_m) == m.end())
            throw ConfigError("speedup.target_m", "must be 0 or one of m_list");
    }
    if (cfg.robustness) {
        const auto& r = *cfg.robustness;
        if (!(r.uar >= 0.0)) throw ConfigError("robustness.uar", "must be >= 0");
        for (std::size_t i = 0; i < r.depths_db.size(); ++i)
            if (!(r.depths_db[i] >= 0.0)) throw ConfigError(fmt::format("robustness.depths_db[{}]", i), "must be >= 0");
        if (r.n_seeds < 1) throw ConfigError("robustness.n_seeds", "must be >= 1");
        if (r.n_averages < 1) throw ConfigError("robustness.n_averages", "must be >= 1");
    }
    if (cfg.uar_sweep) {
        const auto& u = *cfg.uar_sweep;
        for (std::size_t i = 0; i < u.uar_values.size(); ++i)
            if (!(u.uar_values[i] >= 0.0)) throw ConfigError(fmt::format("uar_sweep.uar_values[{}]", i), "must be >= 0");
        for (std::size_t i = 0; i < u.depths_db.size(); ++i)
            if (!(u.depths_db[i] >= 0.0)) throw ConfigError(fmt::format("uar_sweep.depths_db[{}]", i), "must be >= 0");
    }
}

Scenario to_scenario(const RunConfig& cfg) {
    const auto& c = cfg.comb;
    Scenario s;
    s.entangled = c.squeezing;
    s.lo = CombConfig::uniform(CombRole::lo, c.center_freq_hz, c.line_spacing_hz,
                               c.lo_offset_spacing_hz, c.n_pairs, c.lo_amplitude);
    s.signal_amplitude = c.signal_amplitude;
    s.signal_offset_spacing_hz = c.signal_offset_spacing_hz;
    s.detection = cfg.detection;
    return s;
}

PipelineOptions to_pipeline_options(const RunConfig& cfg) {
    PipelineOptions p;
    p.sample_rate_hz = cfg.dsp.sample_rate_hz;
    p.duration_s = cfg.dsp.duration_s;
    p.rbw_hz = cfg.dsp.rbw_hz;
    p.window = cfg.dsp.window;
    p.synthesis.kernel_halfwidth_hz = cfg.dsp.kernel_halfwidth_hz;
    p.synthesis.phase_noise = cfg.dsp.phase_noise;
    p.seed = cfg.seed;
    p.threads = cfg.threads;
    return p;
}

}  // namespace edcs
