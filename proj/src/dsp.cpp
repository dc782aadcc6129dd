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


#include "edcs/dsp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include <boost/math/distributions/gamma.hpp>
#include <fmt/format.h>

#include "edcs/error.hpp"
#include "fft.hpp"
#include "rng.hpp"

namespace edcs {

double PhaseNoiseModel::jitter_variance(int n) const {
    return 2.0 * n * n * std::pow(10.0, level_dbc_hz / 10.0) / segment_duration_s;
}

void PhaseNoiseModel::validate() const {
    if (!std::isfinite(level_dbc_hz)) throw InvalidArgument("phase-noise level must be finite");
    if (!(segment_duration_s > 0.0)) throw InvalidArgument("phase-noise segment must be > 0 s");
}

std::size_t sample_count(double sample_rate_hz, double duration_s) {
    if (!(sample_rate_hz > 0.0) || !(duration_s > 0.0))
        throw InvalidArgument("sample rate and duration must be > 0");
    const double n = sample_rate_hz * duration_s;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-6 * std::max(1.0, n) || rounded < 1.0)
        throw InvalidArgument(
            fmt::format("sample_rate * duration = {} is not an integer sample count", n));
    return static_cast<std::size_t>(rounded);
}

std::size_t Interferogram::expected_length() const { return sample_count(sample_rate_hz, duration_s); }

void Interferogram::validate() const {
    if (samples.size() != expected_length())
        throw InvalidArgument("interferogram length does not match sample_rate * duration");
    for (double s : samples)
        if (!std::isfinite(s)) throw NumericError("interferogram contains non-finite samples");
}

namespace {

// Integer bin of frequency f on a grid of spacing df, or -1 when off-grid.
long long grid_bin(double f, double df) {
    const double k = f / df;
    const double rounded = std::round(k);
    return std::abs(k - rounded) <= 1e-6 ? static_cast<long long>(rounded) : -1;
}

}  // namespace

Interferogram synthesize(std::span<const BeatnoteRecord> records, double sample_rate_hz,
                         double duration_s, const DetectionImperfections& imp,
                         const SynthesisOptions& options, std::uint64_t seed) {
    imp.validate();
    const std::size_t n = sample_count(sample_rate_hz, duration_s);
    const double nyquist = sample_rate_hz / 2.0;
    for (const auto& r : records) {
        if (!(r.rf_freq_hz >= 0.0) || r.rf_freq_hz >= nyquist)
            throw InvalidArgument(fmt::format(
                "beat note {} at {} Hz aliases: it must lie below fs/2 = {} Hz", r.index,
                r.rf_freq_hz, nyquist));
        if (!(r.noise_var > 0.0) || !std::isfinite(r.noise_var))
            throw InvalidArgument(fmt::format("beat note {} has invalid noise_var", r.index));
        if (!std::isfinite(r.mean_amp.real()) || !std::isfinite(r.mean_amp.imag()))
            throw InvalidArgument(fmt::format("beat note {} has non-finite mean", r.index));
    }
    if (!(options.kernel_halfwidth_hz >= 0.0)) throw InvalidArgument("kernel half-width must be >= 0");
    if (options.phase_noise) options.phase_noise->validate();

    Interferogram ifg{sample_rate_hz, duration_s, seed, {}, 0};
    detail::RealFft fft(n);
    const std::size_t bins = fft.bins();
    const double df = sample_rate_hz / static_cast<double>(n);
    auto* spec = fft.spectrum();
    std::fill(spec, spec + bins, std::complex<double>{});

    if (options.include_noise) {
        const double baseline = 1.0 + imp.electrical_variance();
        // Per-bin variance: the nearest beat's noise_var inside its kernel.
        std::vector<double> var(bins, baseline);
        std::vector<double> dist(bins, std::numeric_limits<double>::infinity());
        for (const auto& r : records) {
            const auto lo = static_cast<long long>(
                std::ceil((r.rf_freq_hz - options.kernel_halfwidth_hz) / df - 1e-9));
            const auto hi = static_cast<long long>(
                std::floor((r.rf_freq_hz + options.kernel_halfwidth_hz) / df + 1e-9));
            for (long long k = std::max(0LL, lo); k <= std::min<long long>(hi, bins - 1); ++k) {
                const double d = std::abs(k * df - r.rf_freq_hz);
                if (d < dist[k]) {
                    dist[k] = d;
                    var[k] = r.noise_var;
                }
            }
        }
        auto rng = detail::make_engine(seed, 0);
        std::normal_distribution<double> normal;
        const double nd = static_cast<double>(n);
        for (std::size_t k = 0; k < bins; ++k) {
            const bool real_bin = k == 0 || (n % 2 == 0 && k == bins - 1);
            if (real_bin) {
                spec[k] = std::sqrt(nd * var[k]) * normal(rng);
            } else {
                const double s = std::sqrt(nd * var[k] / 2.0);
                const double re = normal(rng);
                const double im = normal(rng);
                spec[k] = {s * re, s * im};
            }
        }
    }

    // Tones on bin centres without jitter go straight into the spectrum.
    std::vector<const BeatnoteRecord*> time_domain;
    for (const auto& r : records) {
        if (r.mean_amp == std::complex<double>{}) continue;
        const long long k = grid_bin(r.rf_freq_hz, df);
        if (options.phase_noise || k <= 0) {
            time_domain.push_back(&r);
            continue;
        }
        spec[k] += 0.5 * static_cast<double>(n) * r.mean_amp;
    }

    fft.inverse();
    ifg.samples.assign(fft.real(), fft.real() + n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& s : ifg.samples) s *= inv_n;

    if (!time_domain.empty()) {
        std::size_t seg_len = n;
        if (options.phase_noise)
            seg_len = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::llround(options.phase_noise->segment_duration_s * sample_rate_hz)));
        auto jitter_rng = detail::make_engine(seed, 1);
        std::normal_distribution<double> normal;
        for (const auto* r : time_domain) {
            const double a = std::abs(r->mean_amp);
            const double phi0 = std::arg(r->mean_amp);
            const double w = 2.0 * std::numbers::pi * r->rf_freq_hz / sample_rate_hz;
            const double sigma =
                options.phase_noise ? std::sqrt(options.phase_noise->jitter_variance(r->index)) : 0.0;
            for (std::size_t start = 0; start < n; start += seg_len) {
                const double phi = phi0 + (sigma > 0.0 ? sigma * normal(jitter_rng) : 0.0);
                const std::size_t stop = std::min(n, start + seg_len);
                for (std::size_t t = start; t < stop; ++t)
                    ifg.samples[t] += a * std::cos(w * static_cast<double>(t) + phi);
            }
        }
    }
    return ifg;
}

// ------------------------------------------------------------------ spectra

double Spectrum::total_power() const {
    if (power.empty()) return 0.0;
    const std::size_t n = segment_length;
    double sum = power.front();
    const std::size_t last = power.size() - 1;
    for (std::size_t k = 1; k < power.size(); ++k)
        sum += (n % 2 == 0 && k == last) ? power[k] : 2.0 * power[k];
    return sum / static_cast<double>(n);
}

namespace {

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == Window::hann)
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(n));
    return out;
}

struct Segmenter {
    std::size_t seg_len;
    std::size_t n_segments;
    std::vector<double> window;
    double sum = 0.0;
    double sum_sq = 0.0;
    detail::RealFft fft;

    Segmenter(const Interferogram& ifg, double rbw_hz, Window w)
        : seg_len(segment_length(ifg, rbw_hz)),
          n_segments(ifg.samples.size() / seg_len),
          window(make_window(w, seg_len)),
          fft(seg_len) {
        for (double v : window) {
            sum += v;
            sum_sq += v * v;
        }
    }

    static std::size_t segment_length(const Interferogram& ifg, double rbw_hz) {
        if (!(rbw_hz > 0.0)) throw InvalidArgument("rbw must be > 0");
        const double len = ifg.sample_rate_hz / rbw_hz;
        const double rounded = std::round(len);
        if (std::abs(len - rounded) > 1e-6 * len || rounded < 2.0)
            throw InvalidArgument(fmt::format(
                "rbw {} Hz does not give an integer segment length at fs = {} Hz", rbw_hz,
                ifg.sample_rate_hz));
        const auto seg = static_cast<std::size_t>(rounded);
        if (seg > ifg.samples.size())
            throw InvalidArgument(fmt::format("segment of {} samples is longer than the record ({})",
                                              seg, ifg.samples.size()));
        return seg;
    }

    Spectrum blank(const Interferogram& ifg, double rbw_hz, Window w) const {
        Spectrum s;
        s.rbw_hz = rbw_hz;
        s.sample_rate_hz = ifg.sample_rate_hz;
        s.window = w;
        s.segment_length = seg_len;
        s.window_sum = sum;
        s.window_sum_sq = sum_sq;
        s.power.assign(seg_len / 2 + 1, 0.0);
        s.n_averaged = 0;
        return s;
    }

    // Adds segment i's periodogram to acc.
    void accumulate(const Interferogram& ifg, std::size_t i, std::vector<double>& acc) {
        const double* src = ifg.samples.data() + i * seg_len;
        double* dst = fft.real();
        for (std::size_t t = 0; t < seg_len; ++t) dst[t] = src[t] * window[t];
        fft.forward();
        const auto* x = fft.spectrum();
        const double scale = 1.0 / sum_sq;
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(x[k]) * scale;
    }
};

}  // namespace

std::vector<Spectrum> segment_and_fft(const Interferogram& ifg, double rbw_hz, Window window,
                                      std::size_t max_segments) {
    Segmenter seg(ifg, rbw_hz, window);
    std::size_t count = seg.n_segments;
    if (max_segments > 0) count = std::min(count, max_segments);
    std::vector<Spectrum> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Spectrum s = seg.blank(ifg, rbw_hz, window);
        s.n_averaged = 1;
        seg.accumulate(ifg, i, s.power);
        out.push_back(std::move(s));
    }
    return out;
}

Spectrum average_spectra(std::span<const Spectrum> spectra) {
    if (spectra.empty()) throw InvalidArgument("nothing to average");
    Spectrum out = spectra.front();
    std::fill(out.power.begin(), out.power.end(), 0.0);
    out.n_averaged = 0;
    for (const auto& s : spectra) {
        if (s.power.size() != out.power.size() || s.rbw_hz != out.rbw_hz ||
            s.sample_rate_hz != out.sample_rate_hz || s.window != out.window)
            throw InvalidArgument("cannot average spectra on different frequency grids");
        for (std::size_t k = 0; k < out.power.size(); ++k) out.power[k] += s.power[k] * s.n_averaged;
        out.n_averaged += s.n_averaged;
    }
    for (double& p : out.power) p /= out.n_averaged;
    return out;
}

std::vector<Spectrum> cumulative_averages(const Interferogram& ifg, double rbw_hz, Window window,
                                          std::span<const int> m_list) {
    Segmenter seg(ifg, rbw_hz, window);
    if (m_list.empty()) return {};
    for (std::size_t i = 0; i < m_list.size(); ++i)
        if (m_list[i] < 1 || (i > 0 && m_list[i] <= m_list[i - 1]))
            throw InvalidArgument("averaging counts must be positive and strictly ascending");
    if (static_cast<std::size_t>(m_list.back()) > seg.n_segments)
        throw InvalidArgument(fmt::format("{} averages requested but the record holds {} segments",
                                          m_list.back(), seg.n_segments));
    Spectrum running = seg.blank(ifg, rbw_hz, window);
    std::vector<Spectrum> out;
    std::size_t done = 0;
    for (int m : m_list) {
        for (; done < static_cast<std::size_t>(m); ++done) seg.accumulate(ifg, done, running.power);
        Spectrum s = running;
        s.n_averaged = m;
        for (double& p : s.power) p /= m;
        out.push_back(std::move(s));
    }
    return out;
}

// --------------------------------------------------------------- extraction

namespace {

// Median of the mean of M unit-mean exponentials, i.e. of Gamma(M, 1/M).
double averaged_median_factor(int m) {
    static thread_local std::vector<double> cache;
    if (static_cast<std::size_t>(m) < cache.size() && cache[m] > 0.0) return cache[m];
    const boost::math::gamma_distribution<double> g(m, 1.0 / m);
    const double v = boost::math::median(g);
    if (cache.size() <= static_cast<std::size_t>(m)) cache.resize(m + 1, 0.0);
    cache[m] = v;
    return v;
}

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double upper = v[mid];
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

}  // namespace

std::vector<ExtractedBeat> extract_beatnotes(const Spectrum& spec, double delta_f_hz, int n_max) {
    if (!(delta_f_hz > 0.0)) throw InvalidArgument("delta_f must be > 0");
    if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
    if (spec.n_averaged < 1 || spec.power.empty()) throw InvalidArgument("empty spectrum");
    std::vector<ExtractedBeat> out;
    const double bias = averaged_median_factor(spec.n_averaged);
    const long long last = static_cast<long long>(spec.power.size()) - 1;
    for (int n = 1; n <= n_max; ++n) {
        const double f = n * delta_f_hz;
        const long long k = grid_bin(f, spec.rbw_hz);
        if (k < 0)
            throw InvalidArgument(fmt::format(
                "beat {} at {} Hz falls between bins of the {} Hz grid; choose a segment length "
                "holding an integer number of beat periods",
                n, f, spec.rbw_hz));
        if (k - kGuardBins - kFloorBins < 1 || k + kGuardBins + kFloorBins > last)
            throw InvalidArgument(
                fmt::format("beat {} at {} Hz is too close to the band edge for a floor estimate", n, f));
        std::vector<double> neighbours;
        for (long long j = kGuardBins + 1; j <= kGuardBins + kFloorBins; ++j) {
            neighbours.push_back(spec.power[k - j]);
            neighbours.push_back(spec.power[k + j]);
        }
        const double floor = median(std::move(neighbours)) / bias;
        const double excess = std::max(spec.power[k] - floor, 0.0);
        ExtractedBeat b;
        b.n = n;
        b.freq_hz = f;
        b.amplitude = 2.0 * std::sqrt(excess * spec.window_sum_sq) / spec.window_sum;
        b.noise_floor = floor;
        b.amplitude_sigma = std::sqrt(2.0 * floor * spec.window_sum_sq /
                                      (spec.window_sum * spec.window_sum * spec.n_averaged));
        out.push_back(b);
    }
    return out;
}

std::vector<TransmittanceEstimate> estimate_transmittance(std::span<const ExtractedBeat> sample,
                                                          std::span<const ExtractedBeat> reference) {
    if (sample.size() != reference.size())
        throw InvalidArgument("sample and reference hold different line sets");
    std::vector<TransmittanceEstimate> out;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto& s = sample[i];
        const auto& r = reference[i];
        if (s.n != r.n) throw InvalidArgument("sample and reference hold different line sets");
        if (!(r.amplitude > 0.0))
            throw InvalidArgument(fmt::format("reference amplitude of line {} is zero", r.n));
        const double ratio = s.amplitude / r.amplitude;
        const double eta = ratio * ratio;
        const double rel_s = s.amplitude > 0.0 ? s.amplitude_sigma / s.amplitude : 0.0;
        const double rel_r = r.amplitude_sigma / r.amplitude;
        double sigma = 2.0 * eta * std::hypot(rel_s, rel_r);
        // A vanished sample line: the amplitude error bounds eta directly.
        if (s.amplitude == 0.0) sigma = std::pow(s.amplitude_sigma / r.amplitude, 2);
        out.push_back({s.n, s.freq_hz, eta, sigma});
    }
    return out;
}

// ---------------------------------------------------------------------- I/O

namespace {

constexpr char kMagic[8] = {'E', 'D', 'C', 'S', 'I', 'F', 'G', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
    auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    os.write(reinterpret_cast<const char*>(bits.data()), bits.size());
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bits;
    if (!is.read(reinterpret_cast<char*>(bits.data()), bits.size()))
        throw IoError("truncated interferogram file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    return std::bit_cast<T>(bits);
}

}  // namespace

void write_interferogram(const std::filesystem::path& path, const Interferogram& ifg) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os.write(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(os, kVersion);
    put_le<std::uint32_t>(os, 0);
    put_le<double>(os, ifg.sample_rate_hz);
    put_le<double>(os, ifg.duration_s);
    put_le<std::uint64_t>(os, ifg.seed);
    put_le<std::uint64_t>(os, ifg.samples.size());
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(ifg.samples.data()),
                 static_cast<std::streamsize>(ifg.samples.size() * sizeof(double)));
    } else {
        for (double s : ifg.samples) put_le<double>(os, s);
    }
    if (!os) throw IoError("write failed for " + path.string());
}

Interferogram read_interferogram(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw IoError(path.string() + " is not an interferogram file");
    const auto version = get_le<std::uint32_t>(is);
    if (version != kVersion) throw IoError(fmt::format("unsupported interferogram version {}", version));
    (void)get_le<std::uint32_t>(is);
    Interferogram ifg;
    ifg.sample_rate_hz = get_le<double>(is);
    ifg.duration_s = get_le<double>(is);
    ifg.seed = get_le<std::uint64_t>(is);
    const auto count = get_le<std::uint64_t>(is);
    std::size_t expected = 0;
    try {
        expected = ifg.expected_length();
    } catch (const InvalidArgument& e) {
        throw IoError(std::string("corrupt interferogram header: ") + e.what());
    }
    if (count != expected) throw IoError("interferogram sample count disagrees with its header");
    ifg.samples.resize(count);
    if constexpr (std::endian::native == std::endian::little) {
        if (!is.read(reinterpret_cast<char*>(ifg.samples.data()),
                     static_cast<std::streamsize>(count * sizeof(double))))
            throw IoError("truncated interferogram file");
    } else {
        for (auto& s : ifg.samples) s = get_le<double>(is);
    }
    if (is.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in interferogram file");
    return ifg;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec) {
    os << "freq_hz,power\n";
    for (std::size_t k = 0; k < spec.power.size(); ++k)
        os << fmt::format("{:.17g},{:.17g}\n", spec.frequency(k), spec.power[k]);
}

}  // namespace edcs
