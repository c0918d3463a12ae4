#include "sonoloc/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "sonoloc/dsp.hpp"

namespace sonoloc {

namespace {

using dsp::cplx;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
}

double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
    return v[idx];
}

}  // namespace

DetectorConfig DetectorConfig::for_chirp(double f_diff, double bandwidth_hz, double period_s,
                                         double rate) {
    DetectorConfig cfg;
    cfg.rate = rate;
    cfg.f_diff = f_diff;
    cfg.period_k = static_cast<int>(std::lround(period_s * rate));
    cfg.delta_f = bandwidth_hz / static_cast<double>(cfg.period_k);
    cfg.validate();
    return cfg;
}

void DetectorConfig::validate() const {
    if (rate <= 0 || period_k <= 0 || delta_f <= 0)
        throw std::invalid_argument("DetectorConfig: rate, period_k, delta_f must be positive");
    if (f_diff <= 0 || band_top() >= rate / 2)
        throw std::invalid_argument("DetectorConfig: downconverted band outside (0, rate/2)");
    const double slot = slot_ms * 1e-3 * rate;
    if (std::abs(slot - std::round(slot)) > 1e-6)
        throw std::invalid_argument("DetectorConfig: slot_ms*rate is not an integer sample count");
}

int DetectorConfig::preamble_samples() const {
    return static_cast<int>(std::lround(preamble_ms * 1e-3 * rate));
}

int DetectorConfig::slot_samples() const {
    return static_cast<int>(std::lround(slot_ms * 1e-3 * rate));
}

std::vector<cplx> dynamic_carrier(const DetectorConfig& cfg, int gamma, std::size_t n0,
                                  std::size_t count) {
    const auto period = static_cast<std::int64_t>(cfg.period_k);
    std::vector<cplx> w(count);
    for (std::size_t j = 0; j < count; ++j) {
        const auto n = static_cast<std::int64_t>(n0 + j) + gamma;
        const auto s = static_cast<double>(((n % period) + period) % period);
        const double phase =
            2.0 * std::numbers::pi * (cfg.f_diff + 0.5 * s * cfg.delta_f) * (s / cfg.rate);
        w[j] = std::polar(1.0, phase);
    }
    return w;
}

std::optional<ChirpAlignment> find_global_offset(const SampleBuffer& audio,
                                                 const DetectorConfig& cfg) {
    cfg.validate();
    const auto k = static_cast<std::size_t>(cfg.period_k);
    if (audio.size() < 2 * k)
        throw std::invalid_argument("find_global_offset: audio spans fewer than two sweep periods");

    const auto tmpl = dynamic_carrier(cfg, 0, 0, k);
    const auto corr = dsp::correlate_template(audio.samples, tmpl);

    // Segments from every beacon spike at lags congruent to -gamma mod K;
    // folding the magnitudes accumulates them all into one cycle.
    std::vector<double> folded(k, 0.0);
    std::vector<int> count(k, 0);
    for (std::size_t l = 0; l < corr.size(); ++l) {
        folded[l % k] += std::abs(corr[l]);
        ++count[l % k];
    }
    for (std::size_t g = 0; g < k; ++g)
        if (count[g] > 0) folded[g] /= count[g];

    const auto best = std::max_element(folded.begin(), folded.end());
    const auto lag = static_cast<std::size_t>(best - folded.begin());
    const double med = median_of(folded);
    const double score = med > 0 ? *best / med : 0.0;
    if (score < cfg.peak_threshold) return std::nullopt;

    ChirpAlignment out;
    out.gamma = static_cast<int>((k - lag) % k);
    out.score = score;
    return out;
}

namespace {

// |boxcar sum| of the carrier-demodulated audio for every window position.
// This evaluates the two-dimensional correlation objective along tau for a
// fixed gamma in O(N).
std::vector<double> preamble_correlation(const SampleBuffer& audio, int gamma,
                                         const DetectorConfig& cfg) {
    const auto n = audio.size();
    const auto len = static_cast<std::size_t>(cfg.preamble_samples());
    if (n < len) return {};
    const auto w = dynamic_carrier(cfg, gamma, 0, n);
    std::vector<cplx> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + audio.samples[i] * std::conj(w[i]);
    std::vector<double> corr(n - len + 1);
    for (std::size_t tau = 0; tau + len <= n; ++tau)
        corr[tau] = std::abs(prefix[tau + len] - prefix[tau]);
    return corr;
}

}  // namespace

std::vector<Detection> detect_preambles(const SampleBuffer& audio, int gamma,
                                        const DetectorConfig& cfg) {
    cfg.validate();
    const auto corr = preamble_correlation(audio, gamma, cfg);
    if (corr.empty()) return {};

    const double med = median_of(corr);
    const double floor = med > 0 ? med : 1e-300;
    const double threshold = cfg.peak_threshold * floor;
    const auto min_sep = static_cast<std::size_t>(cfg.preamble_samples());

    std::vector<Detection> dets;
    for (std::size_t tau = 1; tau + 1 < corr.size(); ++tau) {
        if (corr[tau] < threshold) continue;
        if (corr[tau] < corr[tau - 1] || corr[tau] <= corr[tau + 1]) continue;
        const std::size_t lo = tau > min_sep ? tau - min_sep : 0;
        const std::size_t hi = std::min(corr.size(), tau + min_sep + 1);
        bool is_max = true;
        for (std::size_t j = lo; j < hi && is_max; ++j)
            if (corr[j] > corr[tau]) is_max = false;
        if (!is_max) continue;

        Detection d;
        d.tau = static_cast<int>(tau);
        d.gamma = gamma;
        d.b_start = static_cast<double>(tau) +
                    dsp::parabolic_peak_offset(corr[tau - 1], corr[tau], corr[tau + 1]);
        d.peak_score = corr[tau] / floor;
        dets.push_back(d);
    }
    std::sort(dets.begin(), dets.end(),
              [](const Detection& a, const Detection& b) { return a.b_start < b.b_start; });
    return dets;
}

void decode_id(const SampleBuffer& audio, Detection& det, const DetectorConfig& cfg) {
    cfg.validate();
    det.id.reset();
    det.parity_ok = false;

    const double bit_len = cfg.bit_ms * 1e-3 * cfg.rate;
    const double id_start = det.b_start + cfg.preamble_samples();
    const auto half_bit = static_cast<std::int64_t>(std::lround(bit_len / 2.0));
    const auto lo = static_cast<std::int64_t>(std::floor(id_start)) - half_bit;
    const auto hi =
        static_cast<std::int64_t>(std::ceil(id_start + 8.0 * bit_len)) + half_bit;
    if (lo < 0 || hi >= static_cast<std::int64_t>(audio.size()))
        throw std::invalid_argument("decode_id: ID field not fully inside audio");

    // Demodulate with the continuing carrier replica and smooth the complex
    // baseband over a quarter bit; the magnitude is the on/off envelope.
    const auto count = static_cast<std::size_t>(hi - lo + 1);
    const auto w = dynamic_carrier(cfg, det.gamma, static_cast<std::size_t>(lo), count);
    std::vector<cplx> base(count);
    for (std::size_t i = 0; i < count; ++i)
        base[i] = audio.samples[static_cast<std::size_t>(lo) + i] * std::conj(w[i]);

    const auto smooth = static_cast<std::size_t>(std::lround(bit_len / 4.0));
    std::vector<cplx> prefix(count + 1, 0.0);
    for (std::size_t i = 0; i < count; ++i) prefix[i + 1] = prefix[i] + base[i];
    std::vector<double> env(count, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t a = i > smooth / 2 ? i - smooth / 2 : 0;
        const std::size_t b = std::min(count, i + smooth / 2 + 1);
        env[i] = std::abs(prefix[b] - prefix[a]) / static_cast<double>(b - a);
    }

    // env index of the nominal ID start.
    const double origin = id_start - static_cast<double>(lo);

    const auto edge_window = static_cast<std::int64_t>(std::lround(bit_len / 4.0));
    auto mean_env = [&](std::int64_t a, std::int64_t b) {
        a = std::clamp<std::int64_t>(a, 0, static_cast<std::int64_t>(count));
        b = std::clamp<std::int64_t>(b, a, static_cast<std::int64_t>(count));
        if (a == b) return 0.0;
        double acc = 0.0;
        for (std::int64_t i = a; i < b; ++i) acc += env[static_cast<std::size_t>(i)];
        return acc / static_cast<double>(b - a);
    };

    // FM0 guarantees a level transition at every bit boundary, so the bit
    // clock can be re-acquired from the field itself; this keeps decoding
    // insensitive to preamble misalignment up to half a bit.
    std::int64_t best_shift = 0;
    double best_edge = -1.0;
    for (std::int64_t shift = -half_bit; shift <= half_bit; ++shift) {
        double edges = 0.0;
        for (int b = 0; b <= 8; ++b) {
            const auto pos =
                static_cast<std::int64_t>(std::lround(origin + b * bit_len)) + shift;
            edges += std::abs(mean_env(pos - edge_window, pos) - mean_env(pos, pos + edge_window));
        }
        if (edges > best_edge) {
            best_edge = edges;
            best_shift = shift;
        }
    }

    const double aligned = origin + static_cast<double>(best_shift);
    const double theta =
        0.5 * (quantile_of(env, 0.1) + quantile_of(env, 0.9));  // on/off slicer level

    std::array<int, 8> bits{};
    for (int b = 0; b < 8; ++b) {
        const auto h1a = static_cast<std::int64_t>(std::lround(aligned + b * bit_len));
        const auto h1b = static_cast<std::int64_t>(std::lround(aligned + (b + 0.5) * bit_len));
        const auto h2b = static_cast<std::int64_t>(std::lround(aligned + (b + 1.0) * bit_len));
        const bool on1 = mean_env(h1a, h1b) > theta;
        const bool on2 = mean_env(h1b, h2b) > theta;
        bits[static_cast<std::size_t>(b)] = on1 != on2 ? 0 : 1;
    }

    int id = 0;
    int ones = 0;
    for (int b = 0; b < 7; ++b) {
        id = (id << 1) | bits[static_cast<std::size_t>(b)];
        ones += bits[static_cast<std::size_t>(b)];
    }
    det.parity_ok = ((ones + bits[7]) % 2) == 0;
    if (det.parity_ok) det.id = id;
}

std::vector<ToaEstimate> estimate_toas(const std::vector<Detection>& dets,
                                       const DetectorConfig& cfg) {
    if (dets.empty()) return {};
    double b1 = dets.front().b_start;
    for (const auto& d : dets) b1 = std::min(b1, d.b_start);
    const double slot = cfg.slot_samples();

    std::map<int, ToaEstimate> by_id;
    for (const auto& d : dets) {
        if (!d.id || !d.parity_ok) continue;
        ToaEstimate e;
        e.id = *d.id;
        e.toa_s = std::fmod(d.b_start - b1, slot) / cfg.rate;
        e.peak_score = d.peak_score;
        auto it = by_id.find(e.id);
        if (it == by_id.end() || it->second.peak_score < e.peak_score) by_id[e.id] = e;
    }
    std::vector<ToaEstimate> out;
    out.reserve(by_id.size());
    for (const auto& [id, e] : by_id) out.push_back(e);
    return out;
}

SampleBuffer turbocharge(const SampleBuffer& primary, const SampleBuffer& secondary,
                         const DetectorConfig& cfg) {
    if (primary.size() != secondary.size())
        throw std::invalid_argument("turbocharge: channel length mismatch");
    if (primary.rate != secondary.rate)
        throw std::invalid_argument("turbocharge: channel rate mismatch");

    constexpr double kNoiseSmooth = 0.9;  // recursive noise-PSD memory
    constexpr double kGainFloor = 0.03;

    auto pri = dsp::stft(primary.samples);
    auto sec = dsp::stft(secondary.samples);
    const std::size_t n_bins = sec.frames.front().size();
    const double bin_hz = sec.bin_hz(secondary.rate);
    const auto band_lo = static_cast<std::size_t>(cfg.f_diff / bin_hz);
    const auto band_hi =
        std::min(n_bins - 1, static_cast<std::size_t>(cfg.band_top() / bin_hz) + 1);

    auto band_power = [&](const std::vector<cplx>& frame) {
        double acc = 0.0;
        for (std::size_t b = band_lo; b <= band_hi; ++b) acc += std::norm(frame[b]);
        return acc / static_cast<double>(band_hi - band_lo + 1);
    };

    std::vector<double> noise_psd(n_bins, 0.0);
    bool have_noise = false;

    for (std::size_t f = 0; f < sec.frames.size(); ++f) {
        const double p_pri = band_power(pri.frames[f]);
        const double p_sec = band_power(sec.frames[f]);
        const double diff_db =
            10.0 * std::log10(std::max(p_sec, 1e-300) / std::max(p_pri, 1e-300));

        if (std::abs(diff_db) < cfg.psd_gate_db) {
            // Homogeneous PSDs: no beacon present, learn the noise floor.
            for (std::size_t b = 0; b < n_bins; ++b) {
                const double p = std::norm(sec.frames[f][b]);
                noise_psd[b] = have_noise ? kNoiseSmooth * noise_psd[b] + (1 - kNoiseSmooth) * p
                                          : p;
            }
            have_noise = true;
        }
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double p = std::norm(sec.frames[f][b]);
            const double sig = std::max(p - noise_psd[b], 0.0);
            const double gain = std::max(sig / std::max(sig + noise_psd[b], 1e-300), kGainFloor);
            sec.frames[f][b] *= gain;
        }
    }

    SampleBuffer out;
    out.rate = secondary.rate;
    out.t0 = secondary.t0;
    out.samples = dsp::istft(sec);
    return out;
}

std::optional<std::size_t> identify_slope(const SampleBuffer& audio,
                                          const std::vector<DetectorConfig>& candidates) {
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto align = find_global_offset(audio, candidates[i]);
        if (align && align->score > best_score) {
            best_score = align->score;
            best = i;
        }
    }
    return best;
}

}  // namespace sonoloc
