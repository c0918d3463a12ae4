#include "sonoloc/signals.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sonoloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_nyquist(double top_freq, double rate, const char* what) {
    if (rate <= 2.0 * top_freq) {
        std::ostringstream msg;
        msg << what << ": band up to " << top_freq << " Hz needs rate > " << 2.0 * top_freq
            << " Hz, got " << rate;
        throw std::invalid_argument(msg.str());
    }
}

std::int64_t positive_mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

}  // namespace

ChirpParams ChirpParams::for_rate(double f0, double bandwidth_hz, double period_s, double rate,
                                  double amplitude) {
    if (period_s <= 0 || rate <= 0)
        throw std::invalid_argument("ChirpParams::for_rate: period and rate must be positive");
    ChirpParams p;
    p.f0 = f0;
    p.period_k = static_cast<int>(std::lround(period_s * rate));
    p.delta_f = bandwidth_hz / static_cast<double>(p.period_k);
    p.amplitude = amplitude;
    return p;
}

bool even_parity_bit(int id7) {
    int ones = 0;
    for (int b = 0; b < 7; ++b) ones += (id7 >> b) & 1;
    return (ones % 2) != 0;  // set the parity bit when the data has odd weight
}

std::array<int, 8> frame_bits(int id7) {
    if (id7 < 0 || id7 > 127) throw std::invalid_argument("frame_bits: id outside [0, 127]");
    std::array<int, 8> bits{};
    for (int b = 0; b < 7; ++b) bits[static_cast<std::size_t>(b)] = (id7 >> (6 - b)) & 1;
    bits[7] = even_parity_bit(id7) ? 1 : 0;
    return bits;
}

SampleBuffer gen_chirp(const ChirpParams& p, double rate, double duration, double t0) {
    if (p.f0 <= 0 || p.delta_f <= 0 || p.period_k <= 0)
        throw std::invalid_argument("gen_chirp: f0, delta_f, period_k must be positive");
    check_nyquist(p.top_freq(), rate, "gen_chirp");

    const auto n = static_cast<std::size_t>(std::lround(duration * rate));
    const auto base_index = static_cast<std::int64_t>(std::llround(t0 * rate));
    const auto period = static_cast<std::int64_t>(p.period_k);

    SampleBuffer out;
    out.rate = rate;
    out.t0 = t0;
    out.samples.resize(n);
    // Phase restarts at every sweep wrap; within a cycle the quadratic
    // phase (half factor on the frequency ramp) gives the linear sweep
    // f0 -> f0 + K*delta_f. The cycle position m depends only on the
    // absolute sample index, so the waveform is exactly K-periodic.
    for (std::size_t k = 0; k < n; ++k) {
        const auto m =
            static_cast<double>(positive_mod(base_index + static_cast<std::int64_t>(k), period));
        const double u = m / rate;  // time since cycle start
        out.samples[k] = p.amplitude * std::cos(kTwoPi * (p.f0 + 0.5 * m * p.delta_f) * u);
    }
    return out;
}

SampleBuffer fm0_encode(const std::array<int, 8>& bits, double bit_ms, double rate) {
    if (bit_ms <= 0) throw std::invalid_argument("fm0_encode: bit_ms must be positive");
    const double bit_len = bit_ms * 1e-3 * rate;
    const auto n = static_cast<std::size_t>(std::lround(8.0 * bit_len));

    SampleBuffer mask;
    mask.rate = rate;
    mask.t0 = 0.0;
    mask.samples.resize(n);

    // The level preceding the field is "on" (the preamble carrier); every
    // bit starts with a toggle, and a data 0 toggles again at mid-bit.
    int level = 1;
    for (int b = 0; b < 8; ++b) {
        const auto start = static_cast<std::size_t>(std::lround(b * bit_len));
        const auto mid = static_cast<std::size_t>(std::lround((b + 0.5) * bit_len));
        const auto end = static_cast<std::size_t>(std::lround((b + 1) * bit_len));
        level ^= 1;
        for (std::size_t i = start; i < mid && i < n; ++i) mask.samples[i] = level;
        if (bits[static_cast<std::size_t>(b)] == 0) level ^= 1;
        for (std::size_t i = mid; i < end && i < n; ++i) mask.samples[i] = level;
    }
    return mask;
}

std::optional<std::array<int, 8>> fm0_decode(const SampleBuffer& mask, double bit_ms) {
    const double bit_len = bit_ms * 1e-3 * mask.rate;
    if (mask.size() < static_cast<std::size_t>(std::lround(8.0 * bit_len))) return std::nullopt;

    auto half_mean = [&](int b, int half) {
        const auto lo = static_cast<std::size_t>(std::lround((b + 0.5 * half) * bit_len));
        const auto hi = static_cast<std::size_t>(std::lround((b + 0.5 * (half + 1)) * bit_len));
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += mask.samples[i];
        return acc / static_cast<double>(hi - lo);
    };

    std::array<int, 8> bits{};
    for (int b = 0; b < 8; ++b) {
        const double h1 = half_mean(b, 0);
        const double h2 = half_mean(b, 1);
        bits[static_cast<std::size_t>(b)] = std::abs(h1 - h2) > 0.5 ? 0 : 1;
    }
    return bits;
}

SampleBuffer gen_ubeacon_frame(const BeaconFrame& frame, double rate, double t0) {
    check_nyquist(frame.carrier_freq, rate, "gen_ubeacon_frame");
    const auto ms_to_samples = [rate](double ms) {
        return static_cast<std::size_t>(std::lround(ms * 1e-3 * rate));
    };
    const std::size_t n_pre = ms_to_samples(frame.preamble_ms);
    const std::size_t n_id = ms_to_samples(8.0 * frame.bit_ms);
    const std::size_t n_guard = ms_to_samples(frame.guard_ms);

    const auto mask = fm0_encode(frame_bits(frame.id), frame.bit_ms, rate);

    SampleBuffer out;
    out.rate = rate;
    out.t0 = t0;
    out.samples.resize(n_pre + n_id + n_guard, 0.0);
    const double w = kTwoPi * frame.carrier_freq / rate;
    for (std::size_t k = 0; k < n_pre; ++k) out.samples[k] = std::cos(w * static_cast<double>(k));
    for (std::size_t k = 0; k < n_id; ++k) {
        const std::size_t i = n_pre + k;
        out.samples[i] = mask.samples[k] * std::cos(w * static_cast<double>(i));
    }
    return out;
}

SampleBuffer gen_cw(double freq, double amplitude, double rate, double duration, double t0) {
    if (freq <= 0) throw std::invalid_argument("gen_cw: freq must be positive");
    check_nyquist(freq, rate, "gen_cw");
    const auto n = static_cast<std::size_t>(std::lround(duration * rate));
    SampleBuffer out;
    out.rate = rate;
    out.t0 = t0;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        out.samples[k] = amplitude * std::cos(kTwoPi * freq * (t0 + static_cast<double>(k) / rate));
    return out;
}

}  // namespace sonoloc
