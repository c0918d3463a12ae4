#include "sonoloc/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sonoloc/rng.hpp"

namespace sonoloc {

namespace {

constexpr int kSincHalfTaps = 15;     // 31 taps total
constexpr double kNearClampM = 0.1;   // spherical-spreading clamp

// Blackman-windowed sinc centered at (half + mu) for mu in [0, 1).
std::vector<double> sinc_kernel(double mu) {
    const int n = 2 * kSincHalfTaps + 1;
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = i - kSincHalfTaps - mu;
        const double sinc = x == 0.0 ? 1.0
                                     : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double r = x / (kSincHalfTaps + 1.0);
        const double w = std::abs(r) > 1.0
                             ? 0.0
                             : 0.42 + 0.5 * std::cos(std::numbers::pi * r) +
                                   0.08 * std::cos(2.0 * std::numbers::pi * r);
        h[static_cast<std::size_t>(i)] = sinc * w;
    }
    return h;
}

}  // namespace

SampleBuffer fractional_delay(const SampleBuffer& src, double delay_s) {
    if (src.empty()) throw std::invalid_argument("fractional_delay: empty buffer");
    const double delay_samples = delay_s * src.rate;
    const auto whole = static_cast<std::int64_t>(std::floor(delay_samples));
    const double mu = delay_samples - static_cast<double>(whole);

    const auto h = sinc_kernel(mu);
    const auto nh = static_cast<std::int64_t>(h.size());
    const auto nx = static_cast<std::int64_t>(src.size());

    SampleBuffer out;
    out.rate = src.rate;
    // Full convolution support; the kernel's own group delay (half taps + mu)
    // is folded into the start time so the net shift is exactly delay_s.
    out.t0 = src.t0 + static_cast<double>(whole - kSincHalfTaps) / src.rate;
    out.samples.assign(static_cast<std::size_t>(nx + nh - 1), 0.0);
    for (std::int64_t n = 0; n < nx + nh - 1; ++n) {
        double acc = 0.0;
        const std::int64_t i_lo = std::max<std::int64_t>(0, n - nx + 1);
        const std::int64_t i_hi = std::min<std::int64_t>(nh - 1, n);
        for (std::int64_t i = i_lo; i <= i_hi; ++i)
            acc += h[static_cast<std::size_t>(i)] * src.samples[static_cast<std::size_t>(n - i)];
        out.samples[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

SampleBuffer propagate(const SampleBuffer& src, const Vec3& src_pos, const Vec3& dst_pos,
                       double c, const std::vector<Echo>& echoes, double extra_delay_s) {
    if (c <= 0) throw std::invalid_argument("propagate: speed of sound must be positive");
    if (!std::isfinite(src_pos.norm()) || !std::isfinite(dst_pos.norm()))
        throw std::invalid_argument("propagate: non-finite position");

    const double d = distance(src_pos, dst_pos);
    const double base_delay = extra_delay_s + d / c;
    const double gain = 1.0 / std::max(d, kNearClampM);

    std::vector<SampleBuffer> paths;
    paths.reserve(echoes.size() + 1);
    {
        auto direct = fractional_delay(src, base_delay);
        for (double& v : direct.samples) v *= gain;
        paths.push_back(std::move(direct));
    }
    for (const auto& e : echoes) {
        auto copy = fractional_delay(src, base_delay + e.extra_delay_s);
        const double g = gain * e.gain;
        for (double& v : copy.samples) v *= g;
        paths.push_back(std::move(copy));
    }
    return paths.size() == 1 ? std::move(paths.front()) : mix(paths);
}

SampleBuffer mix(const std::vector<SampleBuffer>& buffers) {
    if (buffers.empty()) throw std::invalid_argument("mix: no buffers");
    const double rate = buffers.front().rate;
    double t_lo = std::numeric_limits<double>::infinity();
    double t_hi = -std::numeric_limits<double>::infinity();
    for (const auto& b : buffers) {
        if (b.rate != rate) throw std::invalid_argument("mix: rate mismatch");
        t_lo = std::min(t_lo, b.t0);
        t_hi = std::max(t_hi, b.end_time());
    }

    SampleBuffer out;
    out.rate = rate;
    out.t0 = t_lo;
    out.samples.assign(static_cast<std::size_t>(std::llround((t_hi - t_lo) * rate)), 0.0);
    for (const auto& b : buffers) {
        const double off = (b.t0 - t_lo) * rate;
        const auto off_i = static_cast<std::int64_t>(std::llround(off));
        if (std::abs(off - static_cast<double>(off_i)) > 1e-6)
            throw std::invalid_argument("mix: buffer start times not on a common sample grid");
        for (std::size_t k = 0; k < b.size(); ++k) {
            const auto idx = static_cast<std::size_t>(off_i) + k;
            if (idx < out.size()) out.samples[idx] += b.samples[k];
        }
    }
    return out;
}

SampleBuffer add_noise(const SampleBuffer& x, double snr_db, std::uint64_t seed) {
    if (x.empty()) throw std::invalid_argument("add_noise: empty buffer");
    if (std::isinf(snr_db)) return x;
    double power = 0.0;
    for (double v : x.samples) power += v * v;
    power /= static_cast<double>(x.size());
    const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
    return add_noise_sigma(x, sigma, seed);
}

SampleBuffer add_noise_sigma(const SampleBuffer& x, double sigma, std::uint64_t seed) {
    SampleBuffer out = x;
    if (sigma <= 0.0) return out;
    Rng rng(seed);
    for (double& v : out.samples) v += sigma * rng.gaussian();
    return out;
}

}  // namespace sonoloc
