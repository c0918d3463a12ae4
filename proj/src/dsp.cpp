#include "sonoloc/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace sonoloc::dsp {

namespace {

// FFTW plan creation is not thread-safe; executions on distinct buffers are.
// Plans are cached per (size, kind) and reused with the new-array execute API.
std::mutex g_plan_mutex;

struct PlanCache {
    std::map<std::size_t, fftw_plan> r2c, c2r, fwd, bwd;

    ~PlanCache() {
        // Leak plans on purpose: FFTW plan destruction during static teardown
        // races with fftw internals when worker threads are still unwinding.
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

fftw_plan get_plan_r2c(std::size_t n) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = cache().r2c.find(n);
    if (it != cache().r2c.end()) return it->second;
    std::vector<double> in(n);
    std::vector<cplx> out(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                       reinterpret_cast<fftw_complex*>(out.data()),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache().r2c[n] = p;
    return p;
}

fftw_plan get_plan_c2r(std::size_t n) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = cache().c2r.find(n);
    if (it != cache().c2r.end()) return it->second;
    std::vector<cplx> in(n / 2 + 1);
    std::vector<double> out(n);
    fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                       reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache().c2r[n] = p;
    return p;
}

fftw_plan get_plan_c2c(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& m = sign == FFTW_FORWARD ? cache().fwd : cache().bwd;
    auto it = m.find(n);
    if (it != m.end()) return it->second;
    std::vector<cplx> in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    m[n] = p;
    return p;
}

std::size_t next_fast_size(std::size_t n) {
    // Smallest 2^a * 3^b * 5^c >= n keeps FFTW away from slow prime sizes.
    auto smooth = [](std::size_t v) {
        for (std::size_t f : {2, 3, 5})
            while (v % f == 0) v /= f;
        return v == 1;
    };
    while (!smooth(n)) ++n;
    return n;
}

}  // namespace

std::vector<cplx> rfft(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("rfft: empty input");
    std::vector<double> in(x.begin(), x.end());
    std::vector<cplx> out(n / 2 + 1);
    fftw_execute_dft_r2c(get_plan_r2c(n), in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<double> irfft(std::span<const cplx> spectrum, std::size_t n_out) {
    if (spectrum.size() != n_out / 2 + 1)
        throw std::invalid_argument("irfft: spectrum size does not match n_out");
    std::vector<cplx> in(spectrum.begin(), spectrum.end());
    std::vector<double> out(n_out);
    fftw_execute_dft_c2r(get_plan_c2r(n_out), reinterpret_cast<fftw_complex*>(in.data()),
                         out.data());
    const double s = 1.0 / static_cast<double>(n_out);
    for (double& v : out) v *= s;
    return out;
}

std::vector<cplx> fft(std::span<const cplx> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("fft: empty input");
    std::vector<cplx> in(x.begin(), x.end()), out(n);
    fftw_execute_dft(get_plan_c2c(n, FFTW_FORWARD), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<cplx> ifft(std::span<const cplx> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("ifft: empty input");
    std::vector<cplx> in(x.begin(), x.end()), out(n);
    fftw_execute_dft(get_plan_c2c(n, FFTW_BACKWARD), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double s = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= s;
    return out;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
    if (x.empty() || h.empty()) throw std::invalid_argument("convolve: empty input");
    const std::size_t n_lin = x.size() + h.size() - 1;
    const std::size_t n = next_fast_size(n_lin);
    std::vector<double> xp(n, 0.0), hp(n, 0.0);
    std::copy(x.begin(), x.end(), xp.begin());
    std::copy(h.begin(), h.end(), hp.begin());
    auto X = rfft(xp);
    auto H = rfft(hp);
    for (std::size_t i = 0; i < X.size(); ++i) X[i] *= H[i];
    auto y = irfft(X, n);
    y.resize(n_lin);
    return y;
}

std::vector<double> filter_centered(std::span<const double> x, std::span<const double> h) {
    if (h.size() % 2 == 0) throw std::invalid_argument("filter_centered: even tap count");
    auto full = convolve(x, h);
    const std::size_t delay = (h.size() - 1) / 2;
    std::vector<double> out(x.size());
    std::copy(full.begin() + static_cast<std::ptrdiff_t>(delay),
              full.begin() + static_cast<std::ptrdiff_t>(delay + x.size()), out.begin());
    return out;
}

std::vector<cplx> correlate_template(std::span<const double> x, std::span<const cplx> t) {
    if (t.size() > x.size())
        throw std::invalid_argument("correlate_template: template longer than signal");
    const std::size_t n_lags = x.size() - t.size() + 1;
    const std::size_t n = next_fast_size(x.size() + t.size());
    std::vector<cplx> xp(n, 0.0), tp(n, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[i];
    std::copy(t.begin(), t.end(), tp.begin());
    auto X = fft(xp);
    auto T = fft(tp);
    for (std::size_t i = 0; i < n; ++i) X[i] *= std::conj(T[i]);
    auto c = ifft(X);
    c.resize(n_lags);
    return c;
}

std::vector<double> design_kaiser_lowpass(int taps, double cutoff_hz, double rate,
                                          double atten_db) {
    if (taps < 3 || taps % 2 == 0)
        throw std::invalid_argument("design_kaiser_lowpass: taps must be odd and >= 3");
    if (cutoff_hz <= 0 || cutoff_hz >= rate / 2)
        throw std::invalid_argument("design_kaiser_lowpass: cutoff outside (0, rate/2)");

    double beta = 0.0;
    if (atten_db > 50.0)
        beta = 0.1102 * (atten_db - 8.7);
    else if (atten_db >= 21.0)
        beta = 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);

    auto bessel_i0 = [](double v) {
        // Series converges quickly for the beta range used here.
        double sum = 1.0, term = 1.0;
        for (int k = 1; k < 50; ++k) {
            term *= (v / (2.0 * k)) * (v / (2.0 * k));
            sum += term;
            if (term < 1e-16 * sum) break;
        }
        return sum;
    };

    const int m = taps - 1;
    const double fc = cutoff_hz / rate;  // cycles per sample
    const double i0b = bessel_i0(beta);
    std::vector<double> h(taps);
    double dc = 0.0;
    for (int i = 0; i < taps; ++i) {
        const double k = i - m / 2.0;
        const double sinc = k == 0.0 ? 2.0 * fc
                                     : std::sin(2.0 * std::numbers::pi * fc * k) /
                                           (std::numbers::pi * k);
        const double r = 2.0 * i / m - 1.0;
        const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[i] = sinc * w;
        dc += h[i];
    }
    for (double& v : h) v /= dc;  // unity DC gain
    return h;
}

std::vector<double> periodogram(const SampleBuffer& x) {
    if (x.empty()) throw std::invalid_argument("periodogram: empty buffer");
    auto spec = rfft(x.samples);
    const double n = static_cast<double>(x.size());
    std::vector<double> p(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        double mag2 = std::norm(spec[k]);
        // One-sided: double interior bins so a cosine's power reads A^2/2.
        double factor = (k == 0 || (x.size() % 2 == 0 && k == spec.size() - 1)) ? 1.0 : 2.0;
        p[k] = factor * mag2 / (n * n);
    }
    return p;
}

double band_power(const std::vector<double>& psd, std::size_t n, double rate, double f_lo,
                  double f_hi) {
    double acc = 0.0;
    for (std::size_t k = 0; k < psd.size(); ++k) {
        const double f = bin_freq(k, n, rate);
        if (f >= f_lo && f <= f_hi) acc += psd[k];
    }
    return acc;
}

double band_power_fraction(const std::vector<double>& psd, std::size_t n, double rate,
                           double f_lo, double f_hi) {
    double total = 0.0;
    for (double v : psd) total += v;
    if (total <= 0.0) return 0.0;
    return band_power(psd, n, rate, f_lo, f_hi) / total;
}

double parabolic_peak_offset(double left, double center, double right) {
    const double denom = left - 2.0 * center + right;
    if (denom == 0.0) return 0.0;
    double d = 0.5 * (left - right) / denom;
    return std::clamp(d, -0.5, 0.5);
}

double mean_power(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

SampleBuffer crop(const SampleBuffer& x, double t_lo, double t_hi) {
    if (t_hi <= t_lo) throw std::invalid_argument("crop: empty time range");
    const auto i_lo = static_cast<std::ptrdiff_t>(std::lround((t_lo - x.t0) * x.rate));
    const auto i_hi = static_cast<std::ptrdiff_t>(std::lround((t_hi - x.t0) * x.rate));
    SampleBuffer out;
    out.rate = x.rate;
    out.t0 = x.t0 + static_cast<double>(i_lo) / x.rate;
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    for (std::ptrdiff_t i = i_lo; i < i_hi; ++i)
        out.samples.push_back(i >= 0 && i < n ? x.samples[static_cast<std::size_t>(i)] : 0.0);
    return out;
}

SampleBuffer scale(const SampleBuffer& x, double gain) {
    SampleBuffer out = x;
    for (double& v : out.samples) v *= gain;
    return out;
}

Stft stft(std::span<const double> x, std::size_t window) {
    Stft s;
    s.window = window;
    s.hop = window / 2;
    s.input_length = x.size();

    std::vector<double> hann(window);
    for (std::size_t i = 0; i < window; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / window);

    const std::size_t n_frames = x.size() <= window ? 1 : (x.size() - window) / s.hop + 2;
    std::vector<double> frame(window);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t start = f * s.hop;
        for (std::size_t i = 0; i < window; ++i) {
            const std::size_t idx = start + i;
            frame[i] = idx < x.size() ? x[idx] * hann[i] : 0.0;
        }
        s.frames.push_back(rfft(frame));
    }
    return s;
}

std::vector<double> istft(const Stft& s) {
    std::vector<double> out(s.input_length, 0.0);
    std::vector<double> weight(s.input_length, 0.0);
    std::vector<double> hann(s.window);
    for (std::size_t i = 0; i < s.window; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / s.window);

    for (std::size_t f = 0; f < s.frames.size(); ++f) {
        auto frame = irfft(s.frames[f], s.window);
        const std::size_t start = f * s.hop;
        for (std::size_t i = 0; i < s.window && start + i < out.size(); ++i) {
            out[start + i] += frame[i];
            weight[start + i] += hann[i];
        }
    }
    // Interior samples see two Hann-weighted frames summing to 1; buffer edges
    // see one partial window and need the accumulated weight divided out.
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= std::max(weight[i], 1e-3);
    return out;
}

}  // namespace sonoloc::dsp
