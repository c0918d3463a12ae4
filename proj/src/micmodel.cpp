#include "sonoloc/micmodel.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sonoloc/dsp.hpp"

namespace sonoloc {

void MicNonlinearity::validate() const {
    if (g1 <= 0) throw std::invalid_argument("MicNonlinearity: g1 must be positive");
    if (g2 < 0) throw std::invalid_argument("MicNonlinearity: g2 must be non-negative");
    if (adc_rate <= 0) throw std::invalid_argument("MicNonlinearity: adc_rate must be positive");
    if (lpf_cutoff > adc_rate / 2)
        throw std::invalid_argument("MicNonlinearity: lpf_cutoff above adc Nyquist");
}

SampleBuffer apply_nonlinearity(const SampleBuffer& x, const MicNonlinearity& m) {
    SampleBuffer out = x;
    for (double& v : out.samples) v = m.g1 * v + m.g2 * v * v + m.g3 * v * v * v;
    return out;
}

SampleBuffer lpf_and_decimate(const SampleBuffer& x, const MicNonlinearity& m) {
    m.validate();
    if (x.empty()) throw std::invalid_argument("lpf_and_decimate: empty buffer");
    if (m.adc_rate > x.rate)
        throw std::invalid_argument("lpf_and_decimate: adc_rate above input rate");
    const double ratio = x.rate / m.adc_rate;
    const auto r = static_cast<std::size_t>(std::lround(ratio));
    if (std::abs(ratio - static_cast<double>(r)) > 1e-9)
        throw std::invalid_argument("lpf_and_decimate: non-integer decimation ratio");

    const auto fir = dsp::design_kaiser_lowpass(m.lpf_taps, m.lpf_cutoff, x.rate, m.lpf_atten_db);
    const auto filtered = dsp::filter_centered(x.samples, fir);

    SampleBuffer out;
    out.rate = m.adc_rate;
    out.t0 = x.t0;
    out.samples.reserve(filtered.size() / r + 1);
    for (std::size_t i = 0; i < filtered.size(); i += r) out.samples.push_back(filtered[i]);
    return out;
}

SampleBuffer capture(const SampleBuffer& acoustic, const MicNonlinearity& m,
                     const std::string& debug_spectrum_csv) {
    auto amplified = apply_nonlinearity(acoustic, m);
    if (!debug_spectrum_csv.empty()) {
        auto psd = dsp::periodogram(amplified);
        std::ofstream f(debug_spectrum_csv, std::ios::trunc);
        f << "freq_hz,power\n";
        for (std::size_t k = 0; k < psd.size(); ++k)
            f << dsp::bin_freq(k, amplified.size(), amplified.rate) << "," << psd[k] << "\n";
    }
    return lpf_and_decimate(amplified, m);
}

}  // namespace sonoloc
