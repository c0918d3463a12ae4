#pragma once

#include <string>

#include "sonoloc/types.hpp"

namespace sonoloc {

// Polynomial amplifier model followed by the anti-alias lowpass and
// decimation to the ADC rate. The quadratic term is what turns a pair of
// ultrasonic tones into their audible difference frequency.
struct MicNonlinearity {
    double g1 = 1.0;    // linear gain
    double g2 = 0.05;   // quadratic gain, 1/amplitude
    double g3 = 0.0;    // cubic gain
    double lpf_cutoff = 22000.0;  // Hz
    double adc_rate = 44100.0;    // Hz
    int lpf_taps = 255;
    double lpf_atten_db = 60.0;

    void validate() const;
};

// y[k] = g1*x[k] + g2*x[k]^2 + g3*x[k]^3, same rate.
SampleBuffer apply_nonlinearity(const SampleBuffer& x, const MicNonlinearity& m);

// Linear-phase Kaiser FIR lowpass at lpf_cutoff, then keep every
// (rate/adc_rate)-th sample. The group delay is compensated so t0 is
// preserved. Throws on a non-integer decimation ratio.
SampleBuffer lpf_and_decimate(const SampleBuffer& x, const MicNonlinearity& m);

// The full microphone system: capture = lpf_and_decimate(apply_nonlinearity).
// When debug_spectrum_csv is non-empty, the pre-filter periodogram is dumped
// as freq_hz,power rows.
SampleBuffer capture(const SampleBuffer& acoustic, const MicNonlinearity& m,
                     const std::string& debug_spectrum_csv = "");

}  // namespace sonoloc
