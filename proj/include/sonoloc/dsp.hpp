#pragma once

#include <complex>
#include <span>
#include <vector>

#include "sonoloc/types.hpp"

namespace sonoloc::dsp {

using cplx = std::complex<double>;

// FFTs are backed by FFTW with a process-wide plan cache. Plan creation is
// serialized internally; execution is safe from concurrent workers.
std::vector<cplx> rfft(std::span<const double> x);
std::vector<double> irfft(std::span<const cplx> spectrum, std::size_t n_out);
std::vector<cplx> fft(std::span<const cplx> x);
std::vector<cplx> ifft(std::span<const cplx> x);

// Linear convolution via zero-padded FFT; output length nx + nh - 1.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

// Centered FIR application: output[n] = sum_i h[i] * x[n + (nh-1)/2 - i],
// same length as x. Compensates the linear-phase group delay so a buffer's
// t0 stays meaningful. h must have odd length.
std::vector<double> filter_centered(std::span<const double> x, std::span<const double> h);

// Sliding cross-correlation of a real signal against a complex template:
// out[l] = sum_m x[l+m] * conj(t[m]), for l = 0 .. nx - nt. FFT-based.
std::vector<cplx> correlate_template(std::span<const double> x, std::span<const cplx> t);

// Kaiser-window linear-phase lowpass. `cutoff_hz` is the -6 dB point,
// `atten_db` sizes the window ripple. Odd `taps` required.
std::vector<double> design_kaiser_lowpass(int taps, double cutoff_hz, double rate,
                                          double atten_db);

// Periodogram of the whole buffer: one-sided power spectrum, rectangular
// window, normalized so a full-scale cosine at a bin center reads A^2/2.
// bin k covers frequency k * rate / n.
std::vector<double> periodogram(const SampleBuffer& x);

// Frequency of periodogram bin k for a buffer of n samples.
inline double bin_freq(std::size_t k, std::size_t n, double rate) {
    return static_cast<double>(k) * rate / static_cast<double>(n);
}

// Fraction of total spectral power that falls inside [f_lo, f_hi].
double band_power_fraction(const std::vector<double>& psd, std::size_t n, double rate,
                           double f_lo, double f_hi);

// Sum of periodogram power inside [f_lo, f_hi].
double band_power(const std::vector<double>& psd, std::size_t n, double rate, double f_lo,
                  double f_hi);

// 3-point parabolic interpolation around an argmax; returns the fractional
// offset in [-0.5, 0.5] of the true peak relative to the center sample.
double parabolic_peak_offset(double left, double center, double right);

// Mean power of a span.
double mean_power(std::span<const double> x);

// --- Small buffer utilities -------------------------------------------------

// Crop a buffer to [t_lo, t_hi); bounds snap to the buffer's sample grid.
SampleBuffer crop(const SampleBuffer& x, double t_lo, double t_hi);

SampleBuffer scale(const SampleBuffer& x, double gain);

// --- STFT for spectral processing -------------------------------------------

// Fixed analysis: periodic Hann window, 50% overlap (COLA-1), rfft frames.
struct Stft {
    std::size_t window = 1024;
    std::size_t hop = 512;
    std::vector<std::vector<cplx>> frames;  // frames[f][bin], bin count window/2+1
    std::size_t input_length = 0;

    double bin_hz(double rate) const { return rate / static_cast<double>(window); }
};

Stft stft(std::span<const double> x, std::size_t window = 1024);

// Overlap-add inverse; reconstructs input_length samples.
std::vector<double> istft(const Stft& s);

}  // namespace sonoloc::dsp
