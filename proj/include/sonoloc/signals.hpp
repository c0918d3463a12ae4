#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "sonoloc/types.hpp"

namespace sonoloc {

// Periodic linear sweep, sample-indexed: the band [f0, f0 + period_k*delta_f]
// is swept once every period_k samples, then wraps.
struct ChirpParams {
    double f0 = 45000.0;     // start frequency, Hz
    double delta_f = 0.0;    // per-sample frequency increment, Hz
    int period_k = 0;        // sweep period, samples
    double amplitude = 1.0;

    // Builds params for a given render rate from the physical description
    // (start frequency, total swept bandwidth, sweep period in seconds).
    static ChirpParams for_rate(double f0, double bandwidth_hz, double period_s, double rate,
                                double amplitude = 1.0);

    double top_freq() const { return f0 + period_k * delta_f; }
    // Sweep rate in Hz per second at the given render rate.
    double slope_hz_per_s(double rate) const { return delta_f * rate; }
};

// On-air pulse frame: continuous carrier preamble, bi-phase coded ID field
// gating the carrier, silent guard tail.
struct BeaconFrame {
    int id = 0;                    // 7 data bits, [0, 127]
    double preamble_ms = 30.0;
    double bit_ms = 5.0;
    double guard_ms = 30.0;
    double carrier_freq = 40000.0;

    double duration_ms() const { return preamble_ms + 8.0 * bit_ms + guard_ms; }
};

// Even parity over the 7 data bits; appended as the 8th on-air bit.
bool even_parity_bit(int id7);

// On-air bit order: id MSB first (bit 6 .. bit 0), parity last.
std::array<int, 8> frame_bits(int id7);

// Periodic chirp per the sweep definition above. The sweep position is tied
// to the absolute sample index round(t0*rate) + k, so buffers rendered from
// different start times describe one continuously transmitting source.
// Throws std::invalid_argument when the swept band violates Nyquist.
SampleBuffer gen_chirp(const ChirpParams& p, double rate, double duration, double t0);

// FM0 (bi-phase space) baseband mask over 8 bits: the level toggles at every
// bit boundary; a data 0 toggles again mid-bit, a data 1 does not. Values
// are 0/1, rate-sampled, t0 = 0.
SampleBuffer fm0_encode(const std::array<int, 8>& bits, double bit_ms, double rate);

// Inverse of fm0_encode for a clean mask (used as the exhaustive round-trip
// oracle and by the receiver's bit slicer). Returns nullopt if the mask is
// too short for 8 bits.
std::optional<std::array<int, 8>> fm0_decode(const SampleBuffer& mask, double bit_ms);

// Renders a complete frame starting exactly at t0: preamble tone, FM0-gated
// ID field, silent guard. Carrier phase is zero at frame start.
SampleBuffer gen_ubeacon_frame(const BeaconFrame& frame, double rate, double t0);

// Continuous wave amplitude*cos(2*pi*freq*t) on the absolute time axis.
SampleBuffer gen_cw(double freq, double amplitude, double rate, double duration, double t0);

}  // namespace sonoloc
