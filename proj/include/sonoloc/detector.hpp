#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "sonoloc/types.hpp"

namespace sonoloc {

// Receiver-side description of the downconverted sweep: the difference band
// starts at f_diff and the cycle geometry (delta_f, period_k) mirrors the
// transmitted chirp at the audio rate.
struct DetectorConfig {
    double rate = 44100.0;
    double f_diff = 5000.0;  // f_chirp_start - f_carrier, Hz
    double delta_f = 0.0;    // Hz per audio sample
    int period_k = 0;        // sweep period, audio samples
    double preamble_ms = 30.0;
    double bit_ms = 5.0;
    double guard_ms = 30.0;
    double slot_ms = 100.0;
    double psd_gate_db = 10.0;    // dual-mic PSD gate
    double peak_threshold = 8.0;  // correlation peak-to-median ratio

    static DetectorConfig for_chirp(double f_diff, double bandwidth_hz, double period_s,
                                    double rate = 44100.0);
    void validate() const;

    double band_top() const { return f_diff + period_k * delta_f; }
    int preamble_samples() const;
    int slot_samples() const;
};

// One located preamble. b_start carries the sub-sample refinement; tau is
// the integer correlation argmax it was refined from.
struct Detection {
    double b_start = 0.0;
    int gamma = 0;
    int tau = 0;
    std::optional<int> id;
    bool parity_ok = false;
    double peak_score = 0.0;
};

struct ChirpAlignment {
    int gamma = 0;    // sweep-cycle phase of the arriving chirp, samples
    double score = 0.0;
};

struct ToaEstimate {
    int id = 0;
    double toa_s = 0.0;
    double peak_score = 0.0;
};

// Complex replica of the downconverted carrier for audio samples
// [n0, n0+count): W[j] = exp(i*phi(s)), s = (n0 + j + gamma) mod K. All
// correlation and demodulation in this module is built on it.
std::vector<std::complex<double>> dynamic_carrier(const DetectorConfig& cfg, int gamma,
                                                  std::size_t n0, std::size_t count);

// Dual-microphone spectral enhancement. STFT frames whose in-band PSDs agree
// across the mics within psd_gate_db feed a recursive noise-PSD estimate;
// all frames of the secondary (stronger) channel then get the Wiener gain
// sig/(sig+noise). Returns the enhanced single channel.
SampleBuffer turbocharge(const SampleBuffer& primary, const SampleBuffer& secondary,
                         const DetectorConfig& cfg);

// Finds the sweep-cycle phase shared by every downconverted segment, by
// correlating one intact cycle template over the audio and folding the
// magnitude across cycles. Returns nullopt when no fold bin clears
// peak_threshold (no chirp present). Audio must span >= 2 cycles.
std::optional<ChirpAlignment> find_global_offset(const SampleBuffer& audio,
                                                 const DetectorConfig& cfg);

// Slides a preamble-length window over the carrier-demodulated audio and
// returns every local maximum above peak_threshold, sorted by position,
// with parabolic sub-sample refinement.
std::vector<Detection> detect_preambles(const SampleBuffer& audio, int gamma,
                                        const DetectorConfig& cfg);

// Decodes the 8-bit ID field that follows det's preamble: demodulates with
// the continuing carrier replica, smooths to the on/off envelope, re-aligns
// the bit clock on the guaranteed boundary transitions, slices, and checks
// parity. Sets det.id only when parity passes.
void decode_id(const SampleBuffer& audio, Detection& det, const DetectorConfig& cfg);

// Per-beacon time of arrival relative to the earliest detection, modulo the
// slot length. One entry per decoded id; the strongest peak wins duplicates.
std::vector<ToaEstimate> estimate_toas(const std::vector<Detection>& dets,
                                       const DetectorConfig& cfg);

// Picks the candidate sweep slope whose cycle correlation scores highest
// (room identification when several chirp sources use distinct slopes).
// Returns nullopt when no candidate clears its threshold.
std::optional<std::size_t> identify_slope(const SampleBuffer& audio,
                                          const std::vector<DetectorConfig>& candidates);

}  // namespace sonoloc
