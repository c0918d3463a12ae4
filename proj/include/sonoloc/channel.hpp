#pragma once

#include <cstdint>
#include <vector>

#include "sonoloc/types.hpp"

namespace sonoloc {

// One extra propagation path relative to the direct one.
struct Echo {
    double extra_delay_s = 0.0;
    double gain = 0.0;  // relative to the direct-path amplitude
};

// Delays a buffer by an arbitrary (generally fractional) number of samples
// using a 31-tap Blackman-windowed sinc. Integer delays reproduce the input
// exactly; the output start time stays on the input's sample grid.
SampleBuffer fractional_delay(const SampleBuffer& src, double delay_s);

// Free-field propagation: direct path delayed by |src_pos-dst_pos|/c and
// scaled by 1/max(d, 0.1 m); each echo adds a copy with its extra delay and
// relative amplitude. `extra_delay_s` shifts the source emission time (used
// for transmit epochs) and is applied before the geometric delay.
SampleBuffer propagate(const SampleBuffer& src, const Vec3& src_pos, const Vec3& dst_pos,
                       double c, const std::vector<Echo>& echoes = {},
                       double extra_delay_s = 0.0);

// Pointwise sum over the union time span. All inputs must share one rate and
// sit on a common sample grid.
SampleBuffer mix(const std::vector<SampleBuffer>& buffers);

// Adds white Gaussian noise at the requested SNR relative to the buffer's own
// mean power. An infinite snr_db returns the input unchanged. Deterministic
// for a given seed.
SampleBuffer add_noise(const SampleBuffer& x, double snr_db, std::uint64_t seed);

// Adds white Gaussian noise with an absolute standard deviation (used when
// the reference power is computed externally, e.g. from scene geometry).
SampleBuffer add_noise_sigma(const SampleBuffer& x, double sigma, std::uint64_t seed);

}  // namespace sonoloc
