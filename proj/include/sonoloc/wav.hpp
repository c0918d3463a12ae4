#pragma once

#include <string>
#include <vector>

#include "sonoloc/types.hpp"

namespace sonoloc {

enum class WavFormat { Float32, Pcm16 };

// Writes interleaved little-endian WAV. Every channel must share rate and
// length. Float32 keeps synthesized scenes byte-reproducible; Pcm16 clips
// to [-1, 1).
void write_wav(const std::string& path, const std::vector<SampleBuffer>& channels,
               WavFormat format = WavFormat::Float32);

// Reads PCM16 or Float32 WAV; returns one buffer per channel with t0 = 0.
std::vector<SampleBuffer> read_wav(const std::string& path);

}  // namespace sonoloc
