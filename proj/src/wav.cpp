#include "sonoloc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sonoloc {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

std::uint16_t get_u16(const char* p) {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    return v;
}

}  // namespace

void write_wav(const std::string& path, const std::vector<SampleBuffer>& channels,
               WavFormat format) {
    if (channels.empty()) throw std::invalid_argument("write_wav: no channels");
    const std::size_t frames = channels.front().size();
    const double rate = channels.front().rate;
    for (const auto& ch : channels)
        if (ch.size() != frames || ch.rate != rate)
            throw std::invalid_argument("write_wav: channel rate/length mismatch");

    const std::uint16_t n_ch = static_cast<std::uint16_t>(channels.size());
    const std::uint16_t bits = format == WavFormat::Float32 ? 32 : 16;
    const std::uint16_t block = static_cast<std::uint16_t>(n_ch * bits / 8);
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * block);
    const std::uint32_t sample_rate = static_cast<std::uint32_t>(std::lround(rate));

    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put_u32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, format == WavFormat::Float32 ? 3 : 1);  // IEEE float / PCM
    put_u16(out, n_ch);
    put_u32(out, sample_rate);
    put_u32(out, sample_rate * block);
    put_u16(out, block);
    put_u16(out, bits);
    out += "data";
    put_u32(out, data_bytes);

    for (std::size_t i = 0; i < frames; ++i) {
        for (const auto& ch : channels) {
            if (format == WavFormat::Float32) {
                float f = static_cast<float>(ch.samples[i]);
                char b[4];
                std::memcpy(b, &f, 4);
                out.append(b, 4);
            } else {
                double v = std::clamp(ch.samples[i], -1.0, 1.0 - 1.0 / 32768.0);
                auto s = static_cast<std::int16_t>(std::lround(v * 32768.0));
                put_u16(out, static_cast<std::uint16_t>(s));
            }
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_wav: cannot open " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write_wav: short write to " + path);
}

std::vector<SampleBuffer> read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_wav: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 44 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
        throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

    std::uint16_t audio_format = 0, n_ch = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    std::size_t data_off = 0, data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::string id = bytes.substr(pos, 4);
        const std::uint32_t len = get_u32(bytes.data() + pos + 4);
        if (id == "fmt " && pos + 8 + 16 <= bytes.size()) {
            audio_format = get_u16(bytes.data() + pos + 8);
            n_ch = get_u16(bytes.data() + pos + 10);
            sample_rate = get_u32(bytes.data() + pos + 12);
            bits = get_u16(bytes.data() + pos + 22);
        } else if (id == "data") {
            data_off = pos + 8;
            data_len = std::min<std::size_t>(len, bytes.size() - data_off);
        }
        pos += 8 + len + (len % 2);  // chunks are word-aligned
    }

    if (n_ch == 0 || sample_rate == 0 || data_off == 0)
        throw std::runtime_error("read_wav: missing fmt/data chunk: " + path);
    const bool is_float = audio_format == 3 && bits == 32;
    const bool is_pcm16 = audio_format == 1 && bits == 16;
    if (!is_float && !is_pcm16)
        throw std::runtime_error("read_wav: unsupported format (need PCM16 or float32): " + path);

    const std::size_t bytes_per = bits / 8;
    const std::size_t frames = data_len / (bytes_per * n_ch);
    std::vector<SampleBuffer> channels(n_ch);
    for (auto& ch : channels) {
        ch.rate = sample_rate;
        ch.t0 = 0.0;
        ch.samples.resize(frames);
    }
    const char* p = bytes.data() + data_off;
    for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < n_ch; ++c) {
            if (is_float) {
                float v;
                std::memcpy(&v, p, 4);
                channels[c].samples[i] = v;
            } else {
                auto v = static_cast<std::int16_t>(get_u16(p));
                channels[c].samples[i] = v / 32768.0;
            }
            p += bytes_per;
        }
    }
    return channels;
}

}  // namespace sonoloc
