#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace sonoloc {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Uniformly sampled real-valued waveform. `t0` is the absolute time of
// samples[0]; every other sample sits at t0 + k/rate.
struct SampleBuffer {
    std::vector<double> samples;
    double rate = 0.0;  // samples per second
    double t0 = 0.0;    // seconds

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration() const { return rate > 0 ? static_cast<double>(samples.size()) / rate : 0.0; }
    double end_time() const { return t0 + duration(); }

    double& operator[](std::size_t i) { return samples[i]; }
    double operator[](std::size_t i) const { return samples[i]; }
};

}  // namespace sonoloc
