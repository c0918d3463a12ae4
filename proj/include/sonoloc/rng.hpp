#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sonoloc {

// SplitMix64. Small, fast, and identical on every platform, which keeps
// fixtures and reports byte-reproducible. All randomness in the project
// flows from one root seed through derive_seed(), so independent streams
// (per trial, per mic, per anchor) never share state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one cached spare per pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Derives an independent stream seed from a root seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    Rng mixer(root ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    return mixer.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(root, a), b);
}

}  // namespace sonoloc
