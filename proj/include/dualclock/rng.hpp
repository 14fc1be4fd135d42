// Deterministic random number generation for dataset synthesis.
//
// Uniform stream: std::mt19937_64, whose output sequence is pinned by the
// C++ standard, so a given seed reproduces the same dataset on any
// conforming implementation. Gaussian variates use the Marsaglia polar
// method implemented here (std::normal_distribution is not portable
// across standard libraries).
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

namespace dualclock {

class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Marsaglia polar; pairs are cached.
    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        return u * scale;
    }

    double normal(double sigma) { return sigma == 0.0 ? 0.0 : sigma * normal(); }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

// splitmix64 step, used to derive independent per-trial seeds from a base
// seed: trial k uses splitmix64(base_seed + k + 1).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial) {
    return splitmix64(base_seed + trial + 1);
}

} // namespace dualclock
