#ifndef PCGP_RNG_HPP
#define PCGP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pcgp {

// Every random draw in this project flows through the helpers below so that
// results are reproducible from a single 64-bit seed across builds. The
// documented pipeline is:
//   * streams are derived with the splitmix64 output function,
//   * each stream drives a std::mt19937_64 (bit-exact per the C++ standard),
//   * uniforms take the top 53 bits of an engine output,
//   * normals use Box-Muller on those uniforms,
//   * shuffles are Fisher-Yates with multiply-shift bounded draws.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer. Stateless bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/// The i-th output of a splitmix64 generator seeded with `seed`.
/// Used as the child-seed rule: child stream i of a master seed.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t i) {
    return mix64(seed + (i + 1) * kGolden);
}

/// Two-level stream derivation, e.g. (epoch, batch) inside a run seed.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return substream(substream(seed, a), b);
}

/// Seedable generator with pinned uniform/normal/shuffle algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1): top 53 bits of one engine output.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform in [-a, a].
    double uniform_symmetric(double a) { return a * (2.0 * uniform() - 1.0); }

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1)); // 1-u1 in (0,1]
        const double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Uniform integer in [0, n) via 128-bit multiply-shift.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace pcgp

#endif
