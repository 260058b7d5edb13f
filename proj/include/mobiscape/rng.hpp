#ifndef MOBISCAPE_RNG_HPP
#define MOBISCAPE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mobiscape {

// FNV-1a, used to derive independent per-task seeds from a master seed and a
// tag (zone id, stratum name, ...). Stable across platforms.
inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(master >> (8 * i));
    return fnv1a64(tag, fnv1a64(std::string_view(bytes, 8)));
}

// Seeded generator with bespoke transforms so that sequences depend only on
// the mt19937_64 stream, not on library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n)
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t x = gen_();
            if (x >= threshold) return x % n;
        }
    }

    // Inclusive range
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        // Box-Muller; no spare caching so the draw count stays predictable
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double lognormal(double mu, double sigma) {
        return std::exp(mu + sigma * normal());
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace mobiscape

#endif
