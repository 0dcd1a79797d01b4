#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Deterministic PRNG utilities. Everything here is a pure function of its
// inputs, so seeded pipelines produce identical results regardless of
// evaluation order (serial or per-slice parallel) and of the standard
// library's distribution internals.

namespace c2f::rng {

// splitmix64 finalizer; full avalanche on 64 bits.
inline std::uint64_t finalize(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// Hash-combine a value into a running key.
inline std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
    return finalize(h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4)));
}

// Uniform double in [0, 1).
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) via 128-bit multiply (no modulo bias to speak of).
inline std::uint32_t bounded(std::uint64_t x, std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(x) * n) >> 64);
}

// FNV-1a over bytes; a platform-independent stand-in for std::hash<string>.
inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return finalize(h);
}

// Sequential stream for bulk generation (phantom noise, fold shuffles).
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return finalize(state_);
    }

    double unit() { return to_unit(next()); }

    std::uint32_t below(std::uint32_t n) { return bounded(next(), n); }

    // Box-Muller; one normal per call, second branch discarded.
    double gaussian() {
        double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

  private:
    std::uint64_t state_;
};

} // namespace c2f::rng
