#pragma once

// Counter-based splittable random streams.
//
// Every consumer receives an independently seeded stream derived from
// (master seed, stream tag, counter).  Streams never share mutable state, so
// Monte Carlo results are identical for any worker count, and identical
// across platforms because all distributions below are hand-rolled on top of
// the 64-bit generator (libstdc++/libc++ distributions are not portable).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace ergomix {

// SplitMix64 (Steele, Lea, Flood; fixed-increment variant by Vigna).
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

/// FNV-1a over bytes; used for deterministic stream tags and params hashes.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives an independent seed from (master, tag, counter) with full avalanche.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t counter) {
    SplitMix64 s(master ^ (tag * 0x9e3779b97f4a7c15ULL) ^ (counter + 0x632be59bd9b4e019ULL));
    s.next();
    return s.next();
}

/// Random stream with the handful of distributions the samplers need.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    Rng(std::uint64_t master, std::uint64_t tag, std::uint64_t counter)
        : gen_(derive_seed(master, tag, counter)) {}

    std::uint64_t next_u64() { return gen_.next(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (two uniforms per variate; no cached state).
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Index draw from a cumulative distribution (cdf.back() == 1).
    std::size_t sample_cdf(std::span<const double> cdf) {
        const double u = uniform01();
        std::size_t lo = 0, hi = cdf.size();
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (u < cdf[mid - 1])
                hi = mid;
            else
                lo = mid;
        }
        return lo;
    }

  private:
    SplitMix64 gen_;
};

}  // namespace ergomix
