// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_RNG_HPP
#define IRSLENS_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>

namespace irslens {

// Counter-based seeded random stream (splitmix64 core). Every channel entity
// gets its own sub-stream derived from (seed, purpose, i, j), so regenerating
// a scenario with a different user count leaves unrelated channels untouched.
class Rng {
  public:
    // Sub-stream purposes. Values are part of the reproducibility contract:
    // changing them changes every synthesized channel.
    enum Purpose : std::uint64_t {
        kUserPosition = 1, // per user k
        kBsIrsChannel = 2, // per IRS l
        kIrsUserChannel = 3 // per (l, k)
    };

    explicit Rng(std::uint64_t seed) : state_(scramble(seed)) {}

    static Rng substream(std::uint64_t seed, std::uint64_t purpose,
                         std::uint64_t i = 0, std::uint64_t j = 0)
    {
        std::uint64_t s = seed;
        s = combine(s, purpose);
        s = combine(s, i);
        s = combine(s, j);
        return Rng(s);
    }

    std::uint64_t next_u64()
    {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]; never returns 0 so log() is safe.
    double uniform()
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Standard normal via Box-Muller; second value of each pair is cached.
    double normal()
    {
        if (has_cached_)
        {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(th);
        has_cached_ = true;
        return r * std::cos(th);
    }

    // Circularly symmetric complex normal CN(0, variance).
    std::complex<double> cnormal(double variance)
    {
        double s = std::sqrt(0.5 * variance);
        double re = s * normal();
        double im = s * normal();
        return {re, im};
    }

  private:
    static std::uint64_t scramble(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t combine(std::uint64_t a, std::uint64_t b)
    {
        return scramble(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace irslens

#endif
