// Copyright 2026 The gaplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace gaplab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic random stream. A stream is identified by (seed, key, index);
/// streams with distinct identifiers are statistically independent, so work
/// split into fixed chunks gives identical results for any worker count.
///
/// All variate transforms are implemented here rather than through
/// <random> distributions so that the bit pattern of a sample depends only on
/// the engine output.
class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t key = 0, std::uint64_t index = 0) {
        std::uint64_t h = splitmix64(seed);
        h = splitmix64(h ^ splitmix64(key + 0x632be59bd9b4e019ULL));
        h = splitmix64(h ^ splitmix64(index + 0x8cb92ba72f3d8dd7ULL));
        std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                          static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(index)};
        engine_.seed(seq);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on (0, 1]; never returns zero so logs are finite.
    double uniform_open0() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::size_t uniform_index(std::size_t n) {
        // Lemire-style rejection keeps the draw unbiased.
        const std::uint64_t bound = n;
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x > limit);
        return static_cast<std::size_t>(x % bound);
    }

    /// Exp(1).
    double exponential() { return -std::log(uniform_open0()); }

    /// Standard real normal (Box-Muller, one value per call).
    double normal() {
        const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang; shapes below 1 use the U^{1/a} boost.
    double gamma(double shape) {
        if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform_open0(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open0();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    /// Unit-modulus uniform phase e^{i theta}.
    std::complex<double> phase() {
        const double t = 2.0 * std::numbers::pi * uniform();
        return {std::cos(t), std::sin(t)};
    }

    /// Circular complex normal with E|Z|^2 = variance.
    std::complex<double> complex_normal(double variance = 1.0) {
        return std::sqrt(variance * exponential()) * phase();
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace gaplab
