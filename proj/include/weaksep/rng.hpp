// Reproducible random streams.
//
// Every stream is a std::mt19937_64 engine (bit-exact across conforming
// standard libraries) seeded with derive_stream_seed(master_seed, index).
// Uniforms are the top 52 bits k of one engine output mapped to the open
// interval (0, 1) as (k + 0.5) / 2^52. That lattice is exact in binary64 and
// closed under u -> 1 - u. Gaussian draws use the inverse normal CDF of a
// single uniform, so every reading is a pure function of the uniform stream.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace weaksep {

inline constexpr std::string_view kPrngAlgorithm =
    "mt19937_64; seed=splitmix64(splitmix64(master_seed) ^ splitmix64(~stream_index)); "
    "uniform=(top52+0.5)/2^52; gaussian=inverse-cdf";

/// SplitMix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(~stream_index));
}

/// Stream index for trial `trial` of grid point `cell`; keeps grid cells of one
/// experiment on disjoint streams.
constexpr std::uint64_t grid_stream_index(std::uint64_t cell, std::uint64_t trial) {
    return (cell << 40) ^ trial;
}

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : engine_(derive_stream_seed(master_seed, stream_index)),
          master_seed_(master_seed),
          stream_index_(stream_index) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        const double u = (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
        return mirrored_ ? 1.0 - u : u;
    }

    /// Same stream with every uniform u replaced by 1 - u (exact in binary64).
    /// Gaussian draws from a mirrored stream are exact negatives.
    RngStream mirrored() const {
        RngStream copy = *this;
        copy.mirrored_ = !mirrored_;
        return copy;
    }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    bool mirrored_ = false;
};

/// Standard normal quantile; exactly antisymmetric: q(1 - u) == -q(u).
double standard_normal_quantile(double u);

/// Standard normal CDF.
double standard_normal_cdf(double x);

/// One draw from N(mean, sd^2) consuming exactly one uniform.
double gaussian(RngStream& rng, double mean, double sd);

}  // namespace weaksep
