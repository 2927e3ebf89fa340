#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mkvlab::rng {

// Stream seeding contract
// -----------------------
// Every noise stream is identified by (master_seed, replication, kind,
// element) and seeded with
//
//   seed = finalize(mix(mix(mix(master, replication), kind), element))
//
// where mix(h, v) = splitmix64_next(h ^ (v + 0x9e3779b97f4a7c15)) and
// finalize is one more splitmix64_next. Streams for distinct tuples are
// decorrelated; the mapping is independent of particle count and worker
// count, so the common-noise stream of a replication is reused verbatim
// across an n-sweep and particle i keeps its idiosyncratic stream.

inline constexpr std::uint64_t kStreamCommonNoise = 0x434f4d4d4f4eULL;
inline constexpr std::uint64_t kStreamIdiosyncratic = 0x4944494fULL;
inline constexpr std::uint64_t kStreamAux = 0x415558ULL;

std::uint64_t splitmix64_next(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                          std::uint64_t kind, std::uint64_t element);

/// Sequential stream of N(0,1) draws. Draw order within a stream is part of
/// the reproducibility contract.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() { return normal_(engine_); }

    void fill(std::span<double> out, double stddev) {
        for (double& v : out) v = stddev * normal_(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// Uniform draws for test scaffolding and sampling utilities.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
    double next() { return uni_(engine_); }
    double in(double lo, double hi) { return lo + (hi - lo) * next(); }
    std::uint64_t bits() { return engine_(); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> uni_{0.0, 1.0};
};

}  // namespace mkvlab::rng
