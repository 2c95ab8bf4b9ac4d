#pragma once

#include <cstdint>
#include <random>

#include "racelab/core_model.hpp"

namespace racelab {

/// SplitMix64 finalizer; used for seed mixing.
std::uint64_t mix64(std::uint64_t x);

/// Pseudo-random source owned by one simulation stream.
class Rng {
public:
    explicit Rng(Seed seed) : engine_(mix64(seed.value)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal() { return normal_(engine_); }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
    /// Time of the k-th arrival of a rate-`rate` Poisson process.
    double erlang(std::uint64_t k, double rate);
    std::uint64_t poisson(double mean);
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace racelab
