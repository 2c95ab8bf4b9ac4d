#include "racelab/random.hpp"

namespace racelab {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Seed Seed::derive(std::uint64_t index) const {
    return Seed{mix64(value ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

double Rng::erlang(std::uint64_t k, double rate) {
    if (k <= 32) {
        double t = 0.0;
        for (std::uint64_t i = 0; i < k; ++i) t += exponential(rate);
        return t;
    }
    return std::gamma_distribution<double>(static_cast<double>(k), 1.0 / rate)(engine_);
}

std::uint64_t Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
}

}  // namespace racelab
