#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "racelab/core_model.hpp"
#include "racelab/random.hpp"

namespace racelab {

/// Event times on [0, horizon], strictly increasing.
struct SpikeTrain {
    std::vector<double> times;
    double horizon = 0.0;

    /// Number of events at times <= t.
    std::size_t count_at(double t) const;
    std::size_t size() const { return times.size(); }
    bool well_formed() const;
};

/// A path sampled on the uniform grid k * dt, k = 0..n, with values[0] = 0.
struct PathSample {
    double dt = 0.0;
    std::vector<double> values;

    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double horizon() const { return values.empty() ? 0.0 : time(values.size() - 1); }
};

/// Homogeneous Poisson process on [0, horizon] by exponential inter-arrivals.
SpikeTrain sample_poisson(double rate, double horizon, Rng& rng);
SpikeTrain sample_poisson(double rate, double horizon, Seed seed);

/// lambda_t = sum_i w_i * sum_{s in inputs_i, s <= t} g(t - s).
double conditional_intensity(std::span<const double> weights,
                             std::span<const SpikeTrain> inputs,
                             const Kernel& kernel, double t);

/// Output spikes of one Hawkes output neuron driven by the given input
/// trains. The intensity is a step function for a rectangular kernel, so
/// sampling is exact (time-changed unit exponentials, no thinning).
///
/// Stops after `max_events` events; the returned train then covers only up
/// to the last event but keeps `horizon` as its nominal horizon.
SpikeTrain sample_hawkes_output(std::span<const SpikeTrain> inputs,
                                std::span<const double> weights,
                                const Kernel& kernel, double horizon, Rng& rng,
                                std::size_t max_events = std::numeric_limits<std::size_t>::max());
SpikeTrain sample_hawkes_output(std::span<const SpikeTrain> inputs,
                                std::span<const double> weights,
                                const Kernel& kernel, double horizon, Seed seed);

/// Drifted Brownian path value[k+1] = value[k] + mu dt + sigma sqrt(dt) Z.
PathSample sample_brownian_drift(double mu, double sigma, double horizon, double dt, Rng& rng);
PathSample sample_brownian_drift(double mu, double sigma, const RaceParams& params, Seed seed);

/// Time of the ceil(theta)-th event, or none when the train has fewer.
std::optional<double> first_passage_count(const SpikeTrain& train, double theta);

/// First grid crossing of level theta, linearly interpolated between the
/// bracketing grid points.
std::optional<double> first_passage_path(const PathSample& path, double theta);

/// Streams the same increments as sample_brownian_drift and stops at the
/// first crossing. Given the same Rng state it returns exactly
/// first_passage_path(sample_brownian_drift(...), theta).
std::optional<double> brownian_first_passage(double mu, double sigma, double theta,
                                             double horizon, double dt, Rng& rng);

/// Number of events required to reach count level theta.
std::size_t count_threshold(double theta);

}  // namespace racelab
