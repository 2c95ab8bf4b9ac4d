#include "racelab/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace racelab {

namespace {

constexpr double simplex_tolerance = 1e-9;

void check_simplex(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= -simplex_tolerance)) throw std::domain_error("weights must be >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > simplex_tolerance)
        throw std::domain_error("weights must sum to 1");
}

std::size_t grid_steps(double horizon, double dt) {
    if (!(dt > 0.0)) throw std::domain_error("dt must be > 0");
    if (horizon < 0.0) throw std::domain_error("horizon must be >= 0");
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

}  // namespace

std::size_t SpikeTrain::count_at(double t) const {
    return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

bool SpikeTrain::well_formed() const {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0.0 || times[k] > horizon) return false;
        if (k > 0 && !(times[k] > times[k - 1])) return false;
    }
    return true;
}

std::size_t count_threshold(double theta) {
    if (!(theta > 0.0)) throw std::domain_error("theta must be > 0");
    // Guard against products like 0.1 * 200 landing one ulp above an integer.
    return static_cast<std::size_t>(std::ceil(theta - 1e-9 * std::max(1.0, theta)));
}

SpikeTrain sample_poisson(double rate, double horizon, Rng& rng) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::domain_error("rate must be >= 0");
    if (!(horizon >= 0.0)) throw std::domain_error("horizon must be >= 0");
    SpikeTrain train{{}, horizon};
    if (rate == 0.0 || horizon == 0.0) return train;
    train.times.reserve(static_cast<std::size_t>(rate * horizon * 1.1) + 8);
    double t = rng.exponential(rate);
    while (t <= horizon) {
        train.times.push_back(t);
        t += rng.exponential(rate);
    }
    return train;
}

SpikeTrain sample_poisson(double rate, double horizon, Seed seed) {
    Rng rng(seed);
    return sample_poisson(rate, horizon, rng);
}

double conditional_intensity(std::span<const double> weights,
                             std::span<const SpikeTrain> inputs,
                             const Kernel& kernel, double t) {
    if (t < 0.0) throw std::domain_error("t must be >= 0");
    if (weights.size() != inputs.size())
        throw std::domain_error("one weight per input train required");
    check_simplex(weights);
    double lambda = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const auto& times = inputs[i].times;
        // Spikes at s with t - support < s <= t.
        const auto hi = std::upper_bound(times.begin(), times.end(), t);
        const auto lo = std::upper_bound(times.begin(), hi, t - kernel.support());
        double acc = 0.0;
        for (auto it = lo; it != hi; ++it) acc += kernel.value(t - *it);
        lambda += weights[i] * acc;
    }
    return lambda;
}

SpikeTrain sample_hawkes_output(std::span<const SpikeTrain> inputs,
                                std::span<const double> weights,
                                const Kernel& kernel, double horizon, Rng& rng,
                                std::size_t max_events) {
    if (weights.size() != inputs.size())
        throw std::domain_error("one weight per input train required");
    check_simplex(weights);
    for (const auto& train : inputs) {
        if (train.horizon != horizon) throw std::domain_error("input trains must share the horizon");
    }
    SpikeTrain out{{}, horizon};
    if (max_events == 0) return out;

    const std::size_t features = inputs.size();
    const double support = kernel.support();
    std::vector<double> gain(features);
    for (std::size_t i = 0; i < features; ++i) gain[i] = kernel.height() * weights[i];

    // Per feature: next spike entering the window and next spike leaving it.
    std::vector<std::size_t> enter(features, 0), leave(features, 0);
    std::vector<long> active(features, 0);
    for (std::size_t i = 0; i < features; ++i) {
        if (gain[i] == 0.0) enter[i] = leave[i] = inputs[i].times.size();
    }

    double now = 0.0;
    double lambda = 0.0;
    double budget = -std::log1p(-rng.uniform());  // unit exponential
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (;;) {
        double next = inf;
        std::size_t which = 0;
        bool is_enter = false;
        for (std::size_t i = 0; i < features; ++i) {
            const auto& times = inputs[i].times;
            if (leave[i] < times.size() && times[leave[i]] + support <= next) {
                next = times[leave[i]] + support;
                which = i;
                is_enter = false;
            }
            if (enter[i] < times.size() && times[enter[i]] < next) {
                next = times[enter[i]];
                which = i;
                is_enter = true;
            }
        }
        const double piece_end = std::min(next, horizon);
        if (lambda > 0.0) {
            while (budget < lambda * (piece_end - now)) {
                now += budget / lambda;
                if (!out.times.empty() && now <= out.times.back()) now = std::nextafter(out.times.back(), inf);
                out.times.push_back(now);
                if (out.times.size() >= max_events) return out;
                budget = -std::log1p(-rng.uniform());
            }
            budget -= lambda * (piece_end - now);
        }
        now = piece_end;
        if (next >= horizon) break;

        if (is_enter) {
            ++active[which];
            ++enter[which];
        } else {
            --active[which];
            ++leave[which];
        }
        lambda = 0.0;
        for (std::size_t i = 0; i < features; ++i) lambda += gain[i] * static_cast<double>(active[i]);
        if (lambda < 0.0) lambda = 0.0;
    }
    return out;
}

SpikeTrain sample_hawkes_output(std::span<const SpikeTrain> inputs,
                                std::span<const double> weights,
                                const Kernel& kernel, double horizon, Seed seed) {
    Rng rng(seed);
    return sample_hawkes_output(inputs, weights, kernel, horizon, rng);
}

PathSample sample_brownian_drift(double mu, double sigma, double horizon, double dt, Rng& rng) {
    if (!(sigma >= 0.0)) throw std::domain_error("sigma must be >= 0");
    const std::size_t steps = grid_steps(horizon, dt);
    PathSample path{dt, std::vector<double>(steps + 1, 0.0)};
    const double drift = mu * dt;
    const double scale = sigma * std::sqrt(dt);
    for (std::size_t k = 0; k < steps; ++k)
        path.values[k + 1] = path.values[k] + drift + scale * rng.normal();
    return path;
}

PathSample sample_brownian_drift(double mu, double sigma, const RaceParams& params, Seed seed) {
    Rng rng(seed);
    return sample_brownian_drift(mu, sigma, params.horizon, params.dt, rng);
}

std::optional<double> first_passage_count(const SpikeTrain& train, double theta) {
    const std::size_t k = count_threshold(theta);
    if (train.times.size() < k) return std::nullopt;
    return train.times[k - 1];
}

namespace {
double interpolate_crossing(double t_prev, double dt, double v_prev, double v_next, double theta) {
    if (v_next == v_prev) return t_prev + dt;
    return t_prev + dt * (theta - v_prev) / (v_next - v_prev);
}
}  // namespace

std::optional<double> first_passage_path(const PathSample& path, double theta) {
    if (!(theta > 0.0)) throw std::domain_error("theta must be > 0");
    for (std::size_t k = 1; k < path.values.size(); ++k) {
        if (path.values[k] >= theta)
            return interpolate_crossing(path.time(k - 1), path.dt, path.values[k - 1], path.values[k], theta);
    }
    return std::nullopt;
}

std::optional<double> brownian_first_passage(double mu, double sigma, double theta,
                                             double horizon, double dt, Rng& rng) {
    if (!(theta > 0.0)) throw std::domain_error("theta must be > 0");
    if (!(sigma >= 0.0)) throw std::domain_error("sigma must be >= 0");
    const std::size_t steps = grid_steps(horizon, dt);
    const double drift = mu * dt;
    const double scale = sigma * std::sqrt(dt);
    double value = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double next = value + drift + scale * rng.normal();
        if (next >= theta)
            return interpolate_crossing(static_cast<double>(k) * dt, dt, value, next, theta);
        value = next;
    }
    return std::nullopt;
}

}  // namespace racelab
