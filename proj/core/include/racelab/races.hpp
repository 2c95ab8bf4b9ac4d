#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "racelab/core_model.hpp"
#include "racelab/random.hpp"
#include "racelab/weight_state.hpp"

namespace racelab {

/// Result of one race-to-threshold trial.
///
/// crossed is false exactly when no category reached the threshold before
/// T; then choice is empty and reaction_time == T. For the Hawkes model
/// reaction_time = (T_min v tau) ^ T, so it never falls below T_min.
struct DecisionOutcome {
    std::optional<std::size_t> choice;
    double reaction_time = 0.0;
    bool crossed = false;
    /// Per-category hitting time, empty when the threshold was not reached
    /// before T.
    std::vector<std::optional<double>> hitting_times;
    /// Hawkes only: input spike counts per feature over [0, T_min].
    std::vector<std::size_t> input_counts;
};

/// Independent drifted Brownian accumulators with drift mu_j and scaling
/// sqrt(mu_j), crossing detected on the dt grid.
DecisionOutcome ddm_trial(std::span<const double> drifts, const RaceParams& params, Rng& rng);
DecisionOutcome ddm_trial(std::span<const double> drifts, const RaceParams& params, Seed seed);

/// Independent Poisson counters; the winner is the first to ceil(theta) events.
DecisionOutcome poisson_trial(std::span<const double> rates, const RaceParams& params, Rng& rng);
DecisionOutcome poisson_trial(std::span<const double> rates, const RaceParams& params, Seed seed);

/// Hawkes counter network: input features spike as Poisson processes with
/// rates gamma^I_nature, output neurons race to the threshold.
DecisionOutcome hawkes_trial(const TaskSpec& task, const WeightState& weights,
                             std::size_t nature, const Kernel& kernel,
                             const RaceParams& params, Rng& rng);
DecisionOutcome hawkes_trial(const TaskSpec& task, const WeightState& weights,
                             std::size_t nature, const Kernel& kernel,
                             const RaceParams& params, Seed seed);
DecisionOutcome hawkes_trial(const TaskSpec& task, const WeightState& weights,
                             std::string_view nature, const Kernel& kernel,
                             const RaceParams& params, Seed seed);

/// Evidence rates indexed (category, nature): drifts for the diffusion race,
/// intensities for the Poisson race.
struct DdmRace {
    Matrix drifts;
    RaceParams params;
};
struct PoissonRace {
    Matrix rates;
    RaceParams params;
};
struct HawkesRace {
    TaskSpec task;
    WeightState weights;
    Kernel kernel;
    RaceParams params;
};
using RaceModel = std::variant<DdmRace, PoissonRace, HawkesRace>;

std::string_view model_name(const RaceModel& model);
std::size_t nature_count(const RaceModel& model);
const RaceParams& race_params(const RaceModel& model);

/// One trial of any model with the object of the given nature.
DecisionOutcome run_trial(const RaceModel& model, std::size_t nature, Seed seed);

/// n-copy variant against threshold n * theta. Poisson: rates n * gamma.
/// Hawkes: input rates n * gamma, shared weights, kernel support shrunk to
/// min(support, n^{-1/2}) at constant L1 norm. n = 1 reproduces run_trial.
/// The diffusion race has no scaled variant here.
DecisionOutcome scaled_trial(const RaceModel& model, std::size_t nature, std::size_t n, Seed seed);

/// Mean DDM reaction time at params.dt and at dt / 2 over `reps` trials
/// each; converged when they differ by at most `tolerance` (relative).
struct DtCheck {
    double mean_rt;
    double mean_rt_half;
    double relative_change;
    bool converged;
};

DtCheck ddm_dt_check(std::span<const double> drifts, const RaceParams& params, std::size_t reps, Seed seed,
                     double tolerance = 0.02);

}  // namespace racelab
