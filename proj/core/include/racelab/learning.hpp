#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "racelab/core_model.hpp"
#include "racelab/races.hpp"
#include "racelab/weight_state.hpp"

namespace racelab {

/// gamma_hat^i = count_i / T_min.
std::vector<double> empirical_rates(std::span<const std::size_t> input_counts, double t_min);

/// Gains g^{i->j} that output neuron `target` assigns to every input after an
/// object of category `truth`:
///   gamma_hat * balance[j]                       if truth == target,
///  -gamma_hat * balance[truth] / (|J| - 1)       otherwise.
/// `balance` holds M / M^j per category.
std::vector<double> trial_gains(std::span<const double> gamma_hat, std::size_t truth,
                                std::size_t target, std::span<const double> balance);

/// All gains of one trial, indexed (feature, category).
Matrix gain_matrix(std::span<const double> gamma_hat, std::size_t truth,
                   std::span<const double> balance);

/// Adds the gains to the cumulative gains and recomputes every weight column
/// as softmax(eta * G) with max subtraction.
WeightState ewa_update(const WeightState& state, const Matrix& gains);

struct DiscrepancyReport {
    Matrix discrepancy;                            ///< d^{i->j}, (feature, category)
    std::vector<std::vector<std::size_t>> best;    ///< I^j
    std::vector<std::optional<double>> gap;        ///< delta^j, empty when I^j == I
    Matrix limit_weights;                          ///< w_inf, (feature, category)
};

/// Tolerance used when forming argmax sets of the discrepancy.
inline constexpr double discrepancy_tie_tolerance = 1e-9;

DiscrepancyReport feature_discrepancy(const TaskSpec& task);

/// Presentation order. Either an explicit list of nature indices, or blocks
/// of the given natures in a fresh random order at each repetition.
struct Schedule {
    std::vector<std::size_t> natures;
    bool reshuffle_blocks = true;
};

struct FixedTrials {
    std::size_t count;
};
struct ConsecutiveCorrect {
    std::size_t streak = 15;
};
using StopRule = std::variant<FixedTrials, ConsecutiveCorrect>;

inline constexpr std::size_t default_hard_cap = 500;

struct TrialRecord {
    std::size_t nature;
    DecisionOutcome outcome;
    bool correct;
};

struct LearningResult {
    std::vector<TrialRecord> trace;
    WeightState final_state;
    bool hit_cap = false;
};

/// Runs learning trials with feedback: each trial is a hawkes_trial whose
/// input counts over [0, T_min] feed the gains of the true category, then
/// the weights are updated. A timeout or wrong answer resets the streak.
LearningResult run_learning_phase(const TaskSpec& task, double eta, const Kernel& kernel,
                                  const RaceParams& params, const Schedule& schedule,
                                  const StopRule& stop, Seed seed,
                                  std::size_t hard_cap = default_hard_cap);

/// Continues from an existing weight state (eta taken from the state).
LearningResult run_learning_phase(const TaskSpec& task, WeightState initial, const Kernel& kernel,
                                  const RaceParams& params, const Schedule& schedule,
                                  const StopRule& stop, Seed seed,
                                  std::size_t hard_cap = default_hard_cap);

/// Length of the trailing run of correct trials.
std::size_t trailing_streak(std::span<const bool> correct);

struct WeightErrorBound {
    bool precondition_met = false;
    /// Left-hand side of the M * T_min condition and its required value.
    double m_tmin = 0.0;
    double m_tmin_required = 0.0;
    /// Bound on ||w^j_{M+1} - w^j_inf||_2, per category.
    std::vector<double> per_category;
    /// The shared first (estimation) term.
    double estimation_term = 0.0;
};

/// Finite-sample bound on the distance of learned weights to the limit
/// weights after M balanced presentations with eta = eta0 / sqrt(M).
WeightErrorBound weight_error_bound(const TaskSpec& task, double eta0, std::size_t m,
                                    double t_min, double alpha);

}  // namespace racelab
