#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "racelab/core_model.hpp"
#include "racelab/learning.hpp"
#include "racelab/session.hpp"

namespace racelab {

/// Model constants of the rocket experiment that are not fitted.
struct ExperimentConfig {
    double gamma = 100.0;     ///< input rate of an active feature, events/s
    double t_min = 0.5;       ///< rate-estimation window, s
    double horizon = 5.0;     ///< response window, s
    Kernel kernel = Kernel::default_kernel();
    /// Output spikes per unit of theta: the race threshold is
    /// ceil(theta * threshold_scale) events.
    double threshold_scale = 1000.0;
    std::size_t streak = learning_streak;
    std::size_t hard_cap = default_hard_cap;
    /// Gain unit of the fitted learning rate, in multiples of gamma: the
    /// weights follow softmax(eta * G / (eta_unit * gamma)). With raw gains
    /// (about 2 gamma per trial) every eta in the prior saturates the
    /// softmax within a few trials and the learning length stops depending
    /// on eta.
    double eta_unit = 64.0;

    RaceParams race_params(double theta) const;
    /// EWA rate applied to raw gains for a fitted eta.
    double ewa_rate(double eta) const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& doc);
};

/// 16 rockets, coded by 4 bits (head, body, fins, flames). Feature
/// 2c + v is "characteristic c has value v", so every rocket activates
/// exactly 4 of the 8 features. Category 0 is "yes", category 1 is "no".
struct RocketTask {
    TaskSpec universe;
    Rule rule;
    std::vector<std::size_t> learning;  ///< indices into universe natures
    std::vector<std::size_t> transfer;
    double gamma;

    /// The universe restricted to the learning natures, in `learning` order.
    TaskSpec learning_task() const;
    /// Feature index of the rule characteristic with the given value.
    std::size_t rule_feature(int value) const { return 2 * rule.characteristic + static_cast<std::size_t>(value); }
};

inline constexpr std::array<std::string_view, 8> rocket_feature_names{
    "head_sharp", "head_round", "body_straight", "body_round",
    "fins_straight", "fins_curved", "flames_one", "flames_three"};

/// 4-character code of rocket index 0..15 (bit 3 = head ... bit 0 = flames).
std::string rocket_code(std::size_t index);

/// Encodes the 16 rockets under a rule with binary feature rates.
TaskSpec rocket_universe(double gamma, const Rule& rule);

/// Task with a given rule and learning set (5 natures per category).
RocketTask rocket_task_from(double gamma, const Rule& rule, std::vector<std::size_t> learning);

/// Uniform rule and uniform 5 + 5 learning split.
RocketTask make_rocket_task(double gamma, Seed seed);

/// Rebuilds the task of a recorded session: rule plus the natures seen in
/// its learning phase. Missing learning natures (short or withdrawn
/// sessions) are completed deterministically from the seed.
RocketTask rocket_task_of(const Session& session, double gamma, Seed seed);

/// Learning with feedback until `streak` consecutive correct trials (or the
/// hard cap), then 18 transfer trials with frozen weights in three blocks
/// of the 6 transfer natures. The race threshold is ceil(theta * scale).
Session simulate_session(const RocketTask& task, double eta, double theta,
                         const ExperimentConfig& config, Seed seed);

/// Response time in ms as recorded by the task: a crossing is rounded and
/// kept inside [1, 4999], no crossing records 5000.
int rt_to_ms(const DecisionOutcome& outcome);

}  // namespace racelab
