#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "racelab/core_model.hpp"
#include "racelab/races.hpp"
#include "racelab/stats.hpp"

namespace racelab {

enum class MarginKind { drift, poisson, hawkes };

struct MarginWitness {
    std::size_t nature;
    std::size_t leader;      ///< true category of the nature
    std::size_t competitor;
};

struct MarginReport {
    MarginKind kind;
    /// min over natures o and categories j != j*(o) of v^{j*}_o - v^j_o, or
    /// empty when that minimum is <= 0.
    std::optional<double> value;
    /// Signed minimum gap, reported even when the assumption fails.
    double min_gap = 0.0;
    /// Every (nature, leader, competitor) triple attaining min_gap.
    std::vector<MarginWitness> witnesses;
};

/// Margin of an evidence matrix indexed (category, nature) with respect to
/// the task's true categories.
MarginReport margin(const Matrix& values, const TaskSpec& task, MarginKind kind);

/// lambda_bar^j_o = sum_i w_inf^{i->j} gamma^i_o, indexed (category, nature).
Matrix hawkes_limit_rates(const TaskSpec& task);

/// Margin of the learned limit network, margin(hawkes_limit_rates(task)).
MarginReport hawkes_margin(const TaskSpec& task);

struct ThresholdInterval {
    double lo;
    double hi;
    bool empty() const { return lo > hi; }
    double midpoint() const { return 0.5 * (lo + hi); }
};

/// Range of count thresholds for which the Poisson race classifies correctly
/// with probability at least 1 - alpha. `gamma` is indexed (category, nature).
/// Throws std::domain_error when delta <= 0, alpha outside (0, 1), T <= 0 or
/// gamma has no positive entry.
ThresholdInterval poisson_threshold_interval(const Matrix& gamma, double delta, double alpha, double horizon);

struct TailBounds {
    double upper;  ///< bound on P(X >= gamma (1 + x))
    double lower;  ///< bound on P(X <= gamma - x)
};

double poisson_upper_tail_bound(double gamma, double x);
/// Requires 0 <= x <= gamma.
double poisson_lower_tail_bound(double gamma, double x);
/// Both tails; requires 0 <= x <= gamma.
TailBounds poisson_tail_bounds(double gamma, double x);

struct SupBound {
    double deviation;
    bool precondition_met;
};

/// Deviation d with P(sup_{t<=T} |Pi_t - mu t| >= d) <= beta for a rate-mu
/// Poisson process. The guarantee needs T >= 8 log(2/beta) / (3 mu).
SupBound poisson_sup_bound(double mu, double horizon, double beta);

/// Deviation d with P(sup_{t<=T} |W_t - mu t| >= d) <= beta for a Brownian
/// motion with scaling sigma. beta in (0, 2].
double brownian_sup_bound(double sigma, double horizon, double beta);

struct AccuracyReport {
    double accuracy;       ///< fraction correct and crossed before T
    double timeout_rate;   ///< fraction with no crossing
    stats::Interval ci;    ///< Wilson 95 % interval on accuracy
    std::size_t trials;
};

/// Monte Carlo accuracy of a race model. Trial t presents nature
/// t mod |natures|; `truth` maps nature index to its category index.
/// Requires trials >= 100.
AccuracyReport mc_accuracy(const RaceModel& model, std::span<const std::size_t> truth,
                           std::size_t trials, Seed seed, unsigned jobs = 0);

struct TailCheck {
    double gamma;
    double x;
    double upper_frequency;
    double upper_bound;
    /// Present when 0 <= x <= gamma.
    std::optional<double> lower_frequency;
    std::optional<double> lower_bound;
};

/// Empirical frequencies of both Poisson tails from `draws` samples of
/// Poisson(gamma), compared with the bounds, for each deviation in xs.
std::vector<TailCheck> validate_poisson_tails(double gamma, std::span<const double> xs,
                                              std::size_t draws, Seed seed);

struct ExceedanceCheck {
    double bound;
    double level;
    std::size_t paths;
    std::size_t exceedances;
    bool precondition_met;
    double frequency() const { return static_cast<double>(exceedances) / static_cast<double>(paths); }
    /// Binomial standard error of the frequency at the nominal level.
    double standard_error() const;
};

/// Exceedance of poisson_sup_bound by exactly simulated paths (the supremum
/// is attained at jump times).
ExceedanceCheck validate_poisson_sup(double mu, double horizon, double beta, std::size_t paths,
                                     Seed seed, unsigned jobs = 0);

/// Exceedance of brownian_sup_bound by grid paths of W_t - mu t.
ExceedanceCheck validate_brownian_sup(double sigma, double horizon, double beta, double dt,
                                      std::size_t paths, Seed seed, unsigned jobs = 0);

}  // namespace racelab
