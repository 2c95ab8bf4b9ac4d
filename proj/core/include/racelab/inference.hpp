#pragma once

#include <cstddef>
#include <vector>

#include "racelab/experiment.hpp"
#include "racelab/session.hpp"

namespace racelab {

struct PriorBox {
    double eta_lo = 0.09;
    double eta_hi = 2.0;
    double theta_lo = 0.04;
    double theta_hi = 0.2;

    void validate() const;
    bool contains(double eta, double theta) const;
};

/// Checkpoints of the cumulative learning answer time, as fractions of the
/// learning length.
inline constexpr std::size_t summary_checkpoints = 10;
/// 1 + 10 + 1 + 18 + 1 entries.
inline constexpr std::size_t summary_size = 1 + summary_checkpoints + 1 + transfer_trial_count + 1;

/// Fixed-length summary of a session, in seconds:
///   [0]      number of learning trials
///   [1..10]  cumulative learning answer time after ceil(f L) trials, f = 0.1..1
///   [11]     learning accuracy
///   [12..29] transfer answer times in trial order, padded with their mean
///            (or truncated) to 18 entries
///   [30]     mean transfer answer time
/// Throws std::domain_error when either phase is empty.
std::vector<double> summarize(const Session& session);

/// Relative weight of each summary entry in the ABC distance.
std::vector<double> default_summary_weights();

struct AcceptedPoint {
    double eta;
    double theta;
    double distance;
    std::size_t simulation;  ///< index k of the prior-predictive draw
};

struct PosteriorSample {
    std::vector<AcceptedPoint> accepted;
    std::size_t n_sims = 0;
    double quantile = 0.0;
    double cutoff = 0.0;
    /// The observed session never met the learning criterion.
    bool low_confidence = false;
};

struct AbcOptions {
    std::size_t n_sims = 5000;
    double quantile = 0.02;
    std::vector<double> weights = default_summary_weights();
    unsigned jobs = 0;
};

struct PriorDraw {
    double eta;
    double theta;
    Session session;
};

/// Prior-predictive simulation k of a fit with the given seed: parameters
/// from seed.derive(k) stream 0, session from stream 1.
PriorDraw abc_simulation(const RocketTask& task, const PriorBox& prior, const ExperimentConfig& config,
                         Seed seed, std::size_t k);

/// ABC rejection: n_sims prior draws, each simulated on the observed task,
/// summaries standardized by their prior-predictive standard deviations,
/// weighted Euclidean distance, keep the closest ceil(quantile n_sims).
/// Requires n_sims >= 1000 (use abc_fit_unchecked for smaller budgets in
/// tests) and quantile in (0, 0.2].
PosteriorSample abc_fit(const Session& observed, const PriorBox& prior, const ExperimentConfig& config,
                        const AbcOptions& options, Seed seed);

/// Same mechanics without the budget precondition.
PosteriorSample abc_fit_unchecked(const Session& observed, const PriorBox& prior,
                                  const ExperimentConfig& config, const AbcOptions& options, Seed seed);

/// Prior-predictive batch of one fit: parameters, summaries, and the
/// per-entry standard deviations used to standardize distances.
struct ReferenceTable {
    std::vector<double> eta;
    std::vector<double> theta;
    std::vector<std::vector<double>> summaries;
    std::vector<double> scale;

    std::size_t size() const { return eta.size(); }
};

ReferenceTable reference_table(const RocketTask& task, const PriorBox& prior, const ExperimentConfig& config,
                               std::size_t n_sims, Seed seed, unsigned jobs = 0);

/// Rejection step: keeps the closest ceil(quantile n) draws to `target`.
PosteriorSample abc_accept(const ReferenceTable& table, const std::vector<double>& target, double quantile,
                           const std::vector<double>& weights = default_summary_weights());

/// The task rebuilt from the observed session, as used by abc_fit.
RocketTask abc_task(const Session& observed, const ExperimentConfig& config, Seed seed);

struct PointEstimate {
    double eta;
    double theta;
};

/// Coordinatewise posterior medians. Throws on an empty sample.
PointEstimate posterior_point(const PosteriorSample& sample);

nlohmann::json posterior_to_json(const PosteriorSample& sample);
PosteriorSample posterior_from_json(const nlohmann::json& doc);

}  // namespace racelab
