#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "racelab/core_model.hpp"
#include "racelab/weight_state.hpp"

namespace racelab {

enum class CouplingModel { poisson, brownian, hawkes };

CouplingModel parse_coupling_model(std::string_view name);
std::string_view coupling_model_name(CouplingModel model);

/// One-accumulator setup for hitting-error curves. `rate` is gamma for the
/// Poisson and Brownian models and lambda_bar (a single input feature with
/// unit weight) for the Hawkes model.
struct CouplingSetup {
    double rate = 2.0;
    double theta = 4.0;
    double horizon = 8.0;
    double dt = 1e-3;
    Kernel kernel = Kernel::default_kernel();
};

struct ErrorSummary {
    double median;
    double q10;
    double q90;
    std::size_t unreached;  ///< replications with no crossing before T
};

struct RateCurve {
    CouplingModel model;
    std::vector<std::size_t> n_values;
    std::vector<ErrorSummary> errors;
    double limit;
};

/// Limit hitting time theta / gamma, or theta / (lambda_bar ||g||_1).
double hitting_limit(CouplingModel model, const CouplingSetup& setup);

/// |tau_n - limit| summaries for the n-copy process against threshold n theta.
/// A replication that does not cross before T counts with error |T - limit|.
RateCurve hitting_error_curve(CouplingModel model, const CouplingSetup& setup,
                              std::span<const std::size_t> n_values, std::size_t reps,
                              Seed seed, unsigned jobs = 0);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    /// Set when some median error is zero, so the log fit is undefined.
    bool degenerate = false;
};

/// OLS of log median error on log n with a 95 % t interval on the slope.
/// Needs at least four n values spanning two decades.
RateFit rate_fit(const RateCurve& curve);

struct AgreementReport {
    std::size_t n;
    double wasserstein;
    /// Most frequent choice of each model; empty means "no decision" won.
    std::optional<std::size_t> poisson_modal;
    std::optional<std::size_t> ddm_modal;
    /// Empty when all rates are equal (exchangeable categories).
    std::optional<bool> agree;
    bool symmetric = false;
    std::vector<double> poisson_rt;
    std::vector<double> ddm_rt;
};

/// Runs reps independent Poisson-race and diffusion-race trials with rates
/// n * gamma_j, scaling sqrt(n gamma_j) and threshold n theta, and compares
/// the reaction times tau ^ T and the modal winners.
AgreementReport model_agreement(std::span<const double> gamma, double theta, double horizon, double dt,
                                std::size_t n, std::size_t reps, Seed seed, unsigned jobs = 0);

/// lambda_bar^j = sum_i w^{i->j} gamma^i_o for every category.
std::vector<double> mean_output_rates(const TaskSpec& task, const WeightState& weights, std::size_t nature);

/// Covariance of the limit diffusion at time t (same-time entries),
/// n t (sum_i w^{i j1} w^{i j2} gamma^i + 1{j1 = j2} ||g||_1 lambda_bar^{j1}).
Matrix limit_covariance(const TaskSpec& task, const WeightState& weights, std::size_t nature,
                        std::size_t n, const Kernel& kernel, double t);

struct DiffusionSample {
    std::vector<double> terminal;                    ///< W^j_T per category
    std::vector<std::optional<double>> hitting_times;  ///< first crossing of n theta
};

/// Euler scheme on the params.dt grid for
/// dW^j = n lambda_bar^j dG(t) + sqrt(n lambda_bar^j ||g||_1) dB^j + sum_i w^{i->j} sqrt(n gamma^i) dB^i,
/// with one noise per feature shared across categories.
DiffusionSample correlated_ddm_sample(const TaskSpec& task, const WeightState& weights,
                                      std::size_t nature, std::size_t n, const Kernel& kernel,
                                      const RaceParams& params, Seed seed);

}  // namespace racelab
