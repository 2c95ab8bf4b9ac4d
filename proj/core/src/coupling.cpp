#include "racelab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "racelab/parallel.hpp"
#include "racelab/processes.hpp"
#include "racelab/races.hpp"
#include "racelab/random.hpp"
#include "racelab/stats.hpp"

namespace racelab {

CouplingModel parse_coupling_model(std::string_view name) {
    if (name == "poisson") return CouplingModel::poisson;
    if (name == "brownian" || name == "ddm") return CouplingModel::brownian;
    if (name == "hawkes") return CouplingModel::hawkes;
    throw std::domain_error("unknown model '" + std::string(name) + "' (poisson, brownian, hawkes)");
}

std::string_view coupling_model_name(CouplingModel model) {
    switch (model) {
        case CouplingModel::poisson: return "poisson";
        case CouplingModel::brownian: return "brownian";
        case CouplingModel::hawkes: return "hawkes";
    }
    return "?";
}

double hitting_limit(CouplingModel model, const CouplingSetup& setup) {
    if (model == CouplingModel::hawkes) return setup.theta / (setup.rate * setup.kernel.l1_norm());
    return setup.theta / setup.rate;
}

namespace {

HawkesRace single_feature_hawkes(const CouplingSetup& setup) {
    TaskSpec task({"o"}, {{"j", {"o"}}}, {"i"}, Matrix(1, 1, setup.rate));
    return {task, WeightState::fixed(Matrix(1, 1, 1.0)), setup.kernel,
            RaceParams{setup.theta, setup.horizon, std::nullopt, setup.dt}};
}

std::optional<double> one_hitting_time(CouplingModel model, const CouplingSetup& setup,
                                       const std::optional<RaceModel>& base, std::size_t n, Seed seed) {
    const double scale = static_cast<double>(n);
    if (model == CouplingModel::brownian) {
        const double mu = scale * setup.rate;
        Rng rng(seed);
        return brownian_first_passage(mu, std::sqrt(mu), scale * setup.theta, setup.horizon, setup.dt, rng);
    }
    return scaled_trial(*base, 0, n, seed).hitting_times[0];
}

}  // namespace

RateCurve hitting_error_curve(CouplingModel model, const CouplingSetup& setup,
                              std::span<const std::size_t> n_values, std::size_t reps,
                              Seed seed, unsigned jobs) {
    if (!(setup.rate > 0.0))
        throw std::domain_error("rate must be > 0; drop categories whose rate is zero");
    if (!(setup.theta > 0.0) || !(setup.horizon > 0.0)) throw std::domain_error("theta and T must be > 0");
    if (n_values.empty() || reps == 0) throw std::domain_error("need n values and replications");
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        if (n_values[k] == 0) throw std::domain_error("n must be >= 1");
        if (k > 0 && n_values[k] <= n_values[k - 1]) throw std::domain_error("n values must increase");
    }

    std::optional<RaceModel> base;
    if (model == CouplingModel::poisson)
        base = PoissonRace{Matrix(1, 1, setup.rate), RaceParams{setup.theta, setup.horizon, std::nullopt, setup.dt}};
    else if (model == CouplingModel::hawkes)
        base = single_feature_hawkes(setup);

    RateCurve curve{model, {n_values.begin(), n_values.end()}, {}, hitting_limit(model, setup)};
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        std::vector<double> errors(reps);
        std::vector<char> missed(reps);
        const Seed row = seed.derive(n_values[k]);
        parallel_for(reps, [&](std::size_t r) {
            const auto tau = one_hitting_time(model, setup, base, n_values[k], row.derive(r));
            missed[r] = !tau;
            errors[r] = std::abs(tau.value_or(setup.horizon) - curve.limit);
        }, jobs);
        curve.errors.push_back({stats::median(errors), stats::quantile(errors, 0.1),
                                stats::quantile(errors, 0.9),
                                static_cast<std::size_t>(std::count(missed.begin(), missed.end(), 1))});
    }
    return curve;
}

RateFit rate_fit(const RateCurve& curve) {
    const std::size_t m = curve.n_values.size();
    if (m < 4 || curve.errors.size() != m) throw std::domain_error("rate_fit needs at least four n values");
    if (static_cast<double>(curve.n_values.back()) < 100.0 * static_cast<double>(curve.n_values.front()))
        throw std::domain_error("n values must span at least two decades");
    RateFit fit;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < m; ++k) {
        if (!(curve.errors[k].median > 0.0)) {
            fit.degenerate = true;
            fit.slope = fit.intercept = fit.ci_lo = fit.ci_hi = std::nan("");
            return fit;
        }
        x.push_back(std::log(static_cast<double>(curve.n_values[k])));
        y.push_back(std::log(curve.errors[k].median));
    }
    const auto ls = stats::ols(x, y);
    const double t = stats::student_t_quantile(0.975, static_cast<double>(m - 2));
    fit.slope = ls.slope;
    fit.intercept = ls.intercept;
    fit.ci_lo = ls.slope - t * ls.slope_stderr;
    fit.ci_hi = ls.slope + t * ls.slope_stderr;
    return fit;
}

namespace {

std::optional<std::size_t> modal_choice(const std::vector<std::optional<std::size_t>>& choices) {
    std::map<std::optional<std::size_t>, std::size_t> counts;
    for (const auto& c : choices) ++counts[c];
    std::optional<std::size_t> best;
    std::size_t best_count = 0;
    for (const auto& [choice, count] : counts)
        if (count > best_count) {
            best = choice;
            best_count = count;
        }
    return best;
}

}  // namespace

AgreementReport model_agreement(std::span<const double> gamma, double theta, double horizon, double dt,
                                std::size_t n, std::size_t reps, Seed seed, unsigned jobs) {
    if (gamma.empty() || reps == 0 || n == 0) throw std::domain_error("need rates, n >= 1 and reps >= 1");
    const double scale = static_cast<double>(n);
    std::vector<double> rates(gamma.begin(), gamma.end());
    for (double& r : rates) r *= scale;
    const RaceParams params{scale * theta, horizon, std::nullopt, dt};
    params.validate();

    AgreementReport report;
    report.n = n;
    report.poisson_rt.resize(reps);
    report.ddm_rt.resize(reps);
    std::vector<std::optional<std::size_t>> poisson_choice(reps), ddm_choice(reps);
    const Seed poisson_seed = seed.derive(1), ddm_seed = seed.derive(2);
    parallel_for(reps, [&](std::size_t r) {
        const auto p = poisson_trial(rates, params, poisson_seed.derive(r));
        const auto d = ddm_trial(rates, params, ddm_seed.derive(r));
        report.poisson_rt[r] = p.reaction_time;
        report.ddm_rt[r] = d.reaction_time;
        poisson_choice[r] = p.choice;
        ddm_choice[r] = d.choice;
    }, jobs);

    report.wasserstein = stats::wasserstein1(report.poisson_rt, report.ddm_rt);
    report.poisson_modal = modal_choice(poisson_choice);
    report.ddm_modal = modal_choice(ddm_choice);
    report.symmetric = std::all_of(gamma.begin(), gamma.end(), [&](double g) { return g == gamma[0]; });
    if (!report.symmetric) report.agree = report.poisson_modal == report.ddm_modal;
    return report;
}

std::vector<double> mean_output_rates(const TaskSpec& task, const WeightState& weights, std::size_t nature) {
    if (nature >= task.nature_count()) throw std::domain_error("unknown nature index");
    if (weights.feature_count() != task.feature_count() || weights.category_count() != task.category_count())
        throw std::domain_error("weight matrix must be |features| x |categories|");
    std::vector<double> out(task.category_count(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j)
        for (std::size_t i = 0; i < task.feature_count(); ++i)
            out[j] += weights.weights(i, j) * task.input_rates()(i, nature);
    return out;
}

Matrix limit_covariance(const TaskSpec& task, const WeightState& weights, std::size_t nature,
                        std::size_t n, const Kernel& kernel, double t) {
    const auto lambda = mean_output_rates(task, weights, nature);
    const std::size_t categories = task.category_count();
    Matrix cov(categories, categories);
    const double scale = static_cast<double>(n) * t;
    for (std::size_t a = 0; a < categories; ++a)
        for (std::size_t b = 0; b < categories; ++b) {
            double shared = 0.0;
            for (std::size_t i = 0; i < task.feature_count(); ++i)
                shared += weights.weights(i, a) * weights.weights(i, b) * task.input_rates()(i, nature);
            if (a == b) shared += kernel.l1_norm() * lambda[a];
            cov(a, b) = scale * shared;
        }
    return cov;
}

DiffusionSample correlated_ddm_sample(const TaskSpec& task, const WeightState& weights,
                                      std::size_t nature, std::size_t n, const Kernel& kernel,
                                      const RaceParams& params, Seed seed) {
    params.validate();
    if (n == 0) throw std::domain_error("n must be >= 1");
    const auto lambda = mean_output_rates(task, weights, nature);
    for (double l : lambda)
        if (!(l > 0.0)) throw std::domain_error("every category needs lambda_bar > 0; drop the silent ones");

    const std::size_t categories = task.category_count();
    const std::size_t features = task.feature_count();
    const double scale = static_cast<double>(n);
    const double sqrt_dt = std::sqrt(params.dt);
    const double level = scale * params.theta;

    // Per-step noise loadings.
    std::vector<double> own(categories);
    for (std::size_t j = 0; j < categories; ++j) own[j] = std::sqrt(scale * lambda[j] * kernel.l1_norm()) * sqrt_dt;
    Matrix shared(features, categories);
    for (std::size_t i = 0; i < features; ++i) {
        const double s = std::sqrt(scale * task.input_rates()(i, nature)) * sqrt_dt;
        for (std::size_t j = 0; j < categories; ++j) shared(i, j) = weights.weights(i, j) * s;
    }

    Rng rng(seed);
    const auto steps = static_cast<std::size_t>(std::llround(params.horizon / params.dt));
    DiffusionSample sample{std::vector<double>(categories, 0.0),
                           std::vector<std::optional<double>>(categories)};
    std::vector<double> feature_noise(features);
    double g_prev = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k + 1) * params.dt;
        const double g_next = kernel_cumulative(kernel, t);
        for (double& z : feature_noise) z = rng.normal();
        for (std::size_t j = 0; j < categories; ++j) {
            double dw = scale * lambda[j] * (g_next - g_prev) + own[j] * rng.normal();
            for (std::size_t i = 0; i < features; ++i) dw += shared(i, j) * feature_noise[i];
            const double before = sample.terminal[j];
            const double after = before + dw;
            sample.terminal[j] = after;
            if (!sample.hitting_times[j] && after >= level) {
                const double frac = (level - before) / (after - before);
                sample.hitting_times[j] = t - params.dt + frac * params.dt;
            }
        }
        g_prev = g_next;
    }
    return sample;
}

}  // namespace racelab
