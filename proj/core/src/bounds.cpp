#include "racelab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "racelab/learning.hpp"
#include "racelab/parallel.hpp"
#include "racelab/processes.hpp"
#include "racelab/random.hpp"

namespace racelab {

MarginReport margin(const Matrix& values, const TaskSpec& task, MarginKind kind) {
    if (values.rows() != task.category_count() || values.cols() != task.nature_count())
        throw std::domain_error("margin matrix must be |categories| x |natures|");
    MarginReport report{kind, std::nullopt, std::numeric_limits<double>::infinity(), {}};
    for (std::size_t o = 0; o < task.nature_count(); ++o) {
        const std::size_t leader = task.category_of(o);
        for (std::size_t j = 0; j < task.category_count(); ++j) {
            if (j == leader) continue;
            const double gap = values(leader, o) - values(j, o);
            if (gap < report.min_gap) {
                report.min_gap = gap;
                report.witnesses.clear();
            }
            if (gap == report.min_gap) report.witnesses.push_back({o, leader, j});
        }
    }
    if (report.witnesses.empty()) {
        // A single category has no competitor.
        report.min_gap = 0.0;
        return report;
    }
    if (report.min_gap > 0.0) report.value = report.min_gap;
    return report;
}

Matrix hawkes_limit_rates(const TaskSpec& task) {
    const auto limit = feature_discrepancy(task).limit_weights;
    Matrix rates(task.category_count(), task.nature_count());
    for (std::size_t j = 0; j < task.category_count(); ++j)
        for (std::size_t o = 0; o < task.nature_count(); ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < task.feature_count(); ++i)
                acc += limit(i, j) * task.input_rates()(i, o);
            rates(j, o) = acc;
        }
    return rates;
}

MarginReport hawkes_margin(const TaskSpec& task) {
    return margin(hawkes_limit_rates(task), task, MarginKind::hawkes);
}

ThresholdInterval poisson_threshold_interval(const Matrix& gamma, double delta, double alpha,
                                             double horizon) {
    if (!(delta > 0.0)) throw std::domain_error("margin must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must be in (0, 1)");
    if (!(horizon > 0.0)) throw std::domain_error("T must be > 0");
    const auto gamma_min = gamma.min_positive_entry();
    if (!gamma_min) throw std::domain_error("rate matrix has no positive entry");
    const double gamma_inf = gamma.max_entry();
    const double log_term = std::log(2.0 * static_cast<double>(gamma.rows()) / alpha);
    const double ratio = gamma_inf / delta;
    const double lo = 8.0 / 3.0 * log_term * std::max(gamma_inf / *gamma_min, 4.0 * ratio * ratio);
    const double hi = delta * horizon - std::sqrt(8.0 / 3.0 * gamma_inf * horizon * log_term);
    return {lo, hi};
}

double poisson_upper_tail_bound(double gamma, double x) {
    if (!(gamma > 0.0)) throw std::domain_error("gamma must be > 0");
    if (!(x >= 0.0)) throw std::domain_error("x must be >= 0");
    return std::exp(-gamma * x * x / (2.0 * (1.0 + x / 3.0)));
}

double poisson_lower_tail_bound(double gamma, double x) {
    if (!(gamma > 0.0)) throw std::domain_error("gamma must be > 0");
    if (!(x >= 0.0) || x > gamma) throw std::domain_error("lower tail needs 0 <= x <= gamma");
    return std::exp(-x * x / (2.0 * gamma));
}

TailBounds poisson_tail_bounds(double gamma, double x) {
    return {poisson_upper_tail_bound(gamma, x), poisson_lower_tail_bound(gamma, x)};
}

SupBound poisson_sup_bound(double mu, double horizon, double beta) {
    if (!(mu > 0.0) || !(horizon > 0.0)) throw std::domain_error("mu and T must be > 0");
    if (!(beta > 0.0 && beta <= 2.0)) throw std::domain_error("beta must be in (0, 2]");
    const double log_term = std::log(2.0 / beta);
    return {std::sqrt(8.0 / 3.0 * mu * horizon * log_term), horizon >= 8.0 / (3.0 * mu) * log_term};
}

double brownian_sup_bound(double sigma, double horizon, double beta) {
    if (!(sigma >= 0.0) || !(horizon > 0.0)) throw std::domain_error("need sigma >= 0 and T > 0");
    if (!(beta > 0.0 && beta <= 2.0)) throw std::domain_error("beta must be in (0, 2]");
    return std::sqrt(2.0 * horizon * sigma * sigma * std::log(2.0 / beta));
}

AccuracyReport mc_accuracy(const RaceModel& model, std::span<const std::size_t> truth,
                           std::size_t trials, Seed seed, unsigned jobs) {
    if (trials < 100) throw std::domain_error("mc_accuracy needs at least 100 trials");
    const std::size_t natures = nature_count(model);
    if (truth.size() != natures) throw std::domain_error("truth must map every nature");
    std::vector<char> correct(trials), timed_out(trials);
    parallel_for(trials, [&](std::size_t t) {
        const std::size_t o = t % natures;
        const auto outcome = run_trial(model, o, seed.derive(t));
        correct[t] = outcome.crossed && outcome.choice == truth[o];
        timed_out[t] = !outcome.crossed;
    }, jobs);
    const auto hits = static_cast<std::size_t>(std::count(correct.begin(), correct.end(), 1));
    const auto timeouts = static_cast<std::size_t>(std::count(timed_out.begin(), timed_out.end(), 1));
    const double n = static_cast<double>(trials);
    return {static_cast<double>(hits) / n, static_cast<double>(timeouts) / n,
            stats::wilson_interval(hits, trials), trials};
}

std::vector<TailCheck> validate_poisson_tails(double gamma, std::span<const double> xs,
                                              std::size_t draws, Seed seed) {
    if (draws == 0) throw std::domain_error("need at least one draw");
    Rng rng(seed);
    std::vector<double> samples(draws);
    for (auto& s : samples) s = static_cast<double>(rng.poisson(gamma));
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(draws);
    std::vector<TailCheck> out;
    for (double x : xs) {
        TailCheck check{gamma, x, 0.0, poisson_upper_tail_bound(gamma, x), std::nullopt, std::nullopt};
        const double up = gamma * (1.0 + x);
        const auto first_up = std::lower_bound(samples.begin(), samples.end(), up);
        check.upper_frequency = static_cast<double>(samples.end() - first_up) / n;
        if (x <= gamma) {
            const double down = gamma - x;
            const auto past_down = std::upper_bound(samples.begin(), samples.end(), down);
            check.lower_frequency = static_cast<double>(past_down - samples.begin()) / n;
            check.lower_bound = poisson_lower_tail_bound(gamma, x);
        }
        out.push_back(check);
    }
    return out;
}

double ExceedanceCheck::standard_error() const {
    const double p = std::min(level, 1.0);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(paths));
}

namespace {

ExceedanceCheck count_exceedances(double bound, double beta, std::size_t paths, bool precondition,
                                  Seed seed, unsigned jobs, auto&& sup_of_path) {
    if (paths == 0) throw std::domain_error("need at least one path");
    std::vector<char> exceeded(paths);
    parallel_for(paths, [&](std::size_t p) {
        Rng rng(seed.derive(p));
        exceeded[p] = sup_of_path(rng) >= bound;
    }, jobs);
    return {bound, beta, paths,
            static_cast<std::size_t>(std::count(exceeded.begin(), exceeded.end(), 1)), precondition};
}

}  // namespace

ExceedanceCheck validate_poisson_sup(double mu, double horizon, double beta, std::size_t paths,
                                     Seed seed, unsigned jobs) {
    const auto bound = poisson_sup_bound(mu, horizon, beta);
    return count_exceedances(bound.deviation, beta, paths, bound.precondition_met, seed, jobs,
                             [&](Rng& rng) {
        // |Pi_t - mu t| is piecewise linear; its supremum is approached just
        // before or at a jump, or at T.
        double sup = 0.0, t = 0.0;
        double count = 0.0;
        for (;;) {
            t += rng.exponential(mu);
            if (t > horizon) break;
            sup = std::max(sup, std::abs(count - mu * t));
            count += 1.0;
            sup = std::max(sup, std::abs(count - mu * t));
        }
        return std::max(sup, std::abs(count - mu * horizon));
    });
}

ExceedanceCheck validate_brownian_sup(double sigma, double horizon, double beta, double dt,
                                      std::size_t paths, Seed seed, unsigned jobs) {
    if (!(dt > 0.0) || dt > horizon) throw std::domain_error("dt must be in (0, T]");
    const double bound = brownian_sup_bound(sigma, horizon, beta);
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const double scale = sigma * std::sqrt(dt);
    return count_exceedances(bound, beta, paths, true, seed, jobs, [&](Rng& rng) {
        double x = 0.0, sup = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            x += scale * rng.normal();
            sup = std::max(sup, std::abs(x));
        }
        return sup;
    });
}

}  // namespace racelab
