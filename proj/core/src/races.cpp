#include "racelab/races.hpp"

#include <cmath>
#include <stdexcept>

#include "racelab/processes.hpp"

namespace racelab {

namespace {

/// Picks the earliest hitting time below T; ties go to the lowest index.
void settle(DecisionOutcome& outcome, double horizon) {
    for (std::size_t j = 0; j < outcome.hitting_times.size(); ++j) {
        const auto& tau = outcome.hitting_times[j];
        if (!tau || *tau >= horizon) continue;
        if (!outcome.choice || *tau < *outcome.hitting_times[*outcome.choice]) outcome.choice = j;
    }
    outcome.crossed = outcome.choice.has_value();
    outcome.reaction_time = outcome.crossed ? *outcome.hitting_times[*outcome.choice] : horizon;
}

void drop_late_hits(DecisionOutcome& outcome, double horizon) {
    for (auto& tau : outcome.hitting_times)
        if (tau && *tau >= horizon) tau.reset();
}

DecisionOutcome poisson_race(std::span<const double> rates, double threshold,
                             double horizon, Rng& rng) {
    if (rates.empty()) throw std::domain_error("poisson_trial needs at least one category");
    const std::size_t k = count_threshold(threshold);
    DecisionOutcome outcome;
    outcome.hitting_times.resize(rates.size());
    for (std::size_t j = 0; j < rates.size(); ++j) {
        if (!(rates[j] >= 0.0) || !std::isfinite(rates[j]))
            throw std::domain_error("poisson rates must be finite and >= 0");
        if (rates[j] == 0.0) continue;
        // The k-th arrival of a rate-gamma process is Erlang(k, gamma).
        outcome.hitting_times[j] = rng.erlang(k, rates[j]);
    }
    settle(outcome, horizon);
    drop_late_hits(outcome, horizon);
    return outcome;
}

DecisionOutcome hawkes_race(const TaskSpec& task, const WeightState& weights,
                            std::size_t nature, const Kernel& kernel,
                            const RaceParams& params, double rate_scale,
                            double threshold, Rng& rng) {
    if (nature >= task.nature_count()) throw std::domain_error("unknown nature index");
    if (weights.feature_count() != task.feature_count() ||
        weights.category_count() != task.category_count())
        throw std::domain_error("weight matrix must be |features| x |categories|");
    const double horizon = params.horizon;
    const double t_min = params.t_min.value_or(0.0);

    std::vector<SpikeTrain> inputs;
    inputs.reserve(task.feature_count());
    DecisionOutcome outcome;
    outcome.input_counts.resize(task.feature_count());
    for (std::size_t i = 0; i < task.feature_count(); ++i) {
        inputs.push_back(sample_poisson(rate_scale * task.input_rates()(i, nature), horizon, rng));
        outcome.input_counts[i] = inputs.back().count_at(t_min);
    }

    const std::size_t k = count_threshold(threshold);
    outcome.hitting_times.resize(task.category_count());
    for (std::size_t j = 0; j < task.category_count(); ++j) {
        const auto column = weights.column(j);
        const auto output = sample_hawkes_output(inputs, column, kernel, horizon, rng, k);
        outcome.hitting_times[j] = first_passage_count(output, threshold);
    }
    settle(outcome, horizon);
    drop_late_hits(outcome, horizon);
    if (outcome.crossed) outcome.reaction_time = std::min(std::max(t_min, outcome.reaction_time), horizon);
    return outcome;
}

}  // namespace

DecisionOutcome ddm_trial(std::span<const double> drifts, const RaceParams& params, Rng& rng) {
    if (drifts.empty()) throw std::domain_error("ddm_trial needs at least one category");
    params.validate();
    DecisionOutcome outcome;
    outcome.hitting_times.resize(drifts.size());
    for (std::size_t j = 0; j < drifts.size(); ++j) {
        if (!(drifts[j] >= 0.0) || !std::isfinite(drifts[j]))
            throw std::domain_error("drifts must be finite and >= 0");
        if (drifts[j] == 0.0) continue;
        outcome.hitting_times[j] = brownian_first_passage(drifts[j], std::sqrt(drifts[j]),
                                                          params.theta, params.horizon, params.dt, rng);
    }
    settle(outcome, params.horizon);
    drop_late_hits(outcome, params.horizon);
    return outcome;
}

DecisionOutcome ddm_trial(std::span<const double> drifts, const RaceParams& params, Seed seed) {
    Rng rng(seed);
    return ddm_trial(drifts, params, rng);
}

DecisionOutcome poisson_trial(std::span<const double> rates, const RaceParams& params, Rng& rng) {
    params.validate();
    return poisson_race(rates, params.theta, params.horizon, rng);
}

DecisionOutcome poisson_trial(std::span<const double> rates, const RaceParams& params, Seed seed) {
    Rng rng(seed);
    return poisson_trial(rates, params, rng);
}

DecisionOutcome hawkes_trial(const TaskSpec& task, const WeightState& weights,
                             std::size_t nature, const Kernel& kernel,
                             const RaceParams& params, Rng& rng) {
    params.validate();
    return hawkes_race(task, weights, nature, kernel, params, 1.0, params.theta, rng);
}

DecisionOutcome hawkes_trial(const TaskSpec& task, const WeightState& weights,
                             std::size_t nature, const Kernel& kernel,
                             const RaceParams& params, Seed seed) {
    Rng rng(seed);
    return hawkes_trial(task, weights, nature, kernel, params, rng);
}

DecisionOutcome hawkes_trial(const TaskSpec& task, const WeightState& weights,
                             std::string_view nature, const Kernel& kernel,
                             const RaceParams& params, Seed seed) {
    return hawkes_trial(task, weights, task.nature_index(nature), kernel, params, seed);
}

std::string_view model_name(const RaceModel& model) {
    struct Visitor {
        std::string_view operator()(const DdmRace&) const { return "ddm"; }
        std::string_view operator()(const PoissonRace&) const { return "poisson"; }
        std::string_view operator()(const HawkesRace&) const { return "hawkes"; }
    };
    return std::visit(Visitor{}, model);
}

std::size_t nature_count(const RaceModel& model) {
    struct Visitor {
        std::size_t operator()(const DdmRace& m) const { return m.drifts.cols(); }
        std::size_t operator()(const PoissonRace& m) const { return m.rates.cols(); }
        std::size_t operator()(const HawkesRace& m) const { return m.task.nature_count(); }
    };
    return std::visit(Visitor{}, model);
}

const RaceParams& race_params(const RaceModel& model) {
    return std::visit([](const auto& m) -> const RaceParams& { return m.params; }, model);
}

DecisionOutcome run_trial(const RaceModel& model, std::size_t nature, Seed seed) {
    if (nature >= nature_count(model)) throw std::domain_error("nature index out of range");
    struct Visitor {
        std::size_t nature;
        Seed seed;
        DecisionOutcome operator()(const DdmRace& m) const {
            return ddm_trial(m.drifts.column(nature), m.params, seed);
        }
        DecisionOutcome operator()(const PoissonRace& m) const {
            return poisson_trial(m.rates.column(nature), m.params, seed);
        }
        DecisionOutcome operator()(const HawkesRace& m) const {
            return hawkes_trial(m.task, m.weights, nature, m.kernel, m.params, seed);
        }
    };
    return std::visit(Visitor{nature, seed}, model);
}

DecisionOutcome scaled_trial(const RaceModel& model, std::size_t nature, std::size_t n, Seed seed) {
    if (n < 1) throw std::domain_error("scaled_trial needs n >= 1");
    if (nature >= nature_count(model)) throw std::domain_error("nature index out of range");
    const double scale = static_cast<double>(n);
    Rng rng(seed);
    if (const auto* p = std::get_if<PoissonRace>(&model)) {
        p->params.validate();
        auto rates = p->rates.column(nature);
        for (double& r : rates) r *= scale;
        return poisson_race(rates, scale * p->params.theta, p->params.horizon, rng);
    }
    if (const auto* h = std::get_if<HawkesRace>(&model)) {
        h->params.validate();
        const Kernel kernel = h->kernel.shrunk_to(1.0 / std::sqrt(scale));
        return hawkes_race(h->task, h->weights, nature, kernel, h->params, scale,
                           scale * h->params.theta, rng);
    }
    throw std::domain_error("scaled_trial supports the poisson and hawkes models only");
}

DtCheck ddm_dt_check(std::span<const double> drifts, const RaceParams& params, std::size_t reps, Seed seed,
                     double tolerance) {
    if (reps == 0) throw std::domain_error("ddm_dt_check needs reps >= 1");
    RaceParams half = params;
    half.dt = params.dt / 2.0;
    auto mean_rt = [&](const RaceParams& p, Seed s) {
        double total = 0.0;
        for (std::size_t r = 0; r < reps; ++r) total += ddm_trial(drifts, p, s.derive(r)).reaction_time;
        return total / static_cast<double>(reps);
    };
    DtCheck check{};
    check.mean_rt = mean_rt(params, seed.derive(0));
    check.mean_rt_half = mean_rt(half, seed.derive(1));
    check.relative_change = std::abs(check.mean_rt_half - check.mean_rt) / std::max(check.mean_rt, 1e-300);
    check.converged = check.relative_change <= tolerance;
    return check;
}

}  // namespace racelab
