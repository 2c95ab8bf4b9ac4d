#include "racelab/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "racelab/random.hpp"

namespace racelab {

WeightState WeightState::uniform(std::size_t features, std::size_t categories, double eta) {
    if (features == 0 || categories == 0) throw std::domain_error("empty weight matrix");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::domain_error("eta must be >= 0");
    WeightState s;
    s.weights = Matrix(features, categories, 1.0 / static_cast<double>(features));
    s.cumulative_gains = Matrix(features, categories, 0.0);
    s.eta = eta;
    return s;
}

WeightState WeightState::fixed(Matrix weights) {
    for (std::size_t j = 0; j < weights.cols(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < weights.rows(); ++i) {
            if (weights(i, j) < 0.0) throw std::domain_error("weights must be >= 0");
            sum += weights(i, j);
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("weight columns must sum to 1");
    }
    WeightState s;
    s.cumulative_gains = Matrix(weights.rows(), weights.cols(), 0.0);
    s.weights = std::move(weights);
    return s;
}

std::vector<double> empirical_rates(std::span<const std::size_t> input_counts, double t_min) {
    if (!(t_min > 0.0)) throw std::domain_error("T_min must be > 0");
    std::vector<double> out(input_counts.size());
    for (std::size_t i = 0; i < input_counts.size(); ++i)
        out[i] = static_cast<double>(input_counts[i]) / t_min;
    return out;
}

std::vector<double> trial_gains(std::span<const double> gamma_hat, std::size_t truth,
                                std::size_t target, std::span<const double> balance) {
    const std::size_t categories = balance.size();
    if (truth >= categories || target >= categories) throw std::domain_error("unknown category");
    for (double b : balance)
        if (!(b > 0.0)) throw std::domain_error("balance ratios must be > 0");
    std::vector<double> g(gamma_hat.begin(), gamma_hat.end());
    if (truth == target) {
        for (double& v : g) v *= balance[target];
    } else {
        if (categories < 2) throw std::domain_error("need at least two categories");
        const double factor = -balance[truth] / static_cast<double>(categories - 1);
        for (double& v : g) v *= factor;
    }
    return g;
}

Matrix gain_matrix(std::span<const double> gamma_hat, std::size_t truth,
                   std::span<const double> balance) {
    Matrix gains(gamma_hat.size(), balance.size());
    for (std::size_t j = 0; j < balance.size(); ++j) {
        const auto g = trial_gains(gamma_hat, truth, j, balance);
        for (std::size_t i = 0; i < g.size(); ++i) gains(i, j) = g[i];
    }
    return gains;
}

WeightState ewa_update(const WeightState& state, const Matrix& gains) {
    if (gains.rows() != state.cumulative_gains.rows() || gains.cols() != state.cumulative_gains.cols())
        throw std::domain_error("gain matrix shape does not match the weights");
    for (double v : gains.data())
        if (!std::isfinite(v)) throw std::domain_error("gains must be finite");
    WeightState next = state;
    const std::size_t features = gains.rows();
    for (std::size_t j = 0; j < gains.cols(); ++j) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < features; ++i) {
            next.cumulative_gains(i, j) += gains(i, j);
            top = std::max(top, state.eta * next.cumulative_gains(i, j));
        }
        double total = 0.0;
        for (std::size_t i = 0; i < features; ++i) {
            const double e = std::exp(state.eta * next.cumulative_gains(i, j) - top);
            next.weights(i, j) = e;
            total += e;
        }
        for (std::size_t i = 0; i < features; ++i) next.weights(i, j) /= total;
    }
    ++next.presented;
    return next;
}

DiscrepancyReport feature_discrepancy(const TaskSpec& task) {
    const std::size_t features = task.feature_count();
    const std::size_t categories = task.category_count();
    if (categories < 2) throw std::domain_error("feature discrepancy needs at least two categories");
    for (std::size_t j = 0; j < categories; ++j)
        if (task.members_of(j).empty())
            throw std::domain_error("empty category: " + task.categories()[j].name);

    // Category means <gamma^i_o>_{o in j}.
    Matrix means(features, categories);
    for (std::size_t j = 0; j < categories; ++j) {
        const auto& members = task.members_of(j);
        for (std::size_t i = 0; i < features; ++i) {
            double acc = 0.0;
            for (std::size_t o : members) acc += task.input_rates()(i, o);
            means(i, j) = acc / static_cast<double>(members.size());
        }
    }

    DiscrepancyReport report;
    report.discrepancy = Matrix(features, categories);
    report.limit_weights = Matrix(features, categories, 0.0);
    report.best.resize(categories);
    report.gap.resize(categories);
    for (std::size_t j = 0; j < categories; ++j) {
        for (std::size_t i = 0; i < features; ++i) {
            double others = 0.0;
            for (std::size_t k = 0; k < categories; ++k)
                if (k != j) others += means(i, k);
            report.discrepancy(i, j) = means(i, j) - others / static_cast<double>(categories - 1);
        }
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < features; ++i) top = std::max(top, report.discrepancy(i, j));
        const double tol = discrepancy_tie_tolerance * std::max(1.0, std::abs(top));
        double runner_up = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < features; ++i) {
            const double d = report.discrepancy(i, j);
            if (d >= top - tol) {
                report.best[j].push_back(i);
            } else {
                runner_up = std::max(runner_up, d);
            }
        }
        if (report.best[j].size() < features) report.gap[j] = top - runner_up;
        const double share = 1.0 / static_cast<double>(report.best[j].size());
        for (std::size_t i : report.best[j]) report.limit_weights(i, j) = share;
    }
    return report;
}

std::size_t trailing_streak(std::span<const bool> correct) {
    std::size_t n = 0;
    for (auto it = correct.rbegin(); it != correct.rend() && *it; ++it) ++n;
    return n;
}

namespace {

class NatureStream {
public:
    NatureStream(const Schedule& schedule, Seed seed) : schedule_(schedule), rng_(seed) {
        if (schedule_.natures.empty()) throw std::domain_error("schedule must list natures");
    }

    std::size_t next() {
        if (!schedule_.reshuffle_blocks) {
            const std::size_t o = schedule_.natures[position_ % schedule_.natures.size()];
            ++position_;
            return o;
        }
        if (position_ % schedule_.natures.size() == 0) {
            block_ = schedule_.natures;
            for (std::size_t k = block_.size(); k > 1; --k) std::swap(block_[k - 1], block_[rng_.index(k)]);
        }
        return block_[position_++ % block_.size()];
    }

private:
    const Schedule& schedule_;
    Rng rng_;
    std::vector<std::size_t> block_;
    std::size_t position_ = 0;
};

constexpr std::uint64_t schedule_stream = 0x5c4ed01eULL;

}  // namespace

LearningResult run_learning_phase(const TaskSpec& task, double eta, const Kernel& kernel,
                                  const RaceParams& params, const Schedule& schedule,
                                  const StopRule& stop, Seed seed, std::size_t hard_cap) {
    return run_learning_phase(task, WeightState::uniform(task.feature_count(), task.category_count(), eta),
                              kernel, params, schedule, stop, seed, hard_cap);
}

LearningResult run_learning_phase(const TaskSpec& task, WeightState initial, const Kernel& kernel,
                                  const RaceParams& params, const Schedule& schedule,
                                  const StopRule& stop, Seed seed, std::size_t hard_cap) {
    params.validate();
    if (!params.t_min) throw std::domain_error("learning needs T_min");
    for (std::size_t o : schedule.natures)
        if (o >= task.nature_count()) throw std::domain_error("schedule lists an unknown nature");

    const auto balance = task.balance_ratios();
    const auto* fixed = std::get_if<FixedTrials>(&stop);
    const auto* streak_rule = std::get_if<ConsecutiveCorrect>(&stop);
    if (streak_rule && streak_rule->streak == 0) throw std::domain_error("streak must be >= 1");

    NatureStream stream(schedule, seed.derive(schedule_stream));
    LearningResult result;
    result.final_state = std::move(initial);
    std::size_t streak = 0;
    for (std::size_t m = 0;; ++m) {
        if (fixed && m == fixed->count) break;
        if (streak_rule && m == hard_cap) {
            result.hit_cap = true;
            break;
        }
        const std::size_t nature = stream.next();
        const std::size_t truth = task.category_of(nature);
        auto outcome = hawkes_trial(task, result.final_state, nature, kernel, params, seed.derive(m));
        const bool correct = outcome.crossed && outcome.choice == truth;

        const auto gamma_hat = empirical_rates(outcome.input_counts, *params.t_min);
        result.final_state = ewa_update(result.final_state, gain_matrix(gamma_hat, truth, balance));
        result.trace.push_back({nature, std::move(outcome), correct});

        streak = correct ? streak + 1 : 0;
        if (streak_rule && streak >= streak_rule->streak) break;
    }
    return result;
}

WeightErrorBound weight_error_bound(const TaskSpec& task, double eta0, std::size_t m,
                                    double t_min, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must be in (0, 1)");
    if (!(t_min > 0.0)) throw std::domain_error("T_min must be > 0");
    if (!(eta0 > 0.0)) throw std::domain_error("eta0 must be > 0");
    if (m == 0) throw std::domain_error("M must be >= 1");

    const double natures = static_cast<double>(task.nature_count());
    const double features = static_cast<double>(task.feature_count());
    const double categories = static_cast<double>(task.category_count());
    const double gamma_inf = task.input_rates().max_entry();
    const auto gamma_min = task.input_rates().min_positive_entry();
    const double log_term = std::log(2.0 * features * categories / alpha);

    WeightErrorBound bound;
    bound.m_tmin = static_cast<double>(m) * t_min;
    bound.m_tmin_required = gamma_min ? 8.0 * natures / (3.0 * *gamma_min) * log_term
                                      : std::numeric_limits<double>::infinity();
    bound.precondition_met = gamma_min && bound.m_tmin >= bound.m_tmin_required;

    bound.estimation_term =
        2.0 * natures * eta0 * std::sqrt(8.0 * features / (3.0 * t_min) * gamma_inf * log_term);

    const auto report = feature_discrepancy(task);
    const double sqrt_m = std::sqrt(static_cast<double>(m));
    for (std::size_t j = 0; j < task.category_count(); ++j) {
        double value = bound.estimation_term;
        if (report.gap[j]) {
            const double best = static_cast<double>(report.best[j].size());
            value += std::sqrt(features) / best * std::max(1.0, (features - best) / best) *
                     std::exp(-eta0 * *report.gap[j] * sqrt_m);
        }
        bound.per_category.push_back(value);
    }
    return bound;
}

}  // namespace racelab
