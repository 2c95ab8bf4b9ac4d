// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion names as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "racelab/analysis.hpp"
#include "racelab/bounds.hpp"
#include "racelab/coupling.hpp"
#include "racelab/experiment.hpp"
#include "racelab/inference.hpp"
#include "racelab/learning.hpp"
#include "racelab/parallel.hpp"
#include "racelab/races.hpp"
#include "racelab/stats.hpp"

using namespace racelab;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[FAILED] ";
        }
        detail << what << "; ";
    }
};

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// Single DDM accumulator: first-passage moments of the inverse Gaussian.
void inverse_gaussian(Outcome& out) {
    const double mu = 10.0, theta = 20.0;
    RaceParams p{theta, 100.0, std::nullopt, 1e-3};
    const std::vector<double> drift{mu};
    const std::size_t reps = 10000;
    std::vector<double> tau(reps);
    parallel_for(reps, [&](std::size_t r) { tau[r] = ddm_trial(drift, p, Seed{101}.derive(r)).reaction_time; });
    const double m = stats::mean(tau), v = stats::variance(tau);
    const double m_ref = theta / mu, v_ref = theta * mu / (mu * mu * mu);
    out.check(std::abs(m - m_ref) <= 0.05 * m_ref, "mean " + num(m) + " vs " + num(m_ref) + " (5%)");
    out.check(std::abs(v - v_ref) <= 0.10 * v_ref, "var " + num(v) + " vs " + num(v_ref) + " (10%)");
}

struct FloorSetting {
    Matrix gamma;  // (category, nature)
    double delta;
    double horizon;
};

void threshold_floor(Outcome& out) {
    const std::vector<FloorSetting> settings{
        {Matrix::from_rows({{100, 10}, {10, 100}}), 90.0, 5.0},
        {Matrix::from_rows({{50, 5}, {5, 50}}), 45.0, 10.0},
        {Matrix::from_rows({{80, 8, 8}, {8, 80, 8}, {8, 8, 80}}), 72.0, 5.0},
        {Matrix::from_rows({{60, 40, 5, 10}, {10, 5, 50, 45}}), 35.0, 10.0},
        {Matrix::from_rows({{200, 20}, {20, 200}}), 180.0, 2.0},
    };
    const double alpha = 0.1;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        const auto& set = settings[s];
        const auto interval = poisson_threshold_interval(set.gamma, set.delta, alpha, set.horizon);
        if (interval.empty()) {
            out.check(false, "setting " + std::to_string(s) + " has an empty interval");
            continue;
        }
        std::vector<std::size_t> truth(set.gamma.cols());
        for (std::size_t o = 0; o < truth.size(); ++o) {
            const auto col = set.gamma.column(o);
            truth[o] = static_cast<std::size_t>(std::max_element(col.begin(), col.end()) - col.begin());
        }
        const PoissonRace model{set.gamma, RaceParams{interval.midpoint(), set.horizon, std::nullopt, 1e-3}};
        const auto acc = mc_accuracy(model, truth, 2000, Seed{200 + s});
        out.check(acc.ci.lo >= 0.88,
                  "setting " + std::to_string(s) + " theta " + num(interval.midpoint()) + " accuracy " +
                      num(acc.accuracy) + " wilson lo " + num(acc.ci.lo));
    }
}

void rule_features(Outcome& out) {
    const double gamma = ExperimentConfig{}.gamma;
    std::size_t exact = 0, margin_ok = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const RocketTask task = make_rocket_task(gamma, Seed{300}.derive(s));
        const TaskSpec learning = task.learning_task();
        const auto d = feature_discrepancy(learning);
        exact += d.best[0] == std::vector<std::size_t>{task.rule_feature(task.rule.yes_value)} &&
                 d.best[1] == std::vector<std::size_t>{task.rule_feature(1 - task.rule.yes_value)};
        const auto m = hawkes_margin(learning);
        margin_ok += m.value && *m.value == gamma;
    }
    out.check(exact == 100, "best feature sets are the rule features in " + std::to_string(exact) + "/100");
    out.check(margin_ok == 100, "margin equals gamma in " + std::to_string(margin_ok) + "/100");
}

void weight_bound(Outcome& out) {
    const ExperimentConfig config;
    const double eta0 = 1.0, alpha = 0.1, t_min = config.t_min;
    const std::size_t blocks = 20;
    const RocketTask task = make_rocket_task(config.gamma, Seed{400});
    const TaskSpec learning = task.learning_task();
    const std::size_t m = blocks * learning.nature_count();
    const auto bound = weight_error_bound(learning, eta0, m, t_min, alpha);
    out.check(bound.precondition_met, "M T_min = " + num(bound.m_tmin) + " >= " + num(bound.m_tmin_required));
    const Matrix limit = feature_discrepancy(learning).limit_weights;

    Schedule schedule;
    schedule.natures.resize(learning.nature_count());
    std::iota(schedule.natures.begin(), schedule.natures.end(), std::size_t{0});
    RaceParams params{1.0, config.horizon, t_min, config.horizon / 1000.0};
    const std::size_t runs = 100;
    std::vector<std::vector<double>> dist(learning.category_count(), std::vector<double>(runs));
    parallel_for(runs, [&](std::size_t r) {
        const auto res = run_learning_phase(learning, eta0 / std::sqrt(static_cast<double>(m)), config.kernel,
                                            params, schedule, FixedTrials{m}, Seed{401}.derive(r), m);
        for (std::size_t j = 0; j < learning.category_count(); ++j) {
            double sq = 0.0;
            for (std::size_t i = 0; i < learning.feature_count(); ++i) {
                const double e = res.final_state.weights(i, j) - limit(i, j);
                sq += e * e;
            }
            dist[j][r] = std::sqrt(sq);
        }
    });
    for (std::size_t j = 0; j < dist.size(); ++j) {
        const double q90 = stats::quantile(dist[j], 0.9);
        out.check(q90 <= bound.per_category[j], "category " + std::to_string(j) + " q90 " + num(q90) +
                                                    " <= bound " + num(bound.per_category[j]));
    }
}

void coupling_rates(Outcome& out) {
    const std::vector<std::size_t> ns{100, 1000, 10000, 100000};
    const CouplingSetup setup;
    for (auto model : {CouplingModel::poisson, CouplingModel::brownian, CouplingModel::hawkes}) {
        const auto curve = hitting_error_curve(model, setup, ns, 500, Seed{500 + static_cast<unsigned>(model)});
        const auto fit = rate_fit(curve);
        const std::string name(coupling_model_name(model));
        if (model == CouplingModel::hawkes)
            out.check(!fit.degenerate && fit.slope <= -0.35, name + " slope " + num(fit.slope) + " <= -0.35");
        else
            out.check(!fit.degenerate && fit.slope >= -0.65 && fit.slope <= -0.35,
                      name + " slope " + num(fit.slope) + " in [-0.65, -0.35]");
    }
    const std::vector<double> gamma{6.0, 2.0};
    std::size_t smaller = 0;
    std::string w;
    for (std::size_t b = 0; b < 5; ++b) {
        const Seed batch = Seed{510}.derive(b);
        const auto lo = model_agreement(gamma, 3.0, 5.0, 1e-4, 100, 1000, batch.derive(0));
        const auto hi = model_agreement(gamma, 3.0, 5.0, 1e-4, 10000, 1000, batch.derive(1));
        smaller += hi.wasserstein < lo.wasserstein;
        w += num(lo.wasserstein, 3) + ">" + num(hi.wasserstein, 3) + " ";
    }
    out.check(smaller >= 4, "W1 decreases in " + std::to_string(smaller) + "/5 batches (" + w + ")");
}

void diffusion_covariance(Outcome& out) {
    const TaskSpec task({"a1", "b1", "c1"}, {{"a", {"a1"}}, {"b", {"b1"}}, {"c", {"c1"}}}, {"f1", "f2", "f3"},
                        Matrix::from_rows({{30, 5, 10}, {10, 20, 5}, {15, 15, 25}}));
    const auto w = WeightState::fixed(Matrix::from_rows({{0.6, 0.1, 0.3}, {0.3, 0.5, 0.3}, {0.1, 0.4, 0.4}}));
    const Kernel kernel = Kernel::default_kernel();
    const std::size_t n = 4, paths = 5000;
    RaceParams p{1e12, 1.0, std::nullopt, 1e-3};
    std::vector<std::vector<double>> terminal(paths);
    parallel_for(paths, [&](std::size_t k) {
        terminal[k] = correlated_ddm_sample(task, w, 0, n, kernel, p, Seed{600}.derive(k)).terminal;
    });
    const Matrix c = limit_covariance(task, w, 0, n, kernel, p.horizon);
    const std::size_t cats = task.category_count();
    std::vector<double> mean(cats, 0.0);
    for (const auto& t : terminal)
        for (std::size_t j = 0; j < cats; ++j) mean[j] += t[j] / static_cast<double>(paths);
    for (std::size_t a = 0; a < cats; ++a)
        for (std::size_t b = a; b < cats; ++b) {
            double s = 0.0;
            for (const auto& t : terminal) s += (t[a] - mean[a]) * (t[b] - mean[b]);
            s /= static_cast<double>(paths - 1);
            // variance of the sample covariance of a normal pair
            const double se = std::sqrt((c(a, b) * c(a, b) + c(a, a) * c(b, b)) / static_cast<double>(paths));
            out.check(std::abs(s - c(a, b)) <= 5.0 * se, "cov(" + std::to_string(a) + "," + std::to_string(b) +
                                                              ") " + num(s) + " vs " + num(c(a, b)) + " se " +
                                                              num(se, 2));
        }
}

void tail_bounds(Outcome& out) {
    const std::vector<double> xs{0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0};
    std::size_t checks = 0, violations = 0;
    for (double gamma : {5.0, 50.0})
        for (const auto& c : validate_poisson_tails(gamma, xs, 1000000, Seed{700}.derive(gamma == 5.0))) {
            ++checks;
            violations += c.upper_frequency > c.upper_bound;
            if (c.lower_frequency) {
                ++checks;
                violations += *c.lower_frequency > *c.lower_bound;
            }
        }
    out.check(violations == 0, std::to_string(violations) + " of " + std::to_string(checks) +
                                   " tail frequencies above their bounds");
    std::size_t k = 0;
    for (double mu : {1.0, 10.0})
        for (double beta : {0.05, 0.2}) {
            const auto e = validate_poisson_sup(mu, 10.0, beta, 2000, Seed{710}.derive(k++));
            out.check(e.precondition_met && e.frequency() <= beta,
                      "poisson sup mu " + num(mu) + " beta " + num(beta) + " freq " + num(e.frequency()));
        }
    for (double sigma : {1.0, 3.0})
        for (double beta : {0.05, 0.2}) {
            const auto e = validate_brownian_sup(sigma, 1.0, beta, 1e-3, 2000, Seed{720}.derive(k++));
            out.check(e.frequency() <= beta,
                      "brownian sup sigma " + num(sigma) + " beta " + num(beta) + " freq " + num(e.frequency()));
        }
}

void abc_recovery(Outcome& out) {
    const ExperimentConfig config;
    const PriorBox prior;
    const double eta_tol = 0.15 * (prior.eta_hi - prior.eta_lo);
    const double theta_tol = 0.15 * (prior.theta_hi - prior.theta_lo);
    AbcOptions options;
    options.n_sims = 5000;
    options.quantile = 0.02;
    const std::vector<std::pair<double, double>> truths{{0.5, 0.10}, {1.5, 0.15}};
    for (std::size_t t = 0; t < truths.size(); ++t) {
        const auto [eta, theta] = truths[t];
        std::size_t hits = 0;
        std::string points;
        for (std::size_t f = 0; f < 5; ++f) {
            const Seed fit_seed = Seed{800}.derive(10 * t + f);
            const RocketTask task = make_rocket_task(config.gamma, fit_seed.derive(0));
            const Session observed = simulate_session(task, eta, theta, config, fit_seed.derive(1));
            const auto post = abc_fit(observed, prior, config, options, fit_seed.derive(2));
            const auto point = posterior_point(post);
            const bool ok = std::abs(point.eta - eta) <= eta_tol && std::abs(point.theta - theta) <= theta_tol;
            hits += ok;
            points += "(" + num(point.eta, 3) + "," + num(point.theta, 3) + (ok ? ")" : ")!") + " ";
        }
        out.check(hits == 5, "truth (" + num(eta) + "," + num(theta) + "): " + std::to_string(hits) +
                                 "/5 medians within tolerance " + points);
    }
}

void chi_square(Outcome& out) {
    // 51/49 % of 45 and 63/37 % of 54 rounded to counts.
    const auto two = chi_square_independence({{23, 22}, {34, 20}}, true);
    out.check(std::abs(two.p_value - 0.33) <= 0.03, "2 clusters p " + num(two.p_value));
    const auto three = chi_square_independence({{8, 21, 16}, {17, 15, 22}}, true);
    out.check(std::abs(three.p_value - 0.11) <= 0.03, "3 clusters p " + num(three.p_value));
}

void rt_theta(Outcome& out) {
    const ExperimentConfig config;
    const std::vector<double> thetas{0.05, 0.0875, 0.125, 0.1625, 0.2};
    const std::size_t per = 20;
    std::vector<double> theta(thetas.size() * per), rt(thetas.size() * per);
    parallel_for(theta.size(), [&](std::size_t k) {
        const Seed s = Seed{900}.derive(k);
        const RocketTask task = make_rocket_task(config.gamma, s.derive(0));
        const Session session = simulate_session(task, 0.5, thetas[k / per], config, s.derive(1));
        std::vector<double> times;
        for (const auto* t : session.phase_trials(Phase::learning)) times.push_back(t->rt_ms / 1000.0);
        theta[k] = thetas[k / per];
        rt[k] = stats::mean(times);
    });
    const auto fit = rt_vs_theta(theta, rt);
    out.check(fit.r > 0.8, "pearson r " + num(fit.r) + " over " + std::to_string(fit.n) + " sessions, slope " +
                               num(fit.slope));
}

struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"inverse_gaussian", inverse_gaussian}, {"threshold_floor", threshold_floor},
        {"rule_features", rule_features},       {"weight_bound", weight_bound},
        {"coupling_rates", coupling_rates},     {"diffusion_covariance", diffusion_covariance},
        {"tail_bounds", tail_bounds},           {"abc_recovery", abc_recovery},
        {"chi_square", chi_square},             {"rt_theta", rt_theta},
    };
    const std::vector<std::string> only(argv + 1, argv + argc);
    bool all = true;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(out);
        } catch (const std::exception& e) {
            out.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && out.pass;
        std::cout << (out.pass ? "PASS " : "FAIL ") << c.name << " (" << num(secs, 3) << " s): " << out.detail.str()
                  << std::endl;
    }
    return all ? 0 : 1;
}
