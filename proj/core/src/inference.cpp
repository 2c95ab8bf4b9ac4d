#include "racelab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "racelab/parallel.hpp"
#include "racelab/random.hpp"
#include "racelab/stats.hpp"

namespace racelab {

using nlohmann::json;

void PriorBox::validate() const {
    if (!(eta_lo < eta_hi) || !(theta_lo < theta_hi)) throw std::domain_error("prior box needs lower < upper");
    if (!(theta_lo > 0.0) || !(eta_lo >= 0.0)) throw std::domain_error("prior box must have theta > 0, eta >= 0");
}

bool PriorBox::contains(double eta, double theta) const {
    return eta >= eta_lo && eta <= eta_hi && theta >= theta_lo && theta <= theta_hi;
}

std::vector<double> summarize(const Session& session) {
    std::vector<double> learning, transfer;
    std::size_t correct = 0;
    for (const auto& t : session.trials) {
        const double rt = t.rt_ms / 1000.0;
        if (t.phase == Phase::learning) {
            learning.push_back(rt);
            correct += t.correct;
        } else {
            transfer.push_back(rt);
        }
    }
    if (learning.empty() || transfer.empty()) throw std::domain_error("session needs both phases to be summarized");

    std::vector<double> out;
    out.reserve(summary_size);
    const double n = static_cast<double>(learning.size());
    out.push_back(n);
    std::vector<double> cumulative(learning.size());
    std::partial_sum(learning.begin(), learning.end(), cumulative.begin());
    for (std::size_t c = 1; c <= summary_checkpoints; ++c) {
        const double f = static_cast<double>(c) / static_cast<double>(summary_checkpoints);
        auto upto = static_cast<std::size_t>(std::ceil(f * n - 1e-9));
        upto = std::clamp<std::size_t>(upto, 1, learning.size());
        out.push_back(cumulative[upto - 1]);
    }
    out.push_back(static_cast<double>(correct) / n);

    const double transfer_mean = stats::mean(transfer);
    transfer.resize(transfer_trial_count, transfer_mean);
    out.insert(out.end(), transfer.begin(), transfer.end());
    out.push_back(transfer_mean);
    return out;
}

std::vector<double> default_summary_weights() {
    std::vector<double> w(summary_size, 1.0);
    // The 18 individual transfer times share one block weight with the
    // learning checkpoints.
    for (std::size_t k = 12; k < 12 + transfer_trial_count; ++k) w[k] = 1.0 / 6.0;
    return w;
}

RocketTask abc_task(const Session& observed, const ExperimentConfig& config, Seed seed) {
    return rocket_task_of(observed, config.gamma, seed.derive(0xabc0ULL));
}

PriorDraw abc_simulation(const RocketTask& task, const PriorBox& prior, const ExperimentConfig& config,
                         Seed seed, std::size_t k) {
    const Seed sim = seed.derive(k);
    Rng rng(sim.derive(0));
    const double eta = prior.eta_lo + (prior.eta_hi - prior.eta_lo) * rng.uniform();
    const double theta = prior.theta_lo + (prior.theta_hi - prior.theta_lo) * rng.uniform();
    return {eta, theta, simulate_session(task, eta, theta, config, sim.derive(1))};
}

PosteriorSample abc_fit(const Session& observed, const PriorBox& prior, const ExperimentConfig& config,
                        const AbcOptions& options, Seed seed) {
    if (options.n_sims < 1000) throw std::domain_error("abc_fit needs n_sims >= 1000");
    return abc_fit_unchecked(observed, prior, config, options, seed);
}

ReferenceTable reference_table(const RocketTask& task, const PriorBox& prior, const ExperimentConfig& config,
                               std::size_t n_sims, Seed seed, unsigned jobs) {
    prior.validate();
    if (n_sims < 2) throw std::domain_error("need at least two simulations");
    ReferenceTable table;
    table.eta.resize(n_sims);
    table.theta.resize(n_sims);
    table.summaries.resize(n_sims);
    parallel_for(n_sims, [&](std::size_t k) {
        auto draw = abc_simulation(task, prior, config, seed, k);
        table.eta[k] = draw.eta;
        table.theta[k] = draw.theta;
        table.summaries[k] = summarize(draw.session);
    }, jobs);

    table.scale.resize(summary_size);
    for (std::size_t c = 0; c < summary_size; ++c) {
        std::vector<double> column(n_sims);
        for (std::size_t k = 0; k < n_sims; ++k) column[k] = table.summaries[k][c];
        const double sd = std::sqrt(stats::variance(column));
        table.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return table;
}

PosteriorSample abc_accept(const ReferenceTable& table, const std::vector<double>& target, double quantile,
                           const std::vector<double>& weights) {
    if (!(quantile > 0.0 && quantile <= 0.2)) throw std::domain_error("quantile must be in (0, 0.2]");
    if (weights.size() != summary_size || target.size() != summary_size)
        throw std::domain_error("summary vectors have the wrong size");
    const std::size_t n = table.size();
    if (n == 0) throw std::domain_error("empty reference table");

    std::vector<double> distance(n);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t c = 0; c < summary_size; ++c) {
            const double z = (table.summaries[k][c] - target[c]) / table.scale[c];
            acc += weights[c] * z * z;
        }
        distance[k] = std::sqrt(acc);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return distance[a] < distance[b]; });
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n) - 1e-9)));

    PosteriorSample sample;
    sample.n_sims = n;
    sample.quantile = quantile;
    for (std::size_t r = 0; r < keep; ++r) {
        const std::size_t k = order[r];
        sample.accepted.push_back({table.eta[k], table.theta[k], distance[k], k});
    }
    sample.cutoff = sample.accepted.back().distance;
    return sample;
}

PosteriorSample abc_fit_unchecked(const Session& observed, const PriorBox& prior,
                                  const ExperimentConfig& config, const AbcOptions& options, Seed seed) {
    if (!(options.quantile > 0.0 && options.quantile <= 0.2)) throw std::domain_error("quantile must be in (0, 0.2]");
    if (options.weights.size() != summary_size) throw std::domain_error("summary weight vector has the wrong size");
    const auto target = summarize(observed);
    const RocketTask task = abc_task(observed, config, seed);
    const auto table = reference_table(task, prior, config, options.n_sims, seed, options.jobs);
    auto sample = abc_accept(table, target, options.quantile, options.weights);
    sample.low_confidence = observed.hard_cap_reached;
    return sample;
}

PointEstimate posterior_point(const PosteriorSample& sample) {
    if (sample.accepted.empty()) throw std::domain_error("posterior sample is empty");
    std::vector<double> eta, theta;
    for (const auto& p : sample.accepted) {
        eta.push_back(p.eta);
        theta.push_back(p.theta);
    }
    return {stats::median(eta), stats::median(theta)};
}

json posterior_to_json(const PosteriorSample& sample) {
    json accepted = json::array();
    for (const auto& p : sample.accepted)
        accepted.push_back({{"eta", p.eta}, {"theta", p.theta}, {"distance", p.distance}, {"simulation", p.simulation}});
    json doc = {{"accepted", accepted},
                {"n_sims", sample.n_sims},
                {"quantile", sample.quantile},
                {"cutoff", sample.cutoff},
                {"low_confidence", sample.low_confidence}};
    if (!sample.accepted.empty()) {
        const auto point = posterior_point(sample);
        doc["eta_hat"] = point.eta;
        doc["theta_hat"] = point.theta;
    }
    return doc;
}

PosteriorSample posterior_from_json(const json& doc) {
    PosteriorSample s;
    for (const auto& p : doc.at("accepted"))
        s.accepted.push_back({p.at("eta").get<double>(), p.at("theta").get<double>(),
                              p.at("distance").get<double>(), p.value("simulation", std::size_t{0})});
    s.n_sims = doc.value("n_sims", std::size_t{0});
    s.quantile = doc.value("quantile", 0.0);
    s.cutoff = doc.value("cutoff", 0.0);
    s.low_confidence = doc.value("low_confidence", false);
    return s;
}

}  // namespace racelab
