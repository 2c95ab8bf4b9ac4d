#include "racelab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "racelab/random.hpp"
#include "racelab/races.hpp"

namespace racelab {

using nlohmann::json;

RaceParams ExperimentConfig::race_params(double theta) const {
    if (!(theta > 0.0)) throw std::domain_error("theta must be > 0");
    RaceParams p;
    p.theta = std::ceil(theta * threshold_scale - 1e-9 * std::max(1.0, theta * threshold_scale));
    p.theta = std::max(p.theta, 1.0);
    p.horizon = horizon;
    p.t_min = t_min;
    p.dt = horizon / 1000.0;
    p.validate();
    return p;
}

double ExperimentConfig::ewa_rate(double eta) const {
    if (!(eta >= 0.0)) throw std::domain_error("eta must be >= 0");
    return eta / (eta_unit * gamma);
}

json ExperimentConfig::to_json() const {
    json doc = {{"gamma", gamma},
            {"t_min", t_min},
            {"horizon", horizon},
            {"kernel", {{"shape", "rectangular"}, {"support", kernel.support()}, {"height", kernel.height()}}},
            {"threshold_scale", threshold_scale},
            {"streak", streak},
            {"hard_cap", hard_cap}};
    doc["eta_unit"] = eta_unit;
    return doc;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    ExperimentConfig c;
    c.gamma = doc.value("gamma", c.gamma);
    c.t_min = doc.value("t_min", c.t_min);
    c.horizon = doc.value("horizon", c.horizon);
    if (const auto it = doc.find("kernel"); it != doc.end())
        c.kernel = Kernel::rectangular(it->value("support", c.kernel.support()),
                                       it->value("height", c.kernel.height()));
    c.threshold_scale = doc.value("threshold_scale", c.threshold_scale);
    c.streak = doc.value("streak", c.streak);
    c.hard_cap = doc.value("hard_cap", c.hard_cap);
    c.eta_unit = doc.value("eta_unit", c.eta_unit);
    if (!(c.eta_unit > 0.0)) throw std::domain_error("eta_unit must be > 0");
    if (!(c.gamma > 0.0)) throw std::domain_error("gamma must be > 0");
    if (!(c.threshold_scale > 0.0)) throw std::domain_error("threshold_scale must be > 0");
    if (c.streak == 0 || c.hard_cap == 0) throw std::domain_error("streak and hard_cap must be >= 1");
    return c;
}

std::string rocket_code(std::size_t index) {
    if (index >= 16) throw std::domain_error("rocket index must be < 16");
    std::string code(4, '0');
    for (std::size_t c = 0; c < 4; ++c) code[c] = ((index >> (3 - c)) & 1U) ? '1' : '0';
    return code;
}

TaskSpec rocket_universe(double gamma, const Rule& rule) {
    if (!(gamma > 0.0)) throw std::domain_error("gamma must be > 0");
    if (rule.characteristic >= 4 || (rule.yes_value != 0 && rule.yes_value != 1))
        throw std::domain_error("invalid rule");
    std::vector<std::string> natures;
    Category yes{"yes", {}}, no{"no", {}};
    Matrix rates(8, 16, 0.0);
    for (std::size_t o = 0; o < 16; ++o) {
        const std::string code = rocket_code(o);
        natures.push_back(code);
        (rule.says_yes(code) ? yes : no).members.push_back(code);
        for (std::size_t c = 0; c < 4; ++c) rates(2 * c + static_cast<std::size_t>(code[c] - '0'), o) = gamma;
    }
    return TaskSpec(std::move(natures), {yes, no},
                    std::vector<std::string>(rocket_feature_names.begin(), rocket_feature_names.end()),
                    std::move(rates));
}

TaskSpec RocketTask::learning_task() const { return universe.restricted_to(learning); }

RocketTask rocket_task_from(double gamma, const Rule& rule, std::vector<std::size_t> learning) {
    RocketTask task{rocket_universe(gamma, rule), rule, std::move(learning), {}, gamma};
    std::set<std::size_t> seen;
    std::size_t yes = 0;
    for (std::size_t o : task.learning) {
        if (o >= 16 || !seen.insert(o).second) throw std::domain_error("learning natures must be distinct rockets");
        yes += task.universe.category_of(o) == 0;
    }
    if (task.learning.size() != 10 || yes != 5)
        throw std::domain_error("learning set must hold 5 natures per category");
    for (std::size_t o = 0; o < 16; ++o)
        if (!seen.count(o)) task.transfer.push_back(o);
    return task;
}

namespace {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng.index(k)]);
}

std::vector<std::size_t> complete_learning_set(const TaskSpec& universe, std::vector<std::size_t> chosen,
                                               Rng& rng) {
    for (std::size_t j = 0; j < 2; ++j) {
        std::vector<std::size_t> pool;
        std::size_t have = 0;
        for (std::size_t o : universe.members_of(j)) {
            if (std::find(chosen.begin(), chosen.end(), o) != chosen.end()) ++have;
            else pool.push_back(o);
        }
        if (have > 5) throw std::domain_error("more than 5 learning natures in one category");
        shuffle(pool, rng);
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(5 - have));
    }
    return chosen;
}

}  // namespace

RocketTask make_rocket_task(double gamma, Seed seed) {
    Rng rng(seed);
    Rule rule;
    rule.characteristic = rng.index(4);
    rule.yes_value = static_cast<int>(rng.index(2));
    const TaskSpec universe = rocket_universe(gamma, rule);
    auto learning = complete_learning_set(universe, {}, rng);
    std::sort(learning.begin(), learning.end());
    return rocket_task_from(gamma, rule, std::move(learning));
}

RocketTask rocket_task_of(const Session& session, double gamma, Seed seed) {
    const TaskSpec universe = rocket_universe(gamma, session.rule);
    std::vector<std::size_t> seen;
    for (const auto* t : session.phase_trials(Phase::learning)) {
        const std::size_t o = universe.nature_index(t->nature);
        if (std::find(seen.begin(), seen.end(), o) == seen.end()) seen.push_back(o);
    }
    Rng rng(seed);
    auto learning = complete_learning_set(universe, std::move(seen), rng);
    std::sort(learning.begin(), learning.end());
    return rocket_task_from(gamma, session.rule, std::move(learning));
}

int rt_to_ms(const DecisionOutcome& outcome) {
    if (!outcome.crossed) return response_window_ms;
    const auto ms = static_cast<long long>(std::llround(outcome.reaction_time * 1000.0));
    return static_cast<int>(std::clamp<long long>(ms, 1, response_window_ms - 1));
}

namespace {

SessionTrial record(Phase phase, const TaskSpec& universe, std::size_t nature, const DecisionOutcome& outcome) {
    SessionTrial t;
    t.phase = phase;
    t.nature = universe.natures()[nature];
    t.response = !outcome.choice ? Response::timeout : (*outcome.choice == 0 ? Response::yes : Response::no);
    t.correct = outcome.crossed && outcome.choice == universe.category_of(nature);
    t.rt_ms = rt_to_ms(outcome);
    return t;
}

}  // namespace

Session simulate_session(const RocketTask& task, double eta, double theta,
                         const ExperimentConfig& config, Seed seed) {
    const RaceParams params = config.race_params(theta);
    const TaskSpec learning_task = task.learning_task();
    Schedule schedule;
    schedule.natures.resize(learning_task.nature_count());
    std::iota(schedule.natures.begin(), schedule.natures.end(), std::size_t{0});

    const auto learned = run_learning_phase(learning_task, config.ewa_rate(eta), config.kernel, params, schedule,
                                            ConsecutiveCorrect{config.streak}, seed.derive(1), config.hard_cap);

    Session session;
    session.participant_id = "sim-" + std::to_string(seed.value);
    session.group = Group::simulated;
    session.rule = task.rule;
    session.hard_cap_reached = learned.hit_cap;
    for (const auto& trial : learned.trace)
        session.trials.push_back(record(Phase::learning, task.universe, task.learning[trial.nature], trial.outcome));

    Rng order(seed.derive(2));
    const Seed transfer_seed = seed.derive(3);
    std::size_t t = 0;
    for (std::size_t block = 0; block < transfer_trial_count / task.transfer.size(); ++block) {
        auto natures = task.transfer;
        shuffle(natures, order);
        for (std::size_t o : natures) {
            const auto outcome = hawkes_trial(task.universe, learned.final_state, o, config.kernel, params,
                                              transfer_seed.derive(t++));
            session.trials.push_back(record(Phase::transfer, task.universe, o, outcome));
        }
    }

    session.extra_metadata = {{"seed", seed.value},
                              {"eta", eta},
                              {"theta", theta},
                              {"threshold_count", params.theta},
                              {"model", config.to_json()}};
    return session;
}

}  // namespace racelab
