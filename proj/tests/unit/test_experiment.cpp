#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "racelab/bounds.hpp"
#include "racelab/experiment.hpp"
#include "racelab/learning.hpp"

using namespace racelab;

TEST(RocketCode, BitsHeadFirst) {
    EXPECT_EQ(rocket_code(0), "0000");
    EXPECT_EQ(rocket_code(8), "1000");
    EXPECT_EQ(rocket_code(5), "0101");
    EXPECT_THROW(rocket_code(16), std::domain_error);
}

TEST(RocketUniverse, EveryRocketActivatesFourFeatures) {
    const Rule rule{2, 1};
    const TaskSpec u = rocket_universe(20.0, rule);
    ASSERT_EQ(u.nature_count(), 16u);
    ASSERT_EQ(u.feature_count(), 8u);
    for (std::size_t o = 0; o < 16; ++o) {
        const auto rates = u.rates_for(o);
        EXPECT_EQ(std::count(rates.begin(), rates.end(), 20.0), 4);
        EXPECT_EQ(std::count(rates.begin(), rates.end(), 0.0), 4);
        EXPECT_EQ(u.category_of(o) == 0, rule.says_yes(u.natures()[o]));
    }
    EXPECT_EQ(u.members_of(0).size(), 8u);
}

TEST(RocketTask, SplitsFivePlusFiveAndSixTransfer) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const RocketTask t = make_rocket_task(20.0, Seed{s});
        ASSERT_EQ(t.learning.size(), 10u);
        ASSERT_EQ(t.transfer.size(), 6u);
        std::set<std::size_t> all(t.learning.begin(), t.learning.end());
        all.insert(t.transfer.begin(), t.transfer.end());
        EXPECT_EQ(all.size(), 16u);
        const TaskSpec l = t.learning_task();
        EXPECT_EQ(l.members_of(0).size(), 5u);
        EXPECT_EQ(l.members_of(1).size(), 5u);
    }
    EXPECT_THROW(rocket_task_from(20.0, Rule{0, 0}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), std::domain_error);
}

TEST(RocketTask, LimitNetworkIsTheRule) {
    // The two rule features are the unique best features and the limit
    // margin equals gamma on every seeded task.
    for (std::uint64_t s = 0; s < 100; ++s) {
        const RocketTask t = make_rocket_task(20.0, Seed{s});
        const auto d = feature_discrepancy(t.learning_task());
        EXPECT_EQ(d.best[0], std::vector<std::size_t>{t.rule_feature(t.rule.yes_value)});
        EXPECT_EQ(d.best[1], std::vector<std::size_t>{t.rule_feature(1 - t.rule.yes_value)});
        const auto m = hawkes_margin(t.learning_task());
        ASSERT_TRUE(m.value);
        EXPECT_DOUBLE_EQ(*m.value, 20.0);
    }
}

TEST(ExperimentConfig, ThresholdAndRate) {
    ExperimentConfig c;
    EXPECT_EQ(c.race_params(0.1).theta, 100.0);
    EXPECT_EQ(c.race_params(0.1234).theta, 124.0);
    EXPECT_EQ(c.race_params(1e-6).theta, 1.0);
    EXPECT_DOUBLE_EQ(c.ewa_rate(1.0), 1.0 / (c.eta_unit * c.gamma));
    EXPECT_THROW(c.race_params(0.0), std::domain_error);
    EXPECT_THROW(c.ewa_rate(-1.0), std::domain_error);
}

TEST(ExperimentConfig, JsonRoundTrip) {
    ExperimentConfig c;
    c.gamma = 33.0;
    c.eta_unit = 2.0;
    c.streak = 7;
    const auto back = ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_THROW(ExperimentConfig::from_json({{"eta_unit", 0.0}}), std::domain_error);
    EXPECT_THROW(ExperimentConfig::from_json({{"streak", 0}}), std::domain_error);
}

TEST(RtToMs, ClampsAndTimeouts) {
    DecisionOutcome o;
    EXPECT_EQ(rt_to_ms(o), 5000);
    o.crossed = true;
    o.choice = 0;
    o.reaction_time = 0.6234;
    EXPECT_EQ(rt_to_ms(o), 623);
    o.reaction_time = 4.9999;
    EXPECT_EQ(rt_to_ms(o), 4999);
}

class SimulatedSession : public ::testing::Test {
protected:
    ExperimentConfig config;
    RocketTask task = make_rocket_task(config.gamma, Seed{17});
};

TEST_F(SimulatedSession, ValidAndShaped) {
    const Session s = simulate_session(task, 0.5, 0.1, config, Seed{4});
    EXPECT_EQ(s.phase_trials(Phase::transfer).size(), 18u);
    const auto learning = s.phase_trials(Phase::learning);
    EXPECT_GE(learning.size(), 15u);
    EXPECT_LT(learning.size(), 200u);
    const auto v = validate_session(session_to_json(s));
    EXPECT_TRUE(v.ok()) << (v.errors.empty() ? "" : v.errors[0].path + " " + v.errors[0].message);
}

TEST_F(SimulatedSession, ZeroRateHitsTheCap) {
    config.hard_cap = 120;
    const Session s = simulate_session(task, 0.0, 0.1, config, Seed{4});
    EXPECT_TRUE(s.hard_cap_reached);
    EXPECT_EQ(s.phase_trials(Phase::learning).size(), 120u);
    EXPECT_TRUE(validate_session(session_to_json(s)).ok());
}

TEST_F(SimulatedSession, TransferShowsEachUnseenRocketThreeTimes) {
    const Session s = simulate_session(task, 1.0, 0.1, config, Seed{8});
    std::map<std::string, int> shown;
    for (const auto* t : s.phase_trials(Phase::transfer)) ++shown[t->nature];
    ASSERT_EQ(shown.size(), 6u);
    for (const auto& [n, count] : shown) EXPECT_EQ(count, 3);
}

TEST_F(SimulatedSession, DeterministicAndRebuildable) {
    const Session a = simulate_session(task, 1.0, 0.15, config, Seed{9});
    const Session b = simulate_session(task, 1.0, 0.15, config, Seed{9});
    EXPECT_EQ(a.trials, b.trials);
    const RocketTask rebuilt = rocket_task_of(a, config.gamma, Seed{1});
    EXPECT_EQ(rebuilt.rule.characteristic, task.rule.characteristic);
    EXPECT_EQ(rebuilt.learning, task.learning);
}

TEST_F(SimulatedSession, JsonRoundTrip) {
    const Session s = simulate_session(task, 1.0, 0.15, config, Seed{10});
    const Session back = session_from_json(nlohmann::json::parse(session_to_string(s)));
    EXPECT_EQ(back.trials, s.trials);
    EXPECT_EQ(back.participant_id, s.participant_id);
    EXPECT_EQ(back.extra_metadata, s.extra_metadata);
}
