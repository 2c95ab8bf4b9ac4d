#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "racelab/inference.hpp"
#include "racelab/stats.hpp"

using namespace racelab;

namespace {

Session flat_session(std::size_t learning, std::size_t transfer, int learning_ms, int transfer_ms) {
    Session s;
    for (std::size_t k = 0; k < learning; ++k)
        s.trials.push_back({Phase::learning, "0000", Response::yes, k % 2 == 0, learning_ms});
    for (std::size_t k = 0; k < transfer; ++k)
        s.trials.push_back({Phase::transfer, "1111", Response::no, true, transfer_ms + static_cast<int>(100 * k)});
    return s;
}

}  // namespace

TEST(Summarize, CheckpointsOfConstantAnswerTimes) {
    const auto v = summarize(flat_session(20, 18, 1000, 500));
    ASSERT_EQ(v.size(), summary_size);
    EXPECT_DOUBLE_EQ(v[0], 20.0);
    for (std::size_t c = 1; c <= 10; ++c) EXPECT_NEAR(v[c], 2.0 * static_cast<double>(c), 1e-12);
    EXPECT_DOUBLE_EQ(v[11], 0.5);
    EXPECT_DOUBLE_EQ(v[12], 0.5);
    EXPECT_DOUBLE_EQ(v[29], 2.2);
    EXPECT_NEAR(v[30], 1.35, 1e-12);
}

TEST(Summarize, ShortTransferIsPaddedWithItsMean) {
    const auto v = summarize(flat_session(7, 16, 800, 1000));
    // 1.0 .. 2.5 s, mean 1.75
    EXPECT_DOUBLE_EQ(v[12 + 15], 2.5);
    EXPECT_DOUBLE_EQ(v[12 + 16], 1.75);
    EXPECT_DOUBLE_EQ(v[12 + 17], 1.75);
    EXPECT_DOUBLE_EQ(v[30], 1.75);
    // ceil(0.1 * 7) = 1 trial at the first checkpoint
    EXPECT_NEAR(v[1], 0.8, 1e-12);
    EXPECT_THROW(summarize(flat_session(0, 18, 800, 1000)), std::domain_error);
    EXPECT_THROW(summarize(flat_session(5, 0, 800, 1000)), std::domain_error);
}

TEST(SummaryWeights, TransferEntriesShareOneUnit) {
    const auto w = default_summary_weights();
    ASSERT_EQ(w.size(), summary_size);
    double transfer = 0.0;
    for (std::size_t k = 12; k < 30; ++k) transfer += w[k];
    EXPECT_NEAR(transfer, 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(w[0], 1.0);
}

TEST(PriorBox, ContainsAndValidate) {
    const PriorBox p;
    EXPECT_TRUE(p.contains(0.5, 0.1));
    EXPECT_FALSE(p.contains(2.5, 0.1));
    EXPECT_FALSE(p.contains(0.5, 0.03));
    EXPECT_THROW((PriorBox{1.0, 0.5, 0.1, 0.2}.validate()), std::domain_error);
}

TEST(PosteriorPoint, CoordinatewiseMedians) {
    PosteriorSample s;
    s.accepted = {{0.2, 0.15, 0.0, 0}, {0.9, 0.05, 0.0, 1}, {0.4, 0.10, 0.0, 2}};
    const auto p = posterior_point(s);
    EXPECT_DOUBLE_EQ(p.eta, 0.4);
    EXPECT_DOUBLE_EQ(p.theta, 0.10);
    EXPECT_THROW(posterior_point(PosteriorSample{}), std::domain_error);
}

class SmallTable : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        task = new RocketTask(make_rocket_task(ExperimentConfig{}.gamma, Seed{2024}));
        table = new ReferenceTable(reference_table(*task, PriorBox{}, ExperimentConfig{}, 2000, Seed{99}));
    }
    static void TearDownTestSuite() {
        delete table;
        delete task;
    }
    static RocketTask* task;
    static ReferenceTable* table;
};
RocketTask* SmallTable::task = nullptr;
ReferenceTable* SmallTable::table = nullptr;

TEST_F(SmallTable, DrawsStayInThePrior) {
    const PriorBox prior;
    ASSERT_EQ(table->size(), 2000u);
    for (std::size_t k = 0; k < table->size(); ++k) EXPECT_TRUE(prior.contains(table->eta[k], table->theta[k]));
    for (double s : table->scale) EXPECT_GT(s, 0.0);
}

TEST_F(SmallTable, SelfMatchHasZeroDistance) {
    const auto post = abc_accept(*table, table->summaries[123], 0.01);
    ASSERT_EQ(post.accepted.size(), 20u);
    EXPECT_EQ(post.accepted.front().simulation, 123u);
    EXPECT_DOUBLE_EQ(post.accepted.front().distance, 0.0);
    EXPECT_TRUE(std::is_sorted(post.accepted.begin(), post.accepted.end(),
                               [](const auto& a, const auto& b) { return a.distance < b.distance; }));
    EXPECT_DOUBLE_EQ(post.cutoff, post.accepted.back().distance);
}

TEST_F(SmallTable, SmallerQuantileKeepsTheClosest) {
    const auto& target = table->summaries[7];
    const auto wide = abc_accept(*table, target, 0.05);
    const auto narrow = abc_accept(*table, target, 0.01);
    EXPECT_LE(narrow.cutoff, wide.cutoff);
    for (std::size_t k = 0; k < narrow.accepted.size(); ++k)
        EXPECT_EQ(narrow.accepted[k].simulation, wide.accepted[k].simulation);
}

TEST_F(SmallTable, CoverageOfPriorTruths) {
    // Truths drawn from the prior, each posterior's 5-95 % box should hold
    // its truth most of the time.
    const ExperimentConfig config;
    const PriorBox prior;
    std::size_t covered = 0;
    const std::size_t truths = 20;
    for (std::size_t t = 0; t < truths; ++t) {
        const auto draw = abc_simulation(*task, prior, config, Seed{555}, t);
        const auto post = abc_accept(*table, summarize(draw.session), 0.02);
        std::vector<double> eta, theta;
        for (const auto& a : post.accepted) {
            eta.push_back(a.eta);
            theta.push_back(a.theta);
        }
        const bool in_eta = draw.eta >= stats::quantile(eta, 0.05) && draw.eta <= stats::quantile(eta, 0.95);
        const bool in_theta =
            draw.theta >= stats::quantile(theta, 0.05) && draw.theta <= stats::quantile(theta, 0.95);
        covered += in_eta && in_theta;
    }
    EXPECT_GE(static_cast<double>(covered) / truths, 0.7);
}

TEST(AbcFit, DeterministicAndInsidePrior) {
    ExperimentConfig config;
    const RocketTask task = make_rocket_task(config.gamma, Seed{3});
    const Session observed = simulate_session(task, 1.0, 0.12, config, Seed{31});
    AbcOptions opt;
    opt.n_sims = 200;
    opt.quantile = 0.05;
    const auto a = abc_fit_unchecked(observed, PriorBox{}, config, opt, Seed{8});
    opt.jobs = 1;
    const auto b = abc_fit_unchecked(observed, PriorBox{}, config, opt, Seed{8});
    ASSERT_EQ(a.accepted.size(), 10u);
    for (std::size_t k = 0; k < a.accepted.size(); ++k) {
        EXPECT_EQ(a.accepted[k].eta, b.accepted[k].eta);
        EXPECT_TRUE(PriorBox{}.contains(a.accepted[k].eta, a.accepted[k].theta));
    }
    EXPECT_THROW(abc_fit(observed, PriorBox{}, config, opt, Seed{8}), std::domain_error);
}

TEST(AbcFit, JsonRoundTrip) {
    PosteriorSample s;
    s.accepted = {{0.2, 0.15, 0.5, 4}, {0.9, 0.05, 0.7, 1}};
    s.n_sims = 100;
    s.quantile = 0.02;
    s.cutoff = 0.7;
    s.low_confidence = true;
    const auto back = posterior_from_json(posterior_to_json(s));
    EXPECT_EQ(back.accepted.size(), 2u);
    EXPECT_EQ(back.accepted[0].simulation, 4u);
    EXPECT_EQ(back.n_sims, 100u);
    EXPECT_TRUE(back.low_confidence);
    EXPECT_EQ(posterior_to_json(back), posterior_to_json(s));
}
