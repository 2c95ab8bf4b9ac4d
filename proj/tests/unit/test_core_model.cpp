#include <gtest/gtest.h>

#include <stdexcept>

#include "racelab/core_model.hpp"
#include "support.hpp"

using namespace racelab;

TEST(Kernel, CumulativeClosedForm) {
    const Kernel g = Kernel::rectangular(0.02, 50.0);
    EXPECT_DOUBLE_EQ(kernel_cumulative(g, 0.0), 0.0);
    EXPECT_NEAR(kernel_cumulative(g, 1.0), 0.99, 1e-12);
    EXPECT_NEAR(kernel_cumulative(g, 0.01), 0.0025, 1e-12);
    EXPECT_THROW(kernel_cumulative(g, -1e-3), std::domain_error);
}

TEST(Kernel, CumulativeContinuousAtSupport) {
    const Kernel g = Kernel::rectangular(0.02, 50.0);
    EXPECT_NEAR(kernel_cumulative(g, 0.02 - 1e-12), kernel_cumulative(g, 0.02), 1e-9);
}

TEST(Kernel, CumulativeMonotoneAndBelowNormTimesT) {
    for (double support : {0.001, 0.02, 0.5}) {
        for (double height : {0.0, 1.0, 50.0, 400.0}) {
            const Kernel g = Kernel::rectangular(support, height);
            double prev = 0.0;
            for (int k = 0; k <= 400; ++k) {
                const double t = 0.0025 * k;
                const double v = kernel_cumulative(g, t);
                EXPECT_GE(v, prev - 1e-15);
                EXPECT_LE(v, g.l1_norm() * t + 1e-12);
                prev = v;
            }
        }
    }
}

TEST(Kernel, DefaultAndShrink) {
    const Kernel g = Kernel::default_kernel();
    EXPECT_DOUBLE_EQ(g.support(), 0.02);
    EXPECT_DOUBLE_EQ(g.l1_norm(), 1.0);
    const Kernel s = g.shrunk_to(0.01);
    EXPECT_DOUBLE_EQ(s.support(), 0.01);
    EXPECT_NEAR(s.l1_norm(), 1.0, 1e-12);
    EXPECT_EQ(g.shrunk_to(1.0), g);
    EXPECT_DOUBLE_EQ(g.value(0.0), 50.0);
    EXPECT_DOUBLE_EQ(g.value(0.02), 0.0);
    EXPECT_THROW(Kernel::rectangular(0.0, 1.0), std::domain_error);
    EXPECT_THROW(Kernel::rectangular(0.1, -1.0), std::domain_error);
}

TEST(TaskSpec, PartitionEnforced) {
    const auto rates = Matrix::from_rows({{1, 1, 1}});
    EXPECT_NO_THROW(TaskSpec({"x", "y", "z"}, {{"a", {"x"}}, {"b", {"y", "z"}}}, {"f"}, rates));
    // overlap
    EXPECT_THROW(TaskSpec({"x", "y", "z"}, {{"a", {"x", "y"}}, {"b", {"y", "z"}}}, {"f"}, rates), std::domain_error);
    // not covering
    EXPECT_THROW(TaskSpec({"x", "y", "z"}, {{"a", {"x"}}, {"b", {"y"}}}, {"f"}, rates), std::domain_error);
    // unknown member
    EXPECT_THROW(TaskSpec({"x", "y", "z"}, {{"a", {"x", "w"}}, {"b", {"y", "z"}}}, {"f"}, rates), std::domain_error);
}

TEST(TaskSpec, RatesMustBeFiniteNonnegative) {
    EXPECT_THROW(TaskSpec({"x", "y"}, {{"a", {"x"}}, {"b", {"y"}}}, {"f"}, Matrix::from_rows({{1, -1}})),
                 std::domain_error);
    EXPECT_THROW(TaskSpec({"x", "y"}, {{"a", {"x"}}, {"b", {"y"}}}, {"f"}, Matrix::from_rows({{1, NAN}})),
                 std::domain_error);
    EXPECT_THROW(TaskSpec({"x", "y"}, {{"a", {"x"}}, {"b", {"y"}}}, {"f"}, Matrix::from_rows({{1, 2, 3}})),
                 std::domain_error);
}

TEST(TaskSpec, Lookups) {
    const TaskSpec t = fixtures::two_by_two();
    EXPECT_EQ(t.nature_index("o3"), 2u);
    EXPECT_EQ(t.category_of(2), 1u);
    EXPECT_EQ(t.category_index("a"), 0u);
    EXPECT_THROW(t.nature_index("nope"), std::domain_error);
    EXPECT_EQ(t.rates_for(0), (std::vector<double>{10.0, 0.0}));
    const auto balance = t.balance_ratios();
    EXPECT_DOUBLE_EQ(balance[0], 2.0);
    EXPECT_DOUBLE_EQ(balance[1], 2.0);
}

TEST(TaskSpec, RestrictionKeepsOrder) {
    const TaskSpec t = fixtures::two_by_two();
    const std::vector<std::size_t> keep{3, 0};
    const TaskSpec r = t.restricted_to(keep);
    ASSERT_EQ(r.nature_count(), 2u);
    EXPECT_EQ(r.natures()[0], "o4");
    EXPECT_EQ(r.natures()[1], "o1");
    EXPECT_EQ(r.category_of(0), 1u);
    EXPECT_EQ(r.input_rates()(1, 0), 10.0);
}

TEST(RaceParams, Validation) {
    RaceParams p;
    EXPECT_NO_THROW(p.validate());
    p.theta = 0.0;
    EXPECT_THROW(p.validate(), std::domain_error);
    p = RaceParams{};
    p.t_min = p.horizon;
    EXPECT_THROW(p.validate(), std::domain_error);
    p.t_min = 0.0;
    EXPECT_THROW(p.validate(), std::domain_error);
    p = RaceParams{};
    p.dt = p.horizon / 50.0;
    EXPECT_THROW(p.validate(), std::domain_error);
}

TEST(Seed, DeriveIsDeterministicAndSpreads) {
    const Seed s{42};
    EXPECT_EQ(s.derive(3), s.derive(3));
    EXPECT_NE(s.derive(3), s.derive(4));
    EXPECT_NE(s.derive(0), s);
    EXPECT_NE(Seed{1}.derive(2), Seed{2}.derive(1));
}

TEST(Matrix, Basics) {
    const auto m = Matrix::from_rows({{1, 0, 3}, {0, 0.5, 2}});
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m.column(2), (std::vector<double>{3, 2}));
    EXPECT_DOUBLE_EQ(m.max_entry(), 3.0);
    EXPECT_DOUBLE_EQ(*m.min_positive_entry(), 0.5);
    EXPECT_FALSE(Matrix(2, 2).min_positive_entry());
    EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), std::domain_error);
}
