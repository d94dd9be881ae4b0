#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ldplab/estimate.hpp"

using namespace ldplab;

TEST(Schedule, PowerGrowsAndVanishes) {
    const auto s = ScheduleSpec::power(1.0 / 3.0, 2.0);
    EXPECT_NEAR(s.growing(1000.0), 20.0, 1e-12);
    EXPECT_NEAR(s.vanishing(1000.0), 0.2, 1e-14);
    EXPECT_TRUE(s.is_admissible());
    EXPECT_NO_THROW(s.validate("eps"));
}

TEST(Schedule, LogarithmicAndConstant) {
    const auto l = ScheduleSpec::logarithmic(3.0);
    EXPECT_NEAR(l.growing(std::exp(2.0) - 1.0), 6.0, 1e-12);
    EXPECT_NEAR(l.vanishing(std::exp(2.0) - 1.0), 1.5, 1e-12);
    const auto c = ScheduleSpec::constant(0.7);
    EXPECT_EQ(c.growing(1e6), 0.7);
    EXPECT_EQ(c.vanishing(1e6), 0.7);
    EXPECT_TRUE(l.is_admissible());
    EXPECT_TRUE(c.is_admissible());
}

TEST(Schedule, ExponentOutsideUnitIntervalIsRejected) {
    for (double p : {1.0, 1.5, 0.0, -0.2}) {
        const auto s = ScheduleSpec::power(p);
        EXPECT_FALSE(s.is_admissible()) << p;
        EXPECT_THROW(s.validate("M"), DomainError) << p;
    }
    EXPECT_THROW(ScheduleSpec::constant(0.0).validate("eps"), DomainError);
    auto m = ScheduleSpec::power(0.5);
    m.multipliers = {1.0, -1.0};
    EXPECT_FALSE(m.is_admissible());
    EXPECT_THROW(m.validate("eps"), DomainError);
}

TEST(Schedule, ScaledMultipliesScaleOnly) {
    const auto s = ScheduleSpec::power(0.25, 1.5).scaled(4.0);
    EXPECT_EQ(s.scale, 6.0);
    EXPECT_EQ(s.exponent, 0.25);
    EXPECT_NEAR(s.vanishing(16.0), 3.0, 1e-14);
}

TEST(Schedule, DescribeAndKindNames) {
    EXPECT_EQ(ScheduleSpec::power(0.5, 2.0).describe(), "2*T^0.5");
    EXPECT_EQ(ScheduleSpec::logarithmic(1.0).describe(), "1*ln(1+T)");
    EXPECT_EQ(ScheduleSpec::constant(3.0).describe(), "3");
    for (auto k : {ScheduleKind::Power, ScheduleKind::Logarithmic, ScheduleKind::Constant})
        EXPECT_EQ(parse_schedule_kind(to_string(k)), k);
    EXPECT_THROW(parse_schedule_kind("cubic"), DomainError);
}

TEST(Flags, JoinedInBitOrder) {
    EXPECT_EQ(flags_to_string(0), "");
    EXPECT_EQ(flags_to_string(flag::diverging | flag::undersampled), "undersampled|diverging");
    EXPECT_EQ(flags_to_string(flag::precondition_failed), "precondition-failed");
    EXPECT_EQ(to_string(Provenance::Exact), "exact");
    EXPECT_EQ(to_string(Provenance::MonteCarlo), "monte-carlo");
}

TEST(LogEstimate, ExactIsReliable) {
    const auto e = LogEstimate::exact(-1.25, 50.0);
    EXPECT_EQ(e.value, -1.25);
    EXPECT_EQ(e.ci_half_width, 0.0);
    EXPECT_EQ(e.provenance, Provenance::Exact);
    EXPECT_TRUE(e.reliable());
    LogEstimate u = e;
    u.flags |= flag::unreliable;
    EXPECT_FALSE(u.reliable());
    EXPECT_TRUE(u.has(flag::unreliable));
    EXPECT_FALSE(u.has(flag::diverging));
}

TEST(WeightSummary, HandComputedValues) {
    // weights 1, 2, 3 and two zeros out of n = 5.
    const std::vector<double> logw{0.0, std::log(2.0), std::log(3.0), -kInf, -kInf};
    const auto s = summarize_log_weights(logw, 5);
    EXPECT_NEAR(s.log_mean, std::log(6.0 / 5.0), 1e-14);
    EXPECT_NEAR(s.n_effective, 36.0 / 14.0, 1e-14);
    EXPECT_NEAR(s.relative_se, std::sqrt((5.0 / (36.0 / 14.0) - 1.0) / 5.0), 1e-14);
    EXPECT_EQ(s.positive, 3u);
}

TEST(WeightSummary, EqualWeightsHaveNoError) {
    const std::vector<double> logw(400, 900.0);
    const auto s = summarize_log_weights(logw, 400);
    EXPECT_NEAR(s.log_mean, 900.0, 1e-12);
    EXPECT_NEAR(s.n_effective, 400.0, 1e-9);
    EXPECT_NEAR(s.relative_se, 0.0, 1e-7);
}

TEST(WeightSummary, AllZeroWeights) {
    const std::vector<double> logw(10, -kInf);
    const auto s = summarize_log_weights(logw, 10);
    EXPECT_TRUE(is_neg_inf(s.log_mean));
    EXPECT_EQ(s.positive, 0u);
    EXPECT_TRUE(is_pos_inf(s.relative_se));
}

TEST(CurveType, AccessorsAndGridConversion) {
    Curve c;
    c.grid = GridSpec::line(0.0, 1.0, 3);
    c.arguments = {{0.0}, {0.5}, {1.0}};
    c.estimates = {LogEstimate::exact(1.0), LogEstimate{2.0, 0.3, 10.0, Provenance::MonteCarlo, 0},
                   LogEstimate{3.0, kInf, 0.0, Provenance::MonteCarlo, flag::undersampled}};
    c.converged = {true, true, false};
    EXPECT_EQ(c.size(), 3u);
    EXPECT_EQ(c.values(), (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_EQ(c.max_ci(), 0.3);
    EXPECT_FALSE(c.all_converged());
    c.converged[2] = true;
    EXPECT_TRUE(c.all_converged());
    const GridFunction f = c.to_grid_function();
    EXPECT_EQ(f.values(), c.values());
    c.estimates[1].value = -kInf;
    EXPECT_THROW(c.to_grid_function(), NumericalFailure);
    c.grid.reset();
    EXPECT_THROW(c.to_grid_function(), DomainError);
}
