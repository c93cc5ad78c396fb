#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "infharnack/errors.hpp"
#include "infharnack/nonlinearity.hpp"

namespace ih = infharnack;
using ih::ConditionId;
using ih::NonlinearityPair;
using ih::ScalarFunction;
using ih::Verdict;

namespace {

NonlinearityPair pair_of(ScalarFunction f, ScalarFunction g, double q) {
    return NonlinearityPair(std::move(f), std::move(g), q);
}

// A fail verdict must come with a witness that re-evaluates to a violation.
void expect_witnessed(const ih::ConditionEntry& e) {
    if (e.verdict == Verdict::Fail) EXPECT_FALSE(e.evidence.empty()) << ih::to_string(e.id);
}

}  // namespace

TEST(ScalarFunction, PowerAndOddExtension) {
    const auto p = ScalarFunction::power(1, 3);
    EXPECT_DOUBLE_EQ(p(2.0), 8.0);
    const auto odd = ScalarFunction::power(1, 3, true);
    EXPECT_DOUBLE_EQ(odd(-2.0), -8.0);
    EXPECT_DOUBLE_EQ(odd.derivative(-2.0), 12.0);
}

TEST(ScalarFunction, PiecewiseLinearInterpolatesAndRejectsBadKnots) {
    const auto f = ScalarFunction::piecewise_linear({0, 1}, {0, 1});
    EXPECT_DOUBLE_EQ(f(0.5), 0.5);
    EXPECT_THROW(ScalarFunction::piecewise_linear({0, 0}, {0, 1}), ih::ArgumentError);
    EXPECT_THROW(ScalarFunction::piecewise_linear({1, 0}, {0, 1}), ih::ArgumentError);
}

TEST(ScalarFunction, ExpAndLogFamilies) {
    const auto e = ScalarFunction::exp_minus_one(2.0);
    EXPECT_NEAR(e(1.0), 2.0 * (std::exp(1.0) - 1.0), 1e-14);
    EXPECT_NEAR(e(1e-12) / 2e-12, 1.0, 1e-11);  // no cancellation near zero
    const auto l = ScalarFunction::log_plus_one(3.0);
    EXPECT_NEAR(l(2.0), 3.0 * std::log(3.0), 1e-14);
    EXPECT_NEAR(l.derivative(2.0), 1.0, 1e-14);
}

TEST(ScalarFunction, TabulatedRangeIsEnforced) {
    const auto t = ScalarFunction::tabulated({0, 1, 2}, {0, 1, 4}, ih::InterpRule::Linear);
    EXPECT_DOUBLE_EQ(t(1.5), 2.5);
    EXPECT_THROW(t(2.5), ih::DomainError);
    const auto odd = ScalarFunction::tabulated({0, 1, 2}, {0, 1, 4}, ih::InterpRule::Pchip, true);
    EXPECT_DOUBLE_EQ(odd(-1.0), -1.0);
    EXPECT_THROW(odd(-2.5), ih::DomainError);
}

TEST(ScalarFunction, PchipIsMonotoneOnMonotoneData) {
    const auto t = ScalarFunction::tabulated({0, 1, 2, 3, 4}, {0, 0.1, 0.1, 3, 3.1}, ih::InterpRule::Pchip);
    double prev = t(0.0);
    for (int i = 1; i <= 400; ++i) {
        const double v = t(i / 100.0);
        EXPECT_GE(v, prev - 1e-15);
        prev = v;
    }
}

TEST(ScalarFunction, OddExtensionCoherenceAcrossFamilies) {
    const std::vector<ScalarFunction> fams = {
        ScalarFunction::power(2, 3, true), ScalarFunction::power(0.5, 1.5, true),
        ScalarFunction::exp_minus_one(1, true), ScalarFunction::log_plus_one(2, true),
        ScalarFunction::piecewise_linear({0, 1, 3}, {0, 2, 3}, true),
        ScalarFunction::tabulated({0, 1, 2, 5}, {0, 1, 3, 4}, ih::InterpRule::Pchip, true)};
    for (const auto& f : fams)
        for (double t : {0.0, 0.3, 1.0, 1.7, 4.5}) EXPECT_DOUBLE_EQ(f(-t), -f(t)) << f.describe();
}

TEST(ScalarFunction, DeclaredMonotoneFamiliesSampleMonotone) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double c = 0.1 + 3 * U(rng), g = 0.5 + 3 * U(rng);
        const auto f = ScalarFunction::power(c, g);
        double prev = f(0.0);
        for (int i = 1; i < 200; ++i) {
            const double v = f(i * 0.05);
            EXPECT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(Nonlinearity, PairRejectsBadExponent) {
    EXPECT_THROW(pair_of(ScalarFunction::zero(), ScalarFunction::zero(), -0.1), ih::ArgumentError);
    EXPECT_THROW(pair_of(ScalarFunction::zero(), ScalarFunction::zero(), 2.0), ih::ArgumentError);
    EXPECT_NO_THROW(pair_of(ScalarFunction::zero(), ScalarFunction::zero(), 1.5));
}

TEST(Nonlinearity, HValueExamples) {
    EXPECT_DOUBLE_EQ(ih::h_value(pair_of(ScalarFunction::power(1, 3), {}, 0), 4.0), 4.0);
    EXPECT_DOUBLE_EQ(ih::h_value(pair_of({}, ScalarFunction::power(1, 1), 0), 8.0), 1.0);
    EXPECT_NEAR(ih::h_value(pair_of(ScalarFunction::power(1, 3), ScalarFunction::power(1, 1), 1), 9.0),
                18.0, 1e-12);
    EXPECT_THROW(ih::h_value(pair_of(ScalarFunction::power(1, 3), {}, 0), 0.0), ih::DomainError);
    EXPECT_THROW(ih::h_value(pair_of(ScalarFunction::constant(-1), {}, 0), 1.0), ih::DomainError);
}

TEST(Nonlinearity, LogHMatchesHAndSurvivesOverflow) {
    const auto p = pair_of(ScalarFunction::exp_minus_one(1), {}, 0);
    EXPECT_NEAR(ih::log_h_value(p, 5.0), std::log(ih::h_value(p, 5.0)), 1e-12);
    const double big = ih::log_h_value(p, 2000.0);
    EXPECT_TRUE(std::isfinite(big));
    EXPECT_NEAR(big, 0.5 * (2000.0 - std::log(2000.0)), 1e-6);
}

TEST(Nonlinearity, HEpsilonExamples) {
    const auto p = pair_of(ScalarFunction::power(1, 3), {}, 0);
    EXPECT_DOUBLE_EQ(ih::h_epsilon_value(p, 0.0, 1.0), 0.0);
    EXPECT_NEAR(ih::h_epsilon_value(p, 1.0, 1.0), std::sqrt(0.5), 1e-15);
    const auto g1 = pair_of({}, ScalarFunction::constant(1), 0);
    EXPECT_NEAR(ih::h_epsilon_value(g1, 0.0, 0.01), 10.0, 1e-12);
    EXPECT_THROW(ih::h_epsilon_value(p, 1.0, 0.0), ih::ArgumentError);
}

TEST(ConditionP, Examples) {
    const auto grid = ih::log_grid(1e-3, 1e3, 64);
    auto r = ih::check_condition_P(pair_of(ScalarFunction::power(1, 3, true), ScalarFunction::power(1, 1), 0), grid);
    EXPECT_EQ(r.overall(), Verdict::Pass);
    r = ih::check_condition_P(pair_of(ScalarFunction::power(1, 1, true), {}, 0), grid);
    EXPECT_EQ(r.get(ConditionId::Pb).verdict, Verdict::Pass);
    // Without the odd extension f(-t) = t^2 > 0 violates the sign condition.
    r = ih::check_condition_P(pair_of(ScalarFunction::power(1, 2), {}, 0), grid);
    EXPECT_EQ(r.get(ConditionId::Pa).verdict, Verdict::Fail);
    expect_witnessed(r.get(ConditionId::Pa));
    // Neither f nor g strictly increasing.
    r = ih::check_condition_P(pair_of(ScalarFunction::piecewise_linear({0, 1, 2}, {0, 1, 1}, true),
                                      ScalarFunction::constant(1), 0),
                              grid);
    EXPECT_EQ(r.get(ConditionId::Pb).verdict, Verdict::Fail);
    expect_witnessed(r.get(ConditionId::Pb));
    EXPECT_THROW(ih::check_condition_P(pair_of({}, {}, 0), {}), ih::ArgumentError);
}

TEST(ConditionC1C2, Examples) {
    const ih::GrowthWindow w{1.0, 1e4, 64, 0.05};
    auto r = ih::check_C1_C2(pair_of(ScalarFunction::power(1, 3), {}, 0), 2.0, w);
    EXPECT_EQ(r.get(ConditionId::C1).verdict, Verdict::Pass);
    EXPECT_EQ(r.get(ConditionId::C2).verdict, Verdict::Pass);
    EXPECT_NEAR(r.parameters.at("ratio"), 2.0, 1e-9);

    r = ih::check_C1_C2(pair_of(ScalarFunction::power(1, 1), {}, 0), 2.0, w);
    const auto& c2 = r.get(ConditionId::C2);
    EXPECT_EQ(c2.verdict, Verdict::Fail);
    expect_witnessed(c2);
    EXPECT_NEAR(c2.evidence.front().value, 1.0, 1e-12);

    r = ih::check_C1_C2(pair_of(ScalarFunction::exp_minus_one(1), {}, 0), 2.0, {10, 1e4, 64, 0.05});
    EXPECT_EQ(r.get(ConditionId::C2).verdict, Verdict::Pass);
}

TEST(ConditionC1C2, InconclusiveInsideMargin) {
    // h(s) = s^0.03 gives h(2t)/h(t) = 2^0.03 ~ 1.021 < 1.05.
    const auto r = ih::check_C1_C2(pair_of(ScalarFunction::power(1, 1.06), {}, 0), 2.0, {1, 1e4, 64, 0.05});
    EXPECT_EQ(r.get(ConditionId::C2).verdict, Verdict::Inconclusive);
}

TEST(ConditionC1C2, WindowValidation) {
    const auto p = pair_of(ScalarFunction::power(1, 3), {}, 0);
    EXPECT_THROW(ih::check_C1_C2(p, 1.0, {}), ih::ArgumentError);
    EXPECT_THROW(ih::check_C1_C2(p, 2.0, {10, 15, 64, 0.05}), ih::ArgumentError);
    EXPECT_THROW(ih::check_C1_C2(p, 2.0, {1, 1e4, 8, 0.05}), ih::ArgumentError);
}

TEST(ConditionC3C4, Examples) {
    auto r = ih::check_C3_C4(pair_of(ScalarFunction::power(1, 3), ScalarFunction::power(1, 1), 1));
    EXPECT_EQ(r.get(ConditionId::C3).verdict, Verdict::Pass);
    EXPECT_EQ(r.get(ConditionId::C4).verdict, Verdict::Pass);

    r = ih::check_C3_C4(pair_of(ScalarFunction::power(1, 3), ScalarFunction::exp_minus_one(1), 1));
    EXPECT_EQ(r.get(ConditionId::C4).verdict, Verdict::Fail);
    expect_witnessed(r.get(ConditionId::C4));

    r = ih::check_C3_C4(pair_of(ScalarFunction::constant(1), ScalarFunction::power(1, 1), 1));
    EXPECT_EQ(r.get(ConditionId::C3).verdict, Verdict::Fail);
    expect_witnessed(r.get(ConditionId::C3));

    EXPECT_THROW(ih::check_C3_C4(pair_of(ScalarFunction::power(1, 3), {}, 0.5)), ih::ArgumentError);
}

TEST(ConditionGZero, Examples) {
    EXPECT_EQ(ih::check_g_zero(pair_of({}, ScalarFunction::power(1, 1), 0)).overall(), Verdict::Pass);
    const auto shifted = ScalarFunction(ih::Power{1, 1}, 1.0);
    const auto r = ih::check_g_zero(pair_of({}, shifted, 0.5));
    EXPECT_EQ(r.overall(), Verdict::Fail);
    ASSERT_FALSE(r.get(ConditionId::GZero).evidence.empty());
    EXPECT_DOUBLE_EQ(r.get(ConditionId::GZero).evidence.front().value, 1.0);
    EXPECT_EQ(ih::check_g_zero(pair_of({}, {}, 0.9)).overall(), Verdict::Pass);
    EXPECT_THROW(ih::check_g_zero(pair_of({}, {}, 1.0)), ih::PreconditionError);
}

TEST(ConditionGZero, FlagsEveryC1C2PassingPairWithPositiveGAtZero) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    for (int i = 0; i < 20; ++i) {
        const double q = 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
        const auto p = pair_of(ScalarFunction::power(U(rng), 3.0), ScalarFunction(ih::Power{U(rng), 2.0}, U(rng)), q);
        if (ih::check_C1_C2(p, 2.0, {1, 1e4, 32, 0.05}).overall() != Verdict::Pass) continue;
        EXPECT_EQ(ih::check_g_zero(p).overall(), Verdict::Fail);
    }
}

TEST(DifMonotonicity, Examples) {
    const auto grid = ih::log_grid(1e-3, 1e3, 200);
    EXPECT_EQ(ih::verify_dif_monotonicity(pair_of(ScalarFunction::power(1, 3), {}, 0), {0.1, 1, 10}, grid).overall(),
              Verdict::Pass);
    EXPECT_EQ(ih::verify_dif_monotonicity(pair_of({}, {}, 0), {1.0}, grid).overall(), Verdict::Pass);
    // f flat past t = 1 makes h decrease: the hypothesis fails, which is not a fail verdict.
    const auto bump = ScalarFunction::piecewise_linear({0, 1, 2, 1e4}, {0, 1, 1, 1});
    EXPECT_THROW(ih::verify_dif_monotonicity(pair_of(bump, {}, 0), {1.0}, grid), ih::PreconditionError);
    EXPECT_THROW(ih::verify_dif_monotonicity(pair_of({}, {}, 0), {}, grid), ih::ArgumentError);
    EXPECT_THROW(ih::verify_dif_monotonicity(pair_of({}, {}, 0), {-1.0}, grid), ih::ArgumentError);
}

TEST(ConditionReport, OverallPrecedence) {
    ih::ConditionReport r;
    r.entries.push_back({ConditionId::C1, Verdict::Pass, {}, ""});
    EXPECT_EQ(r.overall(), Verdict::Pass);
    r.entries.push_back({ConditionId::C2, Verdict::Inconclusive, {}, ""});
    EXPECT_EQ(r.overall(), Verdict::Inconclusive);
    r.entries.push_back({ConditionId::KO, Verdict::Fail, {{1, 1, ""}}, ""});
    EXPECT_EQ(r.overall(), Verdict::Fail);
    EXPECT_THROW(r.get(ConditionId::C3), ih::ArgumentError);
}

TEST(LogGrid, EndpointsAndSpacing) {
    const auto g = ih::log_grid(1e-2, 1e2, 5);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_DOUBLE_EQ(g.front(), 1e-2);
    EXPECT_DOUBLE_EQ(g.back(), 1e2);
    EXPECT_NEAR(g[2], 1.0, 1e-14);
}
