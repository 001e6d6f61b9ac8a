#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "errors.hpp"
#include "exponent.hpp"

using namespace varexp;

namespace {

std::vector<double> log_points(double lo, double hi, int n) {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) {
        xs.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
    }
    return xs;
}

}  // namespace

TEST(Exponent, BuiltinValuesAtZero) {
    EXPECT_DOUBLE_EQ(eval_p(make_builtin("p1"), 0.0), 0.5);
    EXPECT_DOUBLE_EQ(eval_p(make_builtin("p2"), 0.0), 0.6);
    EXPECT_DOUBLE_EQ(eval_p(make_builtin("p3"), 0.0), 0.55);
}

TEST(Exponent, ConstantIsConstant) {
    const auto c = make_builtin("const:0.5");
    EXPECT_EQ(eval_p(c, 7.3), 0.5);
    EXPECT_EQ(eval_p(c, 0.0), 0.5);
    EXPECT_EQ(eval_p(c, 1e9), 0.5);
    EXPECT_EQ(eval_dp(c, 3.0), 0.0);
    EXPECT_EQ(eval_p(make_builtin("constant(0.75)"), 2.0), 0.75);
}

TEST(Exponent, LimitsAtInfinity) {
    EXPECT_NEAR(eval_p(make_builtin("p3"), 1e9), 0.75, 1e-6);
    EXPECT_LE(eval_p(make_builtin("p1"), 1e6), 0.8);
    EXPECT_LE(eval_p(make_builtin("p2"), 1e6), 0.8);
}

TEST(Exponent, DerivativesAtZero) {
    EXPECT_DOUBLE_EQ(eval_dp(make_builtin("p1"), 0.0), 0.3);
    EXPECT_DOUBLE_EQ(eval_dp(make_builtin("p2"), 0.0), 0.2);
    EXPECT_DOUBLE_EQ(eval_dp(make_builtin("p3"), 0.0), 0.2);
    EXPECT_NEAR(eval_dp(make_builtin("p1"), 1e-12), 0.3, 1e-12);
    EXPECT_NEAR(eval_dp(make_builtin("p2"), 1e-12), 0.2, 1e-12);
}

TEST(Exponent, DerivativeMatchesCentralDifference) {
    for (const char* name : {"p1", "p2", "p3", "const:0.7"}) {
        const auto fn = make_builtin(name);
        for (double x : log_points(1e-8, 1e6, 10000)) {
            const double h = 1e-6 * std::max(1.0, x);
            const double fd = (fn.value(x + h) - fn.value(x - h)) / (2.0 * h);
            const double dp = eval_dp(fn, x);
            ASSERT_LE(std::abs(dp - fd), 1e-5 * (1.0 + std::abs(dp))) << name << " x=" << x;
        }
    }
}

TEST(Exponent, BuiltinsStayInsideHalfToPointEight) {
    for (const char* name : {"p1", "p2", "p3"}) {
        const auto fn = make_builtin(name);
        for (double x : log_points(1e-12, 1e12, 10000)) {
            const double p = eval_p(fn, x);
            ASSERT_GE(p, 0.5) << name << " x=" << x;
            ASSERT_LE(p, 0.8) << name << " x=" << x;
            ASSERT_GE(p, fn.declared_pminus());
            ASSERT_LE(p, fn.declared_pplus() + 1e-15);
        }
    }
}

TEST(Exponent, DomainErrors) {
    const auto fn = make_builtin("p1");
    EXPECT_THROW(eval_p(fn, -1.0), DomainError);
    EXPECT_THROW(eval_p(fn, std::numeric_limits<double>::quiet_NaN()), DomainError);
    EXPECT_THROW(eval_p(fn, std::numeric_limits<double>::infinity()), DomainError);
    EXPECT_THROW(eval_dp(fn, std::numeric_limits<double>::infinity()), DomainError);
}

TEST(Exponent, SpecGrammarErrors) {
    EXPECT_THROW(make_builtin("p9"), InvalidArgument);
    EXPECT_THROW(make_builtin("const:"), InvalidArgument);
    EXPECT_THROW(make_builtin("const:abc"), InvalidArgument);
    EXPECT_THROW(make_builtin("const:0.5x"), InvalidArgument);
    EXPECT_THROW(make_builtin("const:1.2"), HypothesisViolation);
    EXPECT_THROW(make_builtin("const:0.4"), HypothesisViolation);
    EXPECT_NO_THROW(parse_exponent("const:1.2"));
}

TEST(Exponent, CustomRequiresBothFunctions) {
    EXPECT_THROW(ExponentFunction::custom(nullptr, [](double) { return 0.0; }, 0.5, 1, 1, 0),
                 InvalidArgument);
    EXPECT_THROW(ExponentFunction::custom([](double) { return 0.5; }, nullptr, 0.5, 1, 1, 0),
                 InvalidArgument);
}

TEST(Hypotheses, BuiltinsPass) {
    const auto r1 = validate_hypotheses(make_builtin("p1"));
    EXPECT_TRUE(r1.pass);
    EXPECT_NEAR(r1.observed_inf, 0.5, 1e-9);
    EXPECT_NEAR(r1.observed_sup, 0.8, 1e-9);
    EXPECT_NEAR(r1.observed_dsup_near_zero, 0.3, 1e-9);
    EXPECT_NEAR(r1.p_at_zero_plus, 0.5, 1e-9);
    EXPECT_EQ(r1.failing_clause, HypothesisClause::None);

    const auto r2 = validate_hypotheses(make_builtin("p2"));
    EXPECT_TRUE(r2.pass);
    EXPECT_NEAR(r2.observed_inf, 0.6, 1e-9);
    EXPECT_NEAR(r2.observed_sup, 0.8, 1e-9);

    const auto r3 = validate_hypotheses(make_builtin("p3"));
    EXPECT_TRUE(r3.pass);
    EXPECT_NEAR(r3.observed_inf, 0.55, 1e-9);
    EXPECT_NEAR(r3.observed_sup, 0.75, 1e-9);
    // sup |p3'| on [1/10, 10] is p3'(0.1) = 0.2 / 1.21.
    EXPECT_NEAR(r3.observed_dsup_band, 0.2 / 1.21, 1e-12);
}

TEST(Hypotheses, ConstantHalf) {
    const auto r = validate_hypotheses(make_builtin("const:0.5"));
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.observed_inf, 0.5);
    EXPECT_EQ(r.observed_sup, 0.5);
    EXPECT_EQ(r.observed_dsup_near_zero, 0.0);
}

TEST(Hypotheses, OutOfRangeConstantsFail) {
    const auto hi = validate_hypotheses(parse_exponent("const:1.2"));
    EXPECT_FALSE(hi.pass);
    EXPECT_EQ(hi.failing_clause, HypothesisClause::UpperBound);
    const auto lo = validate_hypotheses(parse_exponent("const:0.4"));
    EXPECT_FALSE(lo.pass);
    EXPECT_EQ(lo.failing_clause, HypothesisClause::LowerBound);
}

TEST(Hypotheses, ConstantPassesIffInUnitHalfInterval) {
    HypothesisGrid coarse;
    coarse.points = 50;
    coarse.near_zero_points = 10;
    for (int i = 0; i <= 200; ++i) {
        const double c = 0.2 + 1.2 * i / 200.0;
        const auto r = validate_hypotheses(ExponentFunction::constant(c), coarse);
        EXPECT_EQ(r.pass, c >= 0.5 && c <= 1.0) << "c=" << c;
    }
}

TEST(Hypotheses, UnboundedDerivativeNearZeroFails) {
    // p(x) = 0.75 + 0.25 sin(sqrt x) has p' ~ 1/(8 sqrt x) as x -> 0.
    const auto fn = ExponentFunction::custom(
        [](double x) { return 0.75 + 0.25 * std::sin(std::sqrt(x)); },
        [](double x) { return 0.125 * std::cos(std::sqrt(x)) / std::sqrt(x); },
        0.5, 1.0, 1.0, std::numeric_limits<double>::infinity());
    const auto r = validate_hypotheses(fn);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.failing_clause, HypothesisClause::DerivativeNearZero);
    EXPECT_GE(r.observed_inf, 0.5);
    EXPECT_LE(r.observed_sup, 1.0);
}

TEST(Hypotheses, NanDerivativeCountsAsUnbounded) {
    const auto fn = ExponentFunction::custom(
        [](double) { return 0.7; },
        [](double x) { return x < 1e-3 ? std::numeric_limits<double>::quiet_NaN() : 0.0; }, 0.7,
        0.7, 1.0, 0.0);
    const auto r = validate_hypotheses(fn);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.failing_clause, HypothesisClause::DerivativeNearZero);
}

TEST(Hypotheses, EvaluationFailureIsAnError) {
    const auto fn = ExponentFunction::custom(
        [](double x) { return x > 1e6 ? std::numeric_limits<double>::quiet_NaN() : 0.7; },
        [](double) { return 0.0; }, 0.7, 0.7, 1.0, 0.0);
    EXPECT_THROW(validate_hypotheses(fn), NumericError);
}

TEST(Hypotheses, EmptyGridRejected) {
    HypothesisGrid grid;
    grid.points = 0;
    EXPECT_THROW(validate_hypotheses(make_builtin("p1"), grid), InvalidArgument);
    grid = {};
    grid.x_max = grid.x_min;
    EXPECT_THROW(validate_hypotheses(make_builtin("p1"), grid), InvalidArgument);
}
