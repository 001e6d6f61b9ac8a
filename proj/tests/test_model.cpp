#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "errors.hpp"
#include "model.hpp"

using namespace varexp;

namespace {

const ModelParams kDefault{};

void expect_rel(double actual, double expected, double rel) {
    EXPECT_NEAR(actual, expected, rel * std::abs(expected)) << "expected " << expected;
}

}  // namespace

TEST(Params, RejectNonPositiveAndNonFinite) {
    EXPECT_NO_THROW(kDefault.validate());
    for (double bad : {0.0, -1.0, std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::quiet_NaN()}) {
        for (int field = 0; field < 4; ++field) {
            ModelParams p;
            double* slots[] = {&p.kappa, &p.theta, &p.xi, &p.v0};
            *slots[field] = bad;
            EXPECT_THROW(p.validate(), InvalidArgument);
        }
    }
}

TEST(Model, Ids) {
    EXPECT_EQ(parse_model("gm:p1", kDefault).id(), "gm:p1");
    EXPECT_EQ(parse_model("cir", kDefault).id(), "cir");
    EXPECT_EQ(parse_model("pkm:a=1,b=0.5", kDefault).kind(), ModelKind::PKM);
    EXPECT_THROW(parse_model("heston", kDefault), InvalidArgument);
    EXPECT_THROW(parse_model("pkm:a=2,b=0.5", kDefault), InvalidArgument);
    EXPECT_THROW(parse_model("pkm:a=0,b=0.7", kDefault), InvalidArgument);
    EXPECT_THROW(parse_model("gm:const:1.5", kDefault), HypothesisViolation);
}

TEST(Model, DriftExamples) {
    const auto gm = Model::gm(kDefault, make_builtin("p1"));
    EXPECT_DOUBLE_EQ(drift(gm, 0.05), 0.0);
    EXPECT_DOUBLE_EQ(drift(gm, 0.0), 0.1);
    EXPECT_EQ(drift(Model::pkm(kDefault, 1, 0.5), 0.0), 0.0);
    EXPECT_THROW(drift(gm, std::numeric_limits<double>::quiet_NaN()), DomainError);
    EXPECT_THROW(drift(gm, -0.1), DomainError);
}

TEST(Model, DiffusionExamples) {
    EXPECT_DOUBLE_EQ(diffusion(Model::cir(kDefault), 0.04), 0.06);
    for (const char* spec : {"cir", "gm:p1", "gm:p2", "gm:p3", "pkm:a=1,b=1.5"}) {
        EXPECT_EQ(diffusion(parse_model(spec, kDefault), 0.0), 0.0) << spec;
    }
    expect_rel(eval_p(make_builtin("p1"), 0.05), 0.51463117264978579727, 1e-15);
    expect_rel(diffusion(parse_model("gm:p1", kDefault), 0.05), 0.064205267895219281220, 1e-14);
    expect_rel(diffusion(parse_model("gm:p2", kDefault), 0.05), 0.048250718906215460512, 1e-14);
    expect_rel(diffusion(parse_model("gm:p3", kDefault), 0.05), 0.056125987504570131229, 1e-14);
    EXPECT_DOUBLE_EQ(diffusion(Model::pkm(kDefault, 0, 1.0), 0.4), 0.12);
    EXPECT_THROW(diffusion(Model::cir(kDefault), -1e-300), DomainError);
    EXPECT_THROW(diffusion(Model::cir(kDefault), std::numeric_limits<double>::infinity()),
                 DomainError);
}

TEST(Model, CirMatchesConstantHalf) {
    const auto cir = Model::cir(kDefault);
    const auto gm = Model::gm(kDefault, make_builtin("const:0.5"));
    for (double x : {0.0, 1e-8, 0.01, 0.05, 1.0, 37.0}) {
        EXPECT_EQ(drift(cir, x), drift(gm, x));
        EXPECT_EQ(diffusion(cir, x), diffusion(gm, x));
    }
}

TEST(Model, DriftVanishesAtTheta) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int i = 0; i < 500; ++i) {
        const ModelParams p{u(rng), u(rng), u(rng), u(rng)};
        for (const char* spec : {"cir", "gm:p1", "gm:p3", "pkm:a=1,b=1", "pkm:a=0,b=0.5"}) {
            EXPECT_EQ(drift(parse_model(spec, p), p.theta), 0.0);
        }
    }
}

TEST(Model, DiffusionNonnegativeAndNondecreasingNearZero) {
    for (const char* spec : {"cir", "gm:p1", "gm:p2", "gm:p3"}) {
        const auto m = parse_model(spec, kDefault);
        double prev = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = i / 1000.0;
            const double g = diffusion(m, x);
            ASSERT_GE(g, 0.0);
            ASSERT_GE(g, prev) << spec << " x=" << x;
            prev = g;
        }
    }
}

TEST(Model, GrowthConstant) {
    EXPECT_EQ(growth_constant(Model::gm(kDefault, make_builtin("p1"))), 8.0);
    EXPECT_EQ(growth_constant(Model::cir({1.0, 1.0, 1.0, 0.5})), 2.0);
    EXPECT_THROW(growth_constant(Model::pkm(kDefault, 1, 0.5)), InvalidArgument);
    EXPECT_THROW(growth_constant(Model::pkm(kDefault, 0, 1.5)), InvalidArgument);
}

TEST(Model, GrowthBoundHoldsOnGrid) {
    for (const char* spec : {"cir", "gm:p1", "gm:p2", "gm:p3", "gm:const:1"}) {
        for (const ModelParams& p : {kDefault, ModelParams{0.5, 3.0, 2.0, 1.0}}) {
            const auto m = parse_model(spec, p);
            const double K = growth_constant(m);
            for (int i = 0; i <= 20000; ++i) {
                const double x = i * 0.05;
                const double f = drift(m, x);
                const double g = diffusion(m, x);
                ASSERT_LE(std::max(f * f, g * g), K * (1.0 + x * x) * (1.0 + 1e-12))
                    << spec << " x=" << x;
            }
        }
    }
}

TEST(Feller, FunctionExamples) {
    const auto cir = Model::cir(kDefault);
    EXPECT_NEAR(feller_function(cir, 0.05), -0.045, 1e-15);
    for (double x : {1e-9, 0.01, 0.3, 2.0}) {
        EXPECT_NEAR(feller_function(cir, x), 2.0 * (0.05 - x) - 0.045, 1e-14);
    }
    const auto p1 = parse_model("gm:p1", kDefault);
    const auto p2 = parse_model("gm:p2", kDefault);
    const std::pair<double, double> p1_ref[] = {{1e-10, 0.054999999921639594887},
                                                {1e-6, 0.054998719032609835061},
                                                {0.01, 0.037156618210470695100},
                                                {0.5, -0.94240831945828978323}};
    const std::pair<double, double> p2_ref[] = {{1e-10, 0.099459999800893823696},
                                                {1e-6, 0.096590863723262780815},
                                                {0.01, 0.059148177403441910608},
                                                {0.5, -0.94396956514602933050}};
    for (auto [x, v] : p1_ref) EXPECT_NEAR(feller_function(p1, x), v, 1e-13) << x;
    for (auto [x, v] : p2_ref) EXPECT_NEAR(feller_function(p2, x), v, 1e-13) << x;
    EXPECT_THROW(feller_function(cir, 0.0), DomainError);
    EXPECT_THROW(feller_function(cir, -1.0), DomainError);
}

TEST(Feller, P2ApproachesKappaTheta) {
    const auto p2 = parse_model("gm:p2", kDefault);
    // x^{2p - 1} with p close to 0.6 decays like x^{0.2}.
    EXPECT_NEAR(feller_function(p2, 1e-30), 0.1, 1e-6);
}

TEST(Feller, CheckExamples) {
    const auto cir = feller_check(Model::cir(kDefault));
    EXPECT_EQ(cir.criterion, FellerCriterion::ConstantHalf);
    EXPECT_EQ(cir.verdict, FellerVerdict::NonAttainable);
    EXPECT_TRUE(cir.classical_applies);
    EXPECT_DOUBLE_EQ(cir.classical_lhs, 0.2);
    EXPECT_DOUBLE_EQ(cir.classical_rhs, 0.09);

    const auto bad = feller_check(Model::cir({0.1, 0.1, 0.5, 0.05}));
    EXPECT_EQ(bad.verdict, FellerVerdict::Attainable);

    const auto p1 = feller_check(parse_model("gm:p1", kDefault));
    EXPECT_EQ(p1.criterion, FellerCriterion::P0EqualHalf);
    EXPECT_NEAR(p1.analytic_limit, 0.055, 1e-15);
    EXPECT_EQ(p1.verdict, FellerVerdict::NonAttainable);
    EXPECT_TRUE(p1.profile_consistent);
    EXPECT_EQ(p1.profile.size(), 200u);

    for (const char* spec : {"gm:p2", "gm:p3"}) {
        const auto r = feller_check(parse_model(spec, kDefault));
        EXPECT_EQ(r.criterion, FellerCriterion::P0AboveHalf) << spec;
        EXPECT_DOUBLE_EQ(r.analytic_limit, 0.1);
        EXPECT_EQ(r.verdict, FellerVerdict::NonAttainable);
    }
}

TEST(Feller, ConstantHalfSweepMatchesClassicalInequality) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    int attainable = 0;
    for (int i = 0; i < 100; ++i) {
        const ModelParams p{u(rng), u(rng), u(rng), 0.05};
        const auto r = feller_check(Model::cir(p));
        const bool expected = 2.0 * p.kappa * p.theta >= p.xi * p.xi;
        EXPECT_EQ(r.verdict == FellerVerdict::NonAttainable, expected);
        EXPECT_EQ(r.criterion, FellerCriterion::ConstantHalf);
        attainable += expected ? 0 : 1;
    }
    EXPECT_GT(attainable, 0);
    EXPECT_LT(attainable, 100);
}

TEST(Feller, EvaluationFailureIsInconclusive) {
    const auto exploding = ExponentFunction::custom(
        [](double x) { return x < 1e-3 ? std::numeric_limits<double>::quiet_NaN() : 0.7; },
        [](double) { return 0.0; }, 0.7, 0.7, 1.0, 0.0);
    const auto r = feller_check(Model::gm(kDefault, exploding));
    EXPECT_EQ(r.verdict, FellerVerdict::Inconclusive);
}

TEST(Feller, SignContradictionIsInconclusive) {
    // p(0+) = 0.6 puts the limit at kappa theta > 0, while the declared
    // derivative below 1e-6 drives T_p negative there.
    const auto odd = ExponentFunction::custom(
        [](double) { return 0.6; }, [](double x) { return x < 1e-6 ? -1e12 : 0.0; }, 0.6, 0.6,
        1.0, 1e12);
    const auto r = feller_check(Model::gm(kDefault, odd));
    EXPECT_EQ(r.criterion, FellerCriterion::P0AboveHalf);
    EXPECT_FALSE(r.profile_consistent);
    EXPECT_EQ(r.verdict, FellerVerdict::Inconclusive);
}

TEST(Generator, Examples) {
    const auto cir = Model::cir(kDefault);
    EXPECT_DOUBLE_EQ(generator_apply(cir, 0.3, 1.0, 0.0), drift(cir, 0.3));
    EXPECT_EQ(generator_apply(cir, 0.3, 0.0, 0.0), 0.0);
    EXPECT_NEAR(generator_apply(cir, 0.05, 2 * 0.05, 2.0), 0.0045, 1e-16);
    EXPECT_THROW(generator_apply(cir, 0.0, 1.0, 1.0), DomainError);
}
