#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "errors.hpp"
#include "solver.hpp"

using namespace varexp;

namespace {

const ModelParams kDefault{};

Model gm(const char* e, const ModelParams& p = kDefault) { return Model::gm(p, make_builtin(e)); }

}  // namespace

TEST(Policy, Parse) {
    EXPECT_EQ(parse_policy("full-trunc"), PositivityPolicy::FullTruncation);
    EXPECT_EQ(parse_policy("reflect"), PositivityPolicy::Reflection);
    EXPECT_EQ(to_string(PositivityPolicy::Reflection), "reflect");
    EXPECT_THROW(parse_policy("absorb"), InvalidArgument);
}

TEST(Euler, ZeroNoiseAtThetaIsConstant) {
    const auto g = make_grid(1.0, 0.001);
    const std::vector<double> zeros(1000, 0.0);
    const auto path = euler_maruyama(gm("p1"), g, zeros);
    ASSERT_EQ(path.values.size(), 1001u);
    for (double v : path.values) ASSERT_EQ(v, 0.05);
    EXPECT_EQ(path.clamp_count, 0);
}

TEST(Euler, OneStepOracle) {
    const auto g = make_grid(0.001, 0.001);
    const double inc[] = {0.02};
    const auto path = euler_maruyama(gm("p1"), g, inc);
    EXPECT_NEAR(path.values[1], 0.051284105357904385624, 1e-16);
}

TEST(Euler, ZeroNoiseDecaysMonotonicallyToTheta) {
    ModelParams p = kDefault;
    p.v0 = 0.2;
    const auto g = make_grid(1.0, 0.001);
    const std::vector<double> zeros(1000, 0.0);
    const auto path = euler_maruyama(gm("p2", p), g, zeros);
    for (std::size_t j = 1; j < path.values.size(); ++j) {
        ASSERT_LT(path.values[j], path.values[j - 1]);
        ASSERT_GT(path.values[j], 0.05);
    }
    // explicit Euler on a linear ODE: theta + (v0 - theta)(1 - kappa dt)^j
    EXPECT_NEAR(path.values[1000], 0.05 + 0.15 * std::pow(1.0 - 0.002, 1000), 1e-14);
}

TEST(Euler, FullTruncationClampsAndCounts) {
    const auto g = make_grid(0.003, 0.001);
    const double inc[] = {-1.0, 0.0, -1.0};
    const auto path = euler_maruyama(Model::cir(kDefault), g, inc);
    // step 0: 0.05 + 0 - 0.3 sqrt(0.05) < 0 -> 0
    EXPECT_EQ(path.values[1], 0.0);
    // step 1 from 0: drift only
    EXPECT_DOUBLE_EQ(path.values[2], 0.1 * 0.001);
    EXPECT_EQ(path.values[3], 0.0);
    EXPECT_EQ(path.clamp_count, 2);

    const auto refl = euler_maruyama(Model::cir(kDefault), g, inc, PositivityPolicy::Reflection);
    EXPECT_DOUBLE_EQ(refl.values[1], -(0.05 - 0.3 * std::sqrt(0.05)));
    EXPECT_EQ(refl.clamp_count, 2);
}

TEST(Euler, Errors) {
    const auto g = make_grid(1.0, 0.5);
    const double one[] = {0.0};
    EXPECT_THROW(euler_maruyama(gm("p1"), g, one), InvalidArgument);
    // PKM with super-linear diffusion blows up in a few steps under huge noise.
    const double huge[] = {1e200, 1e200};
    try {
        euler_maruyama(Model::pkm(kDefault, 0, 1.5), g, huge);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}

TEST(Batch, PositivityAndRowEquivalence) {
    const auto g = make_grid(1.0, 0.01);
    const auto inc = sample_batch(42, 400, g);
    for (const char* e : {"p1", "p2", "p3", "const:0.5"}) {
        // a volatile parameter set that clamps often
        const ModelParams p{0.5, 0.02, 1.5, 0.02};
        const auto m = gm(e, p);
        const auto batch = simulate_batch(m, inc);
        for (double v : batch.data()) ASSERT_GE(v, 0.0);
        for (std::size_t j : {0u, 17u, 399u}) {
            const auto single = euler_maruyama(m, g, inc.row(j));
            const auto row = batch.path(j);
            ASSERT_TRUE(std::equal(single.values.begin(), single.values.end(), row.begin()));
            ASSERT_EQ(single.clamp_count, batch.clamp_counts()[j]);
        }
        const auto stats = batch.clamp_stats();
        EXPECT_GT(stats.total_clamps, 0);
        const long long sum =
            std::accumulate(batch.clamp_counts().begin(), batch.clamp_counts().end(), 0LL);
        EXPECT_EQ(stats.total_clamps, sum);
        EXPECT_DOUBLE_EQ(stats.clamp_fraction, static_cast<double>(sum) / (400.0 * 100.0));
    }
}

TEST(Batch, CommonRandomNumbersLeaveIncrementsUntouched) {
    const auto g = make_grid(1.0, 0.001);
    const auto inc = sample_batch(42, 200, g);
    const auto before = inc.checksum();
    const auto a = simulate_batch(Model::cir(kDefault), inc);
    const auto b = simulate_batch(gm("p3"), inc);
    EXPECT_EQ(inc.checksum(), before);
    EXPECT_EQ(checksum(inc.data()), before);
    EXPECT_EQ(a.model_id(), "cir");
    EXPECT_EQ(b.model_id(), "gm:p3");
}

TEST(Batch, ThreadAndOrderInvariance) {
    const auto g = make_grid(1.0, 0.01);
    const auto inc = sample_batch(5, 301, g);
    const auto m = gm("p2");
    const auto ref = simulate_batch(m, inc, PositivityPolicy::FullTruncation, 1);
    for (int t : {2, 4, 7}) {
        const auto other = simulate_batch(m, inc, PositivityPolicy::FullTruncation, t);
        ASSERT_EQ(checksum(ref.data()), checksum(other.data()));
        ASSERT_EQ(ref.clamp_counts(), other.clamp_counts());
    }
    // running the paths in a shuffled order reproduces each row
    std::vector<std::size_t> order(301);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(1));
    for (std::size_t j : order) {
        const auto path = euler_maruyama(m, g, inc.row(j));
        ASSERT_TRUE(std::equal(path.values.begin(), path.values.end(), ref.path(j).begin()));
    }
}

TEST(Batch, ErrorReportsLowestFailingPath) {
    const auto g = make_grid(1.0, 0.5);
    std::vector<double> incs(3 * 2, 0.0);
    incs[2] = 1e250;  // path 1
    incs[4] = 1e250;  // path 2
    const BrownianBatch batch(1, 3, g, incs);
    try {
        simulate_batch(Model::pkm(kDefault, 0, 1.5), batch, PositivityPolicy::FullTruncation, 3);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("path 1"), std::string::npos) << e.what();
    }
}

TEST(Picard, ZeroNoiseReachesEulerIndexByIndex) {
    const auto g = make_grid(0.05, 0.005);
    ModelParams p = kDefault;
    p.v0 = 0.3;
    const auto m = gm("p1", p);
    const auto tp = TruncationParams::with_default_epsilon(10);
    const std::vector<double> zeros(10, 0.0);
    const auto rep = picard_solve(tp, m, g, zeros, 1e-300, 50);
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.iterations_used, g.n_steps + 1);
    EXPECT_EQ(rep.sup_diffs.back(), 0.0);
    const auto euler = euler_maruyama(m, g, zeros);
    EXPECT_EQ(rep.fixed_point.values, euler.values);
}

TEST(Picard, FirstIterateStartsFromConstantPath) {
    const auto g = make_grid(0.01, 0.001);
    const auto inc = sample_batch(3, 1, g);
    const auto m = gm("p3");
    const auto tp = TruncationParams::with_default_epsilon(10);
    const auto rep = picard_solve(tp, m, g, inc.row(0), 1e-12, 1);
    ASSERT_EQ(rep.iterations_used, 1);
    // v^(1)(t_j) = v0 + sum_{i<j} F(v0) dt + G(v0) dW_i, accumulated left to right
    const double F = truncated_drift(tp, m, 0.05);
    const double G = truncated_diffusion(tp, m, 0.05);
    double acc = 0.05;
    double d0 = 0.0;
    for (int j = 0; j < g.n_steps; ++j) {
        acc = acc + F * g.dt + G * inc.row(0)[j];
        EXPECT_EQ(rep.fixed_point.values[j + 1], acc);
        d0 = std::max(d0, std::abs(acc - 0.05));
    }
    EXPECT_EQ(rep.sup_diffs[0], d0);
}

TEST(Picard, FixedPointEqualsTruncatedEuler) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        for (int n : {2, 10}) {
            const auto g = make_grid(1.0, 0.1);
            const auto inc = sample_batch(seed, 1, g);
            const auto m = gm("p1");
            const auto tp = TruncationParams::with_default_epsilon(n);
            const auto rep = picard_solve(tp, m, g, inc.row(0), 1e-9, 200);
            ASSERT_TRUE(rep.converged);
            ASSERT_LE(rep.sup_diffs.back(), 1e-9);
            const auto euler = euler_truncated(tp, m, g, inc.row(0));
            double sup = 0.0;
            for (std::size_t j = 0; j < euler.values.size(); ++j) {
                sup = std::max(sup, std::abs(euler.values[j] - rep.fixed_point.values[j]));
            }
            EXPECT_LE(sup, 1e-9) << "seed " << seed << " n " << n;
        }
    }
}

TEST(Picard, ConvergesAtFineScale) {
    const auto g = make_grid(1.0, 0.001);
    const auto inc = sample_batch(42, 3, g);
    const auto tp = TruncationParams::with_default_epsilon(10);
    for (std::size_t path = 0; path < 3; ++path) {
        const auto rep = picard_solve(tp, gm("p1"), g, inc.row(path), 1e-9, 200);
        ASSERT_TRUE(rep.converged);
        EXPECT_GT(rep.rate_envelope_constant, 0.0);
        const auto euler = euler_truncated(tp, gm("p1"), g, inc.row(path));
        for (std::size_t j = 0; j < euler.values.size(); ++j) {
            ASSERT_NEAR(euler.values[j], rep.fixed_point.values[j], 1e-9);
        }
    }
}

TEST(Picard, MonotoneTailOnShortHorizon) {
    const auto g = make_grid(0.1, 0.01);
    const auto tp = TruncationParams::with_default_epsilon(10);
    for (const char* e : {"p1", "p2", "p3"}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto inc = sample_batch(seed, 1, g);
            const auto rep = picard_solve(tp, gm(e), g, inc.row(0), 1e-9, 200);
            ASSERT_TRUE(rep.converged);
            // sup_diffs[k - 1] is d_k; the tail from d_3 on must not increase.
            for (std::size_t k = 3; k < rep.sup_diffs.size(); ++k) {
                EXPECT_LE(rep.sup_diffs[k], rep.sup_diffs[k - 1]) << e << " seed " << seed << " k=" << k;
            }
        }
    }
}

TEST(Picard, NonConvergenceIsReported) {
    const auto g = make_grid(1.0, 0.001);
    const auto inc = sample_batch(42, 1, g);
    const auto rep = picard_solve(TruncationParams::with_default_epsilon(10), gm("p1"), g,
                                  inc.row(0), 1e-15, 2);
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.iterations_used, 2);
    EXPECT_EQ(rep.sup_diffs.size(), 2u);
    EXPECT_THROW(picard_solve(TruncationParams::with_default_epsilon(10), gm("p1"), g, inc.row(0),
                              0.0, 2),
                 InvalidArgument);
}

TEST(BandExit, Examples) {
    const std::vector<double> flat(11, 0.05);
    EXPECT_EQ(band_exit_index(flat, 10), std::optional<std::size_t>(0));
    EXPECT_EQ(band_exit_index(flat, 100), std::nullopt);
    std::vector<double> drop(11, 0.5);
    drop[5] = 0.0;
    EXPECT_EQ(band_exit_index(drop, 10), std::optional<std::size_t>(5));
    std::vector<double> edge{0.1, 10.0};
    EXPECT_EQ(band_exit_index(edge, 10), std::nullopt);
}
