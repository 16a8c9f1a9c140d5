#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hkctl/controls.hpp"
#include "hkctl/random.hpp"

using namespace hkctl;

namespace {

Configuration spaced(Rng& rng, std::size_t n, std::size_t d, double half, double min_gap)
{
    for (;;) {
        std::vector<std::vector<double>> pts(n, std::vector<double>(d));
        for (auto& p : pts)
            for (auto& x : p) x = rng.uniform(-half, half);
        Configuration c(pts);
        if (min_pairwise_distance(c) >= min_gap) return c;
    }
}

Configuration scaled(const Configuration& c, double lambda)
{
    std::vector<double> x(c.coords().begin(), c.coords().end());
    for (double& v : x) v *= lambda;
    return Configuration(c.dim(), x, c.multiplicities());
}

}  // namespace

TEST(ControlUV, Examples)
{
    const ControlBudget m(1.0);
    const auto u = control_uV(Configuration::line({0, 2}), m);
    EXPECT_EQ(u.active_index, std::optional<std::size_t>(0));
    EXPECT_DOUBLE_EQ(u[0][0], -1.0);
    EXPECT_EQ(u[1][0], 0.0);

    const auto z = control_uV(Configuration(2, {1.0, 1.0}, {3}), m);
    EXPECT_FALSE(z.active_index.has_value());
    EXPECT_EQ(z.nonzero_count(), 0u);

    const auto w = control_uV(Configuration::line({0, 1, 5}), m);
    EXPECT_EQ(w.active_index, std::optional<std::size_t>(2));
    EXPECT_DOUBLE_EQ(w[2][0], 1.0);
}

TEST(ControlUW, Examples)
{
    const ControlBudget m(1.0);
    const auto g = EntropyGenerator::inverse();
    const auto c = Configuration::line({0, 2});
    EXPECT_NEAR(entropy_gradient(c, g)[0], -1.0 / 16.0, 1e-16);
    const auto u = control_uW(c, g, m);
    EXPECT_EQ(u.active_index, std::optional<std::size_t>(0));
    EXPECT_DOUBLE_EQ(u[0][0], -1.0);

    const double h = std::sqrt(3.0) / 2.0;
    const auto tri = Configuration({{0.0, 0.0}, {1.0, 0.0}, {0.5, h}});
    const auto ut = control_uW(tri, g, m);
    EXPECT_EQ(ut.active_index, std::optional<std::size_t>(0));

    const auto close = control_uW(Configuration::line({0, 0.1, 10}), g, m);
    ASSERT_TRUE(close.active_index.has_value());
    EXPECT_LT(*close.active_index, 2u);
}

TEST(ControlUW, ClusterError)
{
    EXPECT_THROW(control_uW(Configuration::line({0, 0, 1}), EntropyGenerator::inverse(), ControlBudget(1.0)),
                 ClusterError);
}

TEST(ControlUDelta, Examples)
{
    const ControlBudget m(1.0);
    const double delta = 0.5;
    const auto gd = EntropyGenerator::shifted_inverse(delta);
    const auto far = control_udelta(Configuration::line({0, 1, 2}), gd, delta, m);
    EXPECT_EQ(far.nonzero_count(), 0u);
    EXPECT_FALSE(far.active_index.has_value());

    const auto pair = control_udelta(Configuration::line({0, delta / 2}), gd, delta, m);
    EXPECT_EQ(pair.active_index, std::optional<std::size_t>(0));
    EXPECT_DOUBLE_EQ(pair[0][0], -1.0);

    const auto g1 = EntropyGenerator::shifted_inverse(1.0);
    const auto three = control_udelta(Configuration::line({0, 0.3, 5}), g1, 1.0, m);
    EXPECT_EQ(three.active_index, std::optional<std::size_t>(0));
    EXPECT_DOUBLE_EQ(three[0][0], -1.0);
    EXPECT_THROW(control_udelta(Configuration::line({0, 0, 5}), g1, 1.0, m), ClusterError);
}

TEST(RandomFeasible, FeasibleAndDeterministic)
{
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const ControlBudget m(0.1 + static_cast<double>(seed % 7));
        const auto u = random_feasible_control(1 + seed % 9, 1 + seed % 3, m, seed);
        EXPECT_TRUE(validate_control(u, m));
        EXPECT_NEAR(u.l1_l2_norm(), m.value(), 1e-12 * m.value());
    }
    const auto a = random_feasible_control(5, 2, ControlBudget(1.0), 17);
    const auto b = random_feasible_control(5, 2, ControlBudget(1.0), 17);
    EXPECT_EQ(a.values, b.values);
}

TEST(Derivatives, Examples)
{
    const auto c = Configuration::line({0, 2});
    const auto a = InteractionKernel::constant(1.0);
    const auto zero = ControlVector::zero(2, 1);
    EXPECT_DOUBLE_EQ(variance_derivative(c, a, zero), -1.0);
    EXPECT_DOUBLE_EQ(uncontrolled_variance_derivative(c, a), -1.0);

    const Configuration cons(1, {4.0}, {3});
    EXPECT_EQ(variance_derivative(cons, a, ControlVector::zero(1, 1)), 0.0);
    EXPECT_EQ(entropy_derivative(cons, a, EntropyGenerator::inverse(), ControlVector::zero(1, 1)), 0.0);
}

// Policies: feasibility and at most one active agent.
TEST(Invariants, BudgetAndSparsity)
{
    Rng rng(31);
    for (int t = 0; t < 300; ++t) {
        const auto c = spaced(rng, 2 + t % 9, 1 + t % 3, 1.0, 1e-3);
        const ControlBudget m(rng.uniform(0.01, 5.0));
        const double delta = rng.uniform(0.05, 1.0);
        for (const auto& u : {control_uV(c, m), control_uW(c, EntropyGenerator::inverse(), m),
                              control_udelta(c, EntropyGenerator::shifted_inverse(delta), delta, m)}) {
            EXPECT_TRUE(validate_control(u, m));
            EXPECT_LE(u.nonzero_count(), 1u);
            if (u.active_index) {
                EXPECT_NEAR(u.l1_l2_norm(), m.value(), 1e-12 * m.value());
            }
        }
    }
}

// u^V and u^W maximize their derivative over the whole budget ball.
TEST(Invariants, InstantaneousOptimality)
{
    Rng rng(101);
    const std::vector<InteractionKernel> kernels = {InteractionKernel::constant(1.0), InteractionKernel::power_law(-2.0),
                                                    InteractionKernel::power_law(-0.5)};
    const auto g = EntropyGenerator::inverse();
    int compared = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto c = spaced(rng, 2 + t % 5, 1 + t % 2, 1.0, 0.05);
        const auto& a = kernels[t % 3];
        const ControlBudget m(rng.uniform(0.1, 2.0));
        const auto uv = control_uV(c, m);
        const auto uw = control_uW(c, g, m);
        const double bv = variance_derivative(c, a, uv);
        const double bw = entropy_derivative(c, a, g, uw);
        for (int k = 0; k < 1000; ++k) {
            const auto r = random_feasible_control(c.size(), c.dim(), m, static_cast<std::uint64_t>(t) * 1000 + k);
            EXPECT_GE(bv, variance_derivative(c, a, r) - 1e-12 * (1 + std::abs(bv)));
            EXPECT_GE(bw, entropy_derivative(c, a, g, r) - 1e-12 * (1 + std::abs(bw)));
        }
        if (uv.active_index != uw.active_index) {
            EXPECT_GT(bw, entropy_derivative(c, a, g, uv));
            ++compared;
        }
    }
    EXPECT_GT(compared, 0);
}

// Near ties can flip under rounding; only clear winners are compared.
TEST(Invariants, ArgmaxInvariantUnderScaling)
{
    Rng rng(55);
    const auto g = EntropyGenerator::inverse();
    const ControlBudget m(1.0);
    auto clear_winner = [](const std::vector<double>& field, std::size_t n, std::size_t d) {
        std::vector<double> norms;
        for (std::size_t i = 0; i < n; ++i) norms.push_back(detail::norm({field.data() + i * d, d}));
        std::sort(norms.begin(), norms.end());
        return norms[n - 1] > norms[n - 2] * (1 + 1e-9);
    };
    int checked_v = 0, checked_w = 0;
    for (int t = 0; t < 500; ++t) {
        const auto c = spaced(rng, 2 + t % 9, 1 + t % 2, 1.0, 1e-2);
        const auto bar = barycenter(c);
        std::vector<double> r(c.coords().begin(), c.coords().end());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= bar[i % c.dim()];
        const bool v_clear = clear_winner(r, c.size(), c.dim());
        const bool w_clear = clear_winner(entropy_gradient(c, g), c.size(), c.dim());
        const auto iv = control_uV(c, m).active_index;
        const auto iw = control_uW(c, g, m).active_index;
        for (double lambda : {1e-3, 0.5, 3.0, 1e4}) {
            const auto cs = scaled(c, lambda);
            if (v_clear) {
                EXPECT_EQ(control_uV(cs, m).active_index, iv);
                ++checked_v;
            }
            if (w_clear) {
                EXPECT_EQ(control_uW(cs, g, m).active_index, iw);
                ++checked_w;
            }
        }
    }
    EXPECT_GT(checked_v, 1000);
    EXPECT_GT(checked_w, 1000);
}

TEST(ControlPolicy, DispatchesAndValidates)
{
    const ControlBudget m(0.5);
    const auto c = Configuration::line({0, 0.2, 3});
    EXPECT_EQ(ControlPolicy::zero(m)(c, 0).nonzero_count(), 0u);
    EXPECT_EQ(ControlPolicy::variance_max(m)(c, 0).values, control_uV(c, m).values);
    EXPECT_EQ(ControlPolicy::entropy_max(m, EntropyGenerator::inverse())(c, 0).values,
              control_uW(c, EntropyGenerator::inverse(), m).values);
    EXPECT_EQ(ControlPolicy::partial_entropy_max(m, 0.3)(c, 0).values,
              control_udelta(c, EntropyGenerator::shifted_inverse(0.3), 0.3, m).values);
    const auto r = ControlPolicy::random_feasible(m, 4);
    EXPECT_EQ(r(c, 3).values, r(c, 3).values);
    EXPECT_NE(r(c, 3).values, r(c, 4).values);
    EXPECT_THROW(ControlPolicy::partial_entropy_max(m, 0.0), ConfigError);
}
