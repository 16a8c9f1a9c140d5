#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hkctl/controls.hpp"
#include "hkctl/dynamics.hpp"
#include "hkctl/random.hpp"
#include "hkctl/regimes.hpp"

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

IntegratorSettings settings(double dt, double t_final)
{
    IntegratorSettings s;
    s.dt = dt;
    s.t_final = t_final;
    return s;
}

double distance(const Configuration& c, std::size_t i, std::size_t j)
{
    return std::sqrt(detail::squared_distance(c.position(i), c.position(j)));
}

const auto kZero = [](const Configuration& c, std::size_t) { return ControlVector::zero(c.size(), c.dim()); };

}  // namespace

TEST(HkRhs, Examples)
{
    const auto one = Configuration(1, {2.0}, {3});
    EXPECT_EQ(hk_rhs(one, InteractionKernel::power_law(-2.0)), std::vector<double>{0.0});

    const auto v2 = hk_rhs(Configuration::line({0, 2}), InteractionKernel::power_law(-2.0));
    EXPECT_DOUBLE_EQ(v2[0], 0.25);
    EXPECT_DOUBLE_EQ(v2[1], -0.25);

    const auto v3 = hk_rhs(Configuration::line({0, 1, 3}), InteractionKernel::constant(1.0));
    EXPECT_NEAR(v3[0], 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(v3[1], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(v3[2], -5.0 / 3.0, 1e-15);
    EXPECT_NEAR(v3[0] + v3[1] + v3[2], 0.0, 1e-15);
}

TEST(HkRhs, MultiplicityWeighted)
{
    // Agent 0 carries two originals: N = 3, so v_1 = (1/3)*2*1*(0-1).
    const Configuration c(1, {0.0, 1.0}, {2, 1});
    const auto v = hk_rhs(c, InteractionKernel::constant(1.0));
    EXPECT_NEAR(v[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(v[1], -2.0 / 3.0, 1e-15);
    EXPECT_NEAR(2 * v[0] + v[1], 0.0, 1e-15);
}

TEST(Step, ConstantVelocityWithZeroKernel)
{
    const auto c = Configuration({{0.0, 0.0}, {3.0, 1.0}});
    auto u = ControlVector::zero(2, 2);
    u[0][0] = 1.0;
    const auto dt = 0.01;
    const auto next = step(c, InteractionKernel::constant(0.0), u, settings(dt, 1.0));
    EXPECT_DOUBLE_EQ(next.position(0)[0], dt);
    EXPECT_EQ(next.position(0)[1], 0.0);
    EXPECT_EQ(next.position(1)[0], 3.0);
}

TEST(Step, LinearDecayMatchesExponential)
{
    const auto c = Configuration::line({0.0, 2.0});
    const auto next = step(c, InteractionKernel::constant(1.0), ControlVector::zero(2, 1), settings(0.01, 1.0));
    EXPECT_NEAR(distance(next, 0, 1), 2.0 * std::exp(-0.01), 1e-10 * 2.0 * std::exp(-0.01));
}

TEST(Step, ConsensusIsFixedPoint)
{
    const Configuration c(2, {0.5, -0.5}, {4});
    const auto next = step(c, InteractionKernel::power_law(-2.0), ControlVector::zero(1, 2), settings(0.1, 1.0));
    EXPECT_EQ(next, c);
}

TEST(Step, RejectsShapeMismatch)
{
    EXPECT_THROW(step(Configuration::line({0, 1}), InteractionKernel::constant(1.0), ControlVector::zero(3, 1),
                      settings(0.1, 1.0)),
                 ConfigError);
    IntegratorSettings bad;
    bad.dt = 0.0;
    EXPECT_THROW(step(Configuration::line({0, 1}), InteractionKernel::constant(1.0), ControlVector::zero(2, 1), bad),
                 ConfigError);
}

TEST(Step, StiffnessErrorWhenHalvingsExhausted)
{
    auto s = settings(1.0, 1.0);
    s.max_halvings = 1;
    EXPECT_THROW(step(Configuration::line({0.0, 1e-3}), InteractionKernel::power_law(-2.0),
                      ControlVector::zero(2, 1), s),
                 StiffnessError);
}

TEST(Simulate, LinearPairClosedForm)
{
    const auto tr = simulate(Configuration::line({0, 2}), InteractionKernel::constant(1.0), kZero,
                             ControlBudget(1.0), settings(0.01, 5.0));
    ASSERT_GE(tr.times.size(), 2u);
    EXPECT_NEAR(tr.times.back(), 5.0, 1e-12);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double exact = 2.0 * std::exp(-tr.times[k]);
        EXPECT_NEAR(distance(tr.configurations[k], 0, 1), exact, 1e-6 * exact);
    }
}

TEST(Simulate, SingularPairMergesBeforeExtinctionBound)
{
    // Uncontrolled 1/s^2: dV/dt = -(1/N^2) sum a D^2 = -1/N^2 for a pair, so the
    // pair collides no later than V0 * N^2.
    const auto c0 = Configuration::line({0.0, 0.1});
    const double v0 = variance(c0);
    const auto tr = simulate(c0, InteractionKernel::power_law(-2.0), kZero, ControlBudget(1.0), settings(1e-4, 1.0));
    ASSERT_TRUE(tr.first_merge_time().has_value());
    EXPECT_LE(*tr.first_merge_time(), v0 * 4.0 * (1 + 1e-6));
    // exact collision time of d' = -2/(N D) with N = 2 is D0^2 / 2
    EXPECT_NEAR(*tr.first_merge_time(), 0.005, 1e-4);
    EXPECT_EQ(tr.configurations.back().size(), 1u);
    EXPECT_EQ(tr.configurations.back().multiplicity(0), 2);
}

TEST(Simulate, MergedSystemStaysFixed)
{
    const auto c0 = Configuration::line({0.0, 0.1, 0.15});
    const auto tr = simulate(c0, InteractionKernel::power_law(-2.0), kZero, ControlBudget(1.0), settings(1e-4, 0.1));
    ASSERT_EQ(tr.merge_count(), 2u);
    const auto& last = tr.configurations.back();
    EXPECT_EQ(last.size(), 1u);
    EXPECT_NEAR(last.position(0)[0], 0.25 / 3.0, 1e-8);
    const auto after = step(last, InteractionKernel::power_law(-2.0), ControlVector::zero(1, 1), settings(0.1, 1));
    EXPECT_EQ(after, last);
}

TEST(Barycenter, Examples)
{
    EXPECT_DOUBLE_EQ(barycenter(Configuration::line({0, 2}))[0], 1.0);
    EXPECT_EQ(barycenter(Configuration(2, {1.5, -3.0}, {5})), (std::vector<double>{1.5, -3.0}));
    EXPECT_NEAR(barycenter(Configuration::line({0, 1, 3}))[0], 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(barycenter(Configuration(1, {0.0, 3.0}, {2, 1}))[0], 1.0, 1e-15);
}

TEST(Invariants, MeanConservationUncontrolled)
{
    Rng rng(21);
    const std::vector<InteractionKernel> kernels = {InteractionKernel::constant(1.0), InteractionKernel::power_law(-0.5),
                                                    InteractionKernel::power_law(1.0), InteractionKernel::shifted()};
    for (int t = 0; t < 12; ++t) {
        const auto c0 = spaced(rng, 2 + t % 9, 1 + t % 2, 2.0, 0.3);
        const auto& a = kernels[t % kernels.size()];
        const auto tr = simulate(c0, a, kZero, ControlBudget(1.0), [] {
            auto s = settings(1e-2, 10.0);
            s.record_every = 50;
            return s;
        }());
        const auto b0 = barycenter(c0);
        for (const auto& c : tr.configurations) {
            const auto b = barycenter(c);
            for (std::size_t k = 0; k < b.size(); ++k) EXPECT_NEAR(b[k], b0[k], 1e-8);
        }
    }
}

TEST(Invariants, MeanConservationAcrossMerges)
{
    const auto c0 = Configuration::line({-1.0, -0.95, 0.3, 0.32, 2.0});
    const auto tr = simulate(c0, InteractionKernel::power_law(-2.0), kZero, ControlBudget(1.0), settings(1e-4, 0.2));
    EXPECT_GE(tr.merge_count(), 2u);
    const auto b0 = barycenter(c0)[0];
    for (const auto& c : tr.configurations) EXPECT_NEAR(barycenter(c)[0], b0, 1e-8);
}

TEST(Invariants, UncontrolledVarianceDerivativeMatchesFiniteDifference)
{
    Rng rng(4);
    const std::vector<InteractionKernel> kernels = {InteractionKernel::constant(1.0), InteractionKernel::power_law(-2.0),
                                                    InteractionKernel::power_law(-0.5)};
    const double h = 1e-4;
    for (int t = 0; t < 60; ++t) {
        const auto c1 = spaced(rng, 2 + t % 9, 1 + t % 2, 2.0, 0.2);
        const auto& a = kernels[t % 3];
        const auto s = settings(h, 1.0);
        // Backward step via the reversed kernel is unavailable; use the flow
        // from c1 forward twice and compare at the middle point.
        const auto c2 = step(c1, a, ControlVector::zero(c1.size(), c1.dim()), s);
        const auto c3 = step(c2, a, ControlVector::zero(c1.size(), c1.dim()), s);
        const double fd = (variance(c3) - variance(c1)) / (2 * h);
        const double an = uncontrolled_variance_derivative(c2, a);
        EXPECT_NEAR(fd, an, 1e-4 * std::abs(an));
        EXPECT_NEAR(variance_derivative(c2, a, ControlVector::zero(c2.size(), c2.dim())), an, 1e-10 * std::abs(an));
    }
}

TEST(Invariants, ControlledEntropyDerivativeMatchesFiniteDifference)
{
    Rng rng(9);
    const auto g = EntropyGenerator::inverse();
    const double h = 1e-4;
    for (int t = 0; t < 60; ++t) {
        const auto c1 = spaced(rng, 2 + t % 9, 1 + t % 2, 2.0, 0.2);
        const auto a = t % 2 ? InteractionKernel::power_law(-2.0) : InteractionKernel::constant(1.0);
        const ControlBudget m(0.7);
        const auto u = control_uW(c1, g, m);
        const auto s = settings(h, 1.0);
        const auto c2 = step(c1, a, u, s);
        const auto c3 = step(c2, a, u, s);
        const double fd = (generalized_entropy(c3, g).value() - generalized_entropy(c1, g).value()) / (2 * h);
        const double an = entropy_derivative(c2, a, g, u);
        EXPECT_NEAR(fd, an, 1e-4 * std::abs(an));
    }
}

TEST(Invariants, UncontrolledVarianceNonIncreasing)
{
    Rng rng(13);
    const std::vector<InteractionKernel> kernels = {InteractionKernel::constant(1.0), InteractionKernel::power_law(-2.0),
                                                    InteractionKernel::power_law(-0.5),
                                                    InteractionKernel::bounded_confidence(0.8)};
    for (int t = 0; t < 12; ++t) {
        const auto c0 = spaced(rng, 3 + t % 7, 1 + t % 2, 2.0, 0.1);
        const auto tr = simulate(c0, kernels[t % 4], kZero, ControlBudget(1.0), settings(1e-3, 2.0));
        for (std::size_t k = 1; k < tr.variance.size(); ++k) EXPECT_LE(tr.variance[k], tr.variance[k - 1] + 1e-10);
    }
}

TEST(Invariants, VarianceContinuousAcrossMerges)
{
    auto s = settings(1e-4, 0.05);
    const auto tr = simulate(Configuration::line({0.0, 0.05, 1.0, 1.03}), InteractionKernel::power_law(-2.0), kZero,
                             ControlBudget(1.0), s);
    ASSERT_GE(tr.merge_count(), 1u);
    for (const auto& e : tr.events) {
        if (e.kind != TrajectoryEvent::Kind::Merge) continue;
        // The record at a merge time follows the merge; the jump it carries is
        // O(merge_tol^2), far below the per-step change.
        for (std::size_t k = 1; k < tr.times.size(); ++k)
            if (tr.times[k] == e.time) {
                EXPECT_LE(tr.variance[k - 1] - tr.variance[k], 1e-3);
            }
    }
    // Direct check: merging two agents at distance tol changes V by tol^2 / (4 N^2) * 2.
    const double tol = 1e-8;
    const auto before = Configuration::line({0.0, tol, 1.0});
    const Configuration after(1, {tol / 2, 1.0}, {2, 1});
    EXPECT_NEAR(variance(before), variance(after), tol * tol);
}

TEST(Simulate, SeriesShapesAndMonotoneTimes)
{
    Rng rng(2);
    const auto c0 = spaced(rng, 6, 2, 1.0, 0.1);
    auto s = settings(1e-3, 1.0);
    s.record_every = 7;
    const auto tr = simulate(c0, InteractionKernel::power_law(-2.0),
                             ControlPolicy::entropy_max(ControlBudget(0.3), EntropyGenerator::inverse()),
                             ControlBudget(0.3), s);
    const auto n = tr.times.size();
    EXPECT_EQ(tr.configurations.size(), n);
    EXPECT_EQ(tr.variance.size(), n);
    EXPECT_EQ(tr.entropy.size(), n);
    EXPECT_EQ(tr.min_distance.size(), n);
    EXPECT_EQ(tr.active_index.size(), n);
    for (std::size_t k = 1; k < n; ++k) EXPECT_GT(tr.times[k], tr.times[k - 1]);
    EXPECT_NEAR(tr.times.back(), 1.0, 1e-12);
    EXPECT_EQ(tr.times.front(), 0.0);
}

TEST(Simulate, BudgetSaturationEventAndOverBudgetRejected)
{
    const auto c0 = Configuration::line({0.0, 1.0, 3.0});
    const auto tr = simulate(c0, InteractionKernel::constant(1.0), ControlPolicy::variance_max(ControlBudget(0.5)),
                             ControlBudget(0.5), settings(1e-2, 0.1));
    ASSERT_FALSE(tr.events.empty());
    EXPECT_EQ(tr.events.front().kind, TrajectoryEvent::Kind::BudgetSaturation);

    auto greedy = [](const Configuration& c, std::size_t) {
        auto u = ControlVector::zero(c.size(), c.dim());
        u[0][0] = 2.0;
        return u;
    };
    EXPECT_THROW(simulate(c0, InteractionKernel::constant(1.0), greedy, ControlBudget(0.5), settings(1e-2, 0.1)),
                 ConfigError);
}

TEST(Simulate, Deterministic)
{
    Rng rng(77);
    const auto c0 = spaced(rng, 8, 2, 1.0, 0.05);
    const auto policy = ControlPolicy::random_feasible(ControlBudget(0.4), 99);
    const auto a = simulate(c0, InteractionKernel::power_law(-2.0), policy, ControlBudget(0.4), settings(1e-3, 0.5));
    const auto b = simulate(c0, InteractionKernel::power_law(-2.0), policy, ControlBudget(0.4), settings(1e-3, 0.5));
    EXPECT_EQ(a.times, b.times);
    EXPECT_EQ(a.variance, b.variance);
    ASSERT_EQ(a.configurations.size(), b.configurations.size());
    for (std::size_t k = 0; k < a.configurations.size(); ++k) EXPECT_EQ(a.configurations[k], b.configurations[k]);
}
