#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hkctl/random.hpp"
#include "hkctl/regimes.hpp"

using namespace hkctl;

namespace {

const auto kInvSq = InteractionKernel::power_law(-2.0);
const auto kInvSqrt = InteractionKernel::power_law(-0.5);

double pair_sum(const Configuration& c, double (*f)(double))
{
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) s += f(detail::squared_distance(c.position(i), c.position(j)));
    return s;
}

}  // namespace

TEST(ClassifyKernel, Quadrants)
{
    auto cell = classify_kernel(kInvSq);
    EXPECT_EQ(cell.near, KernelCell::Near::BlackHole);
    EXPECT_EQ(cell.far, KernelCell::Far::Safety);
    cell = classify_kernel(kInvSqrt);
    EXPECT_EQ(cell.near, KernelCell::Near::CollapsePrevention);
    EXPECT_EQ(cell.far, KernelCell::Far::Basin);
    cell = classify_kernel(InteractionKernel::constant(1.0));
    EXPECT_EQ(cell.near, KernelCell::Near::CollapsePrevention);
    EXPECT_EQ(cell.far, KernelCell::Far::Basin);
    cell = classify_kernel(InteractionKernel::power_law(-1.0));
    EXPECT_EQ(cell.near, KernelCell::Near::Conditional);
    EXPECT_EQ(cell.far, KernelCell::Far::Conditional);
    EXPECT_DOUBLE_EQ(cell.alpha0.value, 1.0);
}

TEST(BlackHoleThreshold, InverseSquareClosedForm)
{
    for (double m : {0.05, 0.16, 1.0, 3.0})
        for (std::size_t n : {2u, 3u, 10u}) {
            const double nn = static_cast<double>(n);
            EXPECT_NEAR(*black_hole_threshold(kInvSq, ControlBudget(m), n), 1.0 / (2 * nn * nn * m * m),
                        1e-12 / (nn * nn * m * m));
        }
    EXPECT_FALSE(black_hole_threshold(kInvSqrt, ControlBudget(1.0), 10).has_value());
}

TEST(BlackHoleThreshold, MembershipMatchesBudgetForm)
{
    Rng rng(1);
    const std::size_t n = 10;
    for (int t = 0; t < 500; ++t) {
        std::vector<double> xs(n);
        const double half = std::exp(rng.uniform(-3, 1));
        for (auto& x : xs) x = rng.uniform(-half, half);
        const auto c = Configuration::line(xs);
        const auto r = classify_state(c, kInvSq, EntropyGenerator::inverse(), ControlBudget(0.16));
        const bool budget_form = 0.16 < 1.0 / (10.0 * std::sqrt(2.0 * variance(c)));
        EXPECT_EQ(r.black_hole_sufficient, budget_form);
    }
}

TEST(BlackHoleThreshold, FiniteLimitNeedsSmallBudget)
{
    const auto a = InteractionKernel::power_law(-1.0);  // s a(s) = 1
    EXPECT_TRUE(black_hole_threshold(a, ControlBudget(0.5), 4).has_value());
    EXPECT_FALSE(black_hole_threshold(a, ControlBudget(1.5), 4).has_value());
}

TEST(SafetyThreshold, InverseSquareClosedForm)
{
    const auto g = EntropyGenerator::inverse();
    for (double m : {0.16, 1.0, 2.0})
        for (std::size_t n : {2u, 5u, 10u}) {
            const double nn = static_cast<double>(n);
            const auto s = safety_threshold(kInvSq, g, ControlBudget(m), n);
            ASSERT_TRUE(s.has_value());
            EXPECT_NEAR(s->entropy_threshold, -m * m / (2 * nn * nn * nn * nn), 1e-15);
        }
    EXPECT_FALSE(safety_threshold(kInvSqrt, g, ControlBudget(1.0), 10).has_value());
}

TEST(SafetyThreshold, MembershipMatchesBudgetForm)
{
    Rng rng(2);
    const std::size_t n = 10;
    const auto g = EntropyGenerator::inverse();
    int inside = 0;
    for (int t = 0; t < 500; ++t) {
        std::vector<double> xs(n);
        const double half = std::exp(rng.uniform(3, 9));
        for (auto& x : xs) x = rng.uniform(-half, half);
        const auto c = Configuration::line(xs);
        const double m = 0.16;
        const auto r = classify_state(c, kInvSq, g, ControlBudget(m));
        const double w0 = generalized_entropy(c, g).value();
        const bool budget_form = m >= 100.0 * std::sqrt(-2.0 * w0);
        const bool sum_form = pair_sum(c, [](double s2) { return 1.0 / s2; }) <= m * m / 100.0;
        EXPECT_EQ(r.safety_sufficient, sum_form);
        // identical up to rounding away from the boundary
        if (std::abs(m - 100.0 * std::sqrt(-2.0 * w0)) > 1e-9) {
            EXPECT_EQ(r.safety_sufficient, budget_form);
        }
        inside += r.safety_sufficient;
    }
    EXPECT_GT(inside, 0);
    EXPECT_LT(inside, 500);
}

TEST(BasinRadius, Examples)
{
    EXPECT_NEAR(*basin_radius(kInvSqrt, ControlBudget(1.0)), 1.0, 1e-12);
    EXPECT_NEAR(*basin_radius(kInvSqrt, ControlBudget(2.0)), 4.0, 1e-12);
    EXPECT_FALSE(basin_radius(kInvSq, ControlBudget(1.0)).has_value());
    EXPECT_NEAR(*basin_radius(InteractionKernel::constant(1.0), ControlBudget(0.3)), 0.3, 1e-12);
}

TEST(CollapsePrevention, Examples)
{
    const auto p = collapse_prevention_params(kInvSqrt, ControlBudget(1.0), 10);
    ASSERT_TRUE(p.has_value());
    EXPECT_NEAR(p->eps, 0.05, 1e-15);
    EXPECT_NEAR(p->delta, 0.0025, 1e-12);
    const double delta = p->delta;
    const double expected = std::sqrt(p->generator().inverse_at(-(45.0 - 1.0) / (delta * delta)));
    EXPECT_NEAR(p->kappa(0.0), expected, 1e-12 * expected);
    // closed form: g_delta^{-1}(y) = 1/(m - y) with m = 1/delta^2
    EXPECT_NEAR(expected, delta / std::sqrt(45.0), 1e-15);
    EXPECT_FALSE(collapse_prevention_params(kInvSq, ControlBudget(1.0), 10).has_value());
}

TEST(CollapsePrevention, KappaBoundsInitialDistances)
{
    Rng rng(3);
    const auto p = *collapse_prevention_params(kInvSqrt, ControlBudget(1.0), 6);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> xs(6);
        for (auto& x : xs) x = rng.uniform(-0.01, 0.01);
        const auto c = Configuration::line(xs);
        EXPECT_GE(min_pairwise_distance(c), p.kappa(c));
    }
}

TEST(ExtinctionTime, Examples)
{
    EXPECT_EQ(extinction_time_bound(0.0, ControlBudget(1.0), 10), 0.0);
    EXPECT_NEAR(extinction_time_bound(0.5, ControlBudget(0.16), 10), 62.5, 1e-12);
    const double vstar = 1.0 / (2 * 100 * 0.16 * 0.16);
    EXPECT_NEAR(extinction_time_bound(vstar, ControlBudget(0.16), 10), 1.0 / (0.16 * 0.16), 1e-10);
    EXPECT_NEAR(1.0 / (0.16 * 0.16), 39.0625, 1e-12);
}

TEST(ClassifyState, Examples)
{
    const auto g = EntropyGenerator::inverse();
    // sum D^2 = 0.5 with N = 2
    const auto bh = classify_state(Configuration::line({0, std::sqrt(0.5)}), kInvSq, g, ControlBudget(1.0));
    EXPECT_TRUE(bh.black_hole_sufficient);
    EXPECT_EQ(bh.label, RegimeReport::Label::BlackHole);
    ASSERT_TRUE(bh.extinction_time_bound.has_value());

    // N = 10, equally spaced with sum 1/D^2 = 0.005 < 0.01
    std::vector<double> xs(10);
    double s = 0.0;
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = i + 1; j < 10; ++j) s += 1.0 / ((j - i) * (j - i) * 1.0);
    const double spacing = std::sqrt(s / 0.005);
    for (std::size_t i = 0; i < 10; ++i) xs[i] = spacing * static_cast<double>(i);
    const auto sf = classify_state(Configuration::line(xs), kInvSq, g, ControlBudget(1.0));
    EXPECT_TRUE(sf.safety_sufficient);
    EXPECT_EQ(sf.label, RegimeReport::Label::Safety);

    const auto hz = classify_state(Configuration::line({0, 1, 2, 3}), kInvSq, g, ControlBudget(1.0));
    EXPECT_FALSE(hz.black_hole_sufficient);
    EXPECT_FALSE(hz.safety_sufficient);
    EXPECT_EQ(hz.label, RegimeReport::Label::Horizon);

    const auto cp = classify_state(Configuration::line({0, 1, 2}), kInvSqrt, g, ControlBudget(1.0));
    EXPECT_TRUE(cp.collapse_prevention_applicable);
    EXPECT_TRUE(cp.collapse_kappa.has_value());
    EXPECT_NEAR(*cp.basin_radius, 1.0, 1e-12);
    EXPECT_EQ(cp.kernel_cell.near, KernelCell::Near::CollapsePrevention);
}

// The sufficient regions are disjoint for 1/s^2 by Cauchy-Schwarz.
TEST(Invariants, RegionsDisjoint)
{
    Rng rng(4);
    const auto g = EntropyGenerator::inverse();
    int bh = 0, sf = 0;
    for (int t = 0; t < 10000; ++t) {
        const std::size_t n = 2 + t % 9;
        const std::size_t d = 1 + t % 2;
        const double half = std::exp(rng.uniform(-4, 8));
        std::vector<std::vector<double>> pts(n, std::vector<double>(d));
        for (auto& p : pts)
            for (auto& x : p) x = rng.uniform(-half, half);
        const ControlBudget m(std::exp(rng.uniform(-3, 3)));
        const auto r = classify_state(Configuration(pts), kInvSq, g, m);
        EXPECT_FALSE(r.black_hole_sufficient && r.safety_sufficient);
        bh += r.black_hole_sufficient;
        sf += r.safety_sufficient;
    }
    EXPECT_GT(bh, 0);
    EXPECT_GT(sf, 0);
}

TEST(Invariants, ThresholdsMonotoneInBudget)
{
    const auto g = EntropyGenerator::inverse();
    for (const auto& a : {kInvSq, InteractionKernel::power_law(-3.0), InteractionKernel::shifted()}) {
        double prev_v = kInf, prev_w = kInf;
        for (int k = 0; k < 200; ++k) {
            const ControlBudget m(0.01 * std::pow(1.05, k));
            if (auto v = black_hole_threshold(a, m, 7)) {
                EXPECT_LE(*v, prev_v * (1 + 1e-12));
                prev_v = *v;
            }
            if (auto s = safety_threshold(a, g, m, 7)) {
                EXPECT_LE(s->entropy_threshold, prev_w + 1e-15);
                prev_w = s->entropy_threshold;
            }
        }
    }
}

TEST(Errors, BadInputs)
{
    EXPECT_THROW(extinction_time_bound(-1.0, ControlBudget(1.0), 3), ConfigError);
}
