#pragma once

// Sparse feedback controls and the instantaneous derivatives they maximize.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hkctl/core.hpp"
#include "hkctl/dynamics.hpp"
#include "hkctl/functionals.hpp"
#include "hkctl/random.hpp"

namespace hkctl {

namespace detail {

inline double norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Put the whole budget on the row of `field` with the largest norm
// (lowest index on ties); zero control when every row vanishes.
inline ControlVector sparse_from_field(const std::vector<double>& field, std::size_t n, std::size_t dim, double m)
{
    ControlVector u = ControlVector::zero(n, dim);
    double best = 0.0;
    std::optional<std::size_t> arg;
    for (std::size_t i = 0; i < n; ++i) {
        double r = norm({field.data() + i * dim, dim});
        if (r > best) {
            best = r;
            arg = i;
        }
    }
    if (!arg || !std::isfinite(best)) return u;
    for (std::size_t k = 0; k < dim; ++k) u.values[*arg * dim + k] = m * field[*arg * dim + k] / best;
    u.active_index = arg;
    return u;
}

inline void require_declustered(const Configuration& c)
{
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            if (squared_distance(c.position(i), c.position(j)) == 0.0)
                throw ClusterError("control undefined: two agents coincide");
}

}  // namespace detail

/// u^V: full budget on the agent farthest from the barycenter, pushed outward.
inline ControlVector control_uV(const Configuration& c, const ControlBudget& m)
{
    const auto bar = barycenter(c);
    std::vector<double> r(c.coords().begin(), c.coords().end());
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t k = 0; k < c.dim(); ++k) r[i * c.dim() + k] -= bar[k];
    return detail::sparse_from_field(r, c.size(), c.dim(), m.value());
}

/// S_i = (1/N) sum_{j != i} m_j g'(|x_i - x_j|^2) (x_i - x_j).
inline std::vector<double> entropy_gradient(const Configuration& c, const EntropyGenerator& g)
{
    detail::require_declustered(c);
    const std::size_t n = c.size(), dim = c.dim();
    const double big_n = static_cast<double>(c.original_count());
    std::vector<double> s(n * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = c.position(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto xj = c.position(j);
            const double coef = c.multiplicity(j) * g.derivative(detail::squared_distance(xi, xj)) / big_n;
            for (std::size_t k = 0; k < dim; ++k) s[i * dim + k] += coef * (xi[k] - xj[k]);
        }
    }
    return s;
}

/// u^W: full budget along the largest entropy gradient row.
inline ControlVector control_uW(const Configuration& c, const EntropyGenerator& g, const ControlBudget& m)
{
    return detail::sparse_from_field(entropy_gradient(c, g), c.size(), c.dim(), m.value());
}

/// u^delta: like u^W, restricted to the danger set of pairs within delta.
inline ControlVector control_udelta(const Configuration& c, const EntropyGenerator& g_delta, double delta,
                                    const ControlBudget& m)
{
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    detail::require_declustered(c);
    const std::size_t n = c.size(), dim = c.dim();
    std::vector<double> s(n * dim, 0.0);
    for (auto [i, j] : danger_set(c, delta)) {
        auto xi = c.position(i);
        auto xj = c.position(j);
        const double gp = g_delta.derivative(detail::squared_distance(xi, xj));
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = xi[k] - xj[k];
            s[i * dim + k] += c.multiplicity(j) * gp * d;
            s[j * dim + k] -= c.multiplicity(i) * gp * d;
        }
    }
    return detail::sparse_from_field(s, n, dim, m.value());
}

/// Random directions with random shares of the budget, sum |u_i| = M.
inline ControlVector random_feasible_control(std::size_t n, std::size_t d, const ControlBudget& m, std::uint64_t seed)
{
    Rng rng(seed);
    ControlVector u = ControlVector::zero(n, d);
    std::vector<double> share(n);
    double total = 0.0;
    for (auto& s : share) {
        s = -std::log1p(-rng.uniform());  // exponential: uniform point on the simplex after normalizing
        total += s;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double len = 0.0;
        while (len == 0.0) {
            len = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                u.values[i * d + k] = rng.normal();
                len += u.values[i * d + k] * u.values[i * d + k];
            }
            len = std::sqrt(len);
        }
        const double mag = total > 0.0 ? m.value() * share[i] / total : m.value() / static_cast<double>(n);
        for (std::size_t k = 0; k < d; ++k) u.values[i * d + k] *= mag / len;
    }
    // Rescaling can overshoot M by an ulp.
    const double used = u.l1_l2_norm();
    if (used > m.value())
        for (double& v : u.values) v *= m.value() / used;
    return u;
}

/// dV/dt = (1/N) sum_i m_i <x_i - xbar, f_i + u_i>.
inline double variance_derivative(const Configuration& c, const InteractionKernel& a, const ControlVector& u)
{
    const auto f = hk_rhs(c, a);
    const auto bar = barycenter(c);
    const std::size_t dim = c.dim();
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto x = c.position(i);
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double ui = u.values.empty() ? 0.0 : u.values[i * dim + k];
            dot += (x[k] - bar[k]) * (f[i * dim + k] + ui);
        }
        sum += c.multiplicity(i) * dot;
    }
    return sum / static_cast<double>(c.original_count());
}

/// dW_g/dt = (1/N^2) sum_{i<j} m_i m_j g'(D^2) <x_i - x_j, v_i - v_j>.
inline double entropy_derivative(const Configuration& c, const InteractionKernel& a, const EntropyGenerator& g,
                                 const ControlVector& u)
{
    detail::require_declustered(c);
    auto v = hk_rhs(c, a);
    if (!u.values.empty())
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += u.values[k];
    const std::size_t n = c.size(), dim = c.dim();
    const double big_n = static_cast<double>(c.original_count());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            auto xi = c.position(i);
            auto xj = c.position(j);
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += (xi[k] - xj[k]) * (v[i * dim + k] - v[j * dim + k]);
            sum += c.multiplicity(i) * static_cast<double>(c.multiplicity(j))
                   * g.derivative(detail::squared_distance(xi, xj)) * dot;
        }
    return sum / (big_n * big_n);
}

/// Uncontrolled dV/dt from the pair form -(1/N^2) sum_{i<j} m_i m_j a(D) D^2.
inline double uncontrolled_variance_derivative(const Configuration& c, const InteractionKernel& a)
{
    const double big_n = static_cast<double>(c.original_count());
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            const double s2 = detail::squared_distance(c.position(i), c.position(j));
            sum += c.multiplicity(i) * static_cast<double>(c.multiplicity(j)) * a(std::sqrt(s2)) * s2;
        }
    return -sum / (big_n * big_n);
}

class ControlPolicy {
public:
    enum class Tag { Zero, VarianceMax, EntropyMax, PartialEntropyMax, RandomFeasible };

    static ControlPolicy zero(ControlBudget m) { return ControlPolicy(Tag::Zero, m); }
    static ControlPolicy variance_max(ControlBudget m) { return ControlPolicy(Tag::VarianceMax, m); }
    static ControlPolicy entropy_max(ControlBudget m, EntropyGenerator g)
    {
        ControlPolicy p(Tag::EntropyMax, m);
        p.g_ = g;
        return p;
    }
    /// Uses the shifted generator 1/delta^2 - 1/s.
    static ControlPolicy partial_entropy_max(ControlBudget m, double delta)
    {
        ControlPolicy p(Tag::PartialEntropyMax, m);
        p.g_ = EntropyGenerator::shifted_inverse(delta);
        p.delta_ = delta;
        return p;
    }
    static ControlPolicy random_feasible(ControlBudget m, std::uint64_t seed)
    {
        ControlPolicy p(Tag::RandomFeasible, m);
        p.seed_ = seed;
        return p;
    }

    [[nodiscard]] Tag tag() const { return tag_; }
    [[nodiscard]] const ControlBudget& budget() const { return m_; }
    [[nodiscard]] const std::optional<EntropyGenerator>& generator() const { return g_; }
    [[nodiscard]] std::optional<double> delta() const { return delta_; }
    [[nodiscard]] std::optional<std::uint64_t> seed() const { return seed_; }

    ControlVector operator()(const Configuration& c, std::size_t step_index) const
    {
        switch (tag_) {
        case Tag::Zero: return ControlVector::zero(c.size(), c.dim());
        case Tag::VarianceMax: return control_uV(c, m_);
        case Tag::EntropyMax: return control_uW(c, *g_, m_);
        case Tag::PartialEntropyMax: return control_udelta(c, *g_, *delta_, m_);
        case Tag::RandomFeasible:
            return random_feasible_control(c.size(), c.dim(), m_, *seed_ + 0x9E3779B97F4A7C15ULL * step_index);
        }
        return ControlVector::zero(c.size(), c.dim());
    }

private:
    ControlPolicy(Tag t, ControlBudget m) : tag_(t), m_(m) {}

    Tag tag_;
    ControlBudget m_;
    std::optional<EntropyGenerator> g_;
    std::optional<double> delta_;
    std::optional<std::uint64_t> seed_;
};

}  // namespace hkctl
