#pragma once

// Scalar diagnostics of a configuration. Pair sums run over original agents:
// a merged agent of multiplicity k counts as k coincident agents, and the
// prefactors use the original agent count.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "hkctl/core.hpp"

namespace hkctl {

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace detail

/// V = (1/(2N^2)) sum_{i<j} |x_i - x_j|^2.
inline double variance(const Configuration& c)
{
    const std::size_t n = c.size();
    const double big_n = static_cast<double>(c.original_count());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            sum += c.multiplicity(i) * static_cast<double>(c.multiplicity(j))
                   * detail::squared_distance(c.position(i), c.position(j));
    return sum / (2.0 * big_n * big_n);
}

/// W = (1/N^2) sum_{i<j} ln |x_i - x_j|.
inline FunctionalValue log_entropy(const Configuration& c)
{
    if (c.has_merged_agents()) return FunctionalValue::neg_infinity();
    const std::size_t n = c.size();
    const double big_n = static_cast<double>(c.original_count());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = detail::squared_distance(c.position(i), c.position(j));
            if (s == 0.0) return FunctionalValue::neg_infinity();
            sum += 0.5 * std::log(s);
        }
    return FunctionalValue(sum / (big_n * big_n));
}

/// W_g = (1/(2N^2)) sum_{i<j} g(|x_i - x_j|^2).
inline FunctionalValue generalized_entropy(const Configuration& c, const EntropyGenerator& g)
{
    if (c.has_merged_agents()) return FunctionalValue::neg_infinity();
    const std::size_t n = c.size();
    const double big_n = static_cast<double>(c.original_count());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = detail::squared_distance(c.position(i), c.position(j));
            if (s == 0.0) return FunctionalValue::neg_infinity();
            sum += g(s);
        }
    double v = sum / (2.0 * big_n * big_n);
    if (!std::isfinite(v)) return FunctionalValue::neg_infinity();
    return FunctionalValue(v);
}

/// Danger set: current-agent pairs (i < j) at distance <= delta.
using DangerSet = std::vector<std::pair<std::size_t, std::size_t>>;

struct PartialEntropy {
    FunctionalValue value;
    DangerSet danger_set;
};

inline DangerSet danger_set(const Configuration& c, double delta)
{
    DangerSet out;
    const double d2 = delta * delta;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            if (detail::squared_distance(c.position(i), c.position(j)) <= d2) out.emplace_back(i, j);
    return out;
}

/// W_g restricted to pairs at distance <= delta.
inline PartialEntropy partial_entropy(const Configuration& c, const EntropyGenerator& g, double delta)
{
    if (!(delta > 0.0)) throw ConfigError("partial entropy needs delta > 0");
    PartialEntropy out;
    out.danger_set = danger_set(c, delta);
    if (c.has_merged_agents()) {
        out.value = FunctionalValue::neg_infinity();
        return out;
    }
    const double big_n = static_cast<double>(c.original_count());
    double sum = 0.0;
    for (auto [i, j] : out.danger_set) {
        double s = detail::squared_distance(c.position(i), c.position(j));
        if (s == 0.0) {
            out.value = FunctionalValue::neg_infinity();
            return out;
        }
        sum += g(s);
    }
    out.value = FunctionalValue(sum / (2.0 * big_n * big_n));
    return out;
}

/// Guaranteed minimum pairwise distance for any N-agent configuration with W_g >= K.
inline double entropy_lower_bound(double k, const EntropyGenerator& g, std::size_t n)
{
    const double nn = static_cast<double>(n);
    const double arg = 2.0 * nn * nn * k - (nn * (nn - 1.0) / 2.0 - 1.0) * g.sup();
    if (std::isnan(arg) || arg >= g.sup())
        throw DomainError("entropy bound argument lies outside the generator's inverse domain");
    if (arg == -kInf) return 0.0;
    return std::sqrt(g.inverse_at(arg));
}

inline double entropy_lower_bound(FunctionalValue k, const EntropyGenerator& g, std::size_t n)
{
    return entropy_lower_bound(k.value(), g, n);
}

/// Minimum distance between distinct current agents; +inf with fewer than two.
inline double min_pairwise_distance(const Configuration& c)
{
    double best = kInf;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            best = std::min(best, detail::squared_distance(c.position(i), c.position(j)));
    return best == kInf ? kInf : std::sqrt(best);
}

}  // namespace hkctl
