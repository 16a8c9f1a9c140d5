#pragma once

// Sufficient-condition thresholds for the black hole, safety region, basin
// of attraction and collapse prevention, and the state classifier built on them.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>

#include "hkctl/core.hpp"
#include "hkctl/functionals.hpp"

namespace hkctl {

inline KernelCell classify_kernel(const InteractionKernel& a)
{
    KernelCell cell;
    cell.alpha0 = a.alpha0();
    cell.alpha_inf = a.alpha_inf();
    using K = LimitClass::Kind;
    switch (cell.alpha0.kind) {
    case K::Infinite: cell.near = KernelCell::Near::BlackHole; break;
    case K::Zero: cell.near = KernelCell::Near::CollapsePrevention; break;
    case K::Finite: cell.near = KernelCell::Near::Conditional; break;
    }
    switch (cell.alpha_inf.kind) {
    case K::Zero: cell.far = KernelCell::Far::Safety; break;
    case K::Infinite: cell.far = KernelCell::Far::Basin; break;
    case K::Finite: cell.far = KernelCell::Far::Conditional; break;
    }
    return cell;
}

/// V* with V(0) < V* sufficient for consensus in finite time whatever the
/// control. Uses eps = sup{e : s a(s) >= M on (0, e]}; may be +inf.
inline std::optional<double> black_hole_threshold(const InteractionKernel& a, const ControlBudget& m, std::size_t n)
{
    const auto a0 = a.alpha0();
    if (a0.kind == LimitClass::Kind::Zero) return std::nullopt;
    if (a0.kind == LimitClass::Kind::Finite && !(m.value() < a0.value)) return std::nullopt;
    auto eps = a.lower_bound_below(m.value());
    if (!eps) throw ThresholdError("kernel threshold s*a(s) >= M cannot be inverted near 0");
    const double nn = static_cast<double>(n);
    return (*eps) * (*eps) / (2.0 * nn * nn);
}

struct SafetyThreshold {
    double eps = 0.0;
    double mu = 0.0;
    double entropy_threshold = 0.0;  // W_g(0) >= this is sufficient under u^W
};

/// eps = M/N, mu = inf{m : s a(s) <= eps beyond m}. W_g(0) >= threshold forces
/// every pair distance to be at least mu.
inline std::optional<SafetyThreshold> safety_threshold(const InteractionKernel& a, const EntropyGenerator& g,
                                                       const ControlBudget& m, std::size_t n)
{
    const auto ai = a.alpha_inf();
    const double nn = static_cast<double>(n);
    if (ai.kind == LimitClass::Kind::Infinite) return std::nullopt;
    if (ai.kind == LimitClass::Kind::Finite && !(m.value() > ai.value * nn)) return std::nullopt;
    SafetyThreshold out;
    out.eps = m.value() / nn;
    auto mu = a.upper_bound_above(out.eps);
    if (!mu) throw ThresholdError("kernel threshold s*a(s) <= eps cannot be inverted at infinity");
    out.mu = *mu;
    const double gm = out.mu > 0.0 ? g(out.mu * out.mu) : -kInf;
    out.entropy_threshold = gm / (2.0 * nn * nn) + g.sup() * (nn * (nn - 1.0) / 2.0 - 1.0) / (2.0 * nn * nn);
    return out;
}

/// mu with s a(s) >= M for all s >= mu; the basin is {min distance <= mu}.
inline std::optional<double> basin_radius(const InteractionKernel& a, const ControlBudget& m)
{
    const auto ai = a.alpha_inf();
    if (ai.kind == LimitClass::Kind::Zero) return std::nullopt;
    if (ai.kind == LimitClass::Kind::Finite && !(m.value() < ai.value)) return std::nullopt;
    auto mu = a.lower_bound_above(m.value());
    if (!mu) throw ThresholdError("kernel threshold s*a(s) >= M cannot be inverted at infinity");
    return *mu;
}

struct CollapseParams {
    double eps = 0.0;
    double delta = 0.0;
    std::size_t n = 0;

    [[nodiscard]] EntropyGenerator generator() const { return EntropyGenerator::shifted_inverse(delta); }

    /// Guaranteed minimum distance under u^delta given the initial partial entropy.
    [[nodiscard]] double kappa(double partial_entropy0) const
    {
        return entropy_lower_bound(partial_entropy0, generator(), n);
    }
    [[nodiscard]] double kappa(const Configuration& c0) const
    {
        return kappa(partial_entropy(c0, generator(), delta).value.value());
    }
};

/// eps = M/(2N), delta = sup{d : s a(s) <= eps on (0, d]}.
inline std::optional<CollapseParams> collapse_prevention_params(const InteractionKernel& a, const ControlBudget& m,
                                                                std::size_t n)
{
    if (a.alpha0().kind != LimitClass::Kind::Zero) return std::nullopt;
    CollapseParams p;
    p.n = n;
    p.eps = m.value() / (2.0 * static_cast<double>(n));
    auto d = a.upper_bound_below(p.eps);
    if (!d || !(*d > 0.0)) throw ThresholdError("kernel threshold s*a(s) <= eps cannot be inverted near 0");
    if (!std::isfinite(*d)) return std::nullopt;  // no pair interaction ever exceeds eps
    p.delta = *d;
    return p;
}

/// T* = sqrt(2 V0) N / M.
inline double extinction_time_bound(double v0, const ControlBudget& m, std::size_t n)
{
    if (!(v0 >= 0.0)) throw ConfigError("V0 must be non-negative");
    return std::sqrt(2.0 * v0) * static_cast<double>(n) / m.value();
}

inline RegimeReport classify_state(const Configuration& c0, const InteractionKernel& a, const EntropyGenerator& g,
                                   const ControlBudget& m)
{
    RegimeReport r;
    r.kernel_cell = classify_kernel(a);
    const std::size_t n = c0.original_count();

    if (auto vstar = black_hole_threshold(a, m, n)) {
        r.black_hole_threshold = *vstar;
        const double v0 = variance(c0);
        r.black_hole_sufficient = v0 < *vstar;
        if (r.black_hole_sufficient) r.extinction_time_bound = extinction_time_bound(v0, m, n);
    }
    if (auto s = safety_threshold(a, g, m, n)) {
        r.safety_eps = s->eps;
        r.safety_mu = s->mu;
        r.safety_entropy_threshold = s->entropy_threshold;
        const auto w0 = generalized_entropy(c0, g);
        r.safety_sufficient = w0.is_finite() && w0.value() >= s->entropy_threshold;
    }
    r.basin_radius = basin_radius(a, m);
    if (auto p = collapse_prevention_params(a, m, n)) {
        r.collapse_prevention_applicable = true;
        r.collapse_eps = p->eps;
        r.collapse_delta = p->delta;
        if (!c0.has_merged_agents() && min_pairwise_distance(c0) > 0.0) r.collapse_kappa = p->kappa(c0);
    }
    if (r.black_hole_sufficient) r.label = RegimeReport::Label::BlackHole;
    else if (r.safety_sufficient) r.label = RegimeReport::Label::Safety;
    else r.label = RegimeReport::Label::Horizon;
    return r;
}

}  // namespace hkctl
