#pragma once

// Weighted-particle approximation of the controlled mean-field equation:
// ensembles, kinetic functionals, region-constrained controls and transport.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "hkctl/core.hpp"
#include "hkctl/detail/integrator.hpp"
#include "hkctl/functionals.hpp"

namespace hkctl {

/// Empirical measure sum_p w_p delta_{x_p}.
class ParticleEnsemble {
public:
    ParticleEnsemble() = default;

    ParticleEnsemble(std::size_t dim, std::vector<double> coords, std::vector<double> weights)
        : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights))
    {
        if (dim_ == 0) throw ConfigError("spatial dimension must be positive");
        if (weights_.empty()) throw ConfigError("ensemble needs at least one particle");
        if (coords_.size() != dim_ * weights_.size()) throw ConfigError("coordinate count does not match particles");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and non-negative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
        for (double v : coords_)
            if (!std::isfinite(v)) throw ConfigError("non-finite particle coordinate");
    }

    /// Equal weights 1/P.
    static ParticleEnsemble uniform(std::size_t dim, std::vector<double> coords)
    {
        if (dim == 0 || coords.size() % dim != 0) throw ConfigError("coordinate count does not match dimension");
        const std::size_t p = coords.size() / dim;
        return ParticleEnsemble(dim, std::move(coords), std::vector<double>(p, 1.0 / static_cast<double>(p)));
    }

    [[nodiscard]] std::size_t size() const { return weights_.size(); }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::span<const double> position(std::size_t p) const { return {coords_.data() + p * dim_, dim_}; }
    [[nodiscard]] std::span<const double> coords() const { return coords_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] double weight(std::size_t p) const { return weights_[p]; }

    [[nodiscard]] std::vector<double> barycenter() const
    {
        std::vector<double> b(dim_, 0.0);
        for (std::size_t p = 0; p < size(); ++p)
            for (std::size_t k = 0; k < dim_; ++k) b[k] += weights_[p] * coords_[p * dim_ + k];
        return b;
    }

    friend bool operator==(const ParticleEnsemble&, const ParticleEnsemble&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
    std::vector<double> weights_;
};

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(std::size_t d)
{
    const double h = 0.5 * static_cast<double>(d);
    return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

/// Radius of a ball in R^d with the given volume.
inline double ball_radius_for_volume(double volume, std::size_t d)
{
    return std::pow(volume / unit_ball_volume(d), 1.0 / static_cast<double>(d));
}

struct Ball {
    std::vector<double> center;
    double radius = 0.0;
    friend bool operator==(const Ball&, const Ball&) = default;
};

/// Union of disjoint closed balls with total volume at most c.
class ControlRegion {
public:
    ControlRegion() = default;

    ControlRegion(std::vector<Ball> balls, double volume_budget) : balls_(std::move(balls)), c_(volume_budget)
    {
        if (!(c_ > 0.0) || !std::isfinite(c_)) throw ConfigError("volume budget must be positive");
        double vol = 0.0;
        for (std::size_t i = 0; i < balls_.size(); ++i) {
            const auto& b = balls_[i];
            if (!(b.radius > 0.0) || !std::isfinite(b.radius)) throw ConfigError("ball radius must be positive");
            if (b.center.size() != balls_.front().center.size() || b.center.empty())
                throw ConfigError("inconsistent ball dimensions");
            vol += unit_ball_volume(b.center.size()) * std::pow(b.radius, static_cast<double>(b.center.size()));
            for (std::size_t j = 0; j < i; ++j) {
                const double d = std::sqrt(detail::squared_distance(b.center, balls_[j].center));
                if (d < b.radius + balls_[j].radius) throw ConfigError("control balls overlap");
            }
        }
        if (vol > c_ * (1.0 + 1e-12)) throw ConfigError("control region exceeds the volume budget");
    }

    [[nodiscard]] const std::vector<Ball>& balls() const { return balls_; }
    [[nodiscard]] double volume_budget() const { return c_; }
    [[nodiscard]] bool empty() const { return balls_.empty(); }

    /// Index of the ball containing x, if any.
    [[nodiscard]] std::optional<std::size_t> locate(std::span<const double> x) const
    {
        for (std::size_t i = 0; i < balls_.size(); ++i)
            if (detail::squared_distance(x, balls_[i].center) <= balls_[i].radius * balls_[i].radius) return i;
        return std::nullopt;
    }
    [[nodiscard]] bool contains(std::span<const double> x) const { return locate(x).has_value(); }

private:
    std::vector<Ball> balls_;
    double c_ = 1.0;
};

/// chi_omega u with |u| <= M. The field writes its value at (t, x) into out.
struct KineticControl {
    using Field = std::function<void(double, std::span<const double>, std::span<double>)>;

    ControlRegion region;
    Field field;
    double M = 0.0;
    std::optional<std::size_t> active_index;  // particle the chosen ball is centered on

    static KineticControl none() { return {}; }

    /// 1[x in omega] field(t, x).
    void evaluate(double t, std::span<const double> x, std::span<double> out) const
    {
        std::fill(out.begin(), out.end(), 0.0);
        if (!field || region.empty() || !region.contains(x)) return;
        field(t, x, out);
    }
};

// ---------------------------------------------------------------------------
// Functionals

/// V = sum_p sum_q w_p w_q |x_p - x_q|^2.
inline double kinetic_variance(const ParticleEnsemble& e)
{
    double sum = 0.0;
    for (std::size_t p = 0; p < e.size(); ++p)
        for (std::size_t q = p + 1; q < e.size(); ++q)
            sum += e.weight(p) * e.weight(q) * detail::squared_distance(e.position(p), e.position(q));
    return 2.0 * sum;
}

/// Full sum_p sum_q w_p w_q g(|x_p - x_q|^2). The diagonal contributes g(0)
/// for every atom, so this is -inf as soon as some weight is positive.
inline FunctionalValue kinetic_entropy(const ParticleEnsemble& e, const EntropyGenerator& g)
{
    for (double w : e.weights())
        if (w > 0.0) return FunctionalValue::neg_infinity();
    (void)g;
    return FunctionalValue(0.0);
}

/// Off-diagonal part sum_{p != q} w_p w_q g(|x_p - x_q|^2).
inline FunctionalValue kinetic_entropy_offdiagonal(const ParticleEnsemble& e, const EntropyGenerator& g)
{
    double sum = 0.0;
    for (std::size_t p = 0; p < e.size(); ++p)
        for (std::size_t q = p + 1; q < e.size(); ++q) {
            const double ww = e.weight(p) * e.weight(q);
            if (ww == 0.0) continue;
            const double s = detail::squared_distance(e.position(p), e.position(q));
            if (s == 0.0) return FunctionalValue::neg_infinity();
            sum += ww * g(s);
        }
    sum *= 2.0;
    if (!std::isfinite(sum)) return FunctionalValue::neg_infinity();
    return FunctionalValue(sum);
}

/// mu x mu mass of pairs within distance r, diagonal included.
inline double concentration_mass(const ParticleEnsemble& e, double r)
{
    if (!(r > 0.0)) throw ConfigError("concentration radius must be positive");
    double sum = 0.0;
    for (std::size_t p = 0; p < e.size(); ++p) {
        sum += e.weight(p) * e.weight(p);
        for (std::size_t q = p + 1; q < e.size(); ++q)
            if (detail::squared_distance(e.position(p), e.position(q)) <= r * r) sum += 2.0 * e.weight(p) * e.weight(q);
    }
    return sum;
}

/// X = max_p |x_p - xbar| over particles with positive weight.
inline double support_radius(const ParticleEnsemble& e)
{
    const auto b = e.barycenter();
    double best = 0.0;
    for (std::size_t p = 0; p < e.size(); ++p)
        if (e.weight(p) > 0.0) best = std::max(best, detail::squared_distance(e.position(p), b));
    return std::sqrt(best);
}

inline double kinetic_min_distance(const ParticleEnsemble& e)
{
    double best = kInf;
    for (std::size_t p = 0; p < e.size(); ++p)
        for (std::size_t q = p + 1; q < e.size(); ++q)
            best = std::min(best, detail::squared_distance(e.position(p), e.position(q)));
    return best == kInf ? kInf : std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Dynamics

namespace detail {

struct FieldForcing {
    const KineticControl* k = nullptr;
    std::vector<double> scratch;

    void operator()(double t, std::span<const double> x, std::span<double> v)
    {
        if (k == nullptr || !k->field || k->region.empty()) return;
        const std::size_t dim = k->region.balls().front().center.size();
        scratch.resize(dim);
        for (std::size_t p = 0; p * dim < x.size(); ++p) {
            auto xp = x.subspan(p * dim, dim);
            if (!k->region.contains(xp)) continue;
            k->field(t, xp, scratch);
            for (std::size_t d = 0; d < dim; ++d) v[p * dim + d] += scratch[d];
        }
    }
};

inline ParticleState to_state(const ParticleEnsemble& e)
{
    ParticleState st;
    st.dim = e.dim();
    st.x.assign(e.coords().begin(), e.coords().end());
    st.w = e.weights();
    st.original = e.size();
    return st;
}

inline ParticleEnsemble to_ensemble(const ParticleState& st)
{
    // Merged weights are sums of the originals, so the total stays 1 to rounding.
    return ParticleEnsemble(st.dim, st.x, st.w);
}

}  // namespace detail

/// xdot_p = sum_q w_q a(|x_p - x_q|)(x_q - x_p) + 1[x_p in omega] field(t, x_p).
inline std::vector<double> kinetic_rhs(const ParticleEnsemble& e, const InteractionKernel& a,
                                       const KineticControl& k = KineticControl::none(), double t = 0.0)
{
    std::vector<double> v(e.coords().size());
    detail::interaction_velocity(e.dim(), e.coords(), e.weights(), a, v);
    detail::FieldForcing f{&k, {}};
    f(t, e.coords(), v);
    return v;
}

/// Field -M (x - x_i)/|x - x_i| on each ball B(x_i, r), zero at the centers.
inline KineticControl::Field inward_field(std::vector<std::vector<double>> centers, double r, double m)
{
    return [centers = std::move(centers), r, m](double, std::span<const double> x, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& c : centers) {
            const double d2 = detail::squared_distance(x, c);
            if (d2 > r * r) continue;
            const double d = std::sqrt(d2);
            if (d == 0.0) return;
            for (std::size_t k = 0; k < out.size(); ++k) out[k] = -m * (x[k] - c[k]) / d;
            return;
        }
    };
}

enum class ConfinementMode { Unchecked, Safety, Collapse };

/// Balls B(x_i, r) with an inward field of strength M. Safety mode requires
/// centers at least R apart with s a(s) < M for s >= R - 2r; collapse mode
/// requires 2r <= |x_i - x_j| <= R/2 with s a(s) < M for s <= R.
inline KineticControl confinement_control(const std::vector<std::vector<double>>& centers, double r, double m,
                                          double c, ConfinementMode mode = ConfinementMode::Unchecked,
                                          const std::optional<InteractionKernel>& a = std::nullopt)
{
    if (centers.empty()) throw GeometryError("confinement needs at least one center");
    if (!(r > 0.0) || !(m > 0.0)) throw GeometryError("radius and amplitude must be positive");
    const std::size_t dim = centers.front().size();
    if (dim == 0) throw GeometryError("centers must have positive dimension");
    for (const auto& x : centers)
        if (x.size() != dim) throw GeometryError("inconsistent center dimensions");
    const double total_vol = static_cast<double>(centers.size()) * unit_ball_volume(dim) * std::pow(r, double(dim));
    if (total_vol > c * (1.0 + 1e-12)) throw GeometryError("balls exceed the volume budget");

    double dmin = kInf, dmax = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double d = std::sqrt(detail::squared_distance(centers[i], centers[j]));
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
    if (dmin < 2.0 * r) throw GeometryError("balls overlap");

    if (mode != ConfinementMode::Unchecked) {
        if (!a) throw GeometryError("checked confinement needs the interaction kernel");
        if (centers.size() < 2) throw GeometryError("checked confinement needs at least two centers");
        if (mode == ConfinementMode::Safety) {
            // R = dmin is the largest admissible separation.
            if (!(dmin > 2.0 * r)) throw GeometryError("centers must be more than 2r apart");
            if (!(a->sup_scaled_above(dmin - 2.0 * r) < m))
                throw GeometryError("centers too close: s*a(s) reaches M beyond R - 2r");
        } else {
            // R = 2 dmax is the smallest admissible bound.
            const double big_r = 2.0 * dmax;
            if (!(big_r > 2.0 * r)) throw GeometryError("R must exceed 2r");
            if (!(a->sup_scaled_below(big_r) < m)) throw GeometryError("centers too far: s*a(s) reaches M below R");
        }
    }

    std::vector<Ball> balls;
    for (const auto& x : centers) balls.push_back({x, r});
    KineticControl k;
    k.region = ControlRegion(std::move(balls), c);
    k.field = inward_field(centers, r, m);
    k.M = m;
    return k;
}

namespace detail {

// Particle-centered ball of volume c maximizing sum_{x_q in ball} w_q score_q.
inline std::optional<std::size_t> best_center(const ParticleEnsemble& e, const std::vector<double>& score, double radius)
{
    std::optional<std::size_t> arg;
    double best = 0.0;
    for (std::size_t p = 0; p < e.size(); ++p) {
        double s = 0.0;
        for (std::size_t q = 0; q < e.size(); ++q)
            if (squared_distance(e.position(p), e.position(q)) <= radius * radius) s += e.weight(q) * score[q];
        if (s > best) {
            best = s;
            arg = p;
        }
    }
    return arg;
}

inline KineticControl ball_control(const ParticleEnsemble& e, std::optional<std::size_t> center, double radius,
                                   double c, double m, KineticControl::Field field)
{
    KineticControl k;
    k.M = m;
    if (!center) return k;
    auto pos = e.position(*center);
    k.region = ControlRegion({Ball{{pos.begin(), pos.end()}, radius}}, c);
    k.field = std::move(field);
    k.active_index = center;
    return k;
}

}  // namespace detail

/// Field M R(x)/|R(x)| with R(x) = x - xbar on the best particle-centered ball of volume c.
inline KineticControl kinetic_control_uV(const ParticleEnsemble& e, double m, double c)
{
    if (!(m > 0.0) || !(c > 0.0)) throw ConfigError("amplitude and volume budget must be positive");
    const auto bar = e.barycenter();
    const double radius = ball_radius_for_volume(c, e.dim()) * (1.0 - 1e-12);
    std::vector<double> score(e.size());
    for (std::size_t p = 0; p < e.size(); ++p) score[p] = std::sqrt(detail::squared_distance(e.position(p), bar));
    auto field = [bar, m](double, std::span<const double> x, std::span<double> out) {
        double n2 = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) n2 += (x[k] - bar[k]) * (x[k] - bar[k]);
        const double n = std::sqrt(n2);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = n > 0.0 ? m * (x[k] - bar[k]) / n : 0.0;
    };
    return detail::ball_control(e, detail::best_center(e, score, radius), radius, c, m, field);
}

/// S(x) = sum_q w_q g'(|x - x_q|^2)(x - x_q), skipping particles located at x.
inline std::vector<double> kinetic_entropy_gradient(const ParticleEnsemble& e, const EntropyGenerator& g,
                                                    std::span<const double> x)
{
    std::vector<double> s(e.dim(), 0.0);
    for (std::size_t q = 0; q < e.size(); ++q) {
        auto xq = e.position(q);
        const double d2 = detail::squared_distance(x, xq);
        if (d2 == 0.0) continue;
        const double coef = e.weight(q) * g.derivative(d2);
        for (std::size_t k = 0; k < e.dim(); ++k) s[k] += coef * (x[k] - xq[k]);
    }
    return s;
}

/// Field M S(x)/|S(x)| on the best particle-centered ball of volume c.
inline KineticControl kinetic_control_uW(const ParticleEnsemble& e, const EntropyGenerator& g, double m, double c)
{
    if (!(m > 0.0) || !(c > 0.0)) throw ConfigError("amplitude and volume budget must be positive");
    const double radius = ball_radius_for_volume(c, e.dim()) * (1.0 - 1e-12);
    std::vector<double> score(e.size());
    for (std::size_t p = 0; p < e.size(); ++p) {
        const auto s = kinetic_entropy_gradient(e, g, e.position(p));
        double n2 = 0.0;
        for (double v : s) n2 += v * v;
        score[p] = std::sqrt(n2);
    }
    auto field = [snapshot = e, g, m](double, std::span<const double> x, std::span<double> out) {
        const auto s = kinetic_entropy_gradient(snapshot, g, x);
        double n2 = 0.0;
        for (double v : s) n2 += v * v;
        const double n = std::sqrt(n2);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = n > 0.0 && std::isfinite(n) ? m * s[k] / n : 0.0;
    };
    return detail::ball_control(e, detail::best_center(e, score, radius), radius, c, m, field);
}

// ---------------------------------------------------------------------------
// Simulation

struct KineticTrajectory {
    std::vector<double> times;
    std::vector<ParticleEnsemble> ensembles;
    std::vector<double> variance;
    std::vector<FunctionalValue> entropy;  // off-diagonal part
    std::vector<double> support_radius;
    std::vector<double> min_distance;      // window minimum including substeps
    std::vector<std::optional<std::size_t>> active_index;
    std::vector<double> merge_times;
    double overall_min_distance = kInf;
};

/// Policy: callable (const ParticleEnsemble&, double t) -> KineticControl,
/// re-evaluated at the start of each step.
template <class Policy>
    requires std::invocable<Policy&, const ParticleEnsemble&, double>
KineticTrajectory simulate_kinetic(const ParticleEnsemble& e0, const InteractionKernel& a, Policy&& policy,
                                   const IntegratorSettings& s,
                                   const EntropyGenerator& diagnostic = EntropyGenerator::inverse())
{
    s.validate();
    KineticTrajectory tr;
    auto st = detail::to_state(e0);
    detail::Rk4Transport<detail::FieldForcing> transport(a, s);

    double window = kInf;
    auto record = [&](double t, const ParticleEnsemble& e, std::optional<std::size_t> active) {
        const double md = std::min(window, kinetic_min_distance(e));
        tr.times.push_back(t);
        tr.ensembles.push_back(e);
        tr.variance.push_back(kinetic_variance(e));
        tr.entropy.push_back(kinetic_entropy_offdiagonal(e, diagnostic));
        tr.support_radius.push_back(hkctl::support_radius(e));
        tr.min_distance.push_back(md);
        tr.active_index.push_back(active);
        tr.overall_min_distance = std::min(tr.overall_min_distance, md);
        window = kInf;
    };

    double t = 0.0;
    std::size_t k = 0;
    ParticleEnsemble cur = e0;
    KineticControl ctl = policy(cur, 0.0);
    record(0.0, cur, ctl.active_index);
    while (s.t_final - t > 1e-12 * s.t_final && st.size() > 1) {
        if (k > 0) ctl = policy(cur, t);
        const auto active = ctl.active_index;
        detail::FieldForcing forcing{&ctl, {}};
        detail::AdvanceStats stats;
        const double h = std::min(s.dt, s.t_final - t);
        const double elapsed = transport.advance(st, forcing, t, h, stats);
        t = (elapsed == h && h == s.t_final - t) ? s.t_final : t + elapsed;
        ++k;
        window = std::min(window, stats.min_distance);
        for (const auto& m : stats.merges) tr.merge_times.push_back(m.time);
        cur = detail::to_ensemble(st);
        const bool finished = !(s.t_final - t > 1e-12 * s.t_final) || st.size() < 2;
        if (k % static_cast<std::size_t>(s.record_every) == 0 || !stats.merges.empty() || finished)
            record(t, cur, active);
    }
    return tr;
}

inline KineticTrajectory simulate_kinetic(const ParticleEnsemble& e0, const InteractionKernel& a,
                                          const KineticControl& k, const IntegratorSettings& s,
                                          const EntropyGenerator& diagnostic = EntropyGenerator::inverse())
{
    return simulate_kinetic(
        e0, a, [&k](const ParticleEnsemble&, double) { return k; }, s, diagnostic);
}

}  // namespace hkctl
