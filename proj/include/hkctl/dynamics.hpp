#pragma once

// Microscopic controlled dynamics: right-hand side, RK4 stepping with
// sample-and-hold control, merge continuation and trajectory recording.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hkctl/core.hpp"
#include "hkctl/detail/integrator.hpp"
#include "hkctl/functionals.hpp"

namespace hkctl {

namespace detail {

inline ParticleState to_state(const Configuration& c)
{
    ParticleState st;
    st.dim = c.dim();
    st.x.assign(c.coords().begin(), c.coords().end());
    st.mult = c.multiplicities();
    st.original = c.original_count();
    st.w = c.weights();
    return st;
}

inline Configuration to_configuration(const ParticleState& st)
{
    return Configuration(st.dim, st.x, st.mult);
}

// Adds a fixed per-agent control to every RK stage.
struct HeldControl {
    const ControlVector* u = nullptr;
    void operator()(double, std::span<const double>, std::span<double> v) const
    {
        if (u == nullptr || u->values.empty()) return;
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += u->values[k];
    }
};

// Keep a control aligned with the agent list after a merge absorbed `second`.
inline void drop_agent(ControlVector& u, std::size_t second)
{
    if (u.values.empty()) return;
    u.values.erase(u.values.begin() + static_cast<std::ptrdiff_t>(second * u.dim),
                   u.values.begin() + static_cast<std::ptrdiff_t>((second + 1) * u.dim));
    if (u.active_index) {
        if (*u.active_index == second) u.active_index.reset();
        else if (*u.active_index > second) --*u.active_index;
    }
}

}  // namespace detail

/// Velocities (1/N) sum_j m_j a(|x_i - x_j|) (x_j - x_i), agent-major.
inline std::vector<double> hk_rhs(const Configuration& c, const InteractionKernel& a)
{
    std::vector<double> v(c.coords().size());
    const auto w = c.weights();
    detail::interaction_velocity(c.dim(), c.coords(), w, a, v);
    return v;
}

/// Multiplicity-weighted mean (1/N) sum m_i x_i.
inline std::vector<double> barycenter(const Configuration& c)
{
    std::vector<double> b(c.dim(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto p = c.position(i);
        for (std::size_t k = 0; k < c.dim(); ++k) b[k] += c.multiplicity(i) * p[k];
    }
    for (double& v : b) v /= static_cast<double>(c.original_count());
    return b;
}

/// One RK4 step of length s.dt under the held control u. Close agents are
/// merged and the remainder of the step continues on the merged state.
inline Configuration step(const Configuration& c, const InteractionKernel& a, const ControlVector& u,
                          const IntegratorSettings& s)
{
    s.validate();
    if (!u.values.empty() && (u.dim != c.dim() || u.size() != c.size()))
        throw ConfigError("control shape does not match configuration");
    auto st = detail::to_state(c);
    ControlVector held = u;
    detail::HeldControl forcing{&held};
    detail::Rk4Transport<detail::HeldControl> transport(a, s);
    double done = 0.0;
    while (s.dt - done > 1e-12 * s.dt && st.size() > 1) {
        detail::AdvanceStats stats;
        done += transport.advance(st, forcing, done, s.dt - done, stats);
        for (const auto& m : stats.merges) detail::drop_agent(held, m.second);
    }
    return detail::to_configuration(st);
}

struct TrajectoryEvent {
    enum class Kind { Merge, BudgetSaturation, Halving };
    Kind kind = Kind::Merge;
    double time = 0.0;
    std::vector<std::size_t> indices;  // merge: surviving and absorbed current-agent index
    int halvings = 0;                  // halving: deepest recursion in the step
};

inline const char* to_string(TrajectoryEvent::Kind k)
{
    switch (k) {
    case TrajectoryEvent::Kind::Merge: return "Merge";
    case TrajectoryEvent::Kind::BudgetSaturation: return "BudgetSaturation";
    case TrajectoryEvent::Kind::Halving: return "Halving";
    }
    return "Merge";
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Configuration> configurations;
    std::vector<double> variance;
    std::vector<FunctionalValue> entropy;
    /// Smallest pair distance seen over the interval ending at each record,
    /// including every accepted substep.
    std::vector<double> min_distance;
    std::vector<std::optional<std::size_t>> active_index;
    std::vector<TrajectoryEvent> events;
    double overall_min_distance = kInf;

    [[nodiscard]] std::optional<double> first_merge_time() const
    {
        for (const auto& e : events)
            if (e.kind == TrajectoryEvent::Kind::Merge) return e.time;
        return std::nullopt;
    }
    [[nodiscard]] std::size_t merge_count() const
    {
        return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const auto& e) {
            return e.kind == TrajectoryEvent::Kind::Merge;
        }));
    }
};

/// Integrate the controlled system from c0. `policy(config, step_index)`
/// returns the ControlVector held over that step.
template <class Policy>
Trajectory simulate(const Configuration& c0, const InteractionKernel& a, Policy&& policy, const ControlBudget& budget,
                    const IntegratorSettings& s, const EntropyGenerator& diagnostic = EntropyGenerator::inverse())
{
    s.validate();
    Trajectory tr;
    auto st = detail::to_state(c0);
    detail::Rk4Transport<detail::HeldControl> transport(a, s);

    double window = kInf;
    auto record = [&](double t, const Configuration& c, std::optional<std::size_t> active) {
        double md = std::min(window, min_pairwise_distance(c));
        tr.times.push_back(t);
        tr.configurations.push_back(c);
        tr.variance.push_back(variance(c));
        tr.entropy.push_back(generalized_entropy(c, diagnostic));
        tr.min_distance.push_back(md);
        tr.active_index.push_back(active);
        tr.overall_min_distance = std::min(tr.overall_min_distance, md);
        window = kInf;
    };

    auto checked_control = [&](const Configuration& c, std::size_t k) {
        ControlVector u = policy(c, k);
        if (u.values.empty()) u = ControlVector::zero(c.size(), c.dim());
        if (u.dim != c.dim() || u.size() != c.size()) throw ConfigError("policy returned a mis-shaped control");
        if (!validate_control(u, budget)) throw ConfigError("policy exceeded the control budget");
        return u;
    };

    double t = 0.0;
    std::size_t k = 0;
    bool saturated = false;
    Configuration cur = c0;
    ControlVector u = checked_control(cur, 0);
    record(0.0, cur, u.active_index);

    while (s.t_final - t > 1e-12 * s.t_final && st.size() > 1) {
        if (k > 0) u = checked_control(cur, k);
        const bool sat = u.l1_l2_norm() >= budget.value() * (1.0 - 1e-12);
        if (sat && !saturated) tr.events.push_back({TrajectoryEvent::Kind::BudgetSaturation, t, {}, 0});
        saturated = sat;

        const double h = std::min(s.dt, s.t_final - t);
        const auto active = u.active_index;
        detail::HeldControl forcing{&u};
        detail::AdvanceStats stats;
        const double elapsed = transport.advance(st, forcing, t, h, stats);
        t = (elapsed == h && h == s.t_final - t) ? s.t_final : t + elapsed;
        ++k;
        window = std::min(window, stats.min_distance);
        if (stats.max_depth > 0) tr.events.push_back({TrajectoryEvent::Kind::Halving, t, {}, stats.max_depth});
        for (const auto& m : stats.merges)
            tr.events.push_back({TrajectoryEvent::Kind::Merge, m.time, {m.first, m.second}, 0});

        cur = detail::to_configuration(st);
        const bool finished = !(s.t_final - t > 1e-12 * s.t_final) || st.size() < 2;
        const bool due = k % static_cast<std::size_t>(s.record_every) == 0 || !stats.merges.empty() || finished;
        if (due) record(t, cur, active);
    }
    return tr;
}

}  // namespace hkctl
