#pragma once

// Weighted-particle RK4 transport shared by the microscopic and kinetic
// models. Microscopic agents use weights m_j / N, so both models evaluate the
// same interaction sum in the same order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hkctl/core.hpp"

namespace hkctl {

struct IntegratorSettings {
    double dt = 1e-3;
    double t_final = 1.0;
    double merge_tol = 1e-8;
    /// Largest admissible velocity at the base step; a substep of length h is
    /// accepted only if h * max|v| <= dt * rhs_cap.
    double rhs_cap = 1e6;
    int max_halvings = 60;
    int record_every = 1;

    void validate() const
    {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
        if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be positive");
        if (!(merge_tol > 0.0)) throw ConfigError("merge_tol must be positive");
        if (!(rhs_cap > 0.0)) throw ConfigError("rhs_cap must be positive");
        if (max_halvings < 0) throw ConfigError("max_halvings must be non-negative");
        if (record_every < 1) throw ConfigError("record_every must be >= 1");
    }

    friend bool operator==(const IntegratorSettings&, const IntegratorSettings&) = default;
};

namespace detail {

struct ParticleState {
    std::size_t dim = 0;
    std::vector<double> x;  // particle-major
    std::vector<double> w;
    std::vector<int> mult;  // empty for kinetic ensembles
    std::size_t original = 0;

    [[nodiscard]] std::size_t size() const { return w.size(); }
};

/// v_p = sum_{q != p} w_q a(|x_q - x_p|) (x_q - x_p).
inline void interaction_velocity(std::size_t dim, std::span<const double> x, std::span<const double> w,
                                 const InteractionKernel& a, std::span<double> v)
{
    const std::size_t n = w.size();
    std::fill(v.begin(), v.end(), 0.0);
    double diff[16];
    std::vector<double> big;
    double* d = diff;
    if (dim > 16) {
        big.resize(dim);
        d = big.data();
    }
    for (std::size_t p = 0; p < n; ++p) {
        const double* xp = x.data() + p * dim;
        double* vp = v.data() + p * dim;
        for (std::size_t q = 0; q < n; ++q) {
            if (q == p) continue;
            const double* xq = x.data() + q * dim;
            double s2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                d[k] = xq[k] - xp[k];
                s2 += d[k] * d[k];
            }
            const double coef = w[q] * a(std::sqrt(s2));
            for (std::size_t k = 0; k < dim; ++k) vp[k] += coef * d[k];
        }
    }
}

struct MergeRecord {
    double time = 0.0;
    std::size_t first = 0;   // surviving index before the merge
    std::size_t second = 0;  // absorbed index before the merge
};

struct AdvanceStats {
    int max_depth = 0;
    double min_distance = kInf;     // over accepted substeps
    std::vector<MergeRecord> merges;
};

// Forcing: callable (double t, span<const double> x, span<double> v) adding
// the control contribution to the interaction velocity v.
template <class Forcing>
void full_velocity(const ParticleState& st, const InteractionKernel& a, Forcing& forcing, double t,
                   std::span<const double> x, std::span<double> v)
{
    interaction_velocity(st.dim, x, st.w, a, v);
    forcing(t, x, v);
}

inline double max_speed(std::size_t dim, std::span<const double> v)
{
    double best = 0.0;
    for (std::size_t p = 0; p * dim < v.size(); ++p) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) s += v[p * dim + k] * v[p * dim + k];
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

// Pairs may shrink to no less than half their distance in one substep and may
// not pass through each other. Returns min new distance, or nullopt on rejection.
inline std::optional<double> check_pairs(const ParticleState& st, std::span<const double> xn)
{
    const std::size_t n = st.size(), dim = st.dim;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double old2 = 0.0, new2 = 0.0, dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                double a = st.x[i * dim + k] - st.x[j * dim + k];
                double b = xn[i * dim + k] - xn[j * dim + k];
                old2 += a * a;
                new2 += b * b;
                dot += a * b;
            }
            if (!(new2 >= 0.25 * old2) || !(dot > 0.0)) return std::nullopt;
            best = std::min(best, new2);
        }
    return std::sqrt(best);
}

// Merge every pair closer than tol, lowest indices first. The survivor takes
// the weighted mean position and the summed weight (or multiplicity).
inline bool merge_close(ParticleState& st, double tol, double t, std::vector<MergeRecord>& log)
{
    bool any = false;
    const double tol2 = tol * tol;
    const std::size_t dim = st.dim;
    for (bool found = true; found;) {
        found = false;
        for (std::size_t i = 0; i < st.size() && !found; ++i)
            for (std::size_t j = i + 1; j < st.size() && !found; ++j) {
                double s2 = 0.0;
                for (std::size_t k = 0; k < dim; ++k) {
                    double d = st.x[i * dim + k] - st.x[j * dim + k];
                    s2 += d * d;
                }
                if (s2 >= tol2) continue;
                found = any = true;
                log.push_back({t, i, j});
                double wi, wj;
                if (!st.mult.empty()) {
                    wi = st.mult[i];
                    wj = st.mult[j];
                } else {
                    wi = st.w[i];
                    wj = st.w[j];
                }
                const double wt = wi + wj;
                for (std::size_t k = 0; k < dim; ++k)
                    st.x[i * dim + k] = wt > 0.0 ? (wi * st.x[i * dim + k] + wj * st.x[j * dim + k]) / wt
                                                 : 0.5 * (st.x[i * dim + k] + st.x[j * dim + k]);
                if (!st.mult.empty()) {
                    st.mult[i] += st.mult[j];
                    st.mult.erase(st.mult.begin() + static_cast<std::ptrdiff_t>(j));
                    st.w[i] = static_cast<double>(st.mult[i]) / static_cast<double>(st.original);
                } else {
                    st.w[i] += st.w[j];
                }
                st.w.erase(st.w.begin() + static_cast<std::ptrdiff_t>(j));
                st.x.erase(st.x.begin() + static_cast<std::ptrdiff_t>(j * dim),
                           st.x.begin() + static_cast<std::ptrdiff_t>((j + 1) * dim));
            }
    }
    return any;
}

template <class Forcing>
class Rk4Transport {
public:
    Rk4Transport(const InteractionKernel& a, const IntegratorSettings& s) : a_(a), s_(s) {}

    /// Advance by h from time t, halving on rejection. Stops right after the
    /// first substep that produced a merge. Returns the elapsed time.
    double advance(ParticleState& st, Forcing& forcing, double t, double h, AdvanceStats& stats)
    {
        return advance_rec(st, forcing, t, h, 0, stats);
    }

private:
    double advance_rec(ParticleState& st, Forcing& forcing, double t, double h, int depth, AdvanceStats& stats)
    {
        stats.max_depth = std::max(stats.max_depth, depth);
        if (try_step(st, forcing, t, h, stats)) return h;
        if (depth >= s_.max_halvings)
            throw StiffnessError("step rejected after " + std::to_string(depth) + " halvings at t = " + std::to_string(t));
        const double half = 0.5 * h;
        const std::size_t before = stats.merges.size();
        double e = advance_rec(st, forcing, t, half, depth + 1, stats);
        if (stats.merges.size() != before || st.size() < 2) return e;
        return e + advance_rec(st, forcing, t + half, half, depth + 1, stats);
    }

    bool try_step(ParticleState& st, Forcing& forcing, double t, double h, AdvanceStats& stats)
    {
        const std::size_t n = st.x.size();
        buf_.resize(n);
        auto& [k1, k2, k3, k4, tmp, xn] = buf_;
        // stages that collide a pair would sample the kernel on the wrong side
        full_velocity(st, a_, forcing, t, st.x, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = st.x[i] + 0.5 * h * k1[i];
        if (!check_pairs(st, tmp)) return false;
        full_velocity(st, a_, forcing, t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = st.x[i] + 0.5 * h * k2[i];
        if (!check_pairs(st, tmp)) return false;
        full_velocity(st, a_, forcing, t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = st.x[i] + h * k3[i];
        if (!check_pairs(st, tmp)) return false;
        full_velocity(st, a_, forcing, t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) xn[i] = st.x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        for (double v : xn)
            if (!std::isfinite(v)) return false;
        double vmax = 0.0;
        for (auto* k : {&k1, &k2, &k3, &k4}) vmax = std::max(vmax, max_speed(st.dim, *k));
        if (h * vmax > s_.dt * s_.rhs_cap) return false;
        auto dmin = check_pairs(st, xn);
        if (!dmin) return false;

        st.x.swap(xn);
        stats.min_distance = std::min(stats.min_distance, *dmin);
        merge_close(st, s_.merge_tol, t + h, stats.merges);
        return true;
    }

    struct Buffers {
        std::vector<double> k1, k2, k3, k4, tmp, xn;
        void resize(std::size_t n)
        {
            for (auto* b : {&k1, &k2, &k3, &k4, &tmp, &xn}) b->resize(n);
        }
    };

    const InteractionKernel& a_;
    const IntegratorSettings& s_;
    Buffers buf_;
};

}  // namespace detail
}  // namespace hkctl
