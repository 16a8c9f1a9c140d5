#pragma once

// Domain types shared by every hkctl module: agent configurations, interaction
// kernels, entropy generators, control budgets and vectors, regime reports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hkctl {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid construction input (dimensions, non-finite values, bad parameters).
class ConfigError : public Error { using Error::Error; };
/// Argument outside the domain of an inverse or bound.
class DomainError : public Error { using Error::Error; };
/// Operation undefined on a clustered state (coincident agents).
class ClusterError : public Error { using Error::Error; };
/// Integrator could not satisfy its step acceptance within the halving budget.
class StiffnessError : public Error { using Error::Error; };
/// A kernel threshold could not be inverted.
class ThresholdError : public Error { using Error::Error; };
/// Ball geometry violates a confinement precondition.
class GeometryError : public Error { using Error::Error; };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// FunctionalValue: a real number or an explicit minus-infinity sentinel.

class FunctionalValue {
public:
    constexpr FunctionalValue() = default;
    constexpr explicit FunctionalValue(double v) : value_(v) {}

    static constexpr FunctionalValue neg_infinity()
    {
        FunctionalValue f;
        f.neg_inf_ = true;
        return f;
    }

    [[nodiscard]] constexpr bool is_neg_infinity() const { return neg_inf_; }
    [[nodiscard]] constexpr bool is_finite() const { return !neg_inf_; }

    /// Real value; -inf (never NaN) for the sentinel.
    [[nodiscard]] constexpr double value() const { return neg_inf_ ? -kInf : value_; }

    friend constexpr bool operator==(const FunctionalValue& a, const FunctionalValue& b)
    {
        if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
        return a.value_ == b.value_;
    }
    friend constexpr bool operator<(const FunctionalValue& a, const FunctionalValue& b)
    {
        if (a.neg_inf_) return !b.neg_inf_;
        if (b.neg_inf_) return false;
        return a.value_ < b.value_;
    }
    friend constexpr bool operator>(const FunctionalValue& a, const FunctionalValue& b) { return b < a; }
    friend constexpr bool operator<=(const FunctionalValue& a, const FunctionalValue& b) { return !(b < a); }
    friend constexpr bool operator>=(const FunctionalValue& a, const FunctionalValue& b) { return !(a < b); }

private:
    double value_ = 0.0;
    bool neg_inf_ = false;
};

// ---------------------------------------------------------------------------
// Configuration

/// N current agents in R^d with multiplicities. A current agent of
/// multiplicity k stands for k coincident original agents.
class Configuration {
public:
    Configuration() = default;

    /// Unmerged configuration from a list of points (all multiplicities 1).
    explicit Configuration(const std::vector<std::vector<double>>& points)
    {
        if (points.empty()) throw ConfigError("configuration needs at least one agent");
        dim_ = points.front().size();
        if (dim_ == 0) throw ConfigError("spatial dimension must be positive");
        coords_.reserve(points.size() * dim_);
        for (const auto& p : points) {
            if (p.size() != dim_) throw ConfigError("inconsistent point dimensions");
            coords_.insert(coords_.end(), p.begin(), p.end());
        }
        multiplicity_.assign(points.size(), 1);
        original_ = points.size();
        validate();
    }

    /// Flat coordinates (agent-major) with explicit multiplicities.
    Configuration(std::size_t dim, std::vector<double> coords, std::vector<int> multiplicity)
        : dim_(dim), coords_(std::move(coords)), multiplicity_(std::move(multiplicity))
    {
        if (dim_ == 0) throw ConfigError("spatial dimension must be positive");
        if (coords_.size() != dim_ * multiplicity_.size())
            throw ConfigError("coordinate count does not match agents times dimension");
        if (multiplicity_.empty()) throw ConfigError("configuration needs at least one agent");
        long total = 0;
        for (int m : multiplicity_) {
            if (m < 1) throw ConfigError("multiplicities must be >= 1");
            total += m;
        }
        original_ = static_cast<std::size_t>(total);
        validate();
    }

    /// Unmerged 1-d configuration.
    static Configuration line(const std::vector<double>& xs)
    {
        return Configuration(1, xs, std::vector<int>(xs.size(), 1));
    }

    [[nodiscard]] std::size_t size() const { return multiplicity_.size(); }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t original_count() const { return original_; }

    [[nodiscard]] std::span<const double> position(std::size_t i) const
    {
        return {coords_.data() + i * dim_, dim_};
    }
    [[nodiscard]] std::span<const double> coords() const { return coords_; }
    [[nodiscard]] int multiplicity(std::size_t i) const { return multiplicity_[i]; }
    [[nodiscard]] const std::vector<int>& multiplicities() const { return multiplicity_; }

    /// Mass fraction m_i / N of current agent i.
    [[nodiscard]] double weight(std::size_t i) const
    {
        return static_cast<double>(multiplicity_[i]) / static_cast<double>(original_);
    }
    [[nodiscard]] std::vector<double> weights() const
    {
        std::vector<double> w(size());
        for (std::size_t i = 0; i < size(); ++i) w[i] = weight(i);
        return w;
    }

    [[nodiscard]] bool has_merged_agents() const
    {
        return std::any_of(multiplicity_.begin(), multiplicity_.end(), [](int m) { return m > 1; });
    }

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    void validate() const
    {
        for (double v : coords_)
            if (!std::isfinite(v)) throw ConfigError("non-finite coordinate");
    }

    std::size_t dim_ = 0;
    std::vector<double> coords_;
    std::vector<int> multiplicity_;
    std::size_t original_ = 0;
};

// ---------------------------------------------------------------------------
// InteractionKernel

/// Classification of lim s*a(s) at 0+ or +inf.
struct LimitClass {
    enum class Kind { Zero, Finite, Infinite };
    Kind kind = Kind::Zero;
    double value = 0.0;  // the constant for Finite

    static constexpr LimitClass zero() { return {Kind::Zero, 0.0}; }
    static constexpr LimitClass finite(double c) { return {Kind::Finite, c}; }
    static constexpr LimitClass infinite() { return {Kind::Infinite, 0.0}; }

    friend bool operator==(const LimitClass&, const LimitClass&) = default;
};

namespace detail {

// Bisection for the crossing of a monotone function f on [lo, hi] with
// f(lo) and f(hi) on opposite sides of target. Returns the crossing point.
template <class F>
double bisect_crossing(F&& f, double lo, double hi, double target, int iters = 200)
{
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (!(flo * fhi <= 0.0)) throw ThresholdError("bisection bracket does not straddle the target");
    for (int k = 0; k < iters && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid) - target;
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Interaction function a(s) >= 0 with a(0) = 0, together with closed-form
/// (or bisection-backed) inversions of the scaled profile s*a(s).
///
/// The four inversions, each returning nullopt when no such threshold exists
/// (the value may be 0 or +inf when the condition holds everywhere):
///   lower_bound_below(A): sup eps such that s*a(s) >= A for all 0 < s <= eps
///   upper_bound_above(e): inf mu  such that s*a(s) <= e for all s >= mu
///   lower_bound_above(A): inf mu  such that s*a(s) >= A for all s > mu
///   upper_bound_below(e): sup del such that s*a(s) <= e for all 0 < s <= del
class InteractionKernel {
public:
    enum class Family { PowerLaw, Constant, Shifted, BoundedConfidence };

    /// a(s) = s^p.
    static InteractionKernel power_law(double exponent)
    {
        if (!std::isfinite(exponent)) throw ConfigError("power-law exponent must be finite");
        return InteractionKernel(Family::PowerLaw, exponent);
    }
    /// a(s) = C for s > 0.
    static InteractionKernel constant(double c)
    {
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("constant kernel needs C >= 0");
        return InteractionKernel(Family::Constant, c);
    }
    /// a(s) = 1 + 1/s^2.
    static InteractionKernel shifted() { return InteractionKernel(Family::Shifted, 0.0); }
    /// a(s) = 1 for s <= r, 0 beyond.
    static InteractionKernel bounded_confidence(double radius)
    {
        if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("confidence radius must be positive");
        return InteractionKernel(Family::BoundedConfidence, radius);
    }

    [[nodiscard]] Family family() const { return family_; }
    [[nodiscard]] double parameter() const { return param_; }

    [[nodiscard]] double operator()(double s) const
    {
        if (!(s > 0.0)) return 0.0;
        switch (family_) {
        case Family::PowerLaw:
            if (param_ == -2.0) return 1.0 / (s * s);
            if (param_ == -0.5) return 1.0 / std::sqrt(s);
            if (param_ == 0.0) return 1.0;
            return std::pow(s, param_);
        case Family::Constant: return param_;
        case Family::Shifted: return 1.0 + 1.0 / (s * s);
        case Family::BoundedConfidence: return s <= param_ ? 1.0 : 0.0;
        }
        return 0.0;
    }

    /// s * a(s).
    [[nodiscard]] double scaled(double s) const { return s * (*this)(s); }

    [[nodiscard]] LimitClass alpha0() const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (q < 0.0) return LimitClass::infinite();
            if (q == 0.0) return LimitClass::finite(1.0);
            return LimitClass::zero();
        }
        case Family::Constant: return LimitClass::zero();
        case Family::Shifted: return LimitClass::infinite();
        case Family::BoundedConfidence: return LimitClass::zero();
        }
        return LimitClass::zero();
    }

    [[nodiscard]] LimitClass alpha_inf() const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (q < 0.0) return LimitClass::zero();
            if (q == 0.0) return LimitClass::finite(1.0);
            return LimitClass::infinite();
        }
        case Family::Constant: return param_ > 0.0 ? LimitClass::infinite() : LimitClass::zero();
        case Family::Shifted: return LimitClass::infinite();
        case Family::BoundedConfidence: return LimitClass::zero();
        }
        return LimitClass::zero();
    }

    [[nodiscard]] std::optional<double> lower_bound_below(double level) const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (q < 0.0) return std::pow(level, 1.0 / q);
            if (q == 0.0) return level <= 1.0 ? std::optional<double>(kInf) : std::nullopt;
            return std::nullopt;
        }
        case Family::Constant:
            return level <= 0.0 ? std::optional<double>(kInf) : std::nullopt;
        case Family::Shifted:
            // s + 1/s decreases on (0, 1] down to 2.
            if (level <= 2.0) return kInf;
            return detail::bisect_crossing([this](double s) { return scaled(s); }, 1e-300 + 1.0 / (2.0 * level), 1.0, level);
        case Family::BoundedConfidence:
            return level <= 0.0 ? std::optional<double>(kInf) : std::nullopt;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::optional<double> upper_bound_above(double level) const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (level <= 0.0) return std::nullopt;
            if (q < 0.0) return std::pow(level, 1.0 / q);
            if (q == 0.0) return level >= 1.0 ? std::optional<double>(0.0) : std::nullopt;
            return std::nullopt;
        }
        case Family::Constant:
            return param_ == 0.0 && level >= 0.0 ? std::optional<double>(0.0) : std::nullopt;
        case Family::Shifted: return std::nullopt;
        case Family::BoundedConfidence:
            if (level < 0.0) return std::nullopt;
            return level >= param_ ? 0.0 : param_;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::optional<double> lower_bound_above(double level) const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (q > 0.0) return level <= 0.0 ? 0.0 : std::pow(level, 1.0 / q);
            if (q == 0.0) return level <= 1.0 ? std::optional<double>(0.0) : std::nullopt;
            return level <= 0.0 ? std::optional<double>(0.0) : std::nullopt;
        }
        case Family::Constant:
            if (level <= 0.0) return 0.0;
            if (param_ == 0.0) return std::nullopt;
            return level / param_;
        case Family::Shifted:
            // s + 1/s increases on [1, inf) from 2.
            if (level <= 2.0) return 0.0;
            return detail::bisect_crossing([this](double s) { return scaled(s); }, 1.0, level, level);
        case Family::BoundedConfidence:
            return level <= 0.0 ? std::optional<double>(0.0) : std::nullopt;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::optional<double> upper_bound_below(double level) const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (level < 0.0) return std::nullopt;
            if (q > 0.0) return std::pow(level, 1.0 / q);
            if (q == 0.0) return level >= 1.0 ? std::optional<double>(kInf) : std::nullopt;
            return std::nullopt;
        }
        case Family::Constant:
            if (level < 0.0) return std::nullopt;
            return param_ == 0.0 ? kInf : level / param_;
        case Family::Shifted: return std::nullopt;
        case Family::BoundedConfidence:
            if (level < 0.0) return std::nullopt;
            return level >= param_ ? kInf : level;
        }
        return std::nullopt;
    }

    /// sup of s*a(s) over s >= from.
    [[nodiscard]] double sup_scaled_above(double from) const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (q > 0.0) return kInf;
            return from > 0.0 ? std::pow(from, q) : kInf;
        }
        case Family::Constant: return param_ > 0.0 ? kInf : 0.0;
        case Family::Shifted: return kInf;
        case Family::BoundedConfidence: return from <= param_ ? param_ : 0.0;
        }
        return kInf;
    }

    /// sup of s*a(s) over 0 < s <= upto.
    [[nodiscard]] double sup_scaled_below(double upto) const
    {
        switch (family_) {
        case Family::PowerLaw: {
            double q = param_ + 1.0;
            if (q < 0.0) return kInf;
            return std::pow(upto, q);
        }
        case Family::Constant: return param_ * upto;
        case Family::Shifted: return kInf;
        case Family::BoundedConfidence: return std::min(upto, param_);
        }
        return kInf;
    }

    friend bool operator==(const InteractionKernel&, const InteractionKernel&) = default;

private:
    InteractionKernel(Family f, double p) : family_(f), param_(p) {}

    Family family_ = Family::Constant;
    double param_ = 0.0;
};

// ---------------------------------------------------------------------------
// EntropyGenerator

/// Strictly increasing g on (0, inf) with g(0+) = -inf and sup g = m < inf.
/// Shipped generators share the shape g(s) = m - 1/s:
///   inverse():          g(s) = -1/s,          m = 0
///   shifted_inverse(d): g(s) = 1/d^2 - 1/s,   m = 1/d^2, g(d^2) = 0
class EntropyGenerator {
public:
    static EntropyGenerator inverse() { return EntropyGenerator(0.0, 0.0); }

    static EntropyGenerator shifted_inverse(double delta)
    {
        if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("generator delta must be positive");
        return EntropyGenerator(1.0 / (delta * delta), delta);
    }

    [[nodiscard]] double operator()(double s) const { return sup_ - 1.0 / s; }
    [[nodiscard]] double derivative(double s) const { return 1.0 / (s * s); }

    [[nodiscard]] double inverse_at(double y) const
    {
        if (!(y < sup_)) throw DomainError("generator inverse is defined on (-inf, m) only");
        return 1.0 / (sup_ - y);
    }

    [[nodiscard]] double sup() const { return sup_; }
    /// The delta of a shifted generator; 0 for the plain inverse.
    [[nodiscard]] double delta() const { return delta_; }

    friend bool operator==(const EntropyGenerator&, const EntropyGenerator&) = default;

private:
    EntropyGenerator(double m, double delta) : sup_(m), delta_(delta) {}

    double sup_ = 0.0;
    double delta_ = 0.0;
};

// ---------------------------------------------------------------------------
// Controls

/// l1-l2 budget: sum_i ||u_i|| <= M.
class ControlBudget {
public:
    explicit ControlBudget(double m) : m_(m)
    {
        if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("control budget must be positive");
    }
    [[nodiscard]] double value() const { return m_; }

    friend bool operator==(const ControlBudget&, const ControlBudget&) = default;

private:
    double m_;
};

struct ControlVector {
    std::size_t dim = 0;
    std::vector<double> values;               // agent-major, size() * dim
    std::optional<std::size_t> active_index;  // the single actuated agent of a sparse policy

    static ControlVector zero(std::size_t n, std::size_t d) { return {d, std::vector<double>(n * d, 0.0), std::nullopt}; }

    [[nodiscard]] std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
    [[nodiscard]] std::span<const double> operator[](std::size_t i) const { return {values.data() + i * dim, dim}; }
    [[nodiscard]] std::span<double> operator[](std::size_t i) { return {values.data() + i * dim, dim}; }

    [[nodiscard]] double l1_l2_norm() const
    {
        double total = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double sq = 0.0;
            for (double v : (*this)[i]) sq += v * v;
            total += std::sqrt(sq);
        }
        return total;
    }

    [[nodiscard]] std::size_t nonzero_count() const
    {
        std::size_t n = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            auto row = (*this)[i];
            if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; })) ++n;
        }
        return n;
    }
};

/// True iff sum ||u_i|| <= M up to a relative 1e-12.
inline bool validate_control(const ControlVector& u, const ControlBudget& budget)
{
    for (double v : u.values)
        if (!std::isfinite(v)) return false;
    return u.l1_l2_norm() <= budget.value() * (1.0 + 1e-12);
}

// ---------------------------------------------------------------------------
// Regime report

/// Quadrant of the (alpha0, alphaInf) table.
struct KernelCell {
    // Conditional: the limit is a finite C > 0 and the outcome depends on M.
    enum class Near { BlackHole, CollapsePrevention, Conditional };  // s*a(s) at 0
    enum class Far { Safety, Basin, Conditional };                   // s*a(s) at infinity
    Near near = Near::CollapsePrevention;
    Far far = Far::Safety;
    LimitClass alpha0;
    LimitClass alpha_inf;

    friend bool operator==(const KernelCell&, const KernelCell&) = default;
};

struct RegimeReport {
    enum class Label { BlackHole, Safety, Horizon };

    KernelCell kernel_cell;
    Label label = Label::Horizon;

    bool black_hole_sufficient = false;
    std::optional<double> black_hole_threshold;  // V*

    bool safety_sufficient = false;
    std::optional<double> safety_eps;
    std::optional<double> safety_mu;
    std::optional<double> safety_entropy_threshold;

    std::optional<double> basin_radius;

    bool collapse_prevention_applicable = false;
    std::optional<double> collapse_eps;
    std::optional<double> collapse_delta;
    std::optional<double> collapse_kappa;

    std::optional<double> extinction_time_bound;
};

inline const char* to_string(RegimeReport::Label l)
{
    switch (l) {
    case RegimeReport::Label::BlackHole: return "BlackHole";
    case RegimeReport::Label::Safety: return "Safety";
    case RegimeReport::Label::Horizon: return "Horizon";
    }
    return "Horizon";
}

}  // namespace hkctl
