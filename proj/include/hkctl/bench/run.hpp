#pragma once

// Scenario execution, CSV/JSON serialization, atomic output and sweeps.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "hkctl/bench/scenario.hpp"
#include "hkctl/controls.hpp"
#include "hkctl/dynamics.hpp"
#include "hkctl/kinetic.hpp"
#include "hkctl/regimes.hpp"

namespace hkctl::bench {

/// Filesystem failure while writing results.
class IoError : public Error { using Error::Error; };

struct InitialState {
    std::vector<std::vector<double>> positions;
    std::vector<double> weights;  // kinetic only; empty means equal weights
};

inline InitialState resolve_initial(const Scenario& s)
{
    InitialState out;
    switch (s.initial.kind) {
    case InitialSpec::Kind::Explicit: out.positions = s.initial.positions; break;
    case InitialSpec::Kind::UniformBox: {
        Rng rng(s.seed);
        for (std::size_t i = 0; i < s.N; ++i) {
            std::vector<double> p;
            for (std::size_t k = 0; k < s.d; ++k) p.push_back(rng.uniform(s.initial.lo, s.initial.hi));
            out.positions.push_back(std::move(p));
        }
        break;
    }
    case InitialSpec::Kind::Preset:
        for (double x : find_preset(s.initial.preset).positions) out.positions.push_back({x});
        break;
    }
    if (s.initial.weights) out.weights = *s.initial.weights;
    return out;
}

struct Row {
    double t = 0.0;
    double V = 0.0;
    FunctionalValue Wg;
    double min_dist = kInf;
    std::optional<std::size_t> active_index;
    std::size_t n_effective = 0;
    std::vector<std::vector<double>> positions;
};

struct EventRecord {
    std::string kind;
    double time = 0.0;
    std::vector<std::size_t> indices;
    int halvings = 0;
};

struct RunResult {
    Scenario scenario;
    RegimeReport regime;
    std::vector<Row> rows;
    std::vector<EventRecord> events;
    std::optional<double> clustering_time;
    double final_V = 0.0;
    FunctionalValue final_Wg;
    double min_dist_min = kInf;
};

namespace detail {

template <class State>
std::vector<std::vector<double>> positions_of(const State& e)
{
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto p = e.position(i);
        out.emplace_back(p.begin(), p.end());
    }
    return out;
}

}  // namespace detail

inline RunResult run(const Scenario& sc)
{
    validate(sc);
    RunResult res;
    res.scenario = sc;
    const auto a = sc.kernel.build();
    const auto g = sc.generator.build();
    const ControlBudget m(sc.control.M);
    const auto init = resolve_initial(sc);
    const Configuration c0(init.positions);
    res.regime = classify_state(c0, a, g, m);

    if (sc.mode == Mode::Micro) {
        ControlPolicy policy = ControlPolicy::zero(m);
        switch (sc.control.policy) {
        case PolicyTag::Zero: break;
        case PolicyTag::VarianceMax: policy = ControlPolicy::variance_max(m); break;
        case PolicyTag::EntropyMax: policy = ControlPolicy::entropy_max(m, g); break;
        case PolicyTag::PartialEntropyMax: policy = ControlPolicy::partial_entropy_max(m, *sc.control.delta); break;
        case PolicyTag::RandomFeasible: policy = ControlPolicy::random_feasible(m, *sc.control.seed); break;
        case PolicyTag::Confinement: throw ConfigError("confinement is kinetic-only");
        }
        const auto tr = simulate(c0, a, policy, m, sc.integrator, g);
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            res.rows.push_back({tr.times[k], tr.variance[k], tr.entropy[k], tr.min_distance[k], tr.active_index[k],
                                tr.configurations[k].size(), detail::positions_of(tr.configurations[k])});
        for (const auto& e : tr.events) res.events.push_back({to_string(e.kind), e.time, e.indices, e.halvings});
        res.clustering_time = tr.first_merge_time();
        res.min_dist_min = tr.overall_min_distance;
    } else {
        std::vector<double> flat;
        for (const auto& p : init.positions) flat.insert(flat.end(), p.begin(), p.end());
        const auto e0 = init.weights.empty() ? ParticleEnsemble::uniform(sc.d, flat)
                                             : ParticleEnsemble(sc.d, flat, init.weights);
        KineticTrajectory tr;
        switch (sc.control.policy) {
        case PolicyTag::Zero: tr = simulate_kinetic(e0, a, KineticControl::none(), sc.integrator, g); break;
        case PolicyTag::VarianceMax: {
            const double c = *sc.control.volume_budget;
            tr = simulate_kinetic(
                e0, a, [&](const ParticleEnsemble& e, double) { return kinetic_control_uV(e, m.value(), c); },
                sc.integrator, g);
            break;
        }
        case PolicyTag::EntropyMax: {
            const double c = *sc.control.volume_budget;
            tr = simulate_kinetic(
                e0, a, [&](const ParticleEnsemble& e, double) { return kinetic_control_uW(e, g, m.value(), c); },
                sc.integrator, g);
            break;
        }
        case PolicyTag::Confinement: {
            const auto k = confinement_control(sc.control.centers, *sc.control.radius, m.value(),
                                               *sc.control.volume_budget);
            tr = simulate_kinetic(e0, a, k, sc.integrator, g);
            break;
        }
        default: throw ConfigError("policy is micro-only");
        }
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            res.rows.push_back({tr.times[k], tr.variance[k], tr.entropy[k], tr.min_distance[k], tr.active_index[k],
                                tr.ensembles[k].size(), detail::positions_of(tr.ensembles[k])});
        for (double t : tr.merge_times) res.events.push_back({"Merge", t, {}, 0});
        if (!tr.merge_times.empty()) res.clustering_time = tr.merge_times.front();
        res.min_dist_min = tr.overall_min_distance;
    }
    res.final_V = res.rows.back().V;
    res.final_Wg = res.rows.back().Wg;
    return res;
}

// ---------------------------------------------------------------------------
// Serialization

/// Shortest decimal that round-trips; "inf" / "-inf" for infinities.
inline std::string format_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Long-format positions for trajectory plots: one row per (time, agent).
inline std::string positions_csv(const RunResult& r)
{
    const std::size_t d = r.scenario.d;
    std::string out = "t,agent";
    for (std::size_t k = 0; k < d; ++k) out += ",x" + std::to_string(k);
    out += ",active\n";
    for (const auto& row : r.rows)
        for (std::size_t i = 0; i < row.positions.size(); ++i) {
            out += format_double(row.t) + "," + std::to_string(i);
            for (double x : row.positions[i]) out += "," + format_double(x);
            out += (row.active_index && *row.active_index == i) ? ",1\n" : ",0\n";
        }
    return out;
}

inline std::string timeseries_csv(const RunResult& r)
{
    std::string out = "t,V,W_g,min_dist,active_index,n_effective\n";
    for (const auto& row : r.rows) {
        out += format_double(row.t);
        out += ',';
        out += format_double(row.V);
        out += ',';
        out += format_double(row.Wg.value());
        out += ',';
        out += format_double(row.min_dist);
        out += ',';
        if (row.active_index) out += std::to_string(*row.active_index);
        out += ',';
        out += std::to_string(row.n_effective);
        out += '\n';
    }
    return out;
}

namespace detail {

// Finite numbers as JSON numbers, infinities as strings, missing as null.
inline Json number_or_tag(std::optional<double> v)
{
    if (!v) return nullptr;
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    return *v;
}

inline const char* to_string(KernelCell::Near n)
{
    switch (n) {
    case KernelCell::Near::BlackHole: return "BlackHole";
    case KernelCell::Near::CollapsePrevention: return "CollapsePrevention";
    case KernelCell::Near::Conditional: return "Conditional";
    }
    return "Conditional";
}

inline const char* to_string(KernelCell::Far f)
{
    switch (f) {
    case KernelCell::Far::Safety: return "Safety";
    case KernelCell::Far::Basin: return "Basin";
    case KernelCell::Far::Conditional: return "Conditional";
    }
    return "Conditional";
}

inline Json limit_json(const LimitClass& l)
{
    switch (l.kind) {
    case LimitClass::Kind::Zero: return "Zero";
    case LimitClass::Kind::Infinite: return "Infinite";
    case LimitClass::Kind::Finite: return Json{{"Finite", l.value}};
    }
    return "Zero";
}

}  // namespace detail

inline Json regime_json(const RegimeReport& r)
{
    using detail::number_or_tag;
    Json j;
    j["label"] = to_string(r.label);
    j["kernel_cell"] = {{"near", detail::to_string(r.kernel_cell.near)},
                        {"far", detail::to_string(r.kernel_cell.far)},
                        {"alpha0", detail::limit_json(r.kernel_cell.alpha0)},
                        {"alpha_inf", detail::limit_json(r.kernel_cell.alpha_inf)}};
    j["black_hole"] = {{"sufficient", r.black_hole_sufficient}, {"threshold", number_or_tag(r.black_hole_threshold)}};
    j["safety"] = {{"sufficient", r.safety_sufficient},
                   {"eps", number_or_tag(r.safety_eps)},
                   {"mu", number_or_tag(r.safety_mu)},
                   {"entropy_threshold", number_or_tag(r.safety_entropy_threshold)}};
    j["basin_radius"] = number_or_tag(r.basin_radius);
    j["collapse_prevention"] = {{"applicable", r.collapse_prevention_applicable},
                                {"eps", number_or_tag(r.collapse_eps)},
                                {"delta", number_or_tag(r.collapse_delta)},
                                {"kappa", number_or_tag(r.collapse_kappa)}};
    j["extinction_time_bound"] = number_or_tag(r.extinction_time_bound);
    return j;
}

inline Json summary_object(const RunResult& r)
{
    Json j;
    j["regime"] = regime_json(r.regime);
    j["clustering_time"] = detail::number_or_tag(r.clustering_time);
    j["final_V"] = detail::number_or_tag(r.final_V);
    j["final_Wg"] = detail::number_or_tag(r.final_Wg.value());
    j["min_dist_min"] = detail::number_or_tag(r.min_dist_min);
    Json ev = Json::array();
    for (const auto& e : r.events) {
        Json x{{"kind", e.kind}, {"time", e.time}};
        if (!e.indices.empty()) x["indices"] = e.indices;
        if (e.kind == "Halving") x["halvings"] = e.halvings;
        ev.push_back(std::move(x));
    }
    j["events"] = std::move(ev);
    return j;
}

inline std::string summary_json(const RunResult& r) { return summary_object(r).dump(2) + "\n"; }

/// Write via a temporary file in the same directory, then rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

inline void write_outputs(const RunResult& r, const std::filesystem::path& dir)
{
    write_atomic(dir / "timeseries.csv", timeseries_csv(r));
    write_atomic(dir / "positions.csv", positions_csv(r));
    write_atomic(dir / "summary.json", summary_json(r));
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { M, Seed, V0Scale };

inline SweepAxis parse_axis(std::string_view name)
{
    if (name == "M") return SweepAxis::M;
    if (name == "seed") return SweepAxis::Seed;
    if (name == "V0-scale") return SweepAxis::V0Scale;
    throw ConfigError("sweep axis must be one of M, seed, V0-scale");
}

inline const char* to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::M: return "M";
    case SweepAxis::Seed: return "seed";
    case SweepAxis::V0Scale: return "V0-scale";
    }
    return "M";
}

/// Scenario with one axis set to `value`. V0-scale multiplies V(0) by the
/// value by scaling positions by its square root about the barycenter.
inline Scenario apply_axis(const Scenario& base, SweepAxis axis, double value)
{
    Scenario s = base;
    switch (axis) {
    case SweepAxis::M: s.control.M = value; break;
    case SweepAxis::Seed:
        if (!(value >= 0.0) || value != std::floor(value) || value > 9007199254740992.0)
            throw ConfigError("seed values must be non-negative integers");
        s.seed = static_cast<std::uint64_t>(value);
        break;
    case SweepAxis::V0Scale: {
        if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError("V0-scale values must be positive");
        auto init = resolve_initial(base);
        std::vector<double> bar(base.d, 0.0);
        for (const auto& p : init.positions)
            for (std::size_t k = 0; k < base.d; ++k) bar[k] += p[k] / static_cast<double>(init.positions.size());
        const double lambda = std::sqrt(value);
        for (auto& p : init.positions)
            for (std::size_t k = 0; k < base.d; ++k) p[k] = bar[k] + lambda * (p[k] - bar[k]);
        s.initial.kind = InitialSpec::Kind::Explicit;
        s.initial.positions = std::move(init.positions);
        s.initial.preset.clear();
        s.initial.lo = 0.0;
        s.initial.hi = 1.0;
        break;
    }
    }
    validate(s);
    return s;
}

/// Consensus if any merge happened; BasinEntered if the min distance reached
/// the basin radius without a merge; Declustered otherwise.
inline const char* outcome_label(const RunResult& r)
{
    if (r.clustering_time) return "Consensus";
    if (r.regime.basin_radius && r.min_dist_min <= *r.regime.basin_radius) return "BasinEntered";
    return "Declustered";
}

struct SweepRow {
    double value = 0.0;
    std::string outcome;
    RunResult result;
};

inline std::string grid_csv(SweepAxis axis, const std::vector<SweepRow>& rows)
{
    std::string out = std::string(to_string(axis)) + ",outcome,regime,clustering_time,final_V,final_Wg,min_dist_min\n";
    for (const auto& r : rows) {
        out += format_double(r.value) + "," + r.outcome + "," + to_string(r.result.regime.label) + ",";
        if (r.result.clustering_time) out += format_double(*r.result.clustering_time);
        out += "," + format_double(r.result.final_V) + "," + format_double(r.result.final_Wg.value()) + ","
               + format_double(r.result.min_dist_min) + "\n";
    }
    return out;
}

inline std::string run_directory_name(std::size_t index)
{
    std::string s = std::to_string(index);
    return "run_" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

/// One run per value, in order. When `out` is set, each run writes into
/// out/run_NNN and the grid goes to out/grid.csv.
inline std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis, const std::vector<double>& values,
                                   const std::optional<std::filesystem::path>& out = std::nullopt,
                                   unsigned max_parallel = 1)
{
    std::vector<Scenario> scenarios;
    for (double v : values) scenarios.push_back(apply_axis(base, axis, v));
    std::vector<SweepRow> rows(values.size());
    auto one = [&](std::size_t i) {
        rows[i].value = values[i];
        rows[i].result = run(scenarios[i]);
        rows[i].outcome = outcome_label(rows[i].result);
        if (out) write_outputs(rows[i].result, *out / run_directory_name(i));
    };
    const unsigned width = std::max(1u, max_parallel);
    for (std::size_t start = 0; start < values.size(); start += width) {
        std::vector<std::future<void>> batch;
        for (std::size_t i = start; i < std::min(values.size(), start + width); ++i)
            batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, one, i));
        for (auto& f : batch) f.get();
    }
    if (out) write_atomic(*out / "grid.csv", grid_csv(axis, rows));
    return rows;
}

}  // namespace hkctl::bench
