#pragma once

// Scenario files: typed description, strict JSON parsing, canonical
// serialization, presets and a randomized generator for schema tests.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hkctl/core.hpp"
#include "hkctl/detail/integrator.hpp"
#include "hkctl/random.hpp"

namespace hkctl::bench {

using Json = nlohmann::ordered_json;

enum class Mode { Micro, Kinetic };

struct KernelSpec {
    InteractionKernel::Family family = InteractionKernel::Family::PowerLaw;
    double parameter = -2.0;  // exponent, constant value or confidence radius; unused for shifted

    [[nodiscard]] InteractionKernel build() const
    {
        switch (family) {
        case InteractionKernel::Family::PowerLaw: return InteractionKernel::power_law(parameter);
        case InteractionKernel::Family::Constant: return InteractionKernel::constant(parameter);
        case InteractionKernel::Family::Shifted: return InteractionKernel::shifted();
        case InteractionKernel::Family::BoundedConfidence: return InteractionKernel::bounded_confidence(parameter);
        }
        throw ConfigError("unknown kernel family");
    }
    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct GeneratorSpec {
    bool shifted = false;
    double delta = 0.0;  // shifted only

    [[nodiscard]] EntropyGenerator build() const
    {
        return shifted ? EntropyGenerator::shifted_inverse(delta) : EntropyGenerator::inverse();
    }
    friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

enum class PolicyTag { Zero, VarianceMax, EntropyMax, PartialEntropyMax, RandomFeasible, Confinement };

struct ControlSpec {
    PolicyTag policy = PolicyTag::Zero;
    double M = 1.0;
    std::optional<double> delta;                 // partial_entropy_max
    std::optional<std::uint64_t> seed;           // random_feasible
    std::optional<double> volume_budget;         // kinetic variance/entropy max, confinement
    std::vector<std::vector<double>> centers;    // confinement
    std::optional<double> radius;                // confinement
    friend bool operator==(const ControlSpec&, const ControlSpec&) = default;
};

struct InitialSpec {
    enum class Kind { Explicit, UniformBox, Preset };
    Kind kind = Kind::UniformBox;
    std::vector<std::vector<double>> positions;  // explicit
    double lo = 0.0, hi = 1.0;                   // uniform box
    std::string preset;                          // preset
    std::optional<std::vector<double>> weights;  // kinetic only
    friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct Scenario {
    std::uint64_t seed = 0;
    Mode mode = Mode::Micro;
    std::size_t N = 2;
    std::size_t d = 1;
    KernelSpec kernel;
    GeneratorSpec generator;
    ControlSpec control;
    IntegratorSettings integrator;
    InitialSpec initial;
    std::string output_dir = "out";
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// ---------------------------------------------------------------------------
// Names

inline const char* to_string(Mode m) { return m == Mode::Micro ? "micro" : "kinetic"; }

inline const char* to_string(InteractionKernel::Family f)
{
    switch (f) {
    case InteractionKernel::Family::PowerLaw: return "power_law";
    case InteractionKernel::Family::Constant: return "constant";
    case InteractionKernel::Family::Shifted: return "shifted";
    case InteractionKernel::Family::BoundedConfidence: return "bounded_confidence";
    }
    return "power_law";
}

inline const char* to_string(PolicyTag p)
{
    switch (p) {
    case PolicyTag::Zero: return "zero";
    case PolicyTag::VarianceMax: return "variance_max";
    case PolicyTag::EntropyMax: return "entropy_max";
    case PolicyTag::PartialEntropyMax: return "partial_entropy_max";
    case PolicyTag::RandomFeasible: return "random_feasible";
    case PolicyTag::Confinement: return "confinement";
    }
    return "zero";
}

inline const char* to_string(InitialSpec::Kind k)
{
    switch (k) {
    case InitialSpec::Kind::Explicit: return "explicit";
    case InitialSpec::Kind::UniformBox: return "uniform_box";
    case InitialSpec::Kind::Preset: return "preset";
    }
    return "explicit";
}

// ---------------------------------------------------------------------------
// Presets. Positions were drawn once from a seeded uniform sample on [0, 1]
// (gaps for ba10 and cp10), then rescaled about the barycenter to hit the
// target functional, and rounded to the digits shown.

struct Preset {
    std::string name;
    std::vector<double> positions;  // d = 1
};

inline const std::vector<Preset>& presets()
{
    static const std::vector<Preset> table{
        // V(0) = 0.0977, half the black-hole threshold 0.1953 for M = 0.16.
        {"bh10", {-0.615047, -0.596129, -0.513446, -0.205046, -0.081452, 0.168057, 0.365432, 0.384266, 0.546028, 0.547336}},
        // sum 1/D^2 = 1.28e-4, half the safety limit M^2/N^2.
        {"sz10", {696.752, 962.531, 1183.822, 2723.964, 3979.492, 4363.857, 4485.023, 5082.787, 6750.369, 9592.449}},
        // every gap in [1.05, 1.55], so min distance 1.096 > 1.
        {"ba10", {-5.661886, -4.493987, -3.229433, -2.133297, -0.786995, 0.654354, 2.138143, 3.351371, 4.456161, 5.705565}},
        // one pair at 0.0268 giving W_g(0) = -7.2.
        {"cp10", {-0.026792, 0.0, 0.591959, 1.169325, 1.846094, 2.169955, 2.746163, 3.415122, 3.905395, 4.340752}},
    };
    return table;
}

inline const Preset& find_preset(std::string_view name)
{
    for (const auto& p : presets())
        if (p.name == name) return p;
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Validation

inline void validate(const Scenario& s)
{
    if (s.N < 2) throw ConfigError("N must be at least 2");
    if (s.d < 1) throw ConfigError("d must be at least 1");
    (void)s.kernel.build();
    (void)s.generator.build();
    s.integrator.validate();
    const auto& c = s.control;
    if (!(c.M > 0.0) || !std::isfinite(c.M)) throw ConfigError("control M must be positive");

    const bool kin = s.mode == Mode::Kinetic;
    const bool need_delta = c.policy == PolicyTag::PartialEntropyMax;
    const bool need_seed = c.policy == PolicyTag::RandomFeasible;
    const bool need_volume = kin && (c.policy == PolicyTag::VarianceMax || c.policy == PolicyTag::EntropyMax
                                     || c.policy == PolicyTag::Confinement);
    const bool need_balls = c.policy == PolicyTag::Confinement;
    if (kin && (need_delta || need_seed)) throw ConfigError(std::string("policy ") + to_string(c.policy) + " is micro-only");
    if (!kin && need_balls) throw ConfigError("policy confinement is kinetic-only");
    if (c.delta.has_value() != need_delta) throw ConfigError("control.delta present iff policy is partial_entropy_max");
    if (c.seed.has_value() != need_seed) throw ConfigError("control.seed present iff policy is random_feasible");
    if (c.volume_budget.has_value() != need_volume) throw ConfigError("control.volume_budget required by kinetic region policies only");
    if (c.radius.has_value() != need_balls || (!c.centers.empty()) != need_balls)
        throw ConfigError("control.centers and control.radius present iff policy is confinement");
    if (c.delta && !(*c.delta > 0.0)) throw ConfigError("control.delta must be positive");
    if (c.volume_budget && !(*c.volume_budget > 0.0)) throw ConfigError("control.volume_budget must be positive");
    if (c.radius && !(*c.radius > 0.0)) throw ConfigError("control.radius must be positive");
    for (const auto& x : c.centers)
        if (x.size() != s.d) throw ConfigError("control center dimension does not match d");

    const auto& in = s.initial;
    switch (in.kind) {
    case InitialSpec::Kind::Explicit:
        if (in.positions.size() != s.N) throw ConfigError("initial.positions must list N points");
        for (const auto& p : in.positions) {
            if (p.size() != s.d) throw ConfigError("initial position dimension does not match d");
            for (double v : p)
                if (!std::isfinite(v)) throw ConfigError("non-finite initial position");
        }
        break;
    case InitialSpec::Kind::UniformBox:
        if (!(in.lo < in.hi) || !std::isfinite(in.lo) || !std::isfinite(in.hi))
            throw ConfigError("initial box needs lo < hi");
        break;
    case InitialSpec::Kind::Preset: {
        const auto& p = find_preset(in.preset);
        if (s.N != p.positions.size() || s.d != 1) throw ConfigError("preset " + p.name + " needs N = 10 and d = 1");
        break;
    }
    }
    if (in.weights) {
        if (!kin) throw ConfigError("initial.weights is kinetic-only");
        if (in.weights->size() != s.N) throw ConfigError("initial.weights must have N entries");
        double total = 0.0;
        for (double w : *in.weights) {
            if (!(w >= 0.0)) throw ConfigError("weights must be non-negative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
    }
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline void check_keys(const Json& j, std::string_view where, const std::set<std::string>& required,
                       const std::set<std::string>& optional = {})
{
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (!required.count(k) && !optional.count(k))
            throw ConfigError("unknown key '" + k + "' in " + std::string(where));
    }
    for (const auto& k : required)
        if (!j.contains(k)) throw ConfigError("missing key '" + k + "' in " + std::string(where));
}

inline double num(const Json& j, const char* key, std::string_view where)
{
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + " must be a number");
    return v.get<double>();
}

inline std::uint64_t uint(const Json& j, const char* key, std::string_view where)
{
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(std::string(where) + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::string str(const Json& j, const char* key, std::string_view where)
{
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(std::string(where) + "." + key + " must be a string");
    return v.get<std::string>();
}

inline std::vector<std::vector<double>> points(const Json& j, std::string_view where)
{
    if (!j.is_array()) throw ConfigError(std::string(where) + " must be an array of points");
    std::vector<std::vector<double>> out;
    for (const auto& p : j) {
        if (!p.is_array()) throw ConfigError(std::string(where) + " entries must be arrays");
        std::vector<double> q;
        for (const auto& v : p) {
            if (!v.is_number()) throw ConfigError(std::string(where) + " coordinates must be numbers");
            q.push_back(v.get<double>());
        }
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace detail

inline Json to_json(const Scenario& s)
{
    Json j;
    j["seed"] = s.seed;
    j["mode"] = to_string(s.mode);
    j["N"] = s.N;
    j["d"] = s.d;

    Json k;
    k["family"] = to_string(s.kernel.family);
    switch (s.kernel.family) {
    case InteractionKernel::Family::PowerLaw: k["exponent"] = s.kernel.parameter; break;
    case InteractionKernel::Family::Constant: k["value"] = s.kernel.parameter; break;
    case InteractionKernel::Family::BoundedConfidence: k["radius"] = s.kernel.parameter; break;
    case InteractionKernel::Family::Shifted: break;
    }
    j["kernel"] = k;

    Json g;
    g["family"] = s.generator.shifted ? "shifted_inverse" : "inverse";
    if (s.generator.shifted) g["delta"] = s.generator.delta;
    j["generator"] = g;

    Json c;
    c["policy"] = to_string(s.control.policy);
    c["M"] = s.control.M;
    if (s.control.delta) c["delta"] = *s.control.delta;
    if (s.control.seed) c["seed"] = *s.control.seed;
    if (s.control.volume_budget) c["volume_budget"] = *s.control.volume_budget;
    if (!s.control.centers.empty()) c["centers"] = s.control.centers;
    if (s.control.radius) c["radius"] = *s.control.radius;
    j["control"] = c;

    const auto& it = s.integrator;
    j["integrator"] = {{"dt", it.dt},           {"t_final", it.t_final},           {"merge_tol", it.merge_tol},
                       {"rhs_cap", it.rhs_cap}, {"max_halvings", it.max_halvings}, {"record_every", it.record_every}};

    Json in;
    in["kind"] = to_string(s.initial.kind);
    switch (s.initial.kind) {
    case InitialSpec::Kind::Explicit: in["positions"] = s.initial.positions; break;
    case InitialSpec::Kind::UniformBox:
        in["lo"] = s.initial.lo;
        in["hi"] = s.initial.hi;
        break;
    case InitialSpec::Kind::Preset: in["name"] = s.initial.preset; break;
    }
    if (s.initial.weights) in["weights"] = *s.initial.weights;
    j["initial"] = in;

    j["outputs"] = {{"directory", s.output_dir}};
    return j;
}

inline Scenario from_json(const Json& j)
{
    using detail::check_keys;
    using detail::num;
    check_keys(j, "scenario", {"seed", "mode", "N", "d", "kernel", "generator", "control", "integrator", "initial", "outputs"});
    Scenario s;
    s.seed = detail::uint(j, "seed", "scenario");
    const auto mode = detail::str(j, "mode", "scenario");
    if (mode == "micro") s.mode = Mode::Micro;
    else if (mode == "kinetic") s.mode = Mode::Kinetic;
    else throw ConfigError("mode must be 'micro' or 'kinetic'");
    s.N = detail::uint(j, "N", "scenario");
    s.d = detail::uint(j, "d", "scenario");

    {
        const auto& k = j.at("kernel");
        check_keys(k, "kernel", {"family"}, {"exponent", "value", "radius"});
        const auto fam = detail::str(k, "family", "kernel");
        auto only = [&](const char* key) {
            check_keys(k, "kernel", {"family", key});
            s.kernel.parameter = num(k, key, "kernel");
        };
        if (fam == "power_law") {
            s.kernel.family = InteractionKernel::Family::PowerLaw;
            only("exponent");
        } else if (fam == "constant") {
            s.kernel.family = InteractionKernel::Family::Constant;
            only("value");
        } else if (fam == "bounded_confidence") {
            s.kernel.family = InteractionKernel::Family::BoundedConfidence;
            only("radius");
        } else if (fam == "shifted") {
            check_keys(k, "kernel", {"family"});
            s.kernel.family = InteractionKernel::Family::Shifted;
            s.kernel.parameter = 0.0;
        } else {
            throw ConfigError("unknown kernel family '" + fam + "'");
        }
    }
    {
        const auto& g = j.at("generator");
        check_keys(g, "generator", {"family"}, {"delta"});
        const auto fam = detail::str(g, "family", "generator");
        if (fam == "inverse") {
            check_keys(g, "generator", {"family"});
        } else if (fam == "shifted_inverse") {
            check_keys(g, "generator", {"family", "delta"});
            s.generator.shifted = true;
            s.generator.delta = num(g, "delta", "generator");
        } else {
            throw ConfigError("unknown generator family '" + fam + "'");
        }
    }
    {
        const auto& c = j.at("control");
        check_keys(c, "control", {"policy", "M"}, {"delta", "seed", "volume_budget", "centers", "radius"});
        const auto pol = detail::str(c, "policy", "control");
        bool found = false;
        for (auto t : {PolicyTag::Zero, PolicyTag::VarianceMax, PolicyTag::EntropyMax, PolicyTag::PartialEntropyMax,
                       PolicyTag::RandomFeasible, PolicyTag::Confinement})
            if (pol == to_string(t)) {
                s.control.policy = t;
                found = true;
            }
        if (!found) throw ConfigError("unknown control policy '" + pol + "'");
        s.control.M = num(c, "M", "control");
        if (c.contains("delta")) s.control.delta = num(c, "delta", "control");
        if (c.contains("seed")) s.control.seed = detail::uint(c, "seed", "control");
        if (c.contains("volume_budget")) s.control.volume_budget = num(c, "volume_budget", "control");
        if (c.contains("centers")) s.control.centers = detail::points(c.at("centers"), "control.centers");
        if (c.contains("radius")) s.control.radius = num(c, "radius", "control");
    }
    {
        const auto& it = j.at("integrator");
        check_keys(it, "integrator", {}, {"dt", "t_final", "merge_tol", "rhs_cap", "max_halvings", "record_every"});
        auto& st = s.integrator;
        if (it.contains("dt")) st.dt = num(it, "dt", "integrator");
        if (it.contains("t_final")) st.t_final = num(it, "t_final", "integrator");
        if (it.contains("merge_tol")) st.merge_tol = num(it, "merge_tol", "integrator");
        if (it.contains("rhs_cap")) st.rhs_cap = num(it, "rhs_cap", "integrator");
        if (it.contains("max_halvings")) st.max_halvings = static_cast<int>(detail::uint(it, "max_halvings", "integrator"));
        if (it.contains("record_every")) st.record_every = static_cast<int>(detail::uint(it, "record_every", "integrator"));
    }
    {
        const auto& in = j.at("initial");
        check_keys(in, "initial", {"kind"}, {"positions", "lo", "hi", "name", "weights"});
        const auto kind = detail::str(in, "kind", "initial");
        if (kind == "explicit") {
            check_keys(in, "initial", {"kind", "positions"}, {"weights"});
            s.initial.kind = InitialSpec::Kind::Explicit;
            s.initial.positions = detail::points(in.at("positions"), "initial.positions");
        } else if (kind == "uniform_box") {
            check_keys(in, "initial", {"kind", "lo", "hi"}, {"weights"});
            s.initial.kind = InitialSpec::Kind::UniformBox;
            s.initial.lo = num(in, "lo", "initial");
            s.initial.hi = num(in, "hi", "initial");
        } else if (kind == "preset") {
            check_keys(in, "initial", {"kind", "name"}, {"weights"});
            s.initial.kind = InitialSpec::Kind::Preset;
            s.initial.preset = detail::str(in, "name", "initial");
        } else {
            throw ConfigError("unknown initial kind '" + kind + "'");
        }
        if (in.contains("weights")) {
            const auto& w = in.at("weights");
            if (!w.is_array()) throw ConfigError("initial.weights must be an array");
            std::vector<double> ws;
            for (const auto& v : w) {
                if (!v.is_number()) throw ConfigError("initial.weights entries must be numbers");
                ws.push_back(v.get<double>());
            }
            s.initial.weights = std::move(ws);
        }
    }
    {
        const auto& o = j.at("outputs");
        check_keys(o, "outputs", {"directory"});
        s.output_dir = detail::str(o, "directory", "outputs");
    }
    validate(s);
    return s;
}

inline Scenario parse_scenario(std::string_view text)
{
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed scenario JSON: ") + e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
}

inline std::string serialize_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Presets as full scenarios

inline Scenario preset_scenario(std::string_view name)
{
    (void)find_preset(name);
    Scenario s;
    s.seed = 0;
    s.mode = Mode::Micro;
    s.N = 10;
    s.d = 1;
    s.initial.kind = InitialSpec::Kind::Preset;
    s.initial.preset = std::string(name);
    s.output_dir = "out/" + std::string(name);
    s.integrator.dt = 1e-3;
    s.integrator.record_every = 10;
    if (name == "bh10" || name == "sz10") {
        s.kernel = {InteractionKernel::Family::PowerLaw, -2.0};
        s.control.policy = PolicyTag::EntropyMax;
        s.control.M = 0.16;
        s.integrator.t_final = name == "bh10" ? 40.0 : 50.0;
        if (name == "sz10") {
            s.integrator.dt = 1e-2;
            s.integrator.record_every = 1;
        }
    } else if (name == "ba10") {
        s.kernel = {InteractionKernel::Family::PowerLaw, -0.5};
        s.control.policy = PolicyTag::EntropyMax;
        s.control.M = 1.0;
        s.integrator.t_final = 20.0;
    } else {
        s.kernel = {InteractionKernel::Family::PowerLaw, -0.5};
        s.control.policy = PolicyTag::PartialEntropyMax;
        s.control.M = 1.0;
        s.control.delta = 0.0025;  // collapse threshold for M = 1, N = 10
        s.integrator.dt = 2e-4;
        s.integrator.t_final = 50.0;
        s.integrator.record_every = 50;
    }
    validate(s);
    return s;
}

/// Random valid scenario, used by the round-trip tests.
inline Scenario random_scenario(Rng& rng)
{
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.next_u64() % n); };
    Scenario s;
    s.seed = rng.next_u64();
    s.mode = pick(2) == 0 ? Mode::Micro : Mode::Kinetic;
    s.N = 2 + pick(20);
    s.d = 1 + pick(3);
    switch (pick(4)) {
    case 0: s.kernel = {InteractionKernel::Family::PowerLaw, rng.uniform(-3.0, 2.0)}; break;
    case 1: s.kernel = {InteractionKernel::Family::Constant, rng.uniform(0.0, 3.0)}; break;
    case 2: s.kernel = {InteractionKernel::Family::Shifted, 0.0}; break;
    default: s.kernel = {InteractionKernel::Family::BoundedConfidence, rng.uniform(0.1, 3.0)}; break;
    }
    if (pick(2) == 0) s.generator = {true, rng.uniform(0.01, 2.0)};
    s.control.M = rng.uniform(0.01, 5.0);
    if (s.mode == Mode::Micro) {
        s.control.policy = std::array{PolicyTag::Zero, PolicyTag::VarianceMax, PolicyTag::EntropyMax,
                                      PolicyTag::PartialEntropyMax, PolicyTag::RandomFeasible}[pick(5)];
        if (s.control.policy == PolicyTag::PartialEntropyMax) s.control.delta = rng.uniform(1e-4, 1.0);
        if (s.control.policy == PolicyTag::RandomFeasible) s.control.seed = rng.next_u64();
    } else {
        s.control.policy = std::array{PolicyTag::Zero, PolicyTag::VarianceMax, PolicyTag::EntropyMax,
                                      PolicyTag::Confinement}[pick(4)];
        if (s.control.policy != PolicyTag::Zero) s.control.volume_budget = rng.uniform(0.1, 10.0);
        if (s.control.policy == PolicyTag::Confinement) {
            s.control.radius = rng.uniform(0.01, 0.5);
            for (std::size_t i = 0, n = 1 + pick(4); i < n; ++i) {
                std::vector<double> c;
                for (std::size_t k = 0; k < s.d; ++k) c.push_back(rng.uniform(-10.0, 10.0));
                s.control.centers.push_back(c);
            }
        }
    }
    s.integrator.dt = rng.uniform(1e-5, 1e-1);
    s.integrator.t_final = rng.uniform(0.1, 100.0);
    s.integrator.merge_tol = rng.uniform(1e-12, 1e-6);
    s.integrator.rhs_cap = rng.uniform(1.0, 1e8);
    s.integrator.max_halvings = static_cast<int>(pick(80));
    s.integrator.record_every = 1 + static_cast<int>(pick(100));
    switch (pick(2)) {
    case 0: {
        s.initial.kind = InitialSpec::Kind::Explicit;
        for (std::size_t i = 0; i < s.N; ++i) {
            std::vector<double> p;
            for (std::size_t k = 0; k < s.d; ++k) p.push_back(rng.normal() * std::pow(10.0, rng.uniform(-3, 3)));
            s.initial.positions.push_back(p);
        }
        break;
    }
    default:
        s.initial.kind = InitialSpec::Kind::UniformBox;
        s.initial.lo = rng.uniform(-10.0, 0.0);
        s.initial.hi = s.initial.lo + rng.uniform(0.1, 10.0);
        break;
    }
    if (s.mode == Mode::Kinetic && pick(2) == 0) {
        // Powers of two sum exactly to 1.
        std::vector<double> w(s.N, 0.0);
        double left = 1.0;
        for (std::size_t i = 0; i + 1 < s.N; ++i) {
            left *= 0.5;
            w[i] = left;
        }
        w.back() = left;
        s.initial.weights = w;
    }
    s.output_dir = "out/run_" + std::to_string(rng.next_u64() % 100000);
    validate(s);
    return s;
}

}  // namespace hkctl::bench
