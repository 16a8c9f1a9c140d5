// hkctl: run, classify and sweep controlled consensus scenarios.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 simulation failure.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hkctl/hkctl.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSimulation = 3;

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw hkctl::bench::IoError("cannot read scenario file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<double> parse_values(const std::string& text)
{
    std::vector<double> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        const std::string tok = item.substr(b, e - b + 1);
        double v = 0.0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
            throw hkctl::ConfigError("not a number in --values: " + tok);
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse declustering control for Hegselmann-Krause dynamics"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, axis, values;

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write timeseries.csv, positions.csv, summary.json");
    sim->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sim->add_option("--out", out_dir, "Output directory (defaults to the scenario's outputs.directory)");

    auto* cls = app.add_subcommand("classify", "Print the regime report of a scenario's initial state as JSON");
    cls->add_option("--scenario", scenario_path, "Scenario JSON file")->required();

    auto* swp = app.add_subcommand("sweep", "Run a scenario over a list of values of one parameter");
    swp->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    swp->add_option("--axis", axis, "M, seed or V0-scale")->required();
    swp->add_option("--values", values, "Comma-separated values (may be empty)")->required();
    swp->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInvalid;
    }

    using namespace hkctl;
    try {
        const auto sc = bench::parse_scenario(read_file(scenario_path));
        if (*sim) {
            const auto dir = out_dir.empty() ? sc.output_dir : out_dir;
            if (dir.empty()) throw ConfigError("no output directory given");
            const auto res = bench::run(sc);
            bench::write_outputs(res, dir);
            std::cout << to_string(res.regime.label) << "\n";
        } else if (*cls) {
            const auto init = bench::resolve_initial(sc);
            const auto report = classify_state(Configuration(init.positions), sc.kernel.build(),
                                               sc.generator.build(), ControlBudget(sc.control.M));
            std::cout << bench::regime_json(report).dump(2) << "\n";
        } else {
            const auto ax = bench::parse_axis(axis);
            const auto vals = parse_values(values);
            const auto rows = bench::sweep(sc, ax, vals, std::filesystem::path(out_dir),
                                           std::max(1u, std::thread::hardware_concurrency()));
            for (const auto& r : rows) std::cout << bench::format_double(r.value) << " " << r.outcome << "\n";
        }
        return 0;
    } catch (const bench::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const GeometryError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const StiffnessError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const ClusterError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const ThresholdError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSimulation;
    }
}
