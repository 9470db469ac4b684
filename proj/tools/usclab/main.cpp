// usclab: run perturbation scenarios and check their verdicts.
//
//   usclab run <scenario|file.yaml> [--out DIR] [--seed N] [--threads N] [--strict] [--override k=v]...
//   usclab list-scenarios [--dir DIR]
//   usclab describe <name> [--dir DIR]
//   usclab verify-replay <record.json>

#include "record.hpp"

#include <CLI11.hpp>

#include <iostream>

#ifndef USC_SCENARIO_DIR
#define USC_SCENARIO_DIR "scenarios"
#endif

namespace {

using namespace usclab;

std::filesystem::path resolve(const std::string& what, const std::filesystem::path& dir) {
    if (std::filesystem::exists(what)) return what;
    const auto reg = scenario_registry(dir);
    auto it = reg.find(what);
    if (it == reg.end()) throw ConfigError("no scenario file or registered scenario named '" + what + "'");
    return it->second;
}

void print_verdicts(const std::vector<VerdictLine>& vs) {
    for (const auto& v : vs)
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << ": " << v.inequality << " (margin " << fmt(v.margin)
                  << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"usclab: entropy, exponents and reparametrization experiments"};
    app.require_subcommand(1);
    std::string dir = USC_SCENARIO_DIR;

    auto* run = app.add_subcommand("run", "run a scenario and write CSV, JSON and gnuplot outputs");
    std::string target, out = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool strict = false;
    std::vector<std::string> overrides;
    run->add_option("scenario", target, "scenario name or YAML path")->required();
    run->add_option("--out", out, "output directory");
    run->add_option("--seed", seed, "sampling seed");
    run->add_option("--threads", threads, "worker threads for rows");
    run->add_flag("--strict", strict, "treat estimator warnings as failures");
    run->add_option("--override", overrides, "key=value, dotted keys (e.g. sampling.points=1000)");
    run->add_option("--dir", dir, "scenario directory");

    auto* list = app.add_subcommand("list-scenarios", "list registered scenarios");
    list->add_option("--dir", dir, "scenario directory");

    auto* describe = app.add_subcommand("describe", "describe a scenario");
    std::string name;
    describe->add_option("name", name)->required();
    describe->add_option("--dir", dir, "scenario directory");

    auto* replay = app.add_subcommand("verify-replay", "re-check a JSON run record without recomputing orbits");
    std::string record;
    replay->add_option("record", record)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            if (seed) overrides.push_back("sampling.seed=" + std::to_string(*seed));
            const auto scenario = load_scenario(resolve(target, dir), overrides);
            const auto rec = run_scenario(scenario, threads);
            const auto files = write_record(rec, out);
            print_verdicts(rec.verdicts);
            for (const auto& w : rec.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "wrote " << files.csv.string() << ", " << files.json.string() << ", " << files.plot.string()
                      << "\n";
            if (!rec.all_pass()) return 1;
            if (strict && !rec.warnings.empty()) {
                std::cerr << "strict mode: " << rec.warnings.size() << " warning(s)\n";
                return 2;
            }
            return 0;
        }
        if (*list) {
            for (const auto& [n, path] : scenario_registry(dir)) {
                const auto s = load_scenario(path);
                std::cout << n << "  " << s.family << "  " << s.description << "\n";
            }
            return 0;
        }
        if (*describe) {
            const auto s = load_scenario(resolve(name, dir));
            std::cout << "name:        " << s.name << "\n"
                      << "family:      " << s.family << "\n"
                      << "description: " << s.description << "\n"
                      << "schedule:   ";
            for (double t : s.schedule) std::cout << " " << fmt(t);
            std::cout << "\nexercises:\n";
            for (const auto& e : s.exercises) std::cout << "  - " << e << "\n";
            std::cout << "sampling:    " << (s.sampling.kind == usc::SampleKind::lebesgue ? "lebesgue" : "orbit")
                      << ", " << s.sampling.points << " points, seed " << s.sampling.seed << "\n"
                      << "partition:   side " << fmt(s.sampling.partition_side) << "\n"
                      << "estimator:   depth " << s.sampling.entropy.depth << ", q " << s.sampling.q
                      << (s.sampling.compute_bound ? ", bound on" : ", bound off") << "\n";
            return 0;
        }
        if (*replay) {
            std::ifstream in(record);
            const auto j = json::parse(in);
            const auto res = verify_replay(j);
            print_verdicts(res.verdicts);
            for (const auto& p : res.problems) std::cout << "[FAIL] replay: " << p << "\n";
            std::cout << (res.ok() ? "replay verdict: PASS\n" : "replay verdict: FAIL\n");
            return res.ok() ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
