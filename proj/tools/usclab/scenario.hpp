#pragma once

// Scenario files: YAML trees naming a map family, a perturbation schedule
// and the sampling / partition / estimator settings. Every default lives in
// defaults_table().

#include "usc/reparam.hpp"
#include "usc/semicontinuity.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace usclab {

using usc::Diffeomorphism;
using usc::Mat;
using usc::Vec;

/// Line-tagged configuration problem.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Documented defaults, keyed by dotted path.
inline const std::map<std::string, std::string>& defaults_table() {
    static const std::map<std::string, std::string> table = {
        {"params.amplitude", "1.0"},          // perturbation scale for shear families
        {"params.k", "0.0"},                  // standard map base parameter
        {"params.a", "1.4"},                  // Henon
        {"params.b", "0.3"},
        {"params.omega", "0.6180339887498949"},  // rotation number of the extra circle
        {"params.dim", "2"},                  // identity
        {"sampling.kind", "lebesgue"},
        {"sampling.points", "100000"},
        {"sampling.burn_in", "1000"},
        {"sampling.seed", "1"},
        {"sampling.exponent_points", "64"},
        {"sampling.exponent_steps", "2000"},
        {"partition.side", "0.1"},
        {"partition.seed", "5"},
        {"estimator.depth", "12"},
        {"estimator.guard_ratio", "0.1"},
        {"estimator.q", "8"},
        {"estimator.bound", "true"},
        {"estimator.zeta", "0.02"},
        {"verdict.entropy_tolerance", "0.05"},
        {"verdict.tail_max_t", "0.02"},
        {"verdict.vacuous_exponent", "0.02"},
        {"verdict.component_tolerance", "0.05"},
        {"verdict.ruelle_tolerance", "0.05"},
        {"reparam.instances", "0"},
        {"reparam.seed", "3"},
        {"reparam.coverage_samples", "1000"},
    };
    return table;
}

struct ReparamConfig {
    int instances = 0;
    std::uint64_t seed = 3;
    std::size_t coverage_samples = 1000;
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<std::string> exercises;
    std::string family;
    std::map<std::string, double> params;
    std::optional<std::vector<double>> matrix;   // automorphism families
    std::vector<double> schedule;
    usc::SamplingConfig sampling;
    usc::ExperimentOptions verdict;
    double ruelle_tolerance = 0.05;
    std::optional<double> sigma_tolerance;       // tail |lambda_Sigma^+(t) - lambda_Sigma^+(0)|
    std::optional<int> r;
    std::optional<double> alpha;
    std::optional<double> upsilon;
    std::optional<double> log_constant;
    ReparamConfig reparam;
    YAML::Node source;                           // snapshot after overrides

    double param(const std::string& key) const {
        auto it = params.find(key);
        if (it != params.end()) return it->second;
        return std::stod(defaults_table().at("params." + key));
    }
};

inline const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = {
        "cat_shear", "automorphism", "standard_map", "henon", "identity", "doubling", "cat_rotation_3d", "circle_sine"};
    return names;
}

namespace detail {

inline std::string where(const YAML::Node& n) {
    const auto m = n.Mark();
    return m.line >= 0 ? "line " + std::to_string(m.line + 1) + ": " : "";
}

template <class T>
T read(const YAML::Node& parent, const std::string& section, const std::string& key) {
    const bool given = parent && parent[key];
    const YAML::Node n = given ? parent[key] : YAML::Node();
    const std::string path = section + "." + key;
    try {
        if (given) return n.as<T>();
        return YAML::Load(defaults_table().at(path)).as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where(n) + "'" + path + "' has the wrong type");
    } catch (const std::out_of_range&) {
        throw ConfigError("no default for '" + path + "'");
    }
}

inline void allow_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& keys) {
    if (!node) return;
    if (!node.IsMap()) throw ConfigError(where(node) + "'" + section + "' must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!keys.count(key))
            throw ConfigError(where(kv.first) + "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
}

}  // namespace detail

/// Sets a dotted key to a YAML-parsed value.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(assignment.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError("override value for '" + path + "' does not parse: " + e.what());
    }
    std::vector<std::string> parts;
    for (std::size_t from = 0;;) {
        const auto dot = path.find('.', from);
        parts.push_back(path.substr(from, dot - from));
        if (dot == std::string::npos) break;
        from = dot + 1;
    }
    // yaml-cpp nodes are handles; walk down by reassigning copies.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node child = chain.back()[parts[i]];
        if (!child) {
            chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
            child = chain.back()[parts[i]];
        }
        chain.push_back(child);
    }
    chain.back()[parts.back()] = value;
}

/// Validates a YAML tree and fills a Scenario.
inline Scenario parse_scenario(const YAML::Node& root) {
    using detail::read;
    if (!root.IsMap()) throw ConfigError("scenario must be a YAML mapping");
    detail::allow_keys(root, "", {"name", "description", "exercises", "family", "params", "matrix", "schedule",
                                  "sampling", "partition", "estimator", "verdict", "reparam"});
    Scenario s;
    s.source = YAML::Clone(root);
    if (!root["name"]) throw ConfigError("missing 'name'");
    if (!root["family"]) throw ConfigError("missing 'family'");
    s.name = root["name"].as<std::string>();
    s.description = root["description"] ? root["description"].as<std::string>() : "";
    if (root["exercises"]) s.exercises = root["exercises"].as<std::vector<std::string>>();
    s.family = root["family"].as<std::string>();
    const auto& fams = family_names();
    if (std::find(fams.begin(), fams.end(), s.family) == fams.end())
        throw ConfigError(detail::where(root["family"]) + "unknown family '" + s.family + "'");

    if (const auto p = root["params"]) {
        detail::allow_keys(p, "params", {"amplitude", "k", "a", "b", "omega", "dim"});
        for (const auto& kv : p) {
            try {
                s.params[kv.first.as<std::string>()] = kv.second.as<double>();
            } catch (const YAML::Exception&) {
                throw ConfigError(detail::where(kv.second) + "parameter '" + kv.first.as<std::string>() +
                                  "' must be a number");
            }
        }
    }
    if (const auto m = root["matrix"]) {
        try {
            s.matrix = m.as<std::vector<double>>();
        } catch (const YAML::Exception&) {
            throw ConfigError(detail::where(m) + "'matrix' must be a flat list of numbers");
        }
    }
    if (s.family == "automorphism" && !s.matrix) throw ConfigError("family 'automorphism' needs 'matrix'");

    if (!root["schedule"]) throw ConfigError("missing 'schedule'");
    try {
        s.schedule = root["schedule"].as<std::vector<double>>();
    } catch (const YAML::Exception&) {
        throw ConfigError(detail::where(root["schedule"]) + "'schedule' must be a list of numbers");
    }
    if (s.schedule.empty()) throw ConfigError(detail::where(root["schedule"]) + "'schedule' is empty");

    const auto smp = root["sampling"];
    detail::allow_keys(smp, "sampling",
                       {"kind", "points", "orbit_start", "burn_in", "seed", "exponent_points", "exponent_steps"});
    auto& cfg = s.sampling;
    const auto kind = read<std::string>(smp, "sampling", "kind");
    if (kind == "lebesgue") {
        cfg.kind = usc::SampleKind::lebesgue;
    } else if (kind == "orbit") {
        cfg.kind = usc::SampleKind::orbit;
        if (!smp["orbit_start"]) throw ConfigError(detail::where(smp) + "orbit sampling needs 'orbit_start'");
        const auto st = smp["orbit_start"].as<std::vector<double>>();
        cfg.orbit_start = Vec::Map(st.data(), static_cast<Eigen::Index>(st.size()));
    } else {
        throw ConfigError(detail::where(smp["kind"]) + "sampling.kind must be 'lebesgue' or 'orbit'");
    }
    cfg.points = read<std::size_t>(smp, "sampling", "points");
    cfg.burn_in = read<long>(smp, "sampling", "burn_in");
    cfg.seed = read<std::uint64_t>(smp, "sampling", "seed");
    cfg.exponent_points = read<std::size_t>(smp, "sampling", "exponent_points");
    cfg.exponent_steps = read<long>(smp, "sampling", "exponent_steps");
    if (cfg.points < 1) throw ConfigError(detail::where(smp["points"]) + "sampling.points must be >= 1");

    const auto part = root["partition"];
    detail::allow_keys(part, "partition", {"side", "dims", "seed"});
    cfg.partition_side = read<double>(part, "partition", "side");
    cfg.partition_seed = read<std::uint64_t>(part, "partition", "seed");
    if (!(cfg.partition_side > 0.0)) throw ConfigError(detail::where(part["side"]) + "partition.side must be > 0");
    if (part && part["dims"]) {
        try {
            cfg.partition_dims = part["dims"].as<std::vector<int>>();
        } catch (const YAML::Exception&) {
            throw ConfigError(detail::where(part["dims"]) + "partition.dims must be a list of integers");
        }
        for (int n : cfg.partition_dims)
            if (n < 1) throw ConfigError(detail::where(part["dims"]) + "partition.dims entries must be >= 1");
    }

    const auto est = root["estimator"];
    detail::allow_keys(est, "estimator",
                       {"depth", "guard_ratio", "q", "bound", "zeta", "r", "alpha", "upsilon", "log_constant"});
    cfg.entropy.depth = read<int>(est, "estimator", "depth");
    cfg.entropy.guard_ratio = read<double>(est, "estimator", "guard_ratio");
    cfg.q = read<long>(est, "estimator", "q");
    cfg.compute_bound = read<bool>(est, "estimator", "bound");
    cfg.zeta = read<double>(est, "estimator", "zeta");
    if (cfg.entropy.depth < 2) throw ConfigError(detail::where(est["depth"]) + "estimator.depth must be >= 2");
    if (cfg.q < 1) throw ConfigError(detail::where(est["q"]) + "estimator.q must be >= 1");
    if (est && est["r"]) s.r = est["r"].as<int>();
    if (est && est["alpha"]) s.alpha = est["alpha"].as<double>();
    if (est && est["upsilon"]) s.upsilon = est["upsilon"].as<double>();
    if (est && est["log_constant"]) s.log_constant = est["log_constant"].as<double>();
    if (s.log_constant) cfg.bound.log_constant = s.log_constant;

    const auto ver = root["verdict"];
    detail::allow_keys(ver, "verdict", {"entropy_tolerance", "tail_max_t", "vacuous_exponent", "component_tolerance",
                                        "ruelle_tolerance", "sigma_tolerance"});
    s.verdict.entropy_tolerance = read<double>(ver, "verdict", "entropy_tolerance");
    s.verdict.tail_max_t = read<double>(ver, "verdict", "tail_max_t");
    s.verdict.vacuous_exponent = read<double>(ver, "verdict", "vacuous_exponent");
    s.verdict.component_tolerance = read<double>(ver, "verdict", "component_tolerance");
    s.ruelle_tolerance = read<double>(ver, "verdict", "ruelle_tolerance");
    if (ver && ver["sigma_tolerance"]) s.sigma_tolerance = ver["sigma_tolerance"].as<double>();

    const auto rep = root["reparam"];
    detail::allow_keys(rep, "reparam", {"instances", "seed", "coverage_samples"});
    s.reparam.instances = read<int>(rep, "reparam", "instances");
    s.reparam.seed = read<std::uint64_t>(rep, "reparam", "seed");
    s.reparam.coverage_samples = read<std::size_t>(rep, "reparam", "coverage_samples");
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw ConfigError("cannot read scenario file " + path.string());
    } catch (const YAML::ParserException& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(root, o);
    try {
        return parse_scenario(root);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const YAML::Exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

/// Scenario files in a directory, by name.
inline std::map<std::string, std::filesystem::path> scenario_registry(const std::filesystem::path& dir) {
    std::map<std::string, std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".yaml") out[e.path().stem().string()] = e.path();
    return out;
}

/// The map f_t of a scenario, with regularity and cap overrides applied.
inline Diffeomorphism build_map(const Scenario& s, double t) {
    namespace maps = usc::maps;
    auto make = [&]() -> Diffeomorphism {
        const double amp = s.param("amplitude");
        if (s.family == "cat_shear") return maps::perturbed_automorphism(maps::cat_matrix(), amp * t, 0, 1, "cat_shear");
        if (s.family == "automorphism") {
            const auto& m = *s.matrix;
            const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.size()))));
            if (d * d != static_cast<int>(m.size())) throw ConfigError("'matrix' must have d*d entries");
            Mat a(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) a(i, j) = m[static_cast<std::size_t>(i * d + j)];
            return maps::perturbed_automorphism(a, amp * t, 0, 1, "automorphism");
        }
        if (s.family == "standard_map") return maps::standard_map(s.param("k") + amp * t);
        if (s.family == "henon") return maps::henon(s.param("a") + amp * t, s.param("b"));
        if (s.family == "identity") return maps::identity(static_cast<int>(s.param("dim")));
        if (s.family == "doubling") return maps::doubling();
        if (s.family == "circle_sine") return maps::circle_sine(amp * t);
        if (s.family == "cat_rotation_3d")
            return maps::product_with_rotation(maps::perturbed_automorphism(maps::cat_matrix(), amp * t),
                                               s.param("omega"));
        throw ConfigError("unknown family '" + s.family + "'");
    };
    auto f = make();
    if (!s.r && !s.alpha && !s.upsilon) return f;
    usc::Regularity reg = f.regularity();
    if (s.r) reg.r = *s.r;
    if (s.alpha) reg.alpha = *s.alpha;
    return Diffeomorphism(f.model_ptr(), reg, s.upsilon ? *s.upsilon : f.upsilon());
}

}  // namespace usclab
