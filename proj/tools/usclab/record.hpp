#pragma once

// Running a scenario, the persisted run record (CSV + JSON sidecar + gnuplot
// script) and replay verification from the JSON alone.

#include "scenario.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace usclab {

inline constexpr const char* kToolVersion = "1.0.0";

using nlohmann::json;

/// One reparametrization instance on the scenario's unperturbed map.
struct ReparamRecord {
    std::string map;
    std::string curve;
    int chi_plus = 0;
    int chi = 0;
    int r = 1;
    double alpha = 1.0;
    double epsilon = 0.0;
    double log_constant = 0.0;   // log C_{r,alpha}
    double log_size = 0.0;       // log |Theta|
    double log_bound = 0.0;      // as computed by the run
    double worst_ratio = 0.0;
    double margin = 1.01;
    std::size_t sampled_checked = 0;
    std::size_t sampled_bounded = 0;
    std::size_t coverage_sampled = 0;
    std::size_t coverage_misses = 0;
};

struct VerdictLine {
    std::string name;
    std::string inequality;
    double margin = 0.0;   // >= 0 passes
    bool pass = false;
};

struct RunRecord {
    Scenario scenario;
    usc::ExperimentTable table;
    std::vector<ReparamRecord> reparam;
    std::vector<VerdictLine> verdicts;
    std::vector<std::string> warnings;
    double wall_clock = 0.0;

    bool all_pass() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const VerdictLine& v) { return v.pass; });
    }
};

// ---------------------------------------------------------------------------
// Verdicts

struct VerdictInputs {
    std::vector<usc::ExperimentRow> rows;
    usc::ExperimentSummary summary;
    double ruelle_tolerance = 0.05;
    std::optional<double> sigma_tolerance;
    double component_tolerance = 0.05;
    std::vector<ReparamRecord> reparam;
};

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

/// Every verdict names its inequality and reports a signed margin.
inline std::vector<VerdictLine> compute_verdicts(const VerdictInputs& in) {
    std::vector<VerdictLine> out;
    const auto& s = in.summary;
    out.push_back({"semicontinuity", "max tail h_t <= h_0 + tol (" + std::string(usc::to_string(s.verdict)) + ")",
                   s.margin, s.verdict != usc::Verdict::fail});
    for (const auto& row : in.rows) {
        if (!row.has_entropy) continue;
        const double m = row.lambda_sigma_plus - row.entropy + in.ruelle_tolerance;
        out.push_back({"ruelle t=" + fmt(row.t), "lambda_Sigma^+ - h >= -" + fmt(in.ruelle_tolerance), m, m >= 0.0});
    }
    for (const auto& row : in.rows) {
        if (!row.bound) continue;
        const auto& b = *row.bound;
        const double m = b.total + b.tolerance - b.lhs;
        out.push_back({"entropy bound t=" + fmt(row.t) + (b.inverse ? " (inverse)" : ""), "lhs <= total + tol", m,
                       m >= 0.0});
    }
    if (in.sigma_tolerance) {
        const double m = *in.sigma_tolerance - s.max_sigma_deviation;
        out.push_back({"sigma continuity", "max tail |lambda_Sigma^+(t) - lambda_Sigma^+(0)| <= " +
                                               fmt(*in.sigma_tolerance), m, m >= 0.0});
    }
    if (s.component_check_applies) {
        const double m = in.component_tolerance - s.component_deviation;
        out.push_back({"component exponents", "max tail |lambda^+(mu1_t) - lambda^+(mu1_0)| <= " +
                                                  fmt(in.component_tolerance), m, m >= 0.0});
    }
    for (std::size_t i = 0; i < in.reparam.size(); ++i) {
        const auto& r = in.reparam[i];
        const std::string tag = "reparam #" + std::to_string(i);
        const double bound = r.log_constant + (r.chi_plus - r.chi) / (r.r - 1 + r.alpha);
        out.push_back({tag + " size", "log|Theta| <= log C + (chi+ - chi)/(r-1+alpha)", bound + 1e-12 - r.log_size,
                       r.log_size <= bound + 1e-12});
        out.push_back({tag + " bounded", "certificate ratio <= margin and sampled members bounded",
                       r.margin - r.worst_ratio, r.worst_ratio <= r.margin && r.sampled_bounded == r.sampled_checked});
        out.push_back({tag + " coverage", "coverage misses == 0", -static_cast<double>(r.coverage_misses),
                       r.coverage_misses == 0});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Running

inline std::vector<ReparamRecord> run_reparam(const Scenario& s, std::vector<std::string>& warnings) {
    std::vector<ReparamRecord> out;
    if (s.reparam.instances <= 0) return out;
    const auto f = build_map(s, 0.0);
    if (f.dim() < 2) {
        warnings.push_back("reparam: needs a map of dimension >= 2");
        return out;
    }
    const usc::MapPower g{f, 1};
    const auto reg = f.regularity();
    const auto constants = usc::default_constants(reg.r, reg.alpha);
    const double eps = 0.5 * usc::detail::admissible_epsilon(f.upsilon(), f.space());
    usc::CounterRng rng(s.reparam.seed, 0x5e9);
    const int d = f.dim();
    for (int i = 0; i < s.reparam.instances; ++i) {
        const auto base = static_cast<std::uint64_t>(i) * 16;
        Vec p(d), v(d);
        for (int a = 0; a < d; ++a) {
            p(a) = f.space().lo()(a) + (f.space().hi()(a) - f.space().lo()(a)) * (0.25 + 0.5 * rng.uniform(base + a));
            v(a) = 2.0 * rng.uniform(base + 8 + a) - 1.0;
        }
        v *= 0.9 * eps / v.norm();
        std::vector<Vec> coeffs{Vec::Zero(d), v};
        if (reg.r >= 2) {
            Vec w = Vec::Zero(d);
            w(0) = -v(1);
            w(1) = v(0);
            coeffs.push_back(w / 40.0);
        }
        const auto curve = usc::ParamCurve::polynomial(f.space(), p, usc::VecPolynomial(coeffs), reg,
                                                       "curve#" + std::to_string(i));
        try {
            for (const auto& [cp, ch] : usc::exponent_classes(g, curve)) {
                const auto fam = usc::reparametrize_step(g, curve, std::max(cp, ch), ch, eps, constants);
                ReparamRecord rec;
                rec.map = f.name();
                rec.curve = curve.id();
                rec.chi_plus = fam.chi_plus;
                rec.chi = fam.chi;
                rec.r = reg.r;
                rec.alpha = reg.alpha;
                rec.epsilon = eps;
                rec.log_constant = constants.log_c_r_alpha();
                rec.log_size = fam.log_size();
                rec.log_bound = fam.log_bound;
                rec.worst_ratio = fam.worst_certificate_ratio;
                rec.margin = fam.margin;
                rec.sampled_checked = fam.sampled_checked;
                rec.sampled_bounded = fam.sampled_bounded;
                const auto cov = usc::check_coverage(g, curve, fam, s.reparam.coverage_samples,
                                                     s.reparam.seed + static_cast<std::uint64_t>(i));
                rec.coverage_sampled = cov.sampled;
                rec.coverage_misses = cov.misses;
                out.push_back(rec);
            }
        } catch (const std::exception& e) {
            warnings.push_back("reparam " + curve.id() + ": " + e.what());
        }
    }
    return out;
}

inline RunRecord run_scenario(const Scenario& s, unsigned threads = 1) {
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.scenario = s;
    usc::ExperimentOptions opt = s.verdict;
    opt.threads = threads;
    rec.table = usc::semicontinuity_experiment([&s](double t) { return build_map(s, t); }, s.schedule, s.sampling,
                                               opt, s.family);
    for (const auto& row : rec.table.rows)
        for (const auto& w : row.warnings) rec.warnings.push_back("t=" + fmt(row.t) + " " + w);
    rec.reparam = run_reparam(s, rec.warnings);
    rec.verdicts = compute_verdicts({rec.table.rows, rec.table.summary, s.ruelle_tolerance, s.sigma_tolerance,
                                     s.verdict.component_tolerance, rec.reparam});
    rec.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

// ---------------------------------------------------------------------------
// CSV and plot script

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "t", "weak_star", "lambda_sigma_plus", "lambda_plus", "lambda_minus", "lambda_center", "entropy",
        "entropy_std_error", "trusted_depth", "beta", "gamma", "ruelle_residual", "bound_partition_entropy",
        "bound_bracket", "bound_constant_term", "bound_total", "bound_lhs", "bound_holds", "complete"};
    return cols;
}

inline std::string csv_text(const RunRecord& rec) {
    std::ostringstream os;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rec.table.rows) {
        auto opt = [](bool has, double x) { return has ? fmt(x) : std::string(); };
        const bool b = r.bound.has_value();
        os << fmt(r.t) << "," << fmt(r.weak_star) << "," << fmt(r.lambda_sigma_plus) << ","
           << opt(r.has_spectrum, r.lambda_plus) << "," << opt(r.has_spectrum, r.lambda_minus) << ","
           << opt(r.lambda_center.has_value(), r.lambda_center.value_or(0.0)) << "," << opt(r.has_entropy, r.entropy)
           << "," << opt(r.has_entropy, r.entropy_std_error) << "," << r.trusted_depth << "," << fmt(r.beta) << ","
           << fmt(r.gamma) << "," << opt(r.has_entropy, r.ruelle_residual) << ","
           << opt(b, b ? r.bound->partition_entropy : 0.0) << "," << opt(b, b ? r.bound->bracket : 0.0) << ","
           << opt(b, b ? r.bound->constant_term : 0.0) << "," << opt(b, b ? r.bound->total : 0.0) << ","
           << opt(b, b ? r.bound->lhs : 0.0) << "," << (b ? (r.bound->bound_holds ? "1" : "0") : "") << ","
           << (r.complete() ? 1 : 0) << "\n";
    }
    return os.str();
}

/// gnuplot script plotting entropy and lambda_Sigma^+ against t from the CSV.
inline std::string gnuplot_text(const RunRecord& rec, const std::string& csv_name) {
    std::ostringstream os;
    os << "# gnuplot script for " << rec.scenario.name << "\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 't'\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << rec.scenario.name << ".png'\n"
       << "plot '" << csv_name << "' using 1:7 with linespoints title 'entropy', \\\n"
       << "     '' using 1:3 with linespoints title 'lambda_Sigma^+', \\\n"
       << "     '' using 1:16 with linespoints title 'bound total'\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// JSON

inline json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            json j = json::object();
            for (const auto& kv : n) j[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return j;
        }
        case YAML::NodeType::Sequence: {
            json j = json::array();
            for (const auto& e : n) j.push_back(yaml_to_json(e));
            return j;
        }
        case YAML::NodeType::Scalar: {
            const auto s = n.Scalar();
            if (s == "true" || s == "false") return s == "true";
            try {
                std::size_t used = 0;
                const double x = std::stod(s, &used);
                if (used == s.size()) return x;
            } catch (const std::exception&) {
            }
            return s;
        }
        default:
            return nullptr;
    }
}

inline json bound_to_json(const usc::BoundReport& b) {
    return {{"inverse", b.inverse},
            {"q", b.q},
            {"r", b.r},
            {"alpha", b.alpha},
            {"partition", b.partition},
            {"partition_entropy", b.partition_entropy},
            {"partition_std_error", b.partition_std_error},
            {"bracket", b.bracket},
            {"regularity_factor", b.regularity_factor},
            {"extra", b.extra},
            {"constant_term", b.constant_term},
            {"log_constant", b.log_constant},
            {"upsilon", b.upsilon},
            {"total", b.total},
            {"lhs", b.lhs},
            {"lhs_partition", b.lhs_partition},
            {"tolerance", b.tolerance},
            {"bound_holds", b.bound_holds},
            {"omega", std::isfinite(b.omega) ? json(b.omega) : json("inf")},
            {"epsilon", b.epsilon},
            {"partition_diameter", b.partition_diameter},
            {"partition_admissible", b.partition_admissible}};
}

inline usc::BoundReport bound_from_json(const json& j) {
    usc::BoundReport b;
    b.inverse = j.at("inverse").get<bool>();
    b.q = j.at("q").get<long>();
    b.r = j.at("r").get<int>();
    b.alpha = j.at("alpha").get<double>();
    b.partition = j.at("partition").get<std::string>();
    b.partition_entropy = j.at("partition_entropy").get<double>();
    b.partition_std_error = j.at("partition_std_error").get<double>();
    b.bracket = j.at("bracket").get<double>();
    b.regularity_factor = j.at("regularity_factor").get<double>();
    b.extra = j.at("extra").get<double>();
    b.constant_term = j.at("constant_term").get<double>();
    b.log_constant = j.at("log_constant").get<double>();
    b.upsilon = j.at("upsilon").get<double>();
    b.total = j.at("total").get<double>();
    b.lhs = j.at("lhs").get<double>();
    b.lhs_partition = j.at("lhs_partition").get<std::string>();
    b.tolerance = j.at("tolerance").get<double>();
    b.bound_holds = j.at("bound_holds").get<bool>();
    b.omega = j.at("omega").is_string() ? std::numeric_limits<double>::infinity() : j.at("omega").get<double>();
    b.epsilon = j.at("epsilon").get<double>();
    b.partition_diameter = j.at("partition_diameter").get<double>();
    b.partition_admissible = j.at("partition_admissible").get<bool>();
    return b;
}

inline json row_to_json(const usc::ExperimentRow& r) {
    json j = {{"t", r.t},
              {"weak_star", r.weak_star},
              {"lambda_sigma_plus", r.lambda_sigma_plus},
              {"lambda_plus", r.lambda_plus},
              {"lambda_minus", r.lambda_minus},
              {"lambda_plus_mu1", r.lambda_plus_mu1},
              {"entropy", r.entropy},
              {"entropy_std_error", r.entropy_std_error},
              {"trusted_depth", r.trusted_depth},
              {"beta", r.beta},
              {"gamma", r.gamma},
              {"ruelle_residual", r.ruelle_residual},
              {"has_entropy", r.has_entropy},
              {"has_spectrum", r.has_spectrum},
              {"warnings", r.warnings}};
    j["lambda_center"] = r.lambda_center ? json(*r.lambda_center) : json(nullptr);
    j["bound"] = r.bound ? bound_to_json(*r.bound) : json(nullptr);
    return j;
}

inline usc::ExperimentRow row_from_json(const json& j) {
    usc::ExperimentRow r;
    r.t = j.at("t").get<double>();
    r.weak_star = j.at("weak_star").get<double>();
    r.lambda_sigma_plus = j.at("lambda_sigma_plus").get<double>();
    r.lambda_plus = j.at("lambda_plus").get<double>();
    r.lambda_minus = j.at("lambda_minus").get<double>();
    r.lambda_plus_mu1 = j.at("lambda_plus_mu1").get<double>();
    r.entropy = j.at("entropy").get<double>();
    r.entropy_std_error = j.at("entropy_std_error").get<double>();
    r.trusted_depth = j.at("trusted_depth").get<int>();
    r.beta = j.at("beta").get<double>();
    r.gamma = j.at("gamma").get<double>();
    r.ruelle_residual = j.at("ruelle_residual").get<double>();
    r.has_entropy = j.at("has_entropy").get<bool>();
    r.has_spectrum = j.at("has_spectrum").get<bool>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (!j.at("lambda_center").is_null()) r.lambda_center = j.at("lambda_center").get<double>();
    if (!j.at("bound").is_null()) r.bound = bound_from_json(j.at("bound"));
    return r;
}

inline json reparam_to_json(const ReparamRecord& r) {
    return {{"map", r.map},
            {"curve", r.curve},
            {"chi_plus", r.chi_plus},
            {"chi", r.chi},
            {"r", r.r},
            {"alpha", r.alpha},
            {"epsilon", r.epsilon},
            {"log_constant", r.log_constant},
            {"log_size", r.log_size},
            {"log_bound", r.log_bound},
            {"worst_ratio", r.worst_ratio},
            {"margin", r.margin},
            {"sampled_checked", r.sampled_checked},
            {"sampled_bounded", r.sampled_bounded},
            {"coverage_sampled", r.coverage_sampled},
            {"coverage_misses", r.coverage_misses}};
}

inline ReparamRecord reparam_from_json(const json& j) {
    ReparamRecord r;
    r.map = j.at("map").get<std::string>();
    r.curve = j.at("curve").get<std::string>();
    r.chi_plus = j.at("chi_plus").get<int>();
    r.chi = j.at("chi").get<int>();
    r.r = j.at("r").get<int>();
    r.alpha = j.at("alpha").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.log_constant = j.at("log_constant").get<double>();
    r.log_size = j.at("log_size").get<double>();
    r.log_bound = j.at("log_bound").get<double>();
    r.worst_ratio = j.at("worst_ratio").get<double>();
    r.margin = j.at("margin").get<double>();
    r.sampled_checked = j.at("sampled_checked").get<std::size_t>();
    r.sampled_bounded = j.at("sampled_bounded").get<std::size_t>();
    r.coverage_sampled = j.at("coverage_sampled").get<std::size_t>();
    r.coverage_misses = j.at("coverage_misses").get<std::size_t>();
    return r;
}

inline json summary_to_json(const usc::ExperimentSummary& s) {
    return {{"verdict", usc::to_string(s.verdict)},
            {"inequality", s.inequality},
            {"h0", s.h0},
            {"tail_max_entropy", s.tail_max_entropy},
            {"margin", s.margin},
            {"tail_rows", s.tail_rows},
            {"max_sigma_deviation", s.max_sigma_deviation},
            {"component_check_applies", s.component_check_applies},
            {"component_deviation", s.component_deviation},
            {"component_check_holds", s.component_check_holds},
            {"bounds_hold", s.bounds_hold}};
}

inline json record_to_json(const RunRecord& rec) {
    const auto& s = rec.scenario;
    json j;
    j["tool"] = "usclab";
    j["version"] = kToolVersion;
    j["wall_clock_seconds"] = rec.wall_clock;
    j["scenario"] = yaml_to_json(s.source);
    j["options"] = {{"entropy_tolerance", s.verdict.entropy_tolerance},
                    {"tail_max_t", s.verdict.tail_max_t},
                    {"vacuous_exponent", s.verdict.vacuous_exponent},
                    {"component_tolerance", s.verdict.component_tolerance},
                    {"ruelle_tolerance", s.ruelle_tolerance}};
    j["options"]["sigma_tolerance"] = s.sigma_tolerance ? json(*s.sigma_tolerance) : json(nullptr);
    j["rows"] = json::array();
    for (const auto& r : rec.table.rows) j["rows"].push_back(row_to_json(r));
    j["reference"] = row_to_json(rec.table.reference);
    j["summary"] = summary_to_json(rec.table.summary);
    j["reparam"] = json::array();
    for (const auto& r : rec.reparam) j["reparam"].push_back(reparam_to_json(r));
    j["verdicts"] = json::array();
    for (const auto& v : rec.verdicts)
        j["verdicts"].push_back({{"name", v.name}, {"inequality", v.inequality}, {"margin", v.margin}, {"pass", v.pass}});
    j["warnings"] = rec.warnings;
    j["all_pass"] = rec.all_pass();
    return j;
}

struct WrittenFiles {
    std::filesystem::path csv, json, plot;
};

inline WrittenFiles write_record(const RunRecord& rec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    WrittenFiles w{dir / (rec.scenario.name + ".csv"), dir / (rec.scenario.name + ".json"),
                   dir / (rec.scenario.name + ".gp")};
    auto put = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out << text;
    };
    put(w.csv, csv_text(rec));
    put(w.json, record_to_json(rec).dump(2) + "\n");
    put(w.plot, gnuplot_text(rec, w.csv.filename().string()));
    return w;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayResult {
    std::vector<VerdictLine> verdicts;   // recomputed
    std::vector<std::string> problems;   // inconsistencies with the stored record
    bool ok() const {
        return problems.empty() &&
               std::all_of(verdicts.begin(), verdicts.end(), [](const VerdictLine& v) { return v.pass; });
    }
};

/// Re-derives every verdict from the stored rows, bound parts and
/// reparametrization certificates; no orbit is recomputed.
inline ReplayResult verify_replay(const json& j) {
    ReplayResult res;
    std::vector<usc::ExperimentRow> rows;
    for (const auto& r : j.at("rows")) rows.push_back(row_from_json(r));
    const auto reference = row_from_json(j.at("reference"));
    const auto& o = j.at("options");
    usc::ExperimentOptions opt;
    opt.entropy_tolerance = o.at("entropy_tolerance").get<double>();
    opt.tail_max_t = o.at("tail_max_t").get<double>();
    opt.vacuous_exponent = o.at("vacuous_exponent").get<double>();
    opt.component_tolerance = o.at("component_tolerance").get<double>();

    for (const auto& r : rows) {
        const std::string tag = "t=" + fmt(r.t);
        if (r.has_entropy && std::abs(r.ruelle_residual - (r.lambda_sigma_plus - r.entropy)) > 1e-12)
            res.problems.push_back(tag + ": stored Ruelle residual does not match lambda_Sigma^+ - h");
        if (!r.bound) continue;
        const auto& b = *r.bound;
        const double rebuilt = b.partition_entropy + b.regularity_factor * (b.bracket + b.extra) + b.constant_term;
        if (std::abs(rebuilt - b.total) > 1e-12) res.problems.push_back(tag + ": bound total is not the sum of its parts");
        const double constant =
            (std::log(2.0 * static_cast<double>(b.q) * b.upsilon) + b.log_constant) / static_cast<double>(b.q);
        if (std::abs(constant - b.constant_term) > 1e-12)
            res.problems.push_back(tag + ": constant term does not match log(2 q Upsilon C)/q");
        if (std::abs(b.regularity_factor - 1.0 / (b.r - 1 + b.alpha)) > 1e-12)
            res.problems.push_back(tag + ": regularity factor does not match 1/(r-1+alpha)");
        if (b.bound_holds != (b.lhs <= b.total + b.tolerance))
            res.problems.push_back(tag + ": stored bound_holds flag disagrees with lhs <= total + tol");
    }
    std::vector<ReparamRecord> reparam;
    for (const auto& r : j.at("reparam")) {
        reparam.push_back(reparam_from_json(r));
        const auto& rr = reparam.back();
        const double bound = rr.log_constant + (rr.chi_plus - rr.chi) / (rr.r - 1 + rr.alpha);
        if (std::abs(bound - rr.log_bound) > 1e-9)
            res.problems.push_back("reparam " + rr.curve + ": stored log bound does not match the constants");
    }
    const auto summary = usc::summarize_experiment(rows, reference, opt);
    std::optional<double> sigma;
    if (!o.at("sigma_tolerance").is_null()) sigma = o.at("sigma_tolerance").get<double>();
    res.verdicts = compute_verdicts(
        {rows, summary, o.at("ruelle_tolerance").get<double>(), sigma, opt.component_tolerance, reparam});

    const auto& stored = j.at("verdicts");
    if (stored.size() != res.verdicts.size()) {
        res.problems.push_back("stored verdict count differs from the recomputed one");
    } else {
        for (std::size_t i = 0; i < stored.size(); ++i) {
            const auto& v = res.verdicts[i];
            if (stored[i].at("name").get<std::string>() != v.name || stored[i].at("pass").get<bool>() != v.pass)
                res.problems.push_back("verdict '" + v.name + "' does not replay");
        }
    }
    return res;
}

}  // namespace usclab
