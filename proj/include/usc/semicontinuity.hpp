#pragma once

// Perturbation experiments: for a family f_t with t -> 0, estimate the
// measure, exponents, entropy and entropy bound at each t and compare the
// tail against t = 0.

#include "usc/entropy.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace usc {

using MapFamily = std::function<Diffeomorphism(double)>;

enum class SampleKind { lebesgue, orbit };

struct SamplingConfig {
    SampleKind kind = SampleKind::lebesgue;
    std::size_t points = 100000;      // entropy starts (Lebesgue) or orbit length
    Vec orbit_start;                  // orbit samples only
    long burn_in = 1000;              // orbit samples only
    std::uint64_t seed = 1;
    std::size_t exponent_points = 64; // support points used for spectra
    long exponent_steps = 2000;       // Benettin steps per point
    double partition_side = 0.1;
    std::vector<int> partition_dims;  // cells per axis; overrides the side when set
    std::uint64_t partition_seed = 5;
    EntropyOptions entropy{};
    bool compute_bound = true;
    long q = 8;
    BoundOptions bound{};
    double zeta = 0.02;
};

struct ExperimentRow {
    double t = 0.0;
    double weak_star = 0.0;           // distance to the t = 0 sample
    double lambda_sigma_plus = 0.0;   // Kingman estimate
    double lambda_plus = 0.0;         // mean Benettin values
    double lambda_minus = 0.0;
    std::optional<double> lambda_center;
    double lambda_plus_mu1 = 0.0;     // mean top exponent on the mu^1 part
    double entropy = 0.0;
    double entropy_std_error = 0.0;
    int trusted_depth = 0;
    double beta = 0.0;
    double gamma = 0.0;
    double ruelle_residual = 0.0;
    std::optional<BoundReport> bound;
    bool has_entropy = false;
    bool has_spectrum = false;
    std::vector<std::string> warnings;  // estimator failures; the row is partial
    bool complete() const { return warnings.empty(); }
};

enum class Verdict { pass, vacuous_pass, fail };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "PASS";
        case Verdict::vacuous_pass: return "VACUOUS-PASS";
        default: return "FAIL";
    }
}

struct ExperimentOptions {
    double entropy_tolerance = 0.05;   // tail h_t <= h_0 + tolerance
    double tail_max_t = 0.02;          // |t| <= this counts as tail (t != 0)
    double vacuous_exponent = 0.02;    // every Benettin lambda^+ below this: nothing to test
    double component_tolerance = 0.05; // mu^1 top exponents near t = 0
    unsigned threads = 1;              // rows in parallel
};

struct ExperimentSummary {
    Verdict verdict = Verdict::fail;
    std::string inequality = "max tail h_t <= h_0 + tol";
    double h0 = 0.0;
    double tail_max_entropy = 0.0;
    double margin = 0.0;              // h_0 + tol - max tail h_t
    std::size_t tail_rows = 0;
    double max_sigma_deviation = 0.0; // max tail |lambda_Sigma^+(t) - lambda_Sigma^+(0)|
    bool component_check_applies = false;  // beta > 0 at t = 0
    double component_deviation = 0.0;
    bool component_check_holds = true;
    bool bounds_hold = true;
};

struct ExperimentTable {
    std::string family;
    std::vector<ExperimentRow> rows;  // in schedule order
    ExperimentRow reference;          // the t = 0 row
    ExperimentSummary summary;
};

/// Tail comparison against the t = 0 row. Rows without an entropy estimate
/// are left out of the entropy maximum.
inline ExperimentSummary summarize_experiment(const std::vector<ExperimentRow>& rows, const ExperimentRow& base,
                                              const ExperimentOptions& opt) {
    ExperimentSummary s;
    s.h0 = base.entropy;
    s.component_check_applies = base.beta > 0.0;
    bool any_exponent = base.lambda_plus >= opt.vacuous_exponent;
    for (const auto& row : rows) {
        any_exponent = any_exponent || row.lambda_plus >= opt.vacuous_exponent;
        if (row.bound && !row.bound->bound_holds) s.bounds_hold = false;
        if (row.t == 0.0 || std::abs(row.t) > opt.tail_max_t) continue;
        ++s.tail_rows;
        if (row.has_entropy) s.tail_max_entropy = std::max(s.tail_max_entropy, row.entropy);
        s.max_sigma_deviation = std::max(s.max_sigma_deviation, std::abs(row.lambda_sigma_plus - base.lambda_sigma_plus));
        if (s.component_check_applies && row.beta > 0.0)
            s.component_deviation = std::max(s.component_deviation, std::abs(row.lambda_plus_mu1 - base.lambda_plus_mu1));
    }
    s.component_check_holds = s.component_deviation <= opt.component_tolerance;
    s.margin = s.h0 + opt.entropy_tolerance - s.tail_max_entropy;
    if (!any_exponent)
        s.verdict = Verdict::vacuous_pass;
    else
        s.verdict = s.margin >= 0.0 ? Verdict::pass : Verdict::fail;
    return s;
}

/// The invariant sample used for f_t.
inline EmpiricalMeasure experiment_sample(const Diffeomorphism& f, const SamplingConfig& cfg) {
    if (cfg.kind == SampleKind::lebesgue) return lebesgue_sample(f.space(), cfg.points, cfg.seed);
    if (cfg.orbit_start.size() != f.dim()) throw DomainError("orbit sample needs a start point of the map's dimension");
    return orbit_measure(f, cfg.orbit_start, static_cast<long>(cfg.points), cfg.burn_in);
}

namespace detail {

inline void fill_row(ExperimentRow& row, const Diffeomorphism& f, const SamplingConfig& cfg,
                     const std::optional<EmpiricalMeasure>& reference) {
    auto guard = [&row](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            row.warnings.push_back(std::string(what) + ": " + e.what());
        }
    };
    std::optional<EmpiricalMeasure> mu;
    guard("sample", [&] { mu = experiment_sample(f, cfg); });
    if (!mu) return;
    const auto few = leading_points(*mu, cfg.exponent_points);

    if (reference) guard("weak-*", [&] { row.weak_star = weak_star_distance(*mu, *reference); });
    guard("lambda_sigma_plus", [&] { row.lambda_sigma_plus = lambda_sigma_plus(f, few, default_schedule()).value; });
    guard("signature", [&] {
        SignatureOptions sopt;
        sopt.zeta = cfg.zeta;
        sopt.steps = cfg.exponent_steps;
        const auto sig = signature_decomposition(few, f, sopt);
        row.beta = sig.beta;
        row.gamma = sig.gamma;
        std::vector<double> lp, lm, lc, l1;
        for (std::size_t i = 0, k = 0; i < few.size(); ++i) {
            if (std::find(sig.flagged.begin(), sig.flagged.end(), i) != sig.flagged.end()) continue;
            const auto& s = sig.spectra[k++];
            lp.push_back(s.lambda_plus());
            lm.push_back(s.lambda_minus());
            if (s.dim() == 3) lc.push_back(s.lambda_center());
            if (sig.labels[i] == 1) l1.push_back(s.lambda_plus());
        }
        if (!sig.flagged.empty()) row.warnings.push_back("signature: spectrum failed at some points");
        if (lp.empty()) throw NumericError("no spectrum could be estimated");
        row.lambda_plus = pairwise_mean(lp);
        row.lambda_minus = pairwise_mean(lm);
        if (!lc.empty()) row.lambda_center = pairwise_mean(lc);
        if (!l1.empty()) row.lambda_plus_mu1 = pairwise_mean(l1);
        row.has_spectrum = true;
    });
    const auto part = cfg.partition_dims.empty()
                          ? FinitePartition::with_side(f.space(), cfg.partition_side, cfg.partition_seed)
                          : FinitePartition::random_grid(f.space(), cfg.partition_dims, cfg.partition_seed);
    guard("entropy", [&] {
        const auto est = partition_entropy_rate(f, *mu, part, cfg.entropy);
        row.entropy = est.rate;
        row.entropy_std_error = est.std_error;
        row.trusted_depth = est.trusted_depth;
        row.has_entropy = true;
    });
    row.ruelle_residual = ruelle_check(row.entropy, row.lambda_sigma_plus);
    if (cfg.compute_bound) {
        guard("bound", [&] {
            auto bopt = cfg.bound;
            bopt.entropy = cfg.entropy;
            bopt.zeta = cfg.zeta;
            row.bound = theorem_bound(f, *mu, part, cfg.q, bopt);
        });
    }
}

}  // namespace detail

/// One row per t, in schedule order. Rows are independent and may run in
/// parallel; failures become row warnings.
inline ExperimentTable semicontinuity_experiment(const MapFamily& family, const std::vector<double>& schedule,
                                                 const SamplingConfig& cfg, const ExperimentOptions& opt = {},
                                                 std::string family_name = {}) {
    if (schedule.empty()) throw DomainError("experiment: empty t schedule");
    ExperimentTable table;
    table.family = std::move(family_name);
    const auto f0 = family(0.0);
    table.family = table.family.empty() ? f0.name() : table.family;
    std::optional<EmpiricalMeasure> reference;
    try {
        reference = experiment_sample(f0, cfg);
    } catch (const std::exception&) {
    }

    table.rows.resize(schedule.size());
    parallel_for(schedule.size(), opt.threads, [&](std::size_t i) {
        auto& row = table.rows[i];
        row.t = schedule[i];
        try {
            detail::fill_row(row, family(schedule[i]), cfg, reference);
        } catch (const std::exception& e) {
            row.warnings.push_back(std::string("map: ") + e.what());
        }
    });

    // Reference values at t = 0, computed if the schedule lacks it.
    const auto zero = std::find(schedule.begin(), schedule.end(), 0.0);
    if (zero != schedule.end()) {
        table.reference = table.rows[static_cast<std::size_t>(zero - schedule.begin())];
    } else {
        table.reference.t = 0.0;
        detail::fill_row(table.reference, f0, cfg, reference);
    }
    table.summary = summarize_experiment(table.rows, table.reference, opt);
    return table;
}

}  // namespace usc
