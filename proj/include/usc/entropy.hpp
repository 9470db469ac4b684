#pragma once

// Entropy rates from itinerary statistics, the forward/backward entropy
// bounds built from partition entropy and exponent brackets, the Ruelle
// residual and Young's dimension formula.

#include "usc/calculus.hpp"
#include "usc/measures.hpp"

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace usc {

// ---------------------------------------------------------------------------
// Partition entropy rate

/// Raised when even the shallowest depth has more distinct itineraries than
/// the guard allows. trusted_depth is the deepest depth that passed (0 here).
class UndersampledError : public NumericError {
public:
    UndersampledError(const std::string& what, int trusted_depth)
        : NumericError(what), trusted_depth_(trusted_depth) {}
    int trusted_depth() const { return trusted_depth_; }

private:
    int trusted_depth_;
};

/// Cell codes along each trajectory with one weight per trajectory.
struct CodedEnsemble {
    std::vector<std::vector<int>> codes;
    std::vector<double> weights;
    long cells = 1;
};

struct EntropyOptions {
    int depth = 12;              // n_max
    int orbit_length = 0;        // points per trajectory; 0 means depth
    double guard_ratio = 0.1;    // depth n is trusted while distinct <= ratio * samples
    int batches = 10;            // for the standard error
    unsigned threads = 1;
};

struct EntropyEstimate {
    std::string partition;
    std::vector<int> depths;             // 1..n_max
    std::vector<double> block_entropy;   // H(Q^n)
    std::vector<double> per_depth;       // H(Q^n)/n
    std::vector<double> increments;      // H(Q^n) - H(Q^{n-1})
    std::vector<long> distinct;          // distinct itineraries at depth n
    std::vector<long> samples;           // windows at depth n
    int trusted_depth = 0;
    bool capped = false;                 // guard cut the schedule short
    double rate = 0.0;
    double std_error = 0.0;
};

namespace detail {

struct BlockEntropies {
    std::vector<double> entropy;
    std::vector<long> distinct;
    std::vector<long> samples;
};

/// Plug-in H(Q^n) for n = 1..depth over all length-n windows, each trajectory
/// spreading its weight evenly over its windows. Itineraries are interned
/// depth by depth: id_{n+1}(j) = intern(id_n(j), code(j + n)).
inline BlockEntropies block_entropies(const CodedEnsemble& ens, int depth) {
    BlockEntropies out;
    const std::size_t m = ens.codes.size();
    std::vector<std::vector<std::uint32_t>> ids(m);
    for (std::size_t i = 0; i < m; ++i) ids[i].assign(ens.codes[i].begin(), ens.codes[i].end());
    const auto cells = static_cast<std::uint64_t>(ens.cells);
    for (int n = 1; n <= depth; ++n) {
        std::vector<double> mass;
        long samples = 0;
        if (n == 1) {
            std::unordered_map<std::uint32_t, std::uint32_t> dense;
            for (std::size_t i = 0; i < m; ++i)
                for (auto& id : ids[i]) {
                    auto [it, fresh] = dense.try_emplace(id, static_cast<std::uint32_t>(dense.size()));
                    id = it->second;
                }
            mass.assign(dense.size(), 0.0);
        } else {
            std::unordered_map<std::uint64_t, std::uint32_t> intern;
            for (std::size_t i = 0; i < m; ++i) {
                auto& v = ids[i];
                const auto len = ens.codes[i].size();
                if (len < static_cast<std::size_t>(n)) {
                    v.clear();
                    continue;
                }
                const std::size_t windows = len - static_cast<std::size_t>(n) + 1;
                for (std::size_t j = 0; j < windows; ++j) {
                    const std::uint64_t key = static_cast<std::uint64_t>(v[j]) * cells +
                                              static_cast<std::uint64_t>(ens.codes[i][j + static_cast<std::size_t>(n) - 1]);
                    auto [it, fresh] = intern.try_emplace(key, static_cast<std::uint32_t>(intern.size()));
                    v[j] = it->second;
                }
                v.resize(windows);
            }
            mass.assign(intern.size(), 0.0);
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (ids[i].empty()) continue;
            const double w = ens.weights[i] / static_cast<double>(ids[i].size());
            for (auto id : ids[i]) mass[id] += w;
            samples += static_cast<long>(ids[i].size());
        }
        double total = pairwise_sum(mass);
        std::vector<double> terms;
        terms.reserve(mass.size());
        for (double x : mass)
            if (x > 0.0) terms.push_back(-(x / total) * std::log(x / total));
        out.entropy.push_back(std::max(0.0, pairwise_sum(terms)));
        out.distinct.push_back(static_cast<long>(mass.size()));
        out.samples.push_back(samples);
    }
    return out;
}

/// Minimum of the conditional increments over the tail [ceil(T/2), T] of the
/// trusted depths; H(Q) itself when only depth 1 is trusted.
inline double tail_rate(const std::vector<double>& h, int trusted, long cells) {
    double rate = h[0];
    if (trusted >= 2) {
        rate = std::numeric_limits<double>::infinity();
        for (int n = std::max(2, (trusted + 1) / 2); n <= trusted; ++n)
            rate = std::min(rate, h[static_cast<std::size_t>(n - 1)] - h[static_cast<std::size_t>(n - 2)]);
    }
    return std::clamp(rate, 0.0, std::log(static_cast<double>(cells)));
}

}  // namespace detail

/// Codes the trajectories of the measure's support points.
inline CodedEnsemble code_trajectories(const Diffeomorphism& f, const EmpiricalMeasure& starts,
                                       const FinitePartition& part, int length, unsigned threads = 1) {
    if (length < 1) throw DomainError("trajectory length must be >= 1");
    if (!(part.space() == f.space()) || !(starts.space() == f.space()))
        throw DomainError("map, measure and partition live on different phase spaces");
    CodedEnsemble ens;
    ens.cells = part.cell_count();
    ens.weights = starts.weights();
    ens.codes.resize(starts.size());
    parallel_for(starts.size(), threads, [&](std::size_t i) {
        ens.codes[i] = refine_code(part, f, starts.points()[i], length);
    });
    return ens;
}

/// Plug-in entropy rate of an already coded ensemble.
inline EntropyEstimate partition_entropy_rate(const CodedEnsemble& ens, const std::string& partition_id,
                                              const EntropyOptions& opt = {}) {
    if (ens.codes.empty()) throw DomainError("entropy: empty ensemble");
    if (ens.codes.size() != ens.weights.size()) throw DomainError("entropy: weights do not match trajectories");
    if (opt.depth < 2) throw DomainError("entropy: depth must be >= 2");
    std::size_t longest = 0;
    for (const auto& c : ens.codes) longest = std::max(longest, c.size());
    if (longest < static_cast<std::size_t>(opt.depth))
        throw DomainError("entropy: trajectories shorter than the requested depth");

    EntropyEstimate est;
    est.partition = partition_id;
    const auto blocks = detail::block_entropies(ens, opt.depth);
    for (int n = 1; n <= opt.depth; ++n) {
        const auto k = static_cast<std::size_t>(n - 1);
        est.depths.push_back(n);
        est.block_entropy.push_back(blocks.entropy[k]);
        est.per_depth.push_back(blocks.entropy[k] / n);
        est.increments.push_back(n == 1 ? blocks.entropy[0] : blocks.entropy[k] - blocks.entropy[k - 1]);
        est.distinct.push_back(blocks.distinct[k]);
        est.samples.push_back(blocks.samples[k]);
    }
    int trusted = 0;
    for (int n = 1; n <= opt.depth; ++n) {
        const auto k = static_cast<std::size_t>(n - 1);
        if (static_cast<double>(est.distinct[k]) > opt.guard_ratio * static_cast<double>(est.samples[k])) break;
        trusted = n;
    }
    if (trusted == 0)
        throw UndersampledError("entropy: every depth is undersampled on " + partition_id + " (" +
                                    std::to_string(est.distinct[0]) + " distinct codes in " +
                                    std::to_string(est.samples[0]) + " samples); maximal trusted depth 0",
                                0);
    est.trusted_depth = trusted;
    est.capped = trusted < opt.depth;
    est.rate = detail::tail_rate(est.block_entropy, trusted, ens.cells);

    // Batch spread at the same trusted depth: trajectories dealt round-robin
    // when there are enough of them, otherwise contiguous segments.
    const int b = opt.batches;
    if (b >= 2) {
        std::vector<CodedEnsemble> parts(static_cast<std::size_t>(b));
        for (auto& p : parts) p.cells = ens.cells;
        if (ens.codes.size() >= static_cast<std::size_t>(b)) {
            for (std::size_t i = 0; i < ens.codes.size(); ++i) {
                auto& p = parts[i % static_cast<std::size_t>(b)];
                p.codes.push_back(ens.codes[i]);
                p.weights.push_back(ens.weights[i]);
            }
        } else {
            for (std::size_t i = 0; i < ens.codes.size(); ++i) {
                const auto& c = ens.codes[i];
                const std::size_t seg = c.size() / static_cast<std::size_t>(b);
                if (seg < static_cast<std::size_t>(trusted)) continue;
                for (int s = 0; s < b; ++s) {
                    auto& p = parts[static_cast<std::size_t>(s)];
                    const auto from = c.begin() + static_cast<std::ptrdiff_t>(seg * static_cast<std::size_t>(s));
                    p.codes.emplace_back(from, from + static_cast<std::ptrdiff_t>(seg));
                    p.weights.push_back(ens.weights[i]);
                }
            }
        }
        std::vector<double> rates;
        for (const auto& p : parts) {
            if (p.codes.empty()) continue;
            const auto h = detail::block_entropies(p, trusted).entropy;
            rates.push_back(detail::tail_rate(h, trusted, ens.cells));
        }
        if (rates.size() >= 2) {
            const double mean = pairwise_mean(rates);
            double ss = 0.0;
            for (double r : rates) ss += (r - mean) * (r - mean);
            est.std_error = std::sqrt(ss / static_cast<double>(rates.size() - 1) / static_cast<double>(rates.size()));
        }
    }
    return est;
}

/// Entropy rate of f with respect to the partition, trajectories started at
/// the support points of an invariant sample.
inline EntropyEstimate partition_entropy_rate(const Diffeomorphism& f, const EmpiricalMeasure& starts,
                                              const FinitePartition& part, const EntropyOptions& opt = {}) {
    const int len = opt.orbit_length > 0 ? opt.orbit_length : opt.depth;
    return partition_entropy_rate(code_trajectories(f, starts, part, len, opt.threads), part.describe(), opt);
}

// ---------------------------------------------------------------------------
// Entropy bounds

struct BoundReport {
    bool inverse = false;           // built from f^{-1}
    long q = 1;
    int r = 1;
    double alpha = 1.0;
    double partition_entropy = 0.0;
    double partition_std_error = 0.0;
    double bracket = 0.0;
    double regularity_factor = 0.0;
    double extra = 0.0;             // 1/q inside the bracket
    double constant_term = 0.0;     // log(2 q Upsilon C) / q
    double log_constant = 0.0;      // log C
    double upsilon = 1.0;
    double total = 0.0;
    double lhs = 0.0;
    std::string lhs_partition;
    double tolerance = 0.0;
    bool bound_holds = false;
    double omega = 0.0;             // Upsilon^q (may be inf)
    double epsilon = 0.0;
    double partition_diameter = 0.0;
    bool partition_admissible = false;
    std::string partition;

    /// Total from its parts.
    static double assemble(double h, double bracket, double factor, long q, double upsilon, double log_c) {
        const double qd = static_cast<double>(q);
        const double extra = 1.0 / qd;
        const double constant = (std::log(2.0 * qd * upsilon) + log_c) / qd;
        return h + factor * (bracket + extra) + constant;
    }

    double margin() const { return total + tolerance - lhs; }
};

struct BoundOptions {
    EntropyOptions entropy{};
    std::optional<double> log_constant;   // overrides log C_{r,alpha}
    double zeta = 0.02;                   // zero band for the signature check
    long signature_steps = 2000;
    std::size_t signature_points = 32;
    std::size_t bracket_points = 2000;
    bool require_admissible = false;      // throw when Diam(Q) >= epsilon
    bool refine_lhs = true;               // also try the partition with half the side
    double tolerance_sigmas = 3.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// First n support points, reweighted.
inline EmpiricalMeasure leading_points(const EmpiricalMeasure& mu, std::size_t n) {
    if (mu.size() <= n) return mu;
    std::vector<Vec> pts(mu.points().begin(), mu.points().begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> w(mu.weights().begin(), mu.weights().begin() + static_cast<std::ptrdiff_t>(n));
    return EmpiricalMeasure::from_masses(mu.space(), std::move(pts), std::move(w), mu.provenance(), mu.map_id());
}

/// The admissible epsilon for Omega on the space: just below the constraint.
inline double admissible_epsilon(double omega, const PhaseSpace& space) {
    return std::nextafter(std::min(1.0, space.injectivity_radius()) / (2.0 * (omega + 2.0)), 0.0);
}

/// log ||(D f^n)^{-1}|| from the exterior grades: log||wedge^{d-1}|| - log||wedge^d||.
inline double log_inverse_norm(const ExteriorCocycle& c, int d) {
    return (d > 1 ? c.log_norm(d - 1) : 0.0) - c.log_norm(d);
}

/// Mirror of exponent_quantity_gap for f^{-1}, computed along forward orbits:
/// by invariance the integral of log||D_x f^{-q}|| equals that of
/// log||(D_x f^q)^{-1}||, and lambda^+(f^{-1}) = -lambda^-(f).
inline double inverse_quantity_gap(const Diffeomorphism& f, const EmpiricalMeasure& sample, long q,
                                   unsigned threads) {
    const int d = f.dim();
    auto obs = [d](const ExteriorCocycle& c) { return std::max(0.0, log_inverse_norm(c, d)); };
    const std::vector<long> block{q};
    const double at_q = scheduled_averages(f, sample, block, threads, obs).front();
    const auto sched = default_schedule(q);
    const auto avg = scheduled_averages(f, sample, sched, threads, obs);
    return at_q - *std::min_element(avg.begin(), avg.end());
}

/// Forward bound from f, or the backward one from f^{-1} (inverse = true).
/// Backward quantities come from forward orbits, so the sample never has to
/// be iterated backwards (dissipative maps leave their box that way).
inline BoundReport entropy_bound(const Diffeomorphism& f, bool inverse,
                                 const EmpiricalMeasure& mu, const FinitePartition& part, long q,
                                 const BoundOptions& opt) {
    if (q < 1) throw DomainError("bound: q must be >= 1");
    if (!(mu.space() == f.space()) || !(part.space() == f.space()))
        throw DomainError("bound: map, measure and partition live on different phase spaces");

    SignatureOptions sopt;
    sopt.zeta = opt.zeta;
    sopt.steps = opt.signature_steps;
    sopt.threads = opt.entropy.threads;
    const auto sig = signature_decomposition(leading_points(mu, opt.signature_points), f, sopt);
    if (!sig.flagged.empty()) throw NumericError("bound: spectrum estimate failed on the sample");
    for (const auto& s : sig.spectra)
        if ((inverse ? s.negative_count(opt.zeta) : s.positive_count(opt.zeta)) > 1)
            throw DomainError(std::string("bound: sample has more than one ") + (inverse ? "negative" : "positive") +
                              " exponent");

    BoundReport rep;
    rep.inverse = inverse;
    rep.q = q;
    rep.r = f.regularity().r;
    rep.alpha = f.regularity().alpha;
    rep.upsilon = f.upsilon();
    rep.partition = part.describe();
    rep.omega = std::pow(f.upsilon(), static_cast<double>(q));
    rep.epsilon = admissible_epsilon(rep.omega, f.space());
    rep.partition_diameter = part.diameter();
    rep.partition_admissible = rep.partition_diameter < rep.epsilon;
    if (opt.require_admissible && !rep.partition_admissible)
        throw DomainError("bound: partition diameter " + std::to_string(rep.partition_diameter) +
                          " is not below epsilon " + std::to_string(rep.epsilon));

    const auto est = partition_entropy_rate(f, mu, part, opt.entropy);
    rep.partition_entropy = est.rate;
    rep.partition_std_error = est.std_error;
    const auto bracket_sample = leading_points(mu, opt.bracket_points);
    rep.bracket = inverse ? inverse_quantity_gap(f, bracket_sample, q, opt.entropy.threads)
                          : exponent_quantity_gap(f, bracket_sample, q, {}, opt.entropy.threads);
    rep.regularity_factor = 1.0 / (rep.r - 1 + rep.alpha);
    rep.extra = 1.0 / static_cast<double>(q);
    rep.log_constant = opt.log_constant ? *opt.log_constant : default_constants(rep.r, rep.alpha).log_c_r_alpha();
    rep.constant_term = (std::log(2.0 * static_cast<double>(q) * rep.upsilon) + rep.log_constant) /
                        static_cast<double>(q);
    rep.total = rep.partition_entropy + rep.regularity_factor * (rep.bracket + rep.extra) + rep.constant_term;

    // Left side: the largest partition entropy we can trust.
    rep.lhs = est.rate;
    rep.lhs_partition = est.partition;
    double lhs_error = est.std_error;
    if (opt.refine_lhs) {
        std::vector<int> dims = part.dims();
        for (int& n : dims) n *= 2;
        const FinitePartition fine(part.space(), dims, part.offset());
        try {
            const auto e2 = partition_entropy_rate(f, mu, fine, opt.entropy);
            if (e2.rate > rep.lhs) {
                rep.lhs = e2.rate;
                rep.lhs_partition = e2.partition;
                lhs_error = e2.std_error;
            }
        } catch (const UndersampledError&) {
        }
    }
    rep.tolerance = opt.tolerance_sigmas * std::hypot(lhs_error, est.std_error) + 1e-9;
    rep.bound_holds = rep.lhs <= rep.total + rep.tolerance;
    return rep;
}

}  // namespace detail

/// Forward bound: partition entropy plus the log-norm bracket of f^q.
inline BoundReport theorem_bound(const Diffeomorphism& f, const EmpiricalMeasure& mu, const FinitePartition& part,
                                 long q, const BoundOptions& opt = {}) {
    return detail::entropy_bound(f, false, mu, part, q, opt);
}

/// Backward bound: the same with f^{-1}, whose top exponent is -lambda^-.
/// Needs an invertible map but only iterates f.
inline BoundReport inverse_theorem_bound(const Diffeomorphism& f, const EmpiricalMeasure& mu,
                                         const FinitePartition& part, long q, const BoundOptions& opt = {}) {
    if (!f.invertible()) throw DomainError("inverse bound needs an invertible map");
    return detail::entropy_bound(f, true, mu, part, q, opt);
}

// ---------------------------------------------------------------------------
// Ruelle residual and Young dimension

/// lambda_Sigma^+ - h; nonnegative up to estimator noise.
inline double ruelle_check(double entropy, double lambda_sigma_plus) { return lambda_sigma_plus - entropy; }

inline double ruelle_check(const EntropyEstimate& h, const ExponentSpectrum& s) {
    return ruelle_check(h.rate, s.lambda_sigma_plus());
}

struct YoungDimension {
    double value = 0.0;
    bool clamped = false;
};

/// h (1/lambda^+ - 1/lambda^-), clamped to [0, 2].
inline YoungDimension young_dimension(double h, double lambda_plus, double lambda_minus) {
    if (!(lambda_plus > 0.0) || !(lambda_minus < 0.0))
        throw DomainError("young_dimension needs lambda^+ > 0 > lambda^-");
    if (!std::isfinite(h)) throw DomainError("young_dimension: entropy must be finite");
    const double raw = h * (1.0 / lambda_plus - 1.0 / lambda_minus);
    YoungDimension out;
    out.value = std::clamp(raw, 0.0, 2.0);
    out.clamped = out.value != raw;
    return out;
}

}  // namespace usc
