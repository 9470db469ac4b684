#pragma once

// Weak-* comparison of empirical measures, translated grid partitions with
// itinerary coding, static/conditional entropy, binning of a measure into
// representative ergodic pieces and the exponent-signature split.

#include "usc/lyapunov.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace usc {

// ---------------------------------------------------------------------------
// Weak-* metric

/// 64 fixed continuous test functions with |g_k| <= 1. On tori: cos and sin of
/// 2 pi <m, x> for frequency vectors in a half-space, ordered by max-norm then
/// lexicographically. On boxes: tensor Chebyshev polynomials in rescaled
/// coordinates ordered by total degree.
class WeakStarDictionary {
public:
    static constexpr int kSize = 64;
    using Values = std::array<double, kSize>;

    explicit WeakStarDictionary(PhaseSpace space) : space_(std::move(space)) {
        const int d = space_.dim();
        if (space_.is_torus()) {
            for (int shell = 1; static_cast<int>(modes_.size()) < kSize; ++shell) {
                for (const auto& m : shell_vectors(d, shell)) {
                    if (static_cast<int>(modes_.size()) < kSize) modes_.push_back({m, false});
                    if (static_cast<int>(modes_.size()) < kSize) modes_.push_back({m, true});
                }
            }
        } else {
            for (int deg = 1; static_cast<int>(modes_.size()) < kSize; ++deg)
                for (const auto& m : degree_vectors(d, deg))
                    if (static_cast<int>(modes_.size()) < kSize) modes_.push_back({m, false});
        }
    }

    const PhaseSpace& space() const { return space_; }

    Values evaluate(const Vec& p) const {
        Values out{};
        const int d = space_.dim();
        if (space_.is_torus()) {
            for (int k = 0; k < kSize; ++k) {
                double phase = 0.0;
                for (int a = 0; a < d; ++a) phase += modes_[static_cast<std::size_t>(k)].index[static_cast<std::size_t>(a)] * p(a);
                phase *= kTwoPi;
                out[static_cast<std::size_t>(k)] = modes_[static_cast<std::size_t>(k)].sine ? std::sin(phase) : std::cos(phase);
            }
        } else {
            Vec u(d);
            for (int a = 0; a < d; ++a) {
                const double t = 2.0 * (p(a) - space_.lo()(a)) / (space_.hi()(a) - space_.lo()(a)) - 1.0;
                u(a) = std::clamp(t, -1.0, 1.0);
            }
            for (int k = 0; k < kSize; ++k) {
                double v = 1.0;
                for (int a = 0; a < d; ++a)
                    v *= std::cos(modes_[static_cast<std::size_t>(k)].index[static_cast<std::size_t>(a)] * std::acos(u(a)));
                out[static_cast<std::size_t>(k)] = v;
            }
        }
        return out;
    }

    Values integrals(const EmpiricalMeasure& mu) const {
        if (!(mu.space() == space_)) throw DomainError("weak-* dictionary used on a different phase space");
        Values out{};
        std::vector<std::vector<double>> cols(kSize, std::vector<double>(mu.size()));
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const auto v = evaluate(mu.points()[i]);
            for (int k = 0; k < kSize; ++k) cols[static_cast<std::size_t>(k)][i] = v[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k < kSize; ++k) out[static_cast<std::size_t>(k)] = mu.integrate_values(cols[static_cast<std::size_t>(k)]);
        return out;
    }

    /// sum_k 2^{-k} |a_k - b_k|, k = 1..64
    static double distance(const Values& a, const Values& b) {
        double s = 0.0;
        double w = 0.5;
        for (int k = 0; k < kSize; ++k, w *= 0.5) s += w * std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]);
        return s;
    }

private:
    struct Mode {
        std::vector<int> index;
        bool sine;
    };

    static void all_vectors(int d, int bound, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
        if (static_cast<int>(cur.size()) == d) {
            out.push_back(cur);
            return;
        }
        for (int v = -bound; v <= bound; ++v) {
            cur.push_back(v);
            all_vectors(d, bound, cur, out);
            cur.pop_back();
        }
    }

    /// Integer vectors with max-norm = shell and first nonzero entry positive.
    static std::vector<std::vector<int>> shell_vectors(int d, int shell) {
        std::vector<std::vector<int>> all, out;
        std::vector<int> cur;
        all_vectors(d, shell, cur, all);
        for (auto& v : all) {
            int mx = 0;
            for (int x : v) mx = std::max(mx, std::abs(x));
            if (mx != shell) continue;
            const auto first = std::find_if(v.begin(), v.end(), [](int x) { return x != 0; });
            if (*first > 0) out.push_back(v);
        }
        return out;  // already lexicographic
    }

    static std::vector<std::vector<int>> degree_vectors(int d, int deg) {
        std::vector<std::vector<int>> all, out;
        std::vector<int> cur;
        all_vectors(d, deg, cur, all);
        for (auto& v : all) {
            int s = 0;
            bool ok = true;
            for (int x : v) {
                ok = ok && x >= 0;
                s += x;
            }
            if (ok && s == deg) out.push_back(v);
        }
        return out;
    }

    PhaseSpace space_;
    std::vector<Mode> modes_;
};

inline double weak_star_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (!(mu.space() == nu.space())) throw DomainError("weak-* distance between different phase spaces");
    const WeakStarDictionary dict(mu.space());
    return WeakStarDictionary::distance(dict.integrals(mu), dict.integrals(nu));
}

/// Randomly shifted rank-1 lattice of n points: a low-discrepancy stand-in for
/// Lebesgue measure whose low-frequency Fourier integrals vanish exactly.
inline EmpiricalMeasure lattice_sample(const PhaseSpace& space, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("lattice_sample: n must be positive");
    const int d = space.dim();
    // Korobov generator (1, a, a^2) with a close to n / golden ratio.
    const auto a = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) / std::numbers::phi));
    std::vector<std::uint64_t> gen = {1, a % n, (a * a) % n};
    CounterRng rng(seed, 0x1a7);
    std::vector<double> shift(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) shift[static_cast<std::size_t>(k)] = rng.uniform(static_cast<std::uint64_t>(k));
    std::vector<Vec> pts(n, Vec(d));
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            double u = static_cast<double>((i * gen[static_cast<std::size_t>(k)]) % n) / static_cast<double>(n) +
                       shift[static_cast<std::size_t>(k)];
            u -= std::floor(u);
            pts[i](k) = space.lo()(k) + (space.hi()(k) - space.lo()(k)) * u;
        }
    return EmpiricalMeasure::uniform(space, std::move(pts));
}

// ---------------------------------------------------------------------------
// Partitions

using ItineraryCode = std::vector<int>;

/// Translated rectangular grid on the phase space. Cells are coded in mixed
/// radix (axis 0 fastest). On boxes points outside the frame join the nearest
/// boundary cell, so the coder is total.
class FinitePartition {
public:
    FinitePartition(PhaseSpace space, std::vector<int> dims, Vec offset)
        : space_(std::move(space)), dims_(std::move(dims)), offset_(std::move(offset)) {
        const int d = space_.dim();
        if (static_cast<int>(dims_.size()) != d || offset_.size() != d)
            throw DomainError("partition: dims/offset dimension mismatch");
        for (int n : dims_)
            if (n < 1) throw DomainError("partition: every axis needs at least one cell");
        if ((offset_.array() < 0.0).any() || (offset_.array() >= 1.0).any())
            throw DomainError("partition: offsets are fractions of a cell in [0,1)");
        cell_width_ = Vec(d);
        for (int a = 0; a < d; ++a) cell_width_(a) = (space_.hi()(a) - space_.lo()(a)) / dims_[static_cast<std::size_t>(a)];
    }

    /// Grid with an offset drawn from the counter RNG.
    static FinitePartition random_grid(const PhaseSpace& space, std::vector<int> dims, std::uint64_t seed) {
        CounterRng rng(seed, 0x9a7);
        Vec off(space.dim());
        for (int a = 0; a < space.dim(); ++a) off(a) = rng.uniform(static_cast<std::uint64_t>(a));
        return FinitePartition(space, std::move(dims), off);
    }

    /// Equal cells per axis with side at most `side`.
    static FinitePartition with_side(const PhaseSpace& space, double side, std::uint64_t seed, bool randomize = true) {
        if (!(side > 0.0)) throw DomainError("partition: side must be positive");
        std::vector<int> dims;
        for (int a = 0; a < space.dim(); ++a)
            dims.push_back(static_cast<int>(std::ceil((space.hi()(a) - space.lo()(a)) / side - 1e-9)));
        if (!randomize) return FinitePartition(space, std::move(dims), Vec::Zero(space.dim()));
        return random_grid(space, std::move(dims), seed);
    }

    const PhaseSpace& space() const { return space_; }
    const std::vector<int>& dims() const { return dims_; }
    const Vec& offset() const { return offset_; }

    long cell_count() const {
        long c = 1;
        for (int n : dims_) c *= n;
        return c;
    }

    /// Euclidean diagonal of one cell.
    double diameter() const { return cell_width_.norm(); }

    int code(const Vec& p) const {
        space_.require(p);
        int idx = 0;
        int radix = 1;
        for (int a = 0; a < space_.dim(); ++a) {
            const int n = dims_[static_cast<std::size_t>(a)];
            const double u = (p(a) - space_.lo()(a)) / cell_width_(a) - offset_(a);
            long c = static_cast<long>(std::floor(u));
            if (space_.is_torus()) {
                c %= n;
                if (c < 0) c += n;
            } else {
                c = std::clamp(c, -1L, static_cast<long>(n) - 1);
                if (c < 0) c = 0;
            }
            idx += static_cast<int>(c) * radix;
            radix *= n;
        }
        return idx;
    }

    std::string describe() const {
        std::string s = "grid";
        for (std::size_t a = 0; a < dims_.size(); ++a) s += (a ? "x" : " ") + std::to_string(dims_[a]);
        return s;
    }

private:
    PhaseSpace space_;
    std::vector<int> dims_;
    Vec offset_;
    Vec cell_width_;
};

/// (code(p), code(f p), ..., code(f^{n-1} p)): the P^n cell of p.
inline ItineraryCode refine_code(const FinitePartition& part, const Diffeomorphism& f, Vec p, int n) {
    if (n < 1) throw DomainError("refine_code: depth must be >= 1");
    if (!(part.space() == f.space())) throw DomainError("partition and map live on different phase spaces");
    ItineraryCode out;
    out.reserve(static_cast<std::size_t>(n));
    p = f.space().reduce(std::move(p));
    for (int k = 0; k < n; ++k) {
        out.push_back(part.code(p));
        if (k + 1 < n) p = f(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Entropy of coded distributions

/// -sum m log m over the masses (0 log 0 = 0), pairwise reduction.
template <class Map>
double entropy_of_masses(const Map& masses) {
    std::vector<double> terms;
    terms.reserve(masses.size());
    for (const auto& [key, m] : masses)
        if (m > 0.0) terms.push_back(-m * std::log(m));
    return pairwise_sum(terms);
}

/// H_mu(P) for any coder p -> ordered key.
template <class Coder>
double static_entropy(const EmpiricalMeasure& mu, Coder&& coder) {
    using Key = std::decay_t<decltype(coder(mu.points().front()))>;
    std::map<Key, double> masses;
    for (std::size_t i = 0; i < mu.size(); ++i) masses[coder(mu.points()[i])] += mu.weights()[i];
    return entropy_of_masses(masses);
}

inline double static_entropy(const EmpiricalMeasure& mu, const FinitePartition& part) {
    return static_entropy(mu, [&](const Vec& p) { return part.code(p); });
}

/// Number of cells with positive mass.
template <class Coder>
std::size_t occupied_cells(const EmpiricalMeasure& mu, Coder&& coder) {
    using Key = std::decay_t<decltype(coder(mu.points().front()))>;
    std::map<Key, int> seen;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.weights()[i] > 0.0) seen[coder(mu.points()[i])] = 1;
    return seen.size();
}

/// H_mu(P | Q) = sum_j mu(Q_j) H_{mu_j}(P), mu_j the normalized restriction.
template <class CoderP, class CoderQ>
double conditional_entropy(const EmpiricalMeasure& mu, CoderP&& cp, CoderQ&& cq) {
    using KP = std::decay_t<decltype(cp(mu.points().front()))>;
    using KQ = std::decay_t<decltype(cq(mu.points().front()))>;
    std::map<KQ, std::map<KP, double>> joint;
    for (std::size_t i = 0; i < mu.size(); ++i)
        joint[cq(mu.points()[i])][cp(mu.points()[i])] += mu.weights()[i];
    std::vector<double> terms;
    for (auto& [kq, inner] : joint) {
        double mass = 0.0;
        for (auto& [kp, m] : inner) mass += m;
        if (!(mass > 0.0)) continue;
        for (auto& [kp, m] : inner) m /= mass;
        terms.push_back(mass * entropy_of_masses(inner));
    }
    return pairwise_sum(terms);
}

inline double conditional_entropy(const EmpiricalMeasure& mu, const FinitePartition& p, const FinitePartition& q) {
    return conditional_entropy(mu, [&](const Vec& x) { return p.code(x); }, [&](const Vec& x) { return q.code(x); });
}

/// Coder of the refinement P^n.
struct RefinedCoder {
    const FinitePartition* part;
    const Diffeomorphism* map;
    int depth;
    ItineraryCode operator()(const Vec& p) const { return refine_code(*part, *map, p, depth); }
};

// ---------------------------------------------------------------------------
// Discretization into representative ergodic pieces

struct DiscretizeOptions {
    long orbit_length = 2000;   // points in each orbit-empirical measure
    double weak_star_scale = 1.0;
    unsigned threads = 1;
};

struct DiscreteComponent {
    double alpha = 0.0;                 // bin mass
    std::size_t representative = 0;     // index into the input support
    EmpiricalMeasure measure;           // orbit-empirical measure of the representative
    double entropy = 0.0;
    double lambda_plus = 0.0;
    std::vector<long> bin;              // (h bin, lambda bin, rounded dictionary coordinates...)
};

struct DiscretizedMeasure {
    std::vector<DiscreteComponent> components;
    int bins = 0;
    int r0 = 0;                  // smallest integer above the growth rate bound of ||Df^n||
    double dropped_mass = 0.0;   // support points whose estimators failed
    std::vector<std::string> log;
    // Guarantees, measured against the per-point decomposition sum_i w_i mu_{x_i}.
    double weak_star_gap = 0.0, weak_star_bound = 0.0;
    double entropy_gap = 0.0, entropy_bound = 0.0;
    double exponent_gap = 0.0, exponent_bound = 0.0;
    double distance_to_input = 0.0;  // informative: weak-* distance to mu itself

    bool bounds_hold() const {
        return weak_star_gap <= weak_star_bound && entropy_gap <= entropy_bound && exponent_gap <= exponent_bound;
    }
};

/// Smallest integer strictly above log sup ||Df|| (which dominates the growth
/// rate lim (1/n) log ||Df^n||_0).
inline int growth_integer(const Diffeomorphism& f) {
    double sup = 0.0;
    if (auto b = f.model().analytic_bounds(f.regularity())) {
        sup = b->sup_df;
    } else {
        sup = holder_norm(f, 0.02).sup_derivative.front();
    }
    return static_cast<int>(std::floor(std::max(0.0, std::log(sup)))) + 1;
}

/// Bins the support of mu by (entropy estimate, lambda^+ estimate, rounded
/// dictionary integrals of the point's orbit-empirical measure) and keeps one
/// representative per bin. The estimators see the support point and may throw;
/// such points are dropped and their mass is logged.
inline DiscretizedMeasure discretize_measure(const EmpiricalMeasure& mu, const Diffeomorphism& f, int bins,
                                             const std::function<double(const Vec&)>& entropy_est,
                                             const std::function<double(const Vec&)>& exponent_est,
                                             const DiscretizeOptions& opt = {}) {
    if (bins < 1) throw DomainError("discretize_measure: need L >= 1");
    if (!(mu.space() == f.space())) throw DomainError("measure and map live on different phase spaces");
    DiscretizedMeasure out;
    out.bins = bins;
    out.r0 = growth_integer(f);
    const int d = f.dim();
    const double h_width = d * out.r0 / static_cast<double>(bins);
    const double l_width = 2.0 * out.r0 / static_cast<double>(bins);
    // Rounding the first K coordinates to the nearest multiple of res and ignoring the rest
    // costs at most res + 2^{1-K} in the weighted l1 distance.
    const double res = opt.weak_star_scale / (2.0 * bins);
    int k_used = 2;
    while (std::pow(2.0, 1 - k_used) > opt.weak_star_scale / (2.0 * bins)) ++k_used;
    k_used = std::min(k_used, WeakStarDictionary::kSize);
    const WeakStarDictionary dict(f.space());

    struct PointData {
        bool ok = false;
        double h = 0, l = 0;
        WeakStarDictionary::Values integrals{};
        std::string error;
    };
    std::vector<PointData> data(mu.size());
    parallel_for(mu.size(), opt.threads, [&](std::size_t i) {
        auto& pd = data[i];
        try {
            pd.h = entropy_est(mu.points()[i]);
            pd.l = exponent_est(mu.points()[i]);
            if (!std::isfinite(pd.h) || !std::isfinite(pd.l)) throw NumericError("non-finite estimate");
            pd.integrals = dict.integrals(orbit_measure(f, mu.points()[i], opt.orbit_length));
            pd.ok = true;
        } catch (const std::exception& e) {
            pd.error = e.what();
        }
    });

    std::map<std::vector<long>, std::size_t> bin_of;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto& pd = data[i];
        if (!pd.ok) {
            out.dropped_mass += mu.weights()[i];
            out.log.push_back("dropped support point " + std::to_string(i) + ": " + pd.error);
            continue;
        }
        std::vector<long> key;
        key.push_back(std::clamp(static_cast<long>(std::floor(pd.h / h_width)), 0L, static_cast<long>(bins) - 1));
        key.push_back(std::clamp(static_cast<long>(std::floor((pd.l + out.r0) / l_width)), 0L, static_cast<long>(bins) - 1));
        for (int k = 0; k < k_used; ++k)
            key.push_back(std::lround(pd.integrals[static_cast<std::size_t>(k)] / res));
        auto [it, fresh] = bin_of.try_emplace(key, members.size());
        if (fresh) members.emplace_back();
        members[it->second].push_back(i);
    }
    if (members.empty()) throw NumericError("discretize_measure: every support point was dropped");

    // Components in order of first appearance; the representative is the
    // first member of each bin.
    const double kept = 1.0 - out.dropped_mass;
    WeakStarDictionary::Values decomposition{}, discretized{};
    double h_decomp = 0, h_disc = 0, l_decomp = 0, l_disc = 0;
    std::vector<std::pair<std::vector<long>, std::size_t>> ordered(bin_of.begin(), bin_of.end());
    std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
        return members[a.second].front() < members[b.second].front();
    });
    for (const auto& [key, slot] : ordered) {
        const auto& idx = members[slot];
        double mass = 0.0;
        for (auto i : idx) mass += mu.weights()[i];
        const std::size_t rep = idx.front();
        const auto& rd = data[rep];
        for (auto i : idx) {
            const double w = mu.weights()[i] / kept;
            for (int k = 0; k < WeakStarDictionary::kSize; ++k) {
                decomposition[static_cast<std::size_t>(k)] += w * data[i].integrals[static_cast<std::size_t>(k)];
                discretized[static_cast<std::size_t>(k)] += w * rd.integrals[static_cast<std::size_t>(k)];
            }
            h_decomp += w * data[i].h;
            l_decomp += w * data[i].l;
            h_disc += w * rd.h;
            l_disc += w * rd.l;
        }
        out.components.push_back({mass / kept, rep, orbit_measure(f, mu.points()[rep], opt.orbit_length), rd.h, rd.l, key});
    }
    out.weak_star_gap = WeakStarDictionary::distance(decomposition, discretized);
    out.weak_star_bound = opt.weak_star_scale / bins;
    out.entropy_gap = std::abs(h_decomp - h_disc);
    out.entropy_bound = h_width;
    out.exponent_gap = std::abs(l_decomp - l_disc);
    out.exponent_bound = l_width;
    out.distance_to_input = WeakStarDictionary::distance(dict.integrals(mu), discretized);
    return out;
}

// ---------------------------------------------------------------------------
// Signature decomposition

struct SignatureOptions {
    double zeta = 0.02;        // exponents within zeta of 0 count as zero
    long steps = 2000;         // Benettin steps per support point
    long burn_in = 0;
    unsigned threads = 1;
};

/// Class labels: 1 -> mu^1, 2 -> mu^2, 0 -> mu^0.
struct SignatureDecomposition {
    double beta = 0.0;
    double gamma = 0.0;
    std::optional<EmpiricalMeasure> mu1, mu2, mu0;
    std::vector<int> labels;
    std::vector<std::size_t> flagged;   // points whose spectrum estimate failed
    std::vector<ExponentSpectrum> spectra;

    /// beta mu^1 + gamma mu^2 + (1 - beta - gamma) mu^0
    EmpiricalMeasure recombine() const {
        std::vector<EmpiricalMeasure> parts;
        std::vector<double> coeffs;
        if (mu1) parts.push_back(*mu1), coeffs.push_back(beta);
        if (mu2) parts.push_back(*mu2), coeffs.push_back(gamma);
        if (mu0) parts.push_back(*mu0), coeffs.push_back(1.0 - beta - gamma);
        return mixture(parts, coeffs);
    }
};

/// Classifies each support point by the spectrum of its own orbit. In 3D:
/// exactly one positive exponent -> mu^1, two positive and one negative ->
/// mu^2, else mu^0. In 2D: one positive and one negative (hyperbolic) -> mu^1,
/// else mu^0. On a circle everything is mu^0.
inline SignatureDecomposition signature_decomposition(const EmpiricalMeasure& mu, const Diffeomorphism& f,
                                                      const SignatureOptions& opt = {}) {
    if (!(mu.space() == f.space())) throw DomainError("measure and map live on different phase spaces");
    SignatureDecomposition out;
    const std::size_t n = mu.size();
    out.labels.assign(n, 0);
    std::vector<std::optional<ExponentSpectrum>> spectrum_at(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        try {
            spectrum_at[i] = benettin_spectrum(f, mu.points()[i], opt.steps, 0.05, opt.burn_in);
        } catch (const std::exception&) {
            spectrum_at[i].reset();
        }
    });
    const int d = f.dim();
    std::vector<Vec> pts[3];
    std::vector<double> mass[3];
    for (std::size_t i = 0; i < n; ++i) {
        int label = 0;
        if (!spectrum_at[i]) {
            out.flagged.push_back(i);
        } else {
            const int pos = spectrum_at[i]->positive_count(opt.zeta);
            const int neg = spectrum_at[i]->negative_count(opt.zeta);
            if (d == 3) {
                if (pos == 1) label = 1;
                else if (pos == 2 && neg == 1) label = 2;
            } else if (d == 2) {
                if (pos == 1 && neg == 1) label = 1;
            }
            out.spectra.push_back(*spectrum_at[i]);
        }
        out.labels[i] = label;
        pts[label].push_back(mu.points()[i]);
        mass[label].push_back(mu.weights()[i]);
    }
    double totals[3];
    for (int c = 0; c < 3; ++c) totals[c] = mass[c].empty() ? 0.0 : pairwise_sum(mass[c]);
    out.beta = totals[1];
    out.gamma = totals[2];
    if (out.beta + out.gamma > 1.0) out.gamma = 1.0 - out.beta;
    auto build = [&](int c) -> std::optional<EmpiricalMeasure> {
        if (pts[c].empty() || !(totals[c] > 0.0)) return std::nullopt;
        return EmpiricalMeasure::from_masses(mu.space(), pts[c], mass[c], mu.provenance(), mu.map_id());
    };
    out.mu1 = build(1);
    out.mu2 = build(2);
    out.mu0 = build(0);
    return out;
}

}  // namespace usc
