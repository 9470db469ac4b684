#pragma once

// Interpolation, Taylor and composition inequalities on [-1, 1], checked on
// polynomial test functions. Running the checks with unbounded constants
// yields the smallest constants that work, which is how the defaults used by
// the reparametrization are calibrated.

#include "usc/core.hpp"
#include "usc/polynomial.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace usc {

/// Hölder norm data of a scalar polynomial on [-1, 1] at regularity (r, alpha).
struct PolyNorms {
    std::vector<double> sup;  // sup |D^k p| for k = 0..r
    double holder = 0.0;      // Hölder constant of D^r p, bounded by sup|D^{r+1} p| * 2^{1-alpha}

    double top(int from) const {
        double m = holder;
        for (std::size_t k = static_cast<std::size_t>(from); k < sup.size(); ++k) m = std::max(m, sup[k]);
        return m;
    }
};

inline double holder_bound(const Polynomial& p, int r, double alpha, double lo = -1.0, double hi = 1.0) {
    if (p.degree() <= r) return 0.0;
    return sup_abs(p.derivative(r + 1), lo, hi) * std::pow(hi - lo, 1.0 - alpha);
}

inline PolyNorms poly_norms(const Polynomial& p, int r, double alpha) {
    PolyNorms n;
    for (int k = 0; k <= r; ++k) n.sup.push_back(sup_abs(p.derivative(k), -1.0, 1.0));
    n.holder = holder_bound(p, r, alpha);
    return n;
}

/// Constants entering the reparametrization count.
struct CalculusConstants {
    int r = 1;
    double alpha = 1.0;
    double c_b = 1.0;  // composition (Faà di Bruno)
    double c_k = 1.0;  // interpolation (Kolmogorov-Landau)
    double c_l = 1.0;  // products (Leibniz)

    /// Band intervals per base piece: a degree 2(r-1) polynomial crosses two levels
    /// at most 4(r-1) times.
    int bezout() const { return 2 * r - 1; }

    double exponent_scale() const { return 1.0 / (r - 1 + alpha); }

    /// Parts each band interval is cut into.
    double split_factor() const { return std::pow(1000.0 * std::exp(5.0) * c_k, 2.0 / alpha); }

    /// Prefactor of the family-size bound. The factor 6 absorbs the rounding in
    /// ceil(1/b) + 1 <= 3/b and ceil(K) + 1 <= 2K.
    double c_r_alpha() const {
        return 6.0 * std::pow(3.0 * c_b * std::exp(10.0), exponent_scale()) * bezout() * split_factor();
    }
    double log_c_r_alpha() const {
        return std::log(6.0) + exponent_scale() * std::log(3.0 * c_b * std::exp(10.0)) + std::log(bezout()) +
               (2.0 / alpha) * std::log(1000.0 * std::exp(5.0) * c_k);
    }
};

struct InequalityViolation {
    std::string function;
    double ratio = 0.0;  // lhs / rhs without the constant: the minimal constant for this case
};

struct InequalityCheck {
    std::string name;
    std::size_t instances = 0;
    double constant = 0.0;       // constant the check was run with
    double minimal_constant = 0.0;
    std::string worst_function;
    std::vector<InequalityViolation> violations;
    bool holds() const { return violations.empty(); }
};

struct CalculusReport {
    int r = 1;
    double alpha = 1.0;
    std::uint64_t seed = 0;
    InequalityCheck interpolation;
    InequalityCheck taylor;
    InequalityCheck composition;
    InequalityCheck product;
    bool all_hold() const {
        return interpolation.holds() && taylor.holds() && composition.holds() && product.holds();
    }
};

namespace detail {

inline void record(InequalityCheck& chk, const std::string& fn, double ratio) {
    ++chk.instances;
    if (ratio > chk.minimal_constant) {
        chk.minimal_constant = ratio;
        chk.worst_function = fn;
    }
    if (ratio > chk.constant * (1.0 + 1e-9)) chk.violations.push_back({fn, ratio});
}

inline Polynomial chebyshev(int n) {
    Polynomial a({1.0}), b({0.0, 1.0});
    if (n == 0) return a;
    for (int k = 1; k < n; ++k) {
        Polynomial c = Polynomial({0.0, 2.0}) * b - a;
        a = b;
        b = c;
    }
    return b;
}

}  // namespace detail

inline Polynomial from_chebyshev(const std::vector<double>& coef) {
    Polynomial p({0.0});
    for (std::size_t k = 0; k < coef.size(); ++k) p = p + coef[k] * detail::chebyshev(static_cast<int>(k));
    return p;
}

/// Chebyshev-basis coefficients of random polynomials: degree uniform in
/// [0, max_degree], coefficients uniform in [-1, 1].
inline std::vector<std::vector<double>> random_chebyshev_coefficients(std::size_t n, int max_degree,
                                                                      std::uint64_t seed) {
    CounterRng rng(seed, 0xca1c);
    std::vector<std::vector<double>> out;
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int deg = static_cast<int>(rng.bits(idx++) % static_cast<std::uint64_t>(max_degree + 1));
        std::vector<double> c;
        for (int k = 0; k <= deg; ++k) c.push_back(2.0 * rng.uniform(idx++) - 1.0);
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<Polynomial> random_test_polynomials(std::size_t n, int max_degree, std::uint64_t seed) {
    std::vector<Polynomial> out;
    for (const auto& c : random_chebyshev_coefficients(n, max_degree, seed)) out.push_back(from_chebyshev(c));
    return out;
}

/// Inner functions for the composition check: v(0) = 0 and every norm entering
/// the hypothesis is at most 1, so v maps [-1, 1] into itself.
inline Polynomial normalize_inner(const Polynomial& v0, int r, double alpha) {
    Polynomial v = v0 - Polynomial::constant(v0(0.0));
    const auto nv = poly_norms(v, r, alpha);
    const double s = nv.top(1);
    return s > 0.0 ? (1.0 / s) * v : Polynomial({0.0, 1.0});
}

namespace detail {

inline double composition_ratio(const Polynomial& u, const Polynomial& v0, int r, double alpha) {
    const auto v = normalize_inner(v0, r, alpha);
    const double rhs = poly_norms(u, r, alpha).top(1);
    return rhs > 0.0 ? poly_norms(u.compose(v), r, alpha).top(1) / rhs : 0.0;
}

inline double product_ratio(const Polynomial& p, const Polynomial& q, int r, double alpha) {
    const double prod = poly_norms(p, r, alpha).top(0) * poly_norms(q, r, alpha).top(0);
    return prod > 0.0 ? poly_norms(p * q, r, alpha).top(0) / prod : 0.0;
}

/// Coordinate hill climb on the Chebyshev coefficients of a pair, starting
/// from (a, b) padded to max_degree. Returns the best ratio found.
template <class Ratio>
double climb_pair(std::vector<double> a, std::vector<double> b, int max_degree, Ratio&& ratio) {
    a.resize(static_cast<std::size_t>(max_degree) + 1, 0.0);
    b.resize(static_cast<std::size_t>(max_degree) + 1, 0.0);
    auto eval = [&] { return ratio(from_chebyshev(a), from_chebyshev(b)); };
    double best = eval();
    for (double step = 0.25; step > 2e-3; step *= 0.5) {
        bool improved = true;
        for (int sweep = 0; improved && sweep < 8; ++sweep) {
            improved = false;
            for (auto* vec : {&a, &b})
                for (auto& x : *vec)
                    for (double dir : {step, -step}) {
                        const double keep = x;
                        x += dir;
                        const double val = eval();
                        if (val > best * (1.0 + 1e-6)) {
                            best = val;
                            improved = true;
                        } else {
                            x = keep;
                        }
                    }
        }
    }
    return best;
}

}  // namespace detail

/// Checks the three inequalities (plus the product rule) on the given test
/// functions. Composition and product checks pair consecutive functions.
inline CalculusReport calculus_inequality_suite(const std::vector<Polynomial>& functions,
                                                const CalculusConstants& c, std::uint64_t seed = 0,
                                                int taylor_samples = 16) {
    const int r = c.r;
    const double alpha = c.alpha;
    if (r < 1 || !(alpha > 0.0 && alpha <= 1.0)) throw DomainError("calculus suite: need r >= 1, alpha in (0,1]");
    CalculusReport rep;
    rep.r = r;
    rep.alpha = alpha;
    rep.seed = seed;
    rep.interpolation = {"interpolation", 0, c.c_k, 0.0, {}, {}};
    rep.taylor = {"taylor_remainder", 0, 1.0, 0.0, {}, {}};
    rep.composition = {"composition", 0, c.c_b, 0.0, {}, {}};
    rep.product = {"product", 0, c.c_l, 0.0, {}, {}};
    CounterRng rng(seed, 0x7a1);
    std::uint64_t idx = 0;
    double rfact = 1.0;
    for (int k = 2; k <= r; ++k) rfact *= k;

    for (std::size_t i = 0; i < functions.size(); ++i) {
        const auto& p = functions[i];
        const std::string name = "poly#" + std::to_string(i) + " deg " + std::to_string(std::max(0, p.degree()));
        const auto n = poly_norms(p, r, alpha);

        // ||D^k p||_0 <= C_K (||p||_0 + ||D^r p||_alpha)
        const double denom = n.sup[0] + n.holder;
        double worst = 0.0;
        for (int k = 0; k <= r; ++k) worst = std::max(worst, n.sup[static_cast<std::size_t>(k)]);
        detail::record(rep.interpolation, name, denom > 0.0 ? worst / denom : 0.0);

        // |R_r(x, a)| <= ||D^r p||_alpha |a|^{alpha + r} / r!
        std::vector<Polynomial> ders;
        for (int k = 0; k <= r; ++k) ders.push_back(p.derivative(k));
        double tworst = 0.0;
        for (int s = 0; s < taylor_samples; ++s) {
            const double x = 2.0 * rng.uniform(idx++) - 1.0;
            const double y = 2.0 * rng.uniform(idx++) - 1.0;
            const double a = y - x;
            double taylor = 0.0, fact = 1.0, pw = 1.0;
            for (int k = 0; k <= r; ++k) {
                if (k > 0) fact *= k;
                taylor += ders[static_cast<std::size_t>(k)](x) * pw / fact;
                pw *= a;
            }
            const double rem = std::abs(p(y) - taylor);
            const double bound = n.holder * std::pow(std::abs(a), alpha + r) / rfact;
            const double scale = 1e-12 * (1.0 + n.top(0));
            tworst = std::max(tworst, rem <= scale ? 0.0 : (bound > 0.0 ? rem / bound : std::numeric_limits<double>::infinity()));
        }
        detail::record(rep.taylor, name, tworst);

        if (i + 1 < functions.size()) {
            const auto& q = functions[i + 1];
            const std::string pair = name + " with poly#" + std::to_string(i + 1);
            // Composition: u = p, v = normalized q.
            detail::record(rep.composition, pair, detail::composition_ratio(p, q, r, alpha));
            // Product: N(pq) <= C_L N(p) N(q) with N the full C^{r,alpha} norm.
            detail::record(rep.product, pair, detail::product_ratio(p, q, r, alpha));
        }
    }
    return rep;
}


/// Smallest constants satisfying the suite on the calibration family,
/// multiplied by `safety`. The family is the Chebyshev polynomials up to
/// max_degree (extremal for the interpolation inequality) followed by `n`
/// random polynomials. The worst composition and product pairs are then
/// pushed to a local maximum by a hill climb, so the result barely depends
/// on the seed.
inline CalculusConstants calibrate_constants(int r, double alpha, std::uint64_t seed = 0, std::size_t n = 1000,
                                             double safety = 2.0, int max_degree = 6,
                                             CalculusReport* report = nullptr) {
    std::vector<Polynomial> fam;
    for (int k = 0; k <= max_degree; ++k) fam.push_back(detail::chebyshev(k));
    const auto rnd = random_test_polynomials(n, max_degree, seed);
    fam.insert(fam.end(), rnd.begin(), rnd.end());
    CalculusConstants probe;
    probe.r = r;
    probe.alpha = alpha;
    probe.c_b = probe.c_k = probe.c_l = std::numeric_limits<double>::infinity();
    auto rep = calculus_inequality_suite(fam, probe, seed);
    const auto coefs = random_chebyshev_coefficients(n, max_degree, seed);
    auto worst_pairs = [&](auto&& ratio) {
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t i = 0; i + 1 < coefs.size(); ++i)
            scored.push_back({ratio(from_chebyshev(coefs[i]), from_chebyshev(coefs[i + 1])), i});
        std::sort(scored.rbegin(), scored.rend());
        double best = 0.0;
        for (std::size_t k = 0; k < std::min<std::size_t>(3, scored.size()); ++k) {
            const auto i = scored[k].second;
            best = std::max(best, detail::climb_pair(coefs[i], coefs[i + 1], max_degree, ratio));
        }
        // Seed-independent starts: pairs of low-degree Chebyshev polynomials.
        for (int a = 1; a <= std::min(max_degree, r + 1); ++a)
            for (int b = 1; b <= std::min(max_degree, r + 1); ++b) {
                std::vector<double> ca(static_cast<std::size_t>(a) + 1, 0.0), cb(static_cast<std::size_t>(b) + 1, 0.0);
                ca.back() = 1.0;
                cb.back() = 1.0;
                best = std::max(best, detail::climb_pair(ca, cb, max_degree, ratio));
            }
        return best;
    };
    rep.composition.minimal_constant = std::max(
        rep.composition.minimal_constant,
        worst_pairs([&](const Polynomial& u, const Polynomial& v) { return detail::composition_ratio(u, v, r, alpha); }));
    rep.product.minimal_constant = std::max(
        rep.product.minimal_constant,
        worst_pairs([&](const Polynomial& p, const Polynomial& q) { return detail::product_ratio(p, q, r, alpha); }));
    CalculusConstants c;
    c.r = r;
    c.alpha = alpha;
    c.c_k = safety * std::max(1.0, rep.interpolation.minimal_constant);
    c.c_b = safety * std::max(1.0, rep.composition.minimal_constant);
    c.c_l = safety * std::max(1.0, rep.product.minimal_constant);
    if (report) *report = rep;
    return c;
}

/// Calibrated defaults, computed once per (r, alpha).
inline CalculusConstants default_constants(int r, double alpha) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, CalculusConstants> cache;
    std::lock_guard lock(mu);
    auto it = cache.find({r, alpha});
    if (it == cache.end()) it = cache.emplace(std::pair{r, alpha}, calibrate_constants(r, alpha)).first;
    return it->second;
}

}  // namespace usc
