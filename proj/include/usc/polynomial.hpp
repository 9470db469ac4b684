#pragma once

// Dense univariate polynomials (scalar and vector valued), exact sup norms on
// intervals and real-root isolation by Descartes' rule of signs on dyadic
// subintervals.

#include "usc/core.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace usc {

/// Scalar polynomial, coefficients in ascending order.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> c) : c_(std::move(c)) {}

    static Polynomial constant(double v) { return Polynomial({v}); }
    static Polynomial monomial(int k, double coef = 1.0) {
        std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
        c.back() = coef;
        return Polynomial(std::move(c));
    }

    const std::vector<double>& coeffs() const { return c_; }
    double coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(k)] : 0.0; }

    /// Index of the highest nonzero coefficient, -1 for the zero polynomial.
    int degree() const {
        for (int k = static_cast<int>(c_.size()) - 1; k >= 0; --k)
            if (c_[static_cast<std::size_t>(k)] != 0.0) return k;
        return -1;
    }

    bool is_zero() const { return degree() < 0; }

    double operator()(double x) const {
        double v = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + *it;
        return v;
    }

    Polynomial derivative(int k = 1) const {
        std::vector<double> c = c_;
        for (int j = 0; j < k; ++j) {
            if (c.size() <= 1) return Polynomial({0.0});
            std::vector<double> d(c.size() - 1);
            for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
            c = std::move(d);
        }
        return Polynomial(std::move(c));
    }

    /// p(a + b t)
    Polynomial compose_affine(double a, double b) const {
        // Horner in polynomial arithmetic.
        Polynomial out({0.0});
        const Polynomial lin({a, b});
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) out = out * lin + Polynomial({*it});
        return out;
    }

    /// p(q(t))
    Polynomial compose(const Polynomial& q) const {
        Polynomial out({0.0});
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) out = out * q + Polynomial({*it});
        return out;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }
    friend Polynomial operator*(double s, const Polynomial& p) {
        std::vector<double> c = p.c_;
        for (auto& x : c) x *= s;
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.c_.empty() || b.c_.empty()) return Polynomial({0.0});
        std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }

private:
    std::vector<double> c_;
};

/// Closed interval [lo, hi] (lo == hi for an exact root).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

struct RootOptions {
    double abs_tol = 1e-9;   // stop refining at this width
    double rel_tol = 0.0;    // ... or at rel_tol * max(|lo|, |hi|)
    int max_depth = 200;
};

namespace detail {

/// Sign variations of the coefficients of (1+x)^n q(1/(1+x)), an upper
/// bound (with equal parity) on the number of roots of q in (0, 1).
inline int descartes_bound(const std::vector<double>& q) {
    const auto n = q.size();
    // Reverse, then Taylor shift by 1.
    std::vector<double> c(q.rbegin(), q.rend());
    // mag tracks the same sums taken over |q|: a coefficient within rounding
    // of its own magnitude sum has no reliable sign.
    std::vector<double> mag(c.size());
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(c[i]);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = n - 1; j-- > i;) {
            c[j] += c[j + 1];
            mag[j] += mag[j + 1];
        }
    const double noise = 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
    int var = 0;
    int last = 0;
    bool unsure = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = c[i];
        if (x == 0.0) continue;
        if (std::abs(x) <= noise * mag[i]) {
            unsure = true;
            continue;
        }
        const int s = x > 0 ? 1 : -1;
        if (last != 0 && s != last) ++var;
        last = s;
    }
    // An unreliable sign may hide a variation: force a split.
    return unsure ? std::max(var, 2) : var;
}

inline bool small_enough(double lo, double hi, const RootOptions& opt) {
    const double w = hi - lo;
    if (w <= opt.abs_tol) return true;
    if (opt.rel_tol > 0.0 && w <= opt.rel_tol * std::max(std::abs(lo), std::abs(hi))) return true;
    const double mid = 0.5 * (lo + hi);
    return mid <= lo || mid >= hi;  // no representable midpoint left
}

inline void isolate_rec(const Polynomial& p, double lo, double hi, int depth, const RootOptions& opt,
                        std::vector<Interval>& out) {
    // Coefficients of p(lo + (hi - lo) x) on x in [0, 1].
    const auto q = p.compose_affine(lo, hi - lo).coeffs();
    const int v = descartes_bound(q);
    if (v == 0) return;
    const double plo = p(lo), phi = p(hi);
    if (v == 1 && plo * phi < 0.0) {
        // Exactly one simple root: bisect on the sign change.
        double a = lo, b = hi, fa = plo;
        while (!small_enough(a, b, opt)) {
            const double m = 0.5 * (a + b);
            const double fm = p(m);
            if (fm == 0.0) {
                out.push_back({m, m});
                return;
            }
            if ((fm > 0) == (fa > 0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        out.push_back({a, b});
        return;
    }
    if (small_enough(lo, hi, opt) || depth >= opt.max_depth) {
        out.push_back({lo, hi});  // cluster of roots (or a multiple root)
        return;
    }
    const double mid = 0.5 * (lo + hi);
    isolate_rec(p, lo, mid, depth + 1, opt, out);
    if (p(mid) == 0.0) out.push_back({mid, mid});
    isolate_rec(p, mid, hi, depth + 1, opt, out);
}

}  // namespace detail

/// Isolating intervals for the real roots of p in [lo, hi], sorted. Roots at
/// the endpoints are reported as point intervals. Intervals are halved at
/// dyadic midpoints only, so the output is deterministic. Returns nullopt for
/// the zero polynomial (every point is a root).
inline std::optional<std::vector<Interval>> isolate_roots(const Polynomial& p, double lo, double hi,
                                                          const RootOptions& opt = {}) {
    if (!(lo < hi)) throw DomainError("isolate_roots: need lo < hi");
    if (p.is_zero()) return std::nullopt;
    if (p.degree() == 0) return std::vector<Interval>{};
    std::vector<Interval> out;
    if (p(lo) == 0.0) out.push_back({lo, lo});
    // Shifting a wide interval onto [0, 1] rounds away structure near 0, where
    // curves are anchored, so 0 is always a split point.
    if (lo < 0.0 && 0.0 < hi) {
        detail::isolate_rec(p, lo, 0.0, 1, opt, out);
        if (p(0.0) == 0.0) out.push_back({0.0, 0.0});
        detail::isolate_rec(p, 0.0, hi, 1, opt, out);
    } else {
        detail::isolate_rec(p, lo, hi, 0, opt, out);
    }
    if (p(hi) == 0.0) out.push_back({hi, hi});
    std::sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    // Merge touching/overlapping isolation intervals.
    std::vector<Interval> merged;
    for (const auto& iv : out) {
        if (!merged.empty() && iv.lo <= merged.back().hi) merged.back().hi = std::max(merged.back().hi, iv.hi);
        else merged.push_back(iv);
    }
    return merged;
}

/// Sup of |p| over [lo, hi]: endpoints plus critical points.
inline double sup_abs(const Polynomial& p, double lo, double hi) {
    double best = std::max(std::abs(p(lo)), std::abs(p(hi)));
    const auto dp = p.derivative();
    if (dp.degree() >= 1) {
        const auto roots = isolate_roots(dp, lo, hi, {1e-12});
        for (const auto& iv : *roots) {
            best = std::max(best, std::abs(p(iv.lo)));
            best = std::max(best, std::abs(p(iv.hi)));
            best = std::max(best, std::abs(p(0.5 * (iv.lo + iv.hi))));
        }
    }
    return best;
}

/// Polynomial with values in R^d, coefficients ascending.
class VecPolynomial {
public:
    VecPolynomial() = default;
    explicit VecPolynomial(std::vector<Vec> c) : c_(std::move(c)) {
        if (c_.empty()) throw DomainError("vector polynomial needs at least one coefficient");
        for (const auto& v : c_)
            if (v.size() != c_.front().size()) throw DomainError("vector polynomial: ragged coefficients");
    }

    int dim() const { return static_cast<int>(c_.front().size()); }
    const std::vector<Vec>& coeffs() const { return c_; }
    int degree() const {
        for (int k = static_cast<int>(c_.size()) - 1; k >= 0; --k)
            if (!c_[static_cast<std::size_t>(k)].isZero(0.0)) return k;
        return -1;
    }

    Vec operator()(double t) const {
        Vec v = Vec::Zero(dim());
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * t + *it;
        return v;
    }

    VecPolynomial derivative(int k = 1) const {
        std::vector<Vec> c = c_;
        for (int j = 0; j < k; ++j) {
            if (c.size() <= 1) return VecPolynomial({Vec::Zero(dim())});
            std::vector<Vec> d;
            for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
            c = std::move(d);
        }
        return VecPolynomial(std::move(c));
    }

    Polynomial component(int a) const {
        std::vector<double> c;
        for (const auto& v : c_) c.push_back(v(a));
        return Polynomial(std::move(c));
    }

    /// |p(t)|^2 as a scalar polynomial.
    Polynomial squared_norm() const {
        Polynomial s({0.0});
        for (int a = 0; a < dim(); ++a) {
            const auto ca = component(a);
            s = s + ca * ca;
        }
        return s;
    }

    /// p(a + b t)
    VecPolynomial compose_affine(double a, double b) const {
        std::vector<Polynomial> comps;
        std::size_t len = 1;
        for (int k = 0; k < dim(); ++k) {
            comps.push_back(component(k).compose_affine(a, b));
            len = std::max(len, comps.back().coeffs().size());
        }
        std::vector<Vec> c(len, Vec::Zero(dim()));
        for (int k = 0; k < dim(); ++k)
            for (std::size_t i = 0; i < comps[static_cast<std::size_t>(k)].coeffs().size(); ++i)
                c[i](k) = comps[static_cast<std::size_t>(k)].coeffs()[i];
        return VecPolynomial(std::move(c));
    }

    /// Sup of |p| over [lo, hi] via the critical points of |p|^2.
    double sup_norm(double lo, double hi) const { return std::sqrt(sup_abs(squared_norm(), lo, hi)); }

    /// Inf of |p| over [lo, hi].
    double inf_norm(double lo, double hi) const {
        const auto s = squared_norm();
        double best = std::min(s(lo), s(hi));
        const auto ds = s.derivative();
        if (ds.degree() >= 1)
            for (const auto& iv : *isolate_roots(ds, lo, hi, {1e-12})) {
                best = std::min(best, s(iv.lo));
                best = std::min(best, s(iv.hi));
            }
        return std::sqrt(std::max(0.0, best));
    }

private:
    std::vector<Vec> c_;
};

/// Maximal closed subintervals of [lo, hi] on which a < p(t) < b. Roots of
/// p - a and p - b are isolated and each interval is snapped outward to the
/// far side of the neighbouring isolating intervals, so the result covers the
/// true set. Degenerate (constant) p gives all of [lo, hi] or nothing.
inline std::vector<Interval> band_intervals(const Polynomial& p, double a, double b, double lo, double hi,
                                            const RootOptions& opt = {}) {
    if (!(a < b)) throw DomainError("band_intervals: empty band");
    if (p.degree() <= 0) {
        const double v = p.coeff(0);
        if (a < v && v < b) return {{lo, hi}};
        return {};
    }
    std::vector<Interval> breaks;
    for (double level : {a, b}) {
        const auto roots = isolate_roots(p - Polynomial::constant(level), lo, hi, opt);
        if (roots) breaks.insert(breaks.end(), roots->begin(), roots->end());
    }
    std::sort(breaks.begin(), breaks.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<Interval> merged;
    for (const auto& iv : breaks) {
        if (!merged.empty() && iv.lo <= merged.back().hi) merged.back().hi = std::max(merged.back().hi, iv.hi);
        else merged.push_back(iv);
    }
    // Gaps between isolating intervals have constant membership.
    std::vector<Interval> out;
    double cursor = lo;
    std::size_t k = 0;
    auto in_band = [&](double t) {
        const double v = p(t);
        return a < v && v < b;
    };
    auto push = [&](double l, double r) {
        if (!out.empty() && l <= out.back().hi) out.back().hi = std::max(out.back().hi, r);
        else out.push_back({l, r});
    };
    while (cursor < hi || k < merged.size()) {
        const double gap_end = k < merged.size() ? merged[k].lo : hi;
        if (gap_end > cursor && in_band(0.5 * (cursor + gap_end))) {
            // Extend outward over the adjacent isolating intervals.
            const double l = (k > 0 && merged[k - 1].hi == cursor) ? merged[k - 1].lo : cursor;
            const double r = k < merged.size() ? merged[k].hi : hi;
            push(std::max(lo, l), std::min(hi, r));
        }
        if (k >= merged.size()) break;
        cursor = merged[k].hi;
        ++k;
        if (cursor >= hi) break;
    }
    return out;
}

}  // namespace usc
