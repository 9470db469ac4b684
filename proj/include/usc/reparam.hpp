#pragma once

// Piecewise-polynomial curves, the (strongly) bounded-curve tests, the
// one-step reparametrization of g o sigma into bounded pieces, and the
// iterated Bowen-ball cover with its growth-rate accounting.

#include "usc/calculus.hpp"
#include "usc/core.hpp"
#include "usc/manifold.hpp"
#include "usc/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace usc {

/// t -> a + b t on [-1, 1].
struct AffineMap {
    double a = 0.0;
    double b = 1.0;

    double operator()(double t) const { return a + b * t; }
    double inverse(double x) const { return (x - a) / b; }
    /// this o inner
    AffineMap compose(const AffineMap& inner) const { return {a + b * inner.a, b * inner.b}; }
    bool valid(double slack = 1e-12) const {
        return std::abs(b) <= 1.0 + slack && a - std::abs(b) >= -1.0 - slack && a + std::abs(b) <= 1.0 + slack;
    }
    /// Affine map of [-1, 1] onto [lo, hi].
    static AffineMap onto(double lo, double hi) { return {0.5 * (lo + hi), 0.5 * (hi - lo)}; }
};

struct CurvePiece {
    double lo = -1.0;
    double hi = 1.0;
    VecPolynomial displacement;  // in the global parameter t
};

/// sigma(t) = anchor + displacement(t) on [-1, 1], displacement piecewise
/// polynomial. Keeping the anchor separate lets very short curves keep full
/// relative precision in their derivatives.
class ParamCurve {
public:
    ParamCurve(PhaseSpace space, Vec anchor, std::vector<CurvePiece> pieces, Regularity reg, std::string id = "curve")
        : space_(std::move(space)), anchor_(std::move(anchor)), pieces_(std::move(pieces)), reg_(reg), id_(std::move(id)) {
        space_.require(anchor_);
        if (pieces_.empty()) throw DomainError("curve needs at least one piece");
        if (pieces_.front().lo != -1.0 || pieces_.back().hi != 1.0) throw DomainError("curve pieces must span [-1, 1]");
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const auto& p = pieces_[i];
            if (p.displacement.dim() != space_.dim()) throw DomainError("curve piece dimension mismatch");
            if (!(p.lo < p.hi)) throw DomainError("curve piece with empty parameter range");
            if (i > 0) {
                const auto& q = pieces_[i - 1];
                if (q.hi != p.lo) throw DomainError("curve pieces must be contiguous");
                for (int k = 0; k <= reg_.r; ++k) {
                    const Vec l = q.displacement.derivative(k)(p.lo);
                    const Vec r = p.displacement.derivative(k)(p.lo);
                    if ((l - r).norm() > 1e-12 * (1.0 + l.norm()))
                        throw DomainError("curve pieces do not join in C^" + std::to_string(reg_.r));
                }
            }
        }
    }

    /// sigma(t) = p + t v
    static ParamCurve segment(const PhaseSpace& space, const Vec& p, const Vec& v, Regularity reg = {},
                              std::string id = "segment") {
        return ParamCurve(space, p, {{-1.0, 1.0, VecPolynomial({Vec::Zero(space.dim()), v})}}, reg, std::move(id));
    }

    static ParamCurve polynomial(const PhaseSpace& space, const Vec& anchor, VecPolynomial disp, Regularity reg = {},
                                 std::string id = "polynomial") {
        return ParamCurve(space, anchor, {{-1.0, 1.0, std::move(disp)}}, reg, std::move(id));
    }

    const PhaseSpace& space() const { return space_; }
    const Vec& anchor() const { return anchor_; }
    const std::vector<CurvePiece>& pieces() const { return pieces_; }
    const Regularity& regularity() const { return reg_; }
    const std::string& id() const { return id_; }
    int dim() const { return space_.dim(); }
    int max_degree() const {
        int d = 0;
        for (const auto& p : pieces_) d = std::max(d, p.displacement.degree());
        return d;
    }

    const CurvePiece& piece_at(double t) const {
        for (const auto& p : pieces_)
            if (t <= p.hi) return p;
        return pieces_.back();
    }

    Vec displacement(double t) const { return piece_at(t).displacement(t); }
    Vec point(double t) const { return space_.reduce(anchor_ + displacement(t)); }
    Vec derivative(double t, int k = 1) const { return piece_at(t).displacement.derivative(k)(t); }

    /// Jet of sigma o theta at s: point, then the k-th derivatives for k <= order.
    Jet jet(double s, int order, const AffineMap& theta = {}) const {
        const double t = theta(s);
        const auto& p = piece_at(t);
        Jet j;
        j.push_back(space_.reduce(anchor_ + p.displacement(t)));
        double scale = 1.0;
        for (int k = 1; k <= order; ++k) {
            scale *= theta.b;
            j.push_back(p.displacement.derivative(k)(t) * scale);
        }
        return j;
    }

    /// Exact sup of |D^k sigma| over [lo, hi].
    double sup_derivative(int k, double lo = -1.0, double hi = 1.0) const {
        double best = 0.0;
        for (const auto& p : pieces_) {
            const double a = std::max(lo, p.lo), b = std::min(hi, p.hi);
            if (a > b) continue;
            const auto d = p.displacement.derivative(k);
            best = std::max(best, a == b ? d(a).norm() : d.sup_norm(a, b));
        }
        return best;
    }

    /// Hölder constant of D^r sigma over [lo, hi], bounded by sup|D^{r+1}| (hi-lo)^{1-alpha}.
    double holder_top(double lo = -1.0, double hi = 1.0) const {
        if (max_degree() <= reg_.r) return 0.0;
        return sup_derivative(reg_.r + 1, lo, hi) * std::pow(hi - lo, 1.0 - reg_.alpha);
    }

    /// sigma o theta as a curve in its own right.
    ParamCurve reparametrized(const AffineMap& theta, std::string id = {}) const {
        if (!theta.valid()) throw DomainError("reparametrization must map [-1,1] into [-1,1]");
        const double lo = std::min(theta(-1.0), theta(1.0)), hi = std::max(theta(-1.0), theta(1.0));
        std::vector<CurvePiece> out;
        for (const auto& p : pieces_) {
            const double a = std::max(lo, p.lo), b = std::min(hi, p.hi);
            if (a >= b && !(pieces_.size() == 1)) continue;
            double s0 = theta.inverse(a), s1 = theta.inverse(b);
            if (s0 > s1) std::swap(s0, s1);
            out.push_back({s0, s1, p.displacement.compose_affine(theta.a, theta.b)});
        }
        out.front().lo = -1.0;
        out.back().hi = 1.0;
        return ParamCurve(space_, anchor_, std::move(out), reg_, id.empty() ? id_ + "'" : std::move(id));
    }

    /// Same curve with the anchor moved to `a` (displacements shift by anchor - a).
    ParamCurve reanchored(const Vec& a) const {
        const Vec shift = space_.displacement(a, anchor_);
        std::vector<CurvePiece> out = pieces_;
        for (auto& p : out) {
            auto c = p.displacement.coeffs();
            c[0] += shift;
            p.displacement = VecPolynomial(std::move(c));
        }
        return ParamCurve(space_, a, std::move(out), reg_, id_);
    }

private:
    PhaseSpace space_;
    Vec anchor_;
    std::vector<CurvePiece> pieces_;
    Regularity reg_;
    std::string id_;
};

// ---------------------------------------------------------------------------
// Bounded curves

enum class BoundedVerdict { neither, bounded, strongly_bounded };

inline const char* to_string(BoundedVerdict v) {
    switch (v) {
        case BoundedVerdict::bounded: return "bounded";
        case BoundedVerdict::strongly_bounded: return "strongly_bounded";
        default: return "neither";
    }
}

struct BoundednessCertificate {
    std::string curve_id;
    double first = 0.0;         // ||D sigma||_0
    double higher = 0.0;        // sup_{2<=s<=r} ||D^s sigma||_0 (0 when r = 1)
    double holder = 0.0;        // ||D^r sigma||_alpha
    double grid_resolution = 0; // 0 when computed exactly
    int r = 1;
    double margin = 1.0;
    std::optional<double> epsilon;
    BoundedVerdict verdict = BoundedVerdict::neither;

    /// max(higher, holder) / (||D sigma||_0 / 6); bounded iff <= margin.
    double ratio() const {
        const double lim = first / 6.0;
        const double top = r >= 2 ? std::max(higher, holder) : holder;
        if (lim <= 0.0) return top > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        return top / lim;
    }
};

inline BoundedVerdict bounded_verdict(const BoundednessCertificate& c) {
    if (!(c.ratio() <= c.margin)) return BoundedVerdict::neither;
    if (c.epsilon && c.first <= *c.epsilon) return BoundedVerdict::strongly_bounded;
    return BoundedVerdict::bounded;
}

/// Exact check for piecewise-polynomial curves.
inline BoundednessCertificate check_bounded(const ParamCurve& c, std::optional<double> eps = {}, double margin = 1.0) {
    BoundednessCertificate cert;
    cert.curve_id = c.id();
    cert.r = c.regularity().r;
    cert.margin = margin;
    cert.epsilon = eps;
    cert.first = c.sup_derivative(1);
    for (int s = 2; s <= cert.r; ++s) cert.higher = std::max(cert.higher, c.sup_derivative(s));
    cert.holder = c.holder_top();
    cert.verdict = bounded_verdict(cert);
    return cert;
}

// ---------------------------------------------------------------------------
// Iterates and composed curves

/// g = f^power.
struct MapPower {
    Diffeomorphism f;
    int power = 1;

    int dim() const { return f.dim(); }
    double upsilon() const { return std::pow(f.upsilon(), power); }
    std::string name() const { return power == 1 ? f.name() : f.name() + "^" + std::to_string(power); }
    Vec apply(const Vec& p) const { return f.iterate_point(p, power); }
    Mat jacobian(const Vec& p) const {
        Vec x = p;
        Mat j = Mat::Identity(dim(), dim());
        for (int k = 0; k < power; ++k) {
            j = f.jacobian(x) * j;
            x = f.evaluate(x);
        }
        return j;
    }
    Jet push(Jet jet) const {
        for (int k = 0; k < power; ++k) jet = push_jet(f, jet);
        return jet;
    }
};

/// Jet of g o sigma o theta at s.
inline Jet composed_jet(const MapPower& g, const ParamCurve& c, const AffineMap& theta, double s, int order) {
    return g.push(c.jet(s, order, theta));
}

/// check_bounded for g o sigma o theta, quantities sampled on a uniform grid.
inline BoundednessCertificate check_bounded_composed(const MapPower& g, const ParamCurve& c, const AffineMap& theta,
                                                     std::optional<double> eps = {}, double margin = 1.0,
                                                     double resolution = 1e-3) {
    const int r = c.regularity().r;
    const double alpha = c.regularity().alpha;
    const int n = static_cast<int>(std::ceil(2.0 / resolution));
    BoundednessCertificate cert;
    cert.curve_id = g.name() + " o " + c.id();
    cert.r = r;
    cert.margin = margin;
    cert.epsilon = eps;
    cert.grid_resolution = 2.0 / n;
    double top = 0.0;
    for (int i = 0; i <= n; ++i) {
        const auto j = composed_jet(g, c, theta, -1.0 + 2.0 * i / n, r + 1);
        cert.first = std::max(cert.first, j[1].norm());
        for (int s = 2; s <= r; ++s) cert.higher = std::max(cert.higher, j[static_cast<std::size_t>(s)].norm());
        top = std::max(top, j[static_cast<std::size_t>(r + 1)].norm());
    }
    cert.holder = top * std::pow(2.0, 1.0 - alpha);
    cert.verdict = bounded_verdict(cert);
    return cert;
}

/// (chi+, chi) at sigma(t): ceilings of log ||D g|| and of the log growth along the curve.
inline std::pair<int, int> exponent_class(const MapPower& g, const ParamCurve& c, double t) {
    const Mat j = g.jacobian(c.point(t));
    const Vec v = c.derivative(t);
    const double vn = v.norm();
    if (!(vn > 0.0)) throw NumericError("exponent_class: curve has zero speed");
    return {static_cast<int>(std::ceil(std::log(operator_norm(j)))),
            static_cast<int>(std::ceil(std::log((j * v).norm() / vn)))};
}

/// Classes met by the curve at `samples` evenly spaced parameters.
inline std::vector<std::pair<int, int>> exponent_classes(const MapPower& g, const ParamCurve& c, int samples = 65) {
    std::set<std::pair<int, int>> s;
    for (int i = 0; i < samples; ++i) s.insert(exponent_class(g, c, -1.0 + 2.0 * i / (samples - 1)));
    return {s.begin(), s.end()};
}

/// The epsilon constraint 2(Omega + 2) eps < min(1, injectivity radius).
inline bool epsilon_admissible(double omega, double eps, const PhaseSpace& space) {
    return 2.0 * (omega + 2.0) * eps < std::min(1.0, space.injectivity_radius());
}

// ---------------------------------------------------------------------------
// One reparametrization step

struct ReparamOptions {
    double margin = 1.01;            // slack on the 1/6 constants when certifying outputs
    bool check_admissible = true;    // enforce the epsilon constraint for Omega = Upsilon^power
    std::size_t sampled_members = 3; // members re-checked directly on the 1e-3 grid
    int sup_grid = 1024;             // grid for the global derivative sups of g o sigma
};

/// Consecutive members of one band interval of one base piece.
struct ReparamBlock {
    int piece = 0;
    Interval band;  // in the base piece's parameter
};

struct ReparamFamily {
    // context
    int chi_plus = 0;
    int chi = 0;
    double epsilon = 0.0;
    std::string map_name;
    std::string curve_id;
    int r = 1;
    double alpha = 1.0;
    CalculusConstants constants;

    double contraction = 0.0;  // b
    int base_count = 0;        // ceil(1/b) + 1
    double parts = 0.0;        // ceil((1000 e^5 C_K)^{2/alpha}) + 1
    std::vector<ReparamBlock> blocks;
    int max_bands_per_piece = 0;

    double log_bound = 0.0;    // log of C_{r,alpha} exp((chi+ - chi)/(r - 1 + alpha))

    // certification of the outputs
    double worst_certificate_ratio = 0.0;  // over all blocks; bounded iff <= margin
    double margin = 1.01;
    std::size_t sampled_checked = 0;
    std::size_t sampled_bounded = 0;

    long double size() const { return static_cast<long double>(blocks.size()) * static_cast<long double>(parts); }
    double log_size() const { return blocks.empty() ? -std::numeric_limits<double>::infinity()
                                                    : std::log(static_cast<double>(blocks.size())) + std::log(parts); }
    bool within_bound() const { return blocks.empty() || log_size() <= log_bound + 1e-12; }
    bool all_bounded() const { return worst_certificate_ratio <= margin && sampled_bounded == sampled_checked; }

    AffineMap base(int piece) const {
        const double w = 2.0 / base_count;
        return {-1.0 + w * (piece + 0.5), 0.5 * w};
    }
    /// Member `j` (0 <= j < parts) of block `k`.
    AffineMap member(std::size_t k, double j) const {
        const auto& bl = blocks.at(k);
        const double w = bl.band.width() / parts;
        return base(bl.piece).compose(AffineMap::onto(bl.band.lo + j * w, bl.band.lo + (j + 1) * w));
    }
    /// Block and member index covering curve parameter t, if any.
    std::optional<std::pair<std::size_t, double>> locate(double t) const {
        const double w = 2.0 / base_count;
        const int guess = std::clamp(static_cast<int>(std::floor((t + 1.0) / w)), 0, base_count - 1);
        for (int piece = std::max(0, guess - 1); piece <= std::min(base_count - 1, guess + 1); ++piece) {
            const auto bm = base(piece);
            const double s = bm.inverse(t);
            if (s < -1.0 - 1e-12 || s > 1.0 + 1e-12) continue;
            auto it = std::lower_bound(blocks.begin(), blocks.end(), piece,
                                       [](const ReparamBlock& b, int p) { return b.piece < p; });
            for (; it != blocks.end() && it->piece == piece; ++it)
                if (it->band.contains(std::clamp(s, -1.0, 1.0))) {
                    const double j = std::clamp(std::floor((s - it->band.lo) / it->band.width() * parts), 0.0, parts - 1.0);
                    return std::pair{static_cast<std::size_t>(it - blocks.begin()), j};
                }
        }
        return std::nullopt;
    }
};

namespace detail {

/// Global sups of |D^s (g o sigma)| over [-1, 1] for s = 1..order, from jets on a
/// grid; each entry except the last is widened by half a grid step times the
/// next derivative, the last by 10%.
inline std::vector<double> composed_sups(const MapPower& g, const ParamCurve& c, int order, int grid) {
    std::vector<double> sup(static_cast<std::size_t>(order) + 1, 0.0);
    for (int i = 0; i <= grid; ++i) {
        const auto j = composed_jet(g, c, {}, -1.0 + 2.0 * i / grid, order);
        for (int s = 1; s <= order; ++s) sup[static_cast<std::size_t>(s)] = std::max(sup[static_cast<std::size_t>(s)], j[static_cast<std::size_t>(s)].norm());
    }
    const double h = 1.0 / grid;
    for (int s = 1; s < order; ++s) sup[static_cast<std::size_t>(s)] += h * sup[static_cast<std::size_t>(s + 1)];
    sup[static_cast<std::size_t>(order)] *= 1.1;
    return sup;
}

}  // namespace detail

/// Cover the parameters t with (ceil log||D_{sigma(t)} g||, ceil log||D g|_{T sigma}||)
/// = (chi_plus, chi) by affine pieces theta with g o sigma o theta bounded.
inline ReparamFamily reparametrize_step(const MapPower& g, const ParamCurve& sigma, int chi_plus, int chi, double eps,
                                        const CalculusConstants& constants, const ReparamOptions& opt = {}) {
    const auto reg = sigma.regularity();
    const int r = reg.r;
    const double alpha = reg.alpha;
    if (chi_plus < chi) throw DomainError("reparametrize_step: chi+ < chi");
    if (constants.r != r || constants.alpha != reg.alpha)
        throw DomainError("reparametrize_step: constants calibrated for a different regularity");
    if (opt.check_admissible && !epsilon_admissible(g.upsilon(), eps, sigma.space()))
        throw DomainError("reparametrize_step: epsilon too large for Omega = " + std::to_string(g.upsilon()));
    const auto pre = check_bounded(sigma, eps);
    if (pre.verdict != BoundedVerdict::strongly_bounded)
        throw DomainError("reparametrize_step: curve is not strongly epsilon-bounded (ratio " +
                          std::to_string(pre.ratio()) + ", speed " + std::to_string(pre.first) + ")");

    ReparamFamily fam;
    fam.chi_plus = chi_plus;
    fam.chi = chi;
    fam.epsilon = eps;
    fam.map_name = g.name();
    fam.curve_id = sigma.id();
    fam.r = r;
    fam.alpha = alpha;
    fam.constants = constants;
    fam.margin = opt.margin;
    const double scale = constants.exponent_scale();
    const double dchi = chi_plus - chi;
    fam.contraction = std::pow(3.0 * constants.c_b * std::exp(dchi + 10.0), -scale);
    const double nb = std::ceil(1.0 / fam.contraction) + 1.0;
    if (nb > 5e7) throw NumericError("reparametrize_step: " + std::to_string(nb) + " base pieces");
    fam.base_count = static_cast<int>(nb);
    fam.parts = std::ceil(constants.split_factor()) + 1.0;
    fam.log_bound = constants.log_c_r_alpha() + dchi * scale;

    const double inv_n = 1.0 / fam.base_count;
    const double lo_band = std::exp(-6.0 + 2.0 * chi), hi_band = std::exp(6.0 + 2.0 * chi);
    const auto sups = detail::composed_sups(g, sigma, r + 1, opt.sup_grid);
    RootOptions ropt;
    ropt.abs_tol = 1e-9;

    double worst = 0.0;
    // Affine curves have constant speed.
    const std::optional<double> flat_speed =
        sigma.max_degree() <= 1 ? std::optional<double>(sigma.sup_derivative(1)) : std::nullopt;
    for (int piece = 0; piece < fam.base_count; ++piece) {
        const auto gamma = fam.base(piece);
        const double t0 = gamma.a;
        // B = ||D(sigma o gamma)||_0
        const double speed = flat_speed ? *flat_speed : sigma.sup_derivative(1, t0 - gamma.b, t0 + gamma.b);
        const double bsq = speed * speed * inv_n * inv_n;
        if (!(bsq > 0.0)) continue;
        // Taylor polynomial of D(g o sigma o gamma) at 0, degree r - 1.
        std::vector<Vec> coef;
        double h1 = 0.0;  // |D(g o sigma)| at the piece centre
        if (r == 1) {
            const Vec d = g.jacobian(sigma.point(t0)) * sigma.derivative(t0);
            h1 = d.norm();
            coef.push_back(d * inv_n);
        } else {
            const auto jet = composed_jet(g, sigma, {}, t0, r);
            h1 = jet[1].norm();
            double pw = inv_n, fact = 1.0;
            for (int k = 0; k < r; ++k) {
                if (k > 0) fact *= k;
                coef.push_back(jet[static_cast<std::size_t>(k + 1)] * (pw / fact));
                pw *= inv_n;
            }
        }
        std::vector<Interval> bands;
        if (coef.size() == 1) {
            // Constant derivative: the whole piece is in the band or none of it.
            const double v = coef.front().squaredNorm();
            if (lo_band * bsq < v && v < hi_band * bsq) bands.push_back({-1.0, 1.0});
        } else {
            bands = band_intervals(VecPolynomial(coef).squared_norm(), lo_band * bsq, hi_band * bsq, -1.0, 1.0, ropt);
        }
        if (bands.empty()) continue;
        fam.max_bands_per_piece = std::max(fam.max_bands_per_piece, static_cast<int>(bands.size()));
        // Certificate for every member of this piece: a member has contraction
        // kappa = c / n relative to sigma with c <= |J| / (2 parts); then
        // |D^s member| = kappa^s |D^s(g o sigma)| and |D member| >= kappa * lower.
        const double lower = h1 - inv_n * sups[2];
        for (const auto& iv : bands) {
            fam.blocks.push_back({piece, iv});
            const double kappa = iv.width() / (2.0 * fam.parts) * inv_n;
            double top = 0.0;
            double pw = 1.0;
            for (int s = 2; s <= r; ++s) {
                pw *= kappa;
                top = std::max(top, pw * sups[static_cast<std::size_t>(s)]);
            }
            const double hold = std::pow(kappa, r) * std::pow(2.0, 1.0 - alpha) * sups[static_cast<std::size_t>(r + 1)];
            top = std::max(top, hold);
            const double ratio = lower > 0.0 ? top / (lower / 6.0) : std::numeric_limits<double>::infinity();
            worst = std::max(worst, ratio);
        }
    }
    fam.worst_certificate_ratio = worst;

    // Direct re-check of a few members on the fine grid.
    if (!fam.blocks.empty()) {
        const std::size_t n = std::min(opt.sampled_members, fam.blocks.size());
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = n == 1 ? 0 : i * (fam.blocks.size() - 1) / (n - 1);
            const double j = i % 2 == 0 ? 0.0 : fam.parts - 1.0;
            const auto cert = check_bounded_composed(g, sigma, fam.member(k, j), {}, opt.margin);
            ++fam.sampled_checked;
            if (cert.verdict != BoundedVerdict::neither) ++fam.sampled_bounded;
        }
    }
    return fam;
}

struct CoverageReport {
    std::size_t sampled = 0;   // parameters found in the defining set
    std::size_t misses = 0;
    std::size_t attempts = 0;
};

/// Draws parameters uniformly on [-1, 1], keeps those in the defining set of
/// (chi+, chi) and checks that some member covers each.
inline CoverageReport check_coverage(const MapPower& g, const ParamCurve& sigma, const ReparamFamily& fam,
                                     std::size_t wanted, std::uint64_t seed, std::size_t max_attempts = 200000) {
    CoverageReport rep;
    CounterRng rng(seed, 0xc0e);
    while (rep.sampled < wanted && rep.attempts < max_attempts) {
        const double t = -1.0 + 2.0 * rng.uniform(rep.attempts++);
        if (exponent_class(g, sigma, t) != std::pair{fam.chi_plus, fam.chi}) continue;
        ++rep.sampled;
        if (!fam.locate(t)) ++rep.misses;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Bowen-ball covers

struct BowenOptions {
    int initial_block = 0;        // 0 picks c in [1, q] with n - c divisible by q
    bool skip_if_bounded = false; // keep a piece whole when its image is already bounded
    int class_samples = 65;
    ReparamOptions reparam{1.01, false, 1, 256};
};

struct BowenLevel {
    int time = 0;          // orbit time reached at the end of the level
    int block = 0;         // block length (c or q)
    std::vector<std::pair<int, int>> classes;
    double max_chi_gap = 0.0;   // max over classes of chi+ - chi
    double log_multiplier = 0.0;  // log of the children per parent
    double hit_fraction = 1.0;    // parameter fraction whose image stays in the ball
    int hit_intervals = 1;
    double log_count = 0.0;       // log |Gamma| after the level
    double max_log_speed = 0.0;   // log sup ||D(f^j o sigma o gamma)|| over the level, representative gamma
    bool skipped = false;
};

struct BowenCover {
    int n = 0;
    int q = 0;
    double epsilon = 0.0;
    double upsilon = 0.0;
    CalculusConstants constants;
    AffineMap representative;  // one member of Gamma_n, composed exactly across levels
    double representative_log_contraction = 0.0;
    std::vector<BowenLevel> levels;

    double log_count() const { return levels.empty() ? 0.0 : levels.back().log_count; }
    /// (time, log count) pairs, starting at (0, 0) for Gamma_0 = {identity}.
    std::vector<std::pair<int, double>> history() const {
        std::vector<std::pair<int, double>> h{{0, 0.0}};
        for (const auto& l : levels) h.push_back({l.time, l.log_count});
        return h;
    }
    /// (1/n)[sum over levels of (chi+ - chi)/(r - 1 + alpha) + levels * log(2 q Upsilon C)].
    double ceiling() const {
        double s = 0.0;
        for (const auto& l : levels) s += l.max_chi_gap * constants.exponent_scale();
        const double per = std::log(2.0 * q * upsilon) + constants.log_c_r_alpha();
        return (s + static_cast<double>(levels.size()) * per) / n;
    }
};

namespace detail {

/// g(a + delta) - g(a) without forming a + delta when delta is tiny.
inline Vec advance_displacement(const Diffeomorphism& f, const Vec& a, const Vec& delta) {
    if (delta.norm() > 1e-7) return f.space().displacement(f.evaluate(a), f.evaluate(f.space().reduce(a + delta)));
    Vec out = f.jacobian(a) * delta;
    std::vector<Vec> dirs{delta, delta};
    out += 0.5 * f.derivative(a, dirs);
    dirs.push_back(delta);
    out += f.derivative(a, dirs) / 6.0;
    return out;
}

/// Image curve g o sigma anchored at g(anchor). The value at t = 0 is
/// propagated directly and the rest is fitted as t r(t), r interpolating at
/// Chebyshev nodes (least squares when the node count must be padded to stay
/// off t = 0). Bowen balls can be far below the image's extent, so the
/// constant term must not carry the fitting noise.
inline ParamCurve image_curve(const MapPower& g, const ParamCurve& c, int degree) {
    const int d = c.dim();
    auto propagate = [&](double t) {
        Vec a = c.anchor();
        Vec delta = c.displacement(t);
        for (int s = 0; s < g.power; ++s) {
            delta = advance_displacement(g.f, a, delta);
            a = g.f.evaluate(a);
        }
        return delta;
    };
    const Vec c0 = propagate(0.0);
    const int k = degree % 2 == 0 ? degree : degree + 1;
    Mat v(k, degree);
    Mat rhs(k, d);
    for (int i = 0; i < k; ++i) {
        const double t = std::cos(std::numbers::pi * (i + 0.5) / k);
        double pw = 1.0;
        for (int j = 0; j < degree; ++j) {
            v(i, j) = pw;
            pw *= t;
        }
        rhs.row(i) = ((propagate(t) - c0) / t).transpose();
    }
    const Mat coef = v.colPivHouseholderQr().solve(rhs);
    std::vector<Vec> cs{c0};
    for (int j = 0; j < degree; ++j) cs.push_back(coef.row(j).transpose());
    return ParamCurve::polynomial(c.space(), g.apply(c.anchor()), VecPolynomial(std::move(cs)), c.regularity(),
                                  c.id());
}

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace detail

/// Iterated reparametrization along the orbit of y: an initial block of
/// length c, then blocks of length q, keeping at each level only the pieces
/// whose image stays within eps of the orbit. Counts are tracked in log space
/// with a uniform-density model: every parent spawns the multiplier computed
/// on the carried curve, and the fraction kept is the parameter fraction of
/// the carried curve mapped into the ball (plus two boundary pieces per
/// interval).
inline BowenCover bowen_cover(const Diffeomorphism& f, const ParamCurve& sigma, const Vec& y, int n, int q, double eps,
                              const CalculusConstants& constants, const BowenOptions& opt = {}) {
    if (q < 1 || n < q) throw DomainError("bowen_cover: need 1 <= q <= n");
    const auto pre = check_bounded(sigma, eps);
    if (pre.verdict != BoundedVerdict::strongly_bounded)
        throw DomainError("bowen_cover: curve is not strongly epsilon-bounded");
    if (!epsilon_admissible(std::pow(f.upsilon(), q), eps, sigma.space()))
        throw DomainError("bowen_cover: epsilon too large for Omega = Upsilon^q");
    const int c = opt.initial_block > 0 ? opt.initial_block : n - q * ((n - 1) / q);
    if (c < 1 || c > q || (n - c) % q != 0) throw DomainError("bowen_cover: initial block must satisfy 1 <= c <= q");

    BowenCover cov;
    cov.n = n;
    cov.q = q;
    cov.epsilon = eps;
    cov.upsilon = f.upsilon();
    cov.constants = constants;

    ParamCurve carried = sigma.reanchored(f.space().reduce(y));
    AffineMap to_sigma{};      // carried parameter -> sigma parameter
    AffineMap representative{};
    double log_count = 0.0;
    double curve_eps = eps;
    int time = 0;
    const int fit_degree = std::max(2, sigma.max_degree());

    while (time < n) {
        const int block = time == 0 ? c : q;
        const MapPower g{f, block};
        BowenLevel lvl;
        lvl.block = block;
        lvl.classes = exponent_classes(g, carried, opt.class_samples);

        const auto image = detail::image_curve(g, carried, fit_degree);
        std::optional<ReparamFamily> rep_family;
        if (opt.skip_if_bounded && check_bounded(image, {}, opt.reparam.margin).verdict != BoundedVerdict::neither) {
            lvl.skipped = true;
            lvl.log_multiplier = 0.0;
        } else {
            lvl.log_multiplier = -std::numeric_limits<double>::infinity();
            for (const auto& [cp, ch] : lvl.classes) {
                auto fam = reparametrize_step(g, carried, cp, ch, curve_eps, constants, opt.reparam);
                lvl.max_chi_gap = std::max(lvl.max_chi_gap, static_cast<double>(cp - ch));
                lvl.log_multiplier = detail::log_add(lvl.log_multiplier, fam.log_size());
                if (!rep_family && !fam.blocks.empty()) rep_family = std::move(fam);
            }
        }

        // Restrict to the parameters whose image stays in the eps-ball.
        RootOptions ropt;
        ropt.abs_tol = 0.0;
        ropt.rel_tol = 1e-13;
        const auto inside = band_intervals(image.pieces().front().displacement.squared_norm(), -1.0, eps * eps,
                                           -1.0, 1.0, ropt);
        if (inside.empty()) throw NumericError("bowen_cover: image leaves the ball around the orbit");
        double frac = 0.0;
        const Interval* keep = &inside.front();
        for (const auto& iv : inside) {
            frac += iv.width() / 2.0;
            if (iv.width() > keep->width()) keep = &iv;
        }
        lvl.hit_fraction = std::min(1.0, frac);
        lvl.hit_intervals = static_cast<int>(inside.size());
        const double children = log_count + lvl.log_multiplier;
        const double kept = detail::log_add(children + std::log(lvl.hit_fraction), std::log(2.0 * lvl.hit_intervals));
        lvl.log_count = std::min(children, kept);

        // Representative member and the derivative bound along the block.
        AffineMap member{};
        if (rep_family) {
            const double tmid = 0.5 * (keep->lo + keep->hi);
            const auto loc = rep_family->locate(tmid);
            member = loc ? rep_family->member(loc->first, loc->second) : rep_family->member(0, 0.0);
        }
        const AffineMap next = to_sigma.compose(member);
        if (next.b != to_sigma.b * member.b) throw NumericError("bowen_cover: affine composition lost exactness");
        representative = next;
        lvl.max_log_speed = -std::numeric_limits<double>::infinity();
        for (double u : {-1.0, 0.0, 1.0}) {
            const double t = member(u);
            Vec x = carried.point(t);
            Vec v = carried.derivative(t) * member.b;
            for (int i = 0; i <= block; ++i) {
                lvl.max_log_speed = std::max(lvl.max_log_speed, std::log(v.norm()));
                if (i == block) break;
                v = f.jacobian(x) * v;
                x = f.evaluate(x);
            }
        }

        time += block;
        lvl.time = time;
        log_count = lvl.log_count;
        cov.levels.push_back(lvl);
        if (time >= n) break;

        // Next carried curve: the image restricted to the largest kept interval.
        const auto onto = AffineMap::onto(keep->lo, keep->hi);
        carried = image.reparametrized(onto);
        to_sigma = to_sigma.compose(onto);
        curve_eps = 2.0 * eps;
    }
    cov.representative = representative;
    cov.representative_log_contraction = std::log(std::abs(representative.b));
    return cov;
}

/// Max over the tail half of the history of the rate relative to the first
/// entry: (log count_n - log count_0) / (n - n_0).
inline double growth_rate(const std::vector<std::pair<int, double>>& history) {
    if (history.size() < 2) throw DomainError("growth_rate: need at least two levels");
    const auto [n0, c0] = history.front();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = std::max<std::size_t>(1, history.size() / 2); i < history.size(); ++i)
        best = std::max(best, (history[i].second - c0) / (history[i].first - n0));
    return best;
}

}  // namespace usc
