#pragma once

// Phase spaces (flat tori and boxes), C^{r,alpha} maps with exact derivative
// rules, orbits with log-scaled tangent cocycles, curve-jet propagation and
// sampled C^{r,alpha} norm estimates.

#include "usc/core.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace usc {

// ---------------------------------------------------------------------------
// Phase spaces

class PhaseSpace {
public:
    enum class Kind { torus, box };

    static PhaseSpace torus(int dim) {
        check_dim(dim);
        return PhaseSpace(Kind::torus, Vec::Zero(dim), Vec::Ones(dim));
    }

    static PhaseSpace box(Vec lo, Vec hi) {
        check_dim(static_cast<int>(lo.size()));
        if (lo.size() != hi.size() || ((hi - lo).array() <= 0.0).any())
            throw DomainError("box: need lo < hi componentwise");
        return PhaseSpace(Kind::box, std::move(lo), std::move(hi));
    }

    Kind kind() const { return kind_; }
    bool is_torus() const { return kind_ == Kind::torus; }
    int dim() const { return static_cast<int>(lo_.size()); }
    const Vec& lo() const { return lo_; }
    const Vec& hi() const { return hi_; }

    /// Torus coordinates reduced into [0,1); box points are left as they are
    /// (maps on boxes are plain maps of R^d, the box only frames partitions).
    Vec reduce(Vec p) const {
        if (kind_ == Kind::torus) {
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                double x = p(i) - std::floor(p(i));
                if (x >= 1.0) x = 0.0;
                p(i) = x;
            }
        }
        return p;
    }

    /// Shortest displacement q - p (minimal image on the torus).
    Vec displacement(const Vec& p, const Vec& q) const {
        Vec d = q - p;
        if (kind_ == Kind::torus) {
            for (Eigen::Index i = 0; i < d.size(); ++i) d(i) -= std::round(d(i));
        }
        return d;
    }

    double distance(const Vec& p, const Vec& q) const { return displacement(p, q).norm(); }

    /// Radius on which exp_x^{-1} is an embedding: 1/2 on the unit torus,
    /// half the smallest side on a box.
    double injectivity_radius() const {
        if (kind_ == Kind::torus) return 0.5;
        return 0.5 * (hi_ - lo_).minCoeff();
    }

    void require(const Vec& p) const {
        if (p.size() != dim())
            throw DomainError("point of dimension " + std::to_string(p.size()) +
                              " used in a " + std::to_string(dim()) + "-dimensional phase space");
    }

    bool operator==(const PhaseSpace& o) const {
        return kind_ == o.kind_ && lo_.size() == o.lo_.size() && lo_ == o.lo_ && hi_ == o.hi_;
    }

private:
    PhaseSpace(Kind k, Vec lo, Vec hi) : kind_(k), lo_(std::move(lo)), hi_(std::move(hi)) {}

    static void check_dim(int d) {
        if (d < 1 || d > 3) throw DomainError("phase space dimension must be 1, 2 or 3");
    }

    Kind kind_;
    Vec lo_, hi_;
};

struct Regularity {
    int r = 1;
    double alpha = 1.0;
};

/// Closed-form bounds a map family can provide instead of sampled ones.
struct AnalyticBounds {
    double sup_df = 0.0;       // sup ||Df||
    double sup_dfinv = 0.0;    // sup ||Df^{-1}||
    double holder_top = 0.0;   // alpha-Holder constant of D^r f
    double holder_top_inverse = 0.0;  // alpha-Holder constant of D f^{-1} (r = 1)

    double cap() const { return std::max({1.0, sup_df, sup_dfinv, holder_top, holder_top_inverse}); }
};

// ---------------------------------------------------------------------------
// Map models

/// Behaviour behind a Diffeomorphism. Implementations are immutable.
class MapModel {
public:
    virtual ~MapModel() = default;

    virtual const PhaseSpace& space() const = 0;
    virtual std::string name() const = 0;
    virtual Vec forward(const Vec& p) const = 0;
    virtual bool invertible() const = 0;
    virtual Vec inverse(const Vec& p) const = 0;
    virtual Mat jacobian(const Vec& p) const = 0;

    /// Whether derivative() is an exact rule (otherwise finite differences).
    virtual bool exact_derivatives() const { return false; }

    /// k-th derivative D^k f(p)[v_1, ..., v_k] with k = dirs.size() >= 1.
    /// The default uses central differences of the (k-1)-th rule with step
    /// 1e-5, which is second order in the step.
    virtual Vec derivative(const Vec& p, std::span<const Vec> dirs) const {
        if (dirs.empty()) throw DomainError("derivative: order must be >= 1");
        if (dirs.size() == 1) return jacobian(p) * dirs[0];
        constexpr double h = 1e-5;
        const Vec plus = p + h * dirs[0];
        const Vec minus = p - h * dirs[0];
        const auto rest = dirs.subspan(1);
        return (derivative(plus, rest) - derivative(minus, rest)) / (2.0 * h);
    }

    virtual std::optional<AnalyticBounds> analytic_bounds(const Regularity&) const {
        return std::nullopt;
    }
};

/// One C^infinity trigonometric term  amplitude * sin(2 pi <k, p> + phase).
struct TrigTerm {
    Vec amplitude;
    Vec frequency;  // integer entries on tori
    double phase = 0.0;
};

/// p -> A p + shift + sum of trigonometric terms, on the torus T^d.
/// Covers toral automorphisms, rotations, the standard map, expanding circle
/// maps and smooth perturbations of all of them.
class AffineTrigMap final : public MapModel {
public:
    AffineTrigMap(std::string name, Mat a, Vec shift, std::vector<TrigTerm> terms)
        : name_(std::move(name)), space_(PhaseSpace::torus(static_cast<int>(a.rows()))),
          a_(std::move(a)), shift_(std::move(shift)), terms_(std::move(terms)) {
        const int d = space_.dim();
        if (a_.cols() != d || shift_.size() != d) throw DomainError(name_ + ": inconsistent sizes");
        for (const auto& t : terms_) {
            if (t.amplitude.size() != d || t.frequency.size() != d)
                throw DomainError(name_ + ": trig term of wrong dimension");
            for (Eigen::Index i = 0; i < d; ++i)
                if (t.frequency(i) != std::round(t.frequency(i)))
                    throw DomainError(name_ + ": trig frequencies must be integers on a torus");
        }
        for (Eigen::Index i = 0; i < a_.size(); ++i)
            if (a_.data()[i] != std::round(a_.data()[i]))
                throw DomainError(name_ + ": linear part must be an integer matrix");
        const double det = a_.determinant();
        invertible_ = std::abs(std::abs(det) - 1.0) < 1e-12;
        if (invertible_) a_inv_ = a_.inverse();
    }

    const PhaseSpace& space() const override { return space_; }
    std::string name() const override { return name_; }
    bool invertible() const override { return invertible_; }
    bool exact_derivatives() const override { return true; }
    const Mat& linear_part() const { return a_; }
    const std::vector<TrigTerm>& terms() const { return terms_; }

    Vec forward(const Vec& p) const override { return space_.reduce(lift(p)); }

    Vec inverse(const Vec& target) const override {
        if (!invertible_) throw DomainError(name_ + " is not invertible");
        Vec x = space_.reduce(a_inv_ * (target - shift_));
        if (terms_.empty()) return x;
        // Newton on the lift; residuals are taken modulo the lattice.
        for (int it = 0; it < 60; ++it) {
            const Vec res = space_.displacement(target, forward(x));
            if (res.norm() < 1e-14) return x;
            const Vec step = jacobian(x).partialPivLu().solve(res);
            double damp = 1.0;
            const double r0 = res.norm();
            Vec trial = space_.reduce(x - step);
            while (space_.distance(target, forward(trial)) > r0 && damp > 1e-3) {
                damp *= 0.5;
                trial = space_.reduce(x - damp * step);
            }
            x = trial;
        }
        if (space_.distance(target, forward(x)) > 1e-11)
            throw NumericError(name_ + ": inverse Newton iteration did not converge");
        return x;
    }

    Mat jacobian(const Vec& p) const override {
        Mat j = a_;
        for (const auto& t : terms_) {
            const double c = kTwoPi * std::cos(kTwoPi * t.frequency.dot(p) + t.phase);
            j += c * t.amplitude * t.frequency.transpose();
        }
        return j;
    }

    Vec derivative(const Vec& p, std::span<const Vec> dirs) const override {
        if (dirs.empty()) throw DomainError("derivative: order must be >= 1");
        const auto k = static_cast<int>(dirs.size());
        Vec out = Vec::Zero(space_.dim());
        if (k == 1) out = a_ * dirs[0];
        for (const auto& t : terms_) {
            double prod = 1.0;
            for (const auto& v : dirs) prod *= t.frequency.dot(v);
            if (prod == 0.0) continue;
            const double theta = kTwoPi * t.frequency.dot(p) + t.phase + k * std::numbers::pi / 2;
            out += std::pow(kTwoPi, k) * std::sin(theta) * prod * t.amplitude;
        }
        return out;
    }

    std::optional<AnalyticBounds> analytic_bounds(const Regularity& reg) const override {
        // ||D^j f|| <= ||A|| [j=1] + sum |amp| (2 pi)^j |k|^j.
        AnalyticBounds b;
        double pert1 = 0.0;
        double pert_top = 0.0;
        for (const auto& t : terms_) {
            const double kn = t.frequency.norm();
            const double an = t.amplitude.norm();
            pert1 += an * kTwoPi * kn;
            pert_top += an * std::pow(kTwoPi * kn, reg.r + 1);
        }
        b.sup_df = operator_norm(a_) + pert1;
        if (invertible_) {
            // Neumann bound ||(A + E)^{-1}|| <= ||A^{-1}|| / (1 - ||A^{-1}|| ||E||).
            const double ainv = operator_norm(a_inv_);
            const double q = ainv * pert1;
            if (q < 1.0) {
                b.sup_dfinv = ainv / (1.0 - q);
            } else {
                // ||M^{-1}|| <= ||M||^{d-1} / |det M|, with |det Df| minimized on a grid.
                const int d = space_.dim();
                const int per = d <= 2 ? 64 : 24;
                double min_det = std::numeric_limits<double>::infinity();
                std::vector<int> idx(static_cast<std::size_t>(d), 0);
                for (bool more = true; more;) {
                    Vec p(d);
                    for (int k = 0; k < d; ++k) p(k) = (idx[static_cast<std::size_t>(k)] + 0.5) / per;
                    min_det = std::min(min_det, std::abs(jacobian(p).determinant()));
                    more = false;
                    for (int k = 0; k < d && !more; ++k) {
                        if (++idx[static_cast<std::size_t>(k)] < per) more = true;
                        else idx[static_cast<std::size_t>(k)] = 0;
                    }
                }
                b.sup_dfinv = min_det > 0.0 ? std::pow(b.sup_df, d - 1) / min_det
                                            : std::numeric_limits<double>::infinity();
            }
        }
        // Lipschitz constant of D^r f times diam^{1-alpha} bounds the alpha-Holder
        // constant (torus diameter sqrt(d)/2).
        const double diam = 0.5 * std::sqrt(static_cast<double>(space_.dim()));
        b.holder_top = pert_top * std::pow(diam, 1.0 - reg.alpha);
        // D(f^{-1}) = (Df o f^{-1})^{-1}; distances shrink by at most ||Df^{-1}||.
        if (invertible_ && reg.r == 1)
            b.holder_top_inverse = std::pow(b.sup_dfinv, 2.0 + reg.alpha) * b.holder_top;
        return b;
    }

private:
    Vec lift(const Vec& p) const {
        space_.require(p);
        Vec out = a_ * p + shift_;
        for (const auto& t : terms_) out += std::sin(kTwoPi * t.frequency.dot(p) + t.phase) * t.amplitude;
        return out;
    }

    std::string name_;
    PhaseSpace space_;
    Mat a_;
    Mat a_inv_;
    Vec shift_;
    std::vector<TrigTerm> terms_;
    bool invertible_ = false;
};

/// Henon map (x, y) -> (1 - a x^2 + y, b x) on R^2, framed by a box.
class HenonMap final : public MapModel {
public:
    HenonMap(double a, double b, PhaseSpace box)
        : a_(a), b_(b), space_(std::move(box)) {
        if (b_ == 0.0) throw DomainError("henon: b must be nonzero");
        if (space_.dim() != 2 || space_.is_torus()) throw DomainError("henon: needs a 2D box");
    }

    const PhaseSpace& space() const override { return space_; }
    std::string name() const override { return "henon"; }
    bool invertible() const override { return true; }
    bool exact_derivatives() const override { return true; }

    Vec forward(const Vec& p) const override {
        space_.require(p);
        return Vec{{1.0 - a_ * p(0) * p(0) + p(1), b_ * p(0)}};
    }

    Vec inverse(const Vec& p) const override {
        space_.require(p);
        const double x = p(1) / b_;
        return Vec{{x, p(0) - 1.0 + a_ * x * x}};
    }

    Mat jacobian(const Vec& p) const override {
        Mat j(2, 2);
        j << -2.0 * a_ * p(0), 1.0, b_, 0.0;
        return j;
    }

    Vec derivative(const Vec& p, std::span<const Vec> dirs) const override {
        if (dirs.empty()) throw DomainError("derivative: order must be >= 1");
        if (dirs.size() == 1) return jacobian(p) * dirs[0];
        if (dirs.size() == 2) return Vec{{-2.0 * a_ * dirs[0](0) * dirs[1](0), 0.0}};
        return Vec::Zero(2);
    }

    std::optional<AnalyticBounds> analytic_bounds(const Regularity& reg) const override {
        AnalyticBounds bd;
        const double xmax = std::max(std::abs(space_.lo()(0)), std::abs(space_.hi()(0)));
        Mat j(2, 2);
        j << 2.0 * a_ * xmax, 1.0, b_, 0.0;
        bd.sup_df = operator_norm(j);
        // Df^{-1} = [[0, 1/b], [1, 2 a x / b]] evaluated on the image.
        Mat ji(2, 2);
        ji << 0.0, 1.0 / std::abs(b_), 1.0, 2.0 * a_ * xmax / std::abs(b_);
        bd.sup_dfinv = operator_norm(ji);
        const double diam = (space_.hi() - space_.lo()).norm();
        bd.holder_top = reg.r == 1 ? 2.0 * a_ * std::pow(diam, 1.0 - reg.alpha) : 0.0;
        bd.holder_top_inverse = reg.r == 1 ? 2.0 * a_ / (b_ * b_) * std::pow(diam, 1.0 - reg.alpha) : 0.0;
        return bd;
    }

private:
    double a_, b_;
    PhaseSpace space_;
};

/// The inverse of an invertible model. Derivative rules of order >= 2 fall
/// back to finite differences.
class InverseModel final : public MapModel {
public:
    explicit InverseModel(std::shared_ptr<const MapModel> base) : base_(std::move(base)) {
        if (!base_->invertible()) throw DomainError(base_->name() + " is not invertible");
    }
    const PhaseSpace& space() const override { return base_->space(); }
    std::string name() const override { return base_->name() + "^-1"; }
    bool invertible() const override { return true; }
    Vec forward(const Vec& p) const override { return base_->inverse(p); }
    Vec inverse(const Vec& p) const override { return base_->forward(p); }
    Mat jacobian(const Vec& p) const override {
        return base_->jacobian(base_->inverse(p)).inverse();
    }
    std::optional<AnalyticBounds> analytic_bounds(const Regularity& reg) const override {
        auto b = base_->analytic_bounds(reg);
        if (!b) return std::nullopt;
        if (reg.r != 1) return std::nullopt;
        AnalyticBounds out;
        out.sup_df = b->sup_dfinv;
        out.sup_dfinv = b->sup_df;
        out.holder_top = b->holder_top_inverse;
        out.holder_top_inverse = b->holder_top;
        return out;
    }
    const std::shared_ptr<const MapModel>& base() const { return base_; }

private:
    std::shared_ptr<const MapModel> base_;
};

// ---------------------------------------------------------------------------
// Diffeomorphism value type

/// Immutable handle to a map plus its regularity metadata and declared norm
/// cap Upsilon. Cheap to copy and safe to share across threads.
class Diffeomorphism {
public:
    Diffeomorphism(std::shared_ptr<const MapModel> model, Regularity reg, double upsilon)
        : model_(std::move(model)), reg_(reg), upsilon_(upsilon) {
        if (!model_) throw DomainError("null map model");
        if (reg_.r < 1) throw DomainError("regularity r must be a positive integer");
        if (!(reg_.alpha > 0.0 && reg_.alpha <= 1.0)) throw DomainError("alpha must lie in (0,1]");
        if (!(upsilon_ > 0.0)) throw DomainError("declared norm cap must be positive");
    }

    const PhaseSpace& space() const { return model_->space(); }
    int dim() const { return space().dim(); }
    std::string name() const { return model_->name(); }
    const Regularity& regularity() const { return reg_; }
    double upsilon() const { return upsilon_; }
    const MapModel& model() const { return *model_; }
    const std::shared_ptr<const MapModel>& model_ptr() const { return model_; }
    bool invertible() const { return model_->invertible(); }

    Vec operator()(const Vec& p) const { return evaluate(p); }

    Vec evaluate(const Vec& p) const {
        space().require(p);
        return model_->forward(p);
    }

    Vec evaluate_inverse(const Vec& p) const {
        space().require(p);
        return model_->inverse(p);
    }

    Mat jacobian(const Vec& p) const {
        space().require(p);
        return model_->jacobian(p);
    }

    Vec derivative(const Vec& p, std::span<const Vec> dirs) const {
        space().require(p);
        return model_->derivative(p, dirs);
    }

    Diffeomorphism inverse() const {
        if (auto inv = std::dynamic_pointer_cast<const InverseModel>(model_))
            return Diffeomorphism(inv->base(), reg_, upsilon_);
        return Diffeomorphism(std::make_shared<InverseModel>(model_), reg_, upsilon_);
    }

    Vec iterate_point(Vec p, long n) const {
        for (long i = 0; i < n; ++i) p = model_->forward(p);
        return p;
    }

private:
    std::shared_ptr<const MapModel> model_;
    Regularity reg_;
    double upsilon_;
};

// ---------------------------------------------------------------------------
// Built-in families

namespace maps {

inline Diffeomorphism affine_trig(std::string name, Mat a, Vec shift, std::vector<TrigTerm> terms,
                                  Regularity reg = {}, std::optional<double> upsilon = {}) {
    auto model = std::make_shared<AffineTrigMap>(std::move(name), std::move(a), std::move(shift),
                                                 std::move(terms));
    double ups = 1.0;
    if (upsilon) {
        ups = *upsilon;
    } else {
        const auto b = model->analytic_bounds(reg);
        ups = b->cap();
    }
    return Diffeomorphism(model, reg, ups);
}

inline Diffeomorphism identity(int dim = 2) {
    return affine_trig("identity", Mat::Identity(dim, dim), Vec::Zero(dim), {});
}

inline Diffeomorphism toral_automorphism(const Mat& a, std::string name = "toral_automorphism") {
    if (std::abs(std::abs(a.determinant()) - 1.0) > 1e-12)
        throw DomainError("toral automorphism needs |det| = 1");
    return affine_trig(std::move(name), a, Vec::Zero(a.rows()), {});
}

inline Mat cat_matrix() {
    Mat a(2, 2);
    a << 2, 1, 1, 1;
    return a;
}

inline Diffeomorphism cat_map() { return toral_automorphism(cat_matrix(), "cat_map"); }

/// Volume-preserving shear perturbation of a toral automorphism:
/// f_t = A o S_t with S_t(p) = p + t e_i sin(2 pi p_j) / (2 pi), i != j.
inline Diffeomorphism perturbed_automorphism(const Mat& a, double t, int push_axis = 0,
                                             int wave_axis = 1, std::string name = "perturbed_automorphism") {
    const auto d = a.rows();
    if (push_axis == wave_axis || push_axis >= d || wave_axis >= d)
        throw DomainError("perturbation axes must differ and lie in range");
    std::vector<TrigTerm> terms;
    if (t != 0.0) {
        Vec e = Vec::Zero(d);
        e(push_axis) = 1.0;
        Vec k = Vec::Zero(d);
        k(wave_axis) = 1.0;
        terms.push_back({(t / kTwoPi) * (a * e), k, 0.0});
    }
    return affine_trig(std::move(name), a, Vec::Zero(d), std::move(terms));
}

/// Chirikov standard map (x, y) -> (x + y + (K/2pi) sin 2pi x, y + (K/2pi) sin 2pi x).
inline Diffeomorphism standard_map(double k) {
    Mat a(2, 2);
    a << 1, 1, 0, 1;
    std::vector<TrigTerm> terms;
    if (k != 0.0) terms.push_back({Vec{{k / kTwoPi, k / kTwoPi}}, Vec{{1.0, 0.0}}, 0.0});
    return affine_trig("standard_map", a, Vec::Zero(2), std::move(terms));
}

/// Circle map x -> x + c sin(2 pi x) on T^1.
inline Diffeomorphism circle_sine(double c) {
    return affine_trig("circle_sine", Mat::Identity(1, 1), Vec::Zero(1),
                       {TrigTerm{Vec{{c}}, Vec{{1.0}}, 0.0}});
}

/// x -> 2x on T^1 (expanding endomorphism, not invertible).
inline Diffeomorphism doubling() {
    return affine_trig("doubling", Mat::Constant(1, 1, 2.0), Vec::Zero(1), {});
}

inline Diffeomorphism rotation(const Vec& omega) {
    const auto d = omega.size();
    return affine_trig("rotation", Mat::Identity(d, d), omega, {});
}

/// A 2D torus map (AffineTrigMap) times the circle rotation z -> z + omega.
inline Diffeomorphism product_with_rotation(const Diffeomorphism& planar, double omega) {
    const auto* base = dynamic_cast<const AffineTrigMap*>(&planar.model());
    if (!base || planar.dim() != 2) throw DomainError("product_with_rotation needs a 2D torus map");
    Mat a = Mat::Identity(3, 3);
    a.topLeftCorner(2, 2) = base->linear_part();
    Vec shift = Vec::Zero(3);
    // Planar shift = image of the origin minus the trig part there.
    Vec s2 = base->forward(Vec::Zero(2));
    for (const auto& t : base->terms()) s2 -= std::sin(t.phase) * t.amplitude;
    shift.head(2) = s2;
    shift(2) = omega;
    std::vector<TrigTerm> terms;
    for (const auto& t : base->terms()) {
        Vec amp = Vec::Zero(3);
        amp.head(2) = t.amplitude;
        Vec k = Vec::Zero(3);
        k.head(2) = t.frequency;
        terms.push_back({amp, k, t.phase});
    }
    return affine_trig(planar.name() + "_x_rotation", a, shift, std::move(terms), planar.regularity());
}

/// Symmetric unimodular 3D automorphism with two expanding directions.
inline Mat expanding_3d_matrix() {
    Mat a(3, 3);
    a << 1, 1, 0, 1, 2, 1, 0, 1, 2;
    return a;
}

inline Diffeomorphism henon(double a = 1.4, double b = 0.3) {
    auto box = PhaseSpace::box(Vec{{-1.5, -0.5}}, Vec{{1.5, 0.5}});
    auto model = std::make_shared<HenonMap>(a, b, box);
    const Regularity reg{};
    const auto bd = model->analytic_bounds(reg);
    return Diffeomorphism(model, reg, bd->cap());
}

}  // namespace maps

// ---------------------------------------------------------------------------
// Log-scaled matrix products

/// M = exp(log_scale) * unit with ||unit|| = 1, so long products never overflow.
struct LogScaledMatrix {
    Mat unit;
    double log_scale = 0.0;

    static LogScaledMatrix identity(int d) { return {Mat::Identity(d, d), 0.0}; }

    /// this <- step * this
    void left_multiply(const Mat& step) {
        unit = step * unit;
        normalize();
    }

    void normalize() {
        const double n = operator_norm(unit);
        if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("log-scaled product degenerated");
        unit /= n;
        log_scale += std::log(n);
    }

    double log_norm() const { return log_scale + std::log(operator_norm(unit)); }

    friend LogScaledMatrix operator*(const LogScaledMatrix& a, const LogScaledMatrix& b) {
        LogScaledMatrix out{a.unit * b.unit, a.log_scale + b.log_scale};
        out.normalize();
        return out;
    }
};

// ---------------------------------------------------------------------------
// Orbits

/// Orbit of a base point with the QR cocycle data of D f^n.
struct Orbit {
    std::vector<Vec> points;       // points[0] = base, points[k] = f^k(base)
    std::vector<Vec> log_r;        // log |R_kk| of the QR step at time k (size n)
    Mat frame;                     // orthonormal frame after n steps
    long steps() const { return static_cast<long>(points.size()) - 1; }
    const Vec& end() const { return points.back(); }

    /// Sum of log|R| diagonals over [from, to).
    Vec log_growth(long from, long to) const {
        Vec s = Vec::Zero(points.front().size());
        for (long k = from; k < to; ++k) s += log_r[static_cast<std::size_t>(k)];
        return s;
    }
};

/// Iterates n steps; QR re-orthonormalization every `stride` steps (stride 1
/// for d <= 3). Raw products between re-orthonormalizations may overflow.
inline Orbit iterate(const Diffeomorphism& f, const Vec& p, long n, int stride = 1) {
    if (n < 0) throw DomainError("iterate: n must be >= 0");
    if (stride < 1) throw DomainError("iterate: stride must be >= 1");
    const int d = f.dim();
    Orbit orb;
    orb.points.reserve(static_cast<std::size_t>(n) + 1);
    orb.log_r.reserve(static_cast<std::size_t>(n));
    orb.points.push_back(f.space().reduce(p));
    Mat q = Mat::Identity(d, d);
    Mat pending = Mat::Identity(d, d);
    int pending_steps = 0;
    for (long k = 0; k < n; ++k) {
        const Vec& x = orb.points.back();
        pending = f.jacobian(x) * pending;
        ++pending_steps;
        orb.points.push_back(f.evaluate(x));
        if (pending_steps == stride || k + 1 == n) {
            Eigen::HouseholderQR<Mat> qr(pending * q);
            Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
            Mat qn = qr.householderQ();
            Vec lr(d);
            for (int i = 0; i < d; ++i) {
                const double rii = r(i, i);
                if (!std::isfinite(rii)) throw NumericError("cocycle overflow: QR stride too large");
                if (rii == 0.0) throw NumericError("degenerate QR step: near-singular Jacobian");
                lr(i) = std::log(std::abs(rii));
                if (rii < 0.0) qn.col(i) = -qn.col(i);
            }
            q = qn;
            // Spread the block's growth over its last step; per-step detail is
            // only exact for stride 1.
            for (int s = 0; s + 1 < pending_steps; ++s) orb.log_r.push_back(Vec::Zero(d));
            orb.log_r.push_back(lr);
            pending = Mat::Identity(d, d);
            pending_steps = 0;
        }
    }
    orb.frame = q;
    return orb;
}

/// D_p f^n in log-scaled form.
inline LogScaledMatrix cocycle(const Diffeomorphism& f, Vec p, long n) {
    auto m = LogScaledMatrix::identity(f.dim());
    for (long k = 0; k < n; ++k) {
        m.left_multiply(f.jacobian(p));
        p = f.evaluate(p);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Curve jets

/// (c(s), c'(s), ..., c^{(n)}(s)) of a parametrized curve at one parameter.
using Jet = std::vector<Vec>;

namespace detail {

/// Integer partitions of m as block-size lists with the number of set
/// partitions of {1..m} having that block structure.
struct BlockPattern {
    std::vector<int> sizes;
    double count;
};

inline void partitions_rec(int remaining, int max_part, std::vector<int>& cur,
                           std::vector<std::vector<int>>& out) {
    if (remaining == 0) {
        out.push_back(cur);
        return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
        cur.push_back(part);
        partitions_rec(remaining - part, part, cur, out);
        cur.pop_back();
    }
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline std::vector<BlockPattern> block_patterns(int m) {
    std::vector<std::vector<int>> parts;
    std::vector<int> cur;
    partitions_rec(m, m, cur, parts);
    std::vector<BlockPattern> out;
    for (auto& p : parts) {
        // m! / (prod (i!)^{m_i} m_i!)
        double denom = 1.0;
        std::vector<int> mult(static_cast<std::size_t>(m) + 1, 0);
        for (int s : p) {
            denom *= factorial(s);
            ++mult[static_cast<std::size_t>(s)];
        }
        for (int c : mult) denom *= factorial(c);
        out.push_back({p, factorial(m) / denom});
    }
    return out;
}

}  // namespace detail

/// Jet of f o c from the jet of c (higher-order chain rule).
inline Jet push_jet(const Diffeomorphism& f, const Jet& jet) {
    if (jet.empty()) throw DomainError("push_jet: empty jet");
    const int order = static_cast<int>(jet.size()) - 1;
    Jet out(jet.size());
    out[0] = f.evaluate(f.space().reduce(jet[0]));
    const Vec& x = jet[0];
    for (int m = 1; m <= order; ++m) {
        Vec acc = Vec::Zero(f.dim());
        for (const auto& pat : detail::block_patterns(m)) {
            std::vector<Vec> dirs;
            dirs.reserve(pat.sizes.size());
            for (int s : pat.sizes) dirs.push_back(jet[static_cast<std::size_t>(s)]);
            acc += pat.count * f.derivative(x, dirs);
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampled C^{r,alpha} norm

struct NormEstimate {
    std::vector<double> sup_derivative;   // index j-1: sampled sup ||D^j f||, j = 1..r
    double sup_inverse_derivative = 0.0;  // sampled sup ||D f^{-1}||
    double holder_top = 0.0;              // sampled alpha-Holder constant of D^r f
    double holder_top_inverse = 0.0;      // same for D f^{-1} when r = 1
    int points_per_axis = 0;

    double norm() const {
        double n = std::max(sup_inverse_derivative, std::max(holder_top, holder_top_inverse));
        for (double s : sup_derivative) n = std::max(n, s);
        return n;
    }
};

namespace detail {

/// Lower bound on ||D^j f(x)||: max over basis multi-indices of |D^j f(x)[e..]|,
/// exact (operator norm) for j = 1.
inline double derivative_norm(const Diffeomorphism& f, const Vec& x, int j) {
    if (j == 1) return operator_norm(f.jacobian(x));
    const int d = f.dim();
    double best = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(j), 0);
    while (true) {
        std::vector<Vec> dirs;
        for (int i : idx) dirs.push_back(Vec::Unit(d, i));
        best = std::max(best, f.derivative(x, dirs).norm());
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == d) idx[pos++] = 0;
        if (pos == idx.size()) break;
    }
    return best;
}

/// Matrix/vector representation of D^r f(x) used in Holder quotients.
inline Mat top_derivative(const Diffeomorphism& f, const Vec& x, int r) {
    if (r == 1) return f.jacobian(x);
    const int d = f.dim();
    const int combos = static_cast<int>(std::pow(d, r));
    Mat out(d, combos);
    std::vector<int> idx(static_cast<std::size_t>(r), 0);
    for (int c = 0; c < combos; ++c) {
        std::vector<Vec> dirs;
        for (int i : idx) dirs.push_back(Vec::Unit(d, i));
        out.col(c) = f.derivative(x, dirs);
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == d) idx[pos++] = 0;
    }
    return out;
}

}  // namespace detail

/// Lower estimate of ||f||_{C^{r,alpha}} from dyadic grids of spacing <= resolution.
/// Grids are nested and every coarser level is included, so refining never
/// lowers the estimate. Total grid size is capped at 2^21 points.
inline NormEstimate holder_norm(const Diffeomorphism& f, double grid_resolution) {
    if (!(grid_resolution > 0.0)) throw DomainError("holder_norm: resolution must be positive");
    const int d = f.dim();
    const int r = f.regularity().r;
    const double alpha = f.regularity().alpha;
    const auto& sp = f.space();
    const Vec width = sp.hi() - sp.lo();
    int level_max = 0;
    while (width.maxCoeff() / std::pow(2.0, level_max) > grid_resolution && level_max < 20) ++level_max;
    while (d * level_max > 21) --level_max;

    NormEstimate est;
    est.sup_derivative.assign(static_cast<std::size_t>(r), 0.0);
    for (int level = 0; level <= level_max; ++level) {
        const long n = 1L << level;
        const long total = static_cast<long>(std::pow(n, d));
        const Vec h = width / static_cast<double>(n);
        std::vector<Mat> tops(static_cast<std::size_t>(total));
        std::vector<Mat> inv_tops;
        if (f.invertible() && r == 1) inv_tops.resize(static_cast<std::size_t>(total));
        auto point_of = [&](long idx) {
            Vec x(d);
            for (int a = 0; a < d; ++a) {
                x(a) = sp.lo()(a) + h(a) * static_cast<double>(idx % n);
                idx /= n;
            }
            return x;
        };
        for (long i = 0; i < total; ++i) {
            const Vec x = point_of(i);
            for (int j = 1; j <= r; ++j)
                est.sup_derivative[static_cast<std::size_t>(j - 1)] =
                    std::max(est.sup_derivative[static_cast<std::size_t>(j - 1)], detail::derivative_norm(f, x, j));
            tops[static_cast<std::size_t>(i)] = detail::top_derivative(f, x, r);
            if (f.invertible()) {
                // D(f^{-1}) at f(x) is (D_x f)^{-1}.
                const Mat inv = f.jacobian(x).inverse();
                est.sup_inverse_derivative = std::max(est.sup_inverse_derivative, operator_norm(inv));
                if (!inv_tops.empty()) inv_tops[static_cast<std::size_t>(i)] = inv;
            }
        }
        // Holder quotients between axis neighbours at this level.
        if (n < 2) continue;
        for (long i = 0; i < total; ++i) {
            long stride = 1;
            for (int a = 0; a < d; ++a) {
                const long coord = (i / stride) % n;
                const bool wrap = sp.is_torus();
                if (coord + 1 < n || wrap) {
                    const long j = coord + 1 < n ? i + stride : i - coord * stride;
                    const double dist = h(a);
                    const double denom = std::pow(dist, alpha);
                    const auto si = static_cast<std::size_t>(i);
                    const auto sj = static_cast<std::size_t>(j);
                    est.holder_top = std::max(est.holder_top, operator_norm(tops[si] - tops[sj]) / denom);
                    if (!inv_tops.empty()) {
                        // Quotient in the image coordinates: |f(x) - f(y)| distance.
                        const double img = sp.distance(f.evaluate(point_of(i)), f.evaluate(point_of(j)));
                        if (img > 0.0)
                            est.holder_top_inverse = std::max(
                                est.holder_top_inverse, operator_norm(inv_tops[si] - inv_tops[sj]) / std::pow(img, alpha));
                    }
                }
                stride *= n;
            }
        }
        est.points_per_axis = static_cast<int>(n);
    }
    return est;
}

/// Sampled check that forward o inverse = identity and that Upsilon dominates
/// the sampled C^{r,alpha} quantities. Returns the worst inverse residual.
inline double inverse_residual(const Diffeomorphism& f, std::span<const Vec> samples) {
    double worst = 0.0;
    for (const auto& p : samples) {
        const Vec q = f.evaluate_inverse(f.evaluate(p));
        worst = std::max(worst, f.space().distance(p, q));
    }
    return worst;
}

}  // namespace usc
