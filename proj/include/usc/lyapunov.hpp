#pragma once

// Lyapunov spectra (QR/Benettin), exterior-power norms, the subadditive
// observable max_k log^+ ||wedge^k D f^n|| and its Kingman-type infimum
// estimator, plus the derived scalar diagnostics.

#include "usc/empirical.hpp"

#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace usc {

// ---------------------------------------------------------------------------
// Exterior powers

/// k-subsets of {0..d-1} in lexicographic order.
inline std::vector<std::vector<int>> index_subsets(int d, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k));
    std::iota(cur.begin(), cur.end(), 0);
    if (k == 0 || k > d) return out;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == d - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// k-th compound matrix (minors indexed by k-subsets). By Cauchy-Binet the
/// compound of a product is the product of compounds.
inline Mat compound_matrix(const Mat& m, int k) {
    const int d = static_cast<int>(m.rows());
    if (m.cols() != d || k < 1 || k > d) throw DomainError("compound_matrix: need square matrix and 1 <= k <= d");
    const auto subs = index_subsets(d, k);
    const auto n = static_cast<Eigen::Index>(subs.size());
    Mat out(n, n);
    Mat sub(k, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    sub(a, b) = m(subs[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)],
                                  subs[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)]);
            out(i, j) = sub.determinant();
        }
    return out;
}

/// ||wedge^k M|| = product of the k largest singular values.
inline double exterior_norm(const Mat& m, int k) {
    const auto d = static_cast<int>(m.rows());
    if (m.cols() != d || k < 1 || k > d) throw DomainError("exterior_norm: need 1 <= k <= d");
    Eigen::JacobiSVD<Mat> svd(m);
    double prod = 1.0;
    for (int i = 0; i < k; ++i) prod *= svd.singularValues()(i);
    return prod;
}

/// Log-scaled compound products wedge^k D_x f^n for every grade k, advanced
/// one step at a time.
class ExteriorCocycle {
public:
    explicit ExteriorCocycle(int d) {
        for (int k = 1; k <= d; ++k) {
            const auto n = static_cast<Eigen::Index>(index_subsets(d, k).size());
            grades_.push_back(LogScaledMatrix::identity(static_cast<int>(n)));
        }
    }

    void advance(const Mat& jac) {
        for (std::size_t k = 0; k < grades_.size(); ++k)
            grades_[k].left_multiply(compound_matrix(jac, static_cast<int>(k) + 1));
    }

    /// log ||wedge^k D f^n||, k = 1..d
    double log_norm(int k) const { return grades_.at(static_cast<std::size_t>(k - 1)).log_norm(); }

    /// max_k log^+ ||wedge^k D f^n||
    double phi() const {
        double best = 0.0;
        for (std::size_t k = 0; k < grades_.size(); ++k) best = std::max(best, grades_[k].log_norm());
        return best;
    }

private:
    std::vector<LogScaledMatrix> grades_;
};

/// max_{1<=k<=d} log^+ ||wedge^k D_p f^n||
inline double phi_n(const Diffeomorphism& f, Vec p, long n) {
    if (n < 1) throw DomainError("phi_n: n must be >= 1");
    ExteriorCocycle cyc(f.dim());
    p = f.space().reduce(std::move(p));
    for (long k = 0; k < n; ++k) {
        cyc.advance(f.jacobian(p));
        p = f(p);
    }
    return cyc.phi();
}

// ---------------------------------------------------------------------------
// Spectra

class ExponentSpectrum {
public:
    struct Group {
        double value;
        int multiplicity;
    };

    ExponentSpectrum() = default;

    /// Exponents listed with repetition; groups merge neighbours closer than gap.
    explicit ExponentSpectrum(std::vector<double> exponents, double cluster_gap = 0.05)
        : exponents_(std::move(exponents)) {
        if (exponents_.empty() || exponents_.size() > 3) throw DomainError("spectrum must have 1 to 3 exponents");
        std::sort(exponents_.begin(), exponents_.end(), std::greater<>());
        for (double x : exponents_) {
            if (!std::isfinite(x)) throw NumericError("non-finite Lyapunov exponent");
            if (!groups_.empty() && groups_.back().value - x < cluster_gap) {
                auto& g = groups_.back();
                g.value = (g.value * g.multiplicity + x) / (g.multiplicity + 1);
                ++g.multiplicity;
            } else {
                groups_.push_back({x, 1});
            }
        }
    }

    int dim() const { return static_cast<int>(exponents_.size()); }
    const std::vector<double>& exponents() const { return exponents_; }
    const std::vector<Group>& groups() const { return groups_; }
    double sum() const { return pairwise_sum(exponents_); }

    double lambda_plus() const { return std::max(0.0, exponents_.front()); }
    double lambda_minus() const { return std::min(0.0, exponents_.back()); }

    double lambda_sigma_plus() const {
        double s = 0.0;
        for (double x : exponents_) s += std::max(0.0, x);
        return s;
    }

    double lambda_sigma_minus() const {
        double s = 0.0;
        for (double x : exponents_) s += std::min(0.0, x);
        return s;
    }

    /// lim (1/n) log Jac - lambda^+ - lambda^-; the middle exponent when the
    /// top is positive and the bottom negative.
    double lambda_center() const {
        if (dim() != 3) throw DomainError("lambda_center is defined for 3-dimensional spectra");
        return sum() - lambda_plus() - lambda_minus();
    }

    /// Count of exponents above zeta / below -zeta.
    int positive_count(double zeta) const {
        return static_cast<int>(std::count_if(exponents_.begin(), exponents_.end(), [&](double x) { return x > zeta; }));
    }
    int negative_count(double zeta) const {
        return static_cast<int>(std::count_if(exponents_.begin(), exponents_.end(), [&](double x) { return x < -zeta; }));
    }

private:
    std::vector<double> exponents_;
    std::vector<Group> groups_;
};

/// Sign of the center exponent with zero band zeta: -1, 0 or +1.
inline int center_sign(const ExponentSpectrum& s, double zeta = 0.02) {
    const double c = s.lambda_center();
    return c > zeta ? 1 : (c < -zeta ? -1 : 0);
}

/// QR cocycle estimator: time averages of log |R_ii| over n steps, with QR
/// re-orthonormalization every step.
inline ExponentSpectrum benettin_spectrum(const Diffeomorphism& f, Vec p, long n, double cluster_gap = 0.05,
                                          long burn_in = 0) {
    if (n < 100) throw DomainError("benettin_spectrum: need n >= 100");
    const int d = f.dim();
    p = f.space().reduce(std::move(p));
    for (long k = 0; k < burn_in; ++k) p = f(p);
    Mat q = Mat::Identity(d, d);
    std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
    // Kahan-compensated running sums keep 1e5-step averages at full precision.
    std::vector<double> comp(static_cast<std::size_t>(d), 0.0);
    for (long k = 0; k < n; ++k) {
        Eigen::HouseholderQR<Mat> qr(f.jacobian(p) * q);
        const Mat& packed = qr.matrixQR();
        q = qr.householderQ();
        for (int i = 0; i < d; ++i) {
            const double rii = packed(i, i);
            if (rii == 0.0 || !std::isfinite(rii)) throw NumericError("degenerate QR step: near-singular Jacobian");
            if (rii < 0.0) q.col(i) = -q.col(i);
            const double y = std::log(std::abs(rii)) - comp[static_cast<std::size_t>(i)];
            const double t = acc[static_cast<std::size_t>(i)] + y;
            comp[static_cast<std::size_t>(i)] = (t - acc[static_cast<std::size_t>(i)]) - y;
            acc[static_cast<std::size_t>(i)] = t;
        }
        p = f(p);
    }
    for (auto& a : acc) a /= static_cast<double>(n);
    return ExponentSpectrum(std::move(acc), cluster_gap);
}

/// |sum of exponents - integral of log|det Df||
inline double jacobian_identity_residual(const ExponentSpectrum& s, const Diffeomorphism& f,
                                         const EmpiricalMeasure& sample) {
    const double mean = sample.integrate([&](const Vec& x) { return std::log(std::abs(f.jacobian(x).determinant())); });
    return std::abs(s.sum() - mean);
}

inline double lambda_center(const ExponentSpectrum& s) { return s.lambda_center(); }

// ---------------------------------------------------------------------------
// Subadditive (Kingman) estimator

struct SubadditiveEstimate {
    std::vector<long> depths;
    std::vector<double> averages;      // (1/n) * ensemble mean of phi_n
    std::vector<double> running_inf;   // nonincreasing by construction
    double value = 0.0;                // running_inf.back()
    bool converged = false;            // last two running infima within tolerance
    bool drift_warning = false;        // averages moved both up and down beyond tolerance
};

struct SubadditiveOptions {
    double convergence_tol = 1e-3;
    double drift_tol = 0.05;
    unsigned threads = 1;
};

namespace detail {

/// Validates a depth schedule and returns it.
inline void check_schedule(std::span<const long> schedule) {
    if (schedule.empty()) throw DomainError("empty depth schedule");
    if (schedule.front() < 1) throw DomainError("depths must be >= 1");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1]) throw DomainError("depth schedule must be increasing");
}

inline SubadditiveEstimate finish_estimate(std::span<const long> schedule, std::vector<double> averages,
                                           const SubadditiveOptions& opt) {
    SubadditiveEstimate est;
    est.depths.assign(schedule.begin(), schedule.end());
    est.averages = std::move(averages);
    double inf = std::numeric_limits<double>::infinity();
    bool up = false, down = false;
    for (std::size_t i = 0; i < est.averages.size(); ++i) {
        inf = std::min(inf, est.averages[i]);
        est.running_inf.push_back(inf);
        if (i > 0) {
            const double delta = est.averages[i] - est.averages[i - 1];
            up = up || delta > opt.drift_tol;
            down = down || delta < -opt.drift_tol;
        }
    }
    est.value = est.running_inf.back();
    est.drift_warning = up && down;
    const auto n = est.running_inf.size();
    est.converged = n >= 2 && est.running_inf[n - 2] - est.running_inf[n - 1] < opt.convergence_tol;
    return est;
}

/// Per-point values of obs(cocycle) at each scheduled depth, weighted and
/// averaged, divided by depth.
template <class Obs>
std::vector<double> scheduled_averages(const Diffeomorphism& f, const EmpiricalMeasure& sample,
                                       std::span<const long> schedule, unsigned threads, Obs&& obs) {
    const std::size_t m = sample.size();
    std::vector<std::vector<double>> per_point(m);
    parallel_for(m, threads, [&](std::size_t i) {
        ExteriorCocycle cyc(f.dim());
        Vec p = sample.points()[i];
        std::vector<double> vals;
        long step = 0;
        for (long depth : schedule) {
            for (; step < depth; ++step) {
                cyc.advance(f.jacobian(p));
                p = f(p);
            }
            vals.push_back(obs(cyc));
        }
        per_point[i] = std::move(vals);
    });
    std::vector<double> out;
    std::vector<double> col(m);
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        for (std::size_t i = 0; i < m; ++i) col[i] = per_point[i][s];
        out.push_back(sample.integrate_values(col) / static_cast<double>(schedule[s]));
    }
    return out;
}

}  // namespace detail

/// inf_n (1/n) integral of max_k log^+ ||wedge^k D f^n|| over the schedule.
inline SubadditiveEstimate lambda_sigma_plus(const Diffeomorphism& f, const EmpiricalMeasure& sample,
                                             std::span<const long> schedule, const SubadditiveOptions& opt = {}) {
    detail::check_schedule(schedule);
    if (!(sample.space() == f.space())) throw DomainError("sample and map live on different phase spaces");
    auto avg = detail::scheduled_averages(f, sample, schedule, opt.threads,
                                          [](const ExteriorCocycle& c) { return c.phi(); });
    return detail::finish_estimate(schedule, std::move(avg), opt);
}

/// Same estimator for (1/n) integral of log^+ ||D f^n||, i.e. lambda^+(mu, f).
inline SubadditiveEstimate lambda_plus_estimate(const Diffeomorphism& f, const EmpiricalMeasure& sample,
                                                std::span<const long> schedule, const SubadditiveOptions& opt = {}) {
    detail::check_schedule(schedule);
    auto avg = detail::scheduled_averages(f, sample, schedule, opt.threads,
                                          [](const ExteriorCocycle& c) { return std::max(0.0, c.log_norm(1)); });
    return detail::finish_estimate(schedule, std::move(avg), opt);
}

/// (1/q) integral of log ||D f^q|| (plus = false) or log^+ ||D f^q|| (plus = true).
inline double mean_log_norm(const Diffeomorphism& f, const EmpiricalMeasure& sample, long q, bool plus,
                            unsigned threads = 1) {
    if (q < 1) throw DomainError("block length must be >= 1");
    std::vector<double> vals(sample.size());
    parallel_for(sample.size(), threads, [&](std::size_t i) {
        const double l = cocycle(f, sample.points()[i], q).log_norm();
        vals[i] = plus ? std::max(0.0, l) : l;
    });
    return sample.integrate_values(vals) / static_cast<double>(q);
}

/// Default schedule for lambda^+ estimates: powers of two up to max(256, 4q),
/// with q itself included.
inline std::vector<long> default_schedule(long q = 1, long floor_depth = 256) {
    std::vector<long> s;
    const long top = std::max(floor_depth, 4 * q);
    for (long n = 1; n <= top; n *= 2) s.push_back(n);
    if (std::find(s.begin(), s.end(), q) == s.end()) s.push_back(q);
    std::sort(s.begin(), s.end());
    return s;
}

/// (1/q) integral of log^+ ||D f^q|| minus the lambda^+ estimate.
inline double exponent_quantity_gap(const Diffeomorphism& f, const EmpiricalMeasure& sample, long q,
                                    std::span<const long> schedule = {}, unsigned threads = 1) {
    std::vector<long> sched(schedule.begin(), schedule.end());
    if (sched.empty()) sched = default_schedule(q);
    SubadditiveOptions opt;
    opt.threads = threads;
    const double lp = lambda_plus_estimate(f, sample, sched, opt).value;
    return mean_log_norm(f, sample, q, true, threads) - lp;
}

}  // namespace usc
