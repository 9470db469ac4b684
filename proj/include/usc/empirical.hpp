#pragma once

// Weighted point clouds standing in for invariant measures.

#include "usc/manifold.hpp"

#include <map>
#include <string>
#include <vector>

namespace usc {

enum class Provenance { orbit, synthetic };

class EmpiricalMeasure {
public:
    EmpiricalMeasure(PhaseSpace space, std::vector<Vec> points, std::vector<double> weights,
                     Provenance provenance = Provenance::synthetic, std::string map_id = {})
        : space_(std::move(space)), points_(std::move(points)), weights_(std::move(weights)),
          provenance_(provenance), map_id_(std::move(map_id)) {
        if (points_.empty()) throw DomainError("empirical measure needs at least one point");
        if (points_.size() != weights_.size()) throw DomainError("empirical measure: size mismatch");
        for (const auto& p : points_) space_.require(p);
        for (double w : weights_)
            if (!(w >= 0.0)) throw DomainError("empirical measure: negative weight");
        if (std::abs(pairwise_sum(weights_) - 1.0) > 1e-12)
            throw DomainError("empirical measure: weights must sum to 1");
    }

    /// Equal weights on the given points.
    static EmpiricalMeasure uniform(PhaseSpace space, std::vector<Vec> points,
                                    Provenance provenance = Provenance::synthetic, std::string map_id = {}) {
        const auto n = points.size();
        if (n == 0) throw DomainError("empirical measure needs at least one point");
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        renormalize(w);
        return EmpiricalMeasure(std::move(space), std::move(points), std::move(w), provenance, std::move(map_id));
    }

    /// Normalizes arbitrary nonnegative masses.
    static EmpiricalMeasure from_masses(PhaseSpace space, std::vector<Vec> points, std::vector<double> masses,
                                        Provenance provenance = Provenance::synthetic, std::string map_id = {}) {
        renormalize(masses);
        return EmpiricalMeasure(std::move(space), std::move(points), std::move(masses), provenance,
                                std::move(map_id));
    }

    const PhaseSpace& space() const { return space_; }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    Provenance provenance() const { return provenance_; }
    const std::string& map_id() const { return map_id_; }
    std::size_t size() const { return points_.size(); }

    /// Integral of fn against the measure (pairwise reduction).
    template <class Fn>
    double integrate(Fn&& fn) const {
        std::vector<double> v(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) v[i] = weights_[i] * fn(points_[i]);
        return pairwise_sum(v);
    }

    /// Same, with per-point values already computed.
    double integrate_values(std::span<const double> values) const { return weighted_mean(values, weights_); }

    static void renormalize(std::vector<double>& w) {
        double total = pairwise_sum(w);
        if (!(total > 0.0)) throw DomainError("empirical measure: zero total mass");
        for (auto& x : w) x /= total;
        // Put the rounding residue on the largest weight.
        total = pairwise_sum(w);
        auto it = std::max_element(w.begin(), w.end());
        *it += 1.0 - total;
    }

private:
    PhaseSpace space_;
    std::vector<Vec> points_;
    std::vector<double> weights_;
    Provenance provenance_;
    std::string map_id_;
};

/// Uniform weights on the points after burn_in. Repeated points are merged,
/// so a periodic orbit becomes equal masses on its period.
inline EmpiricalMeasure empirical_from_orbit(const Orbit& orbit, long burn_in, const Diffeomorphism& f) {
    if (burn_in < 0 || orbit.steps() + 1 <= burn_in)
        throw DomainError("empirical_from_orbit: orbit must be longer than burn-in");
    auto lex = [](const Vec& a, const Vec& b) {
        return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    };
    std::map<Vec, std::size_t, decltype(lex)> index(lex);
    std::vector<Vec> pts;
    std::vector<double> mass;
    for (std::size_t k = static_cast<std::size_t>(burn_in); k < orbit.points.size(); ++k) {
        const auto& p = orbit.points[k];
        auto [it, fresh] = index.try_emplace(p, pts.size());
        if (fresh) {
            pts.push_back(p);
            mass.push_back(1.0);
        } else {
            mass[it->second] += 1.0;
        }
    }
    return EmpiricalMeasure::from_masses(f.space(), std::move(pts), std::move(mass), Provenance::orbit, f.name());
}

/// Orbit-empirical measure of f started at p: n points after burn_in steps,
/// without storing cocycle data.
inline EmpiricalMeasure orbit_measure(const Diffeomorphism& f, Vec p, long n, long burn_in = 0) {
    if (n < 1) throw DomainError("orbit_measure: need n >= 1");
    p = f.space().reduce(std::move(p));
    for (long k = 0; k < burn_in; ++k) p = f(p);
    std::vector<Vec> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
        pts.push_back(p);
        p = f(p);
    }
    return EmpiricalMeasure::uniform(f.space(), std::move(pts), Provenance::orbit, f.name());
}

/// n i.i.d. uniform points of the phase space (Lebesgue sample).
inline EmpiricalMeasure lebesgue_sample(const PhaseSpace& space, std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed, 0x1eb);
    const int d = space.dim();
    std::vector<Vec> pts(n, Vec(d));
    for (std::size_t i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a)
            pts[i](a) = space.lo()(a) + (space.hi()(a) - space.lo()(a)) *
                                            rng.uniform(i * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(a));
    return EmpiricalMeasure::uniform(space, std::move(pts));
}

inline EmpiricalMeasure point_mass(const PhaseSpace& space, const Vec& p) {
    return EmpiricalMeasure(space, {p}, {1.0});
}

/// Convex combination sum_i c_i mu_i (masses renormalized).
inline EmpiricalMeasure mixture(std::span<const EmpiricalMeasure> parts, std::span<const double> coeffs) {
    if (parts.empty() || parts.size() != coeffs.size()) throw DomainError("mixture: size mismatch");
    std::vector<Vec> pts;
    std::vector<double> mass;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!(parts[i].space() == parts[0].space())) throw DomainError("mixture: different phase spaces");
        for (std::size_t j = 0; j < parts[i].size(); ++j) {
            pts.push_back(parts[i].points()[j]);
            mass.push_back(coeffs[i] * parts[i].weights()[j]);
        }
    }
    return EmpiricalMeasure::from_masses(parts[0].space(), std::move(pts), std::move(mass));
}

}  // namespace usc
