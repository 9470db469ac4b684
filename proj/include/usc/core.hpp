#pragma once

// Shared numeric vocabulary: vector/matrix aliases, error types, deterministic
// reductions and the counter-based random streams used by every module.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace usc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised when a numeric routine cannot produce a trustworthy value
/// (overflowing cocycle, degenerate QR step, undersampled estimator, ...).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an argument is outside the operation's domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// log^+ x = max{0, log x}, evaluated after the norm so singular values <= 1 give 0.
inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

/// Pairwise (cascade) summation. Fixed recursion order makes the result
/// independent of how callers partition work.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double pairwise_mean(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean of empty range");
    return pairwise_sum(xs) / static_cast<double>(xs.size());
}

/// Weighted mean with pairwise reduction of the products.
inline double weighted_mean(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) throw DomainError("weighted_mean: size mismatch");
    std::vector<double> prod(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) prod[i] = values[i] * weights[i];
    return pairwise_sum(prod);
}

// SplitMix64 finalizer. Used as a counter-based generator: the value for
// (seed, stream, index) never depends on how many other draws happened.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t bits(std::uint64_t index) const { return splitmix64(key_ + splitmix64(index)); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t index) const {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

    CounterRng substream(std::uint64_t stream) const { return CounterRng(key_, stream); }

private:
    std::uint64_t key_;
};

/// Largest singular value of a small dense matrix.
inline double operator_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled by exactly one worker; callers write results into slot i so the
/// outcome never depends on scheduling.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace usc
