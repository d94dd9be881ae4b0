#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldplab {

/// Small real vector (d is 1 or 2 everywhere in this library).
using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = 0.693147180559945309417232121458176568;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments: dimension mismatch, empty grids, invalid schedule, ...
class DomainError : public Error {
public:
    using Error::Error;
};

/// The family model does not provide the requested closed form / sampler.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// The numerics could not produce a meaningful answer (stalled rejection,
/// nonsmooth tilt, effective sample size below floor).
class NumericalFailure : public Error {
public:
    using Error::Error;
};

inline bool is_pos_inf(double x) { return x == kInf; }
inline bool is_neg_inf(double x) { return x == -kInf; }

/// ln(e^a + e^b), tolerant of -inf operands.
inline double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (is_neg_inf(b)) return a;
    if (is_pos_inf(a)) return kInf;
    return a + std::log1p(std::exp(b - a));
}

/// ln sum_i e^{x_i}; -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> xs) {
    double m = -kInf;
    for (double x : xs) m = std::max(m, x);
    if (is_neg_inf(m) || is_pos_inf(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

/// ln(1 - e^{x}) for x <= 0 (Maechler's split).
inline double log1mexp(double x) {
    if (x > 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return -kInf;
    return x > -kLn2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

/// ln(e^a - e^b) for a >= b.
inline double log_sub(double a, double b) {
    if (is_neg_inf(b)) return a;
    if (b > a) return std::numeric_limits<double>::quiet_NaN();
    return a + log1mexp(b - a);
}

/// Streaming log-sum-exp accumulator; keeps the running maximum so that
/// terms like 2^{-T} e^{T mu} never overflow.
class LogAccumulator {
public:
    void add(double log_term) {
        if (is_neg_inf(log_term)) return;
        if (is_pos_inf(log_term)) {
            max_ = kInf;
            return;
        }
        if (is_pos_inf(max_)) return;
        if (log_term <= max_) {
            sum_ += std::exp(log_term - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            max_ = log_term;
        }
    }
    double value() const {
        if (is_neg_inf(max_) || is_pos_inf(max_)) return max_;
        return max_ + std::log(sum_);
    }

private:
    double max_ = -kInf;
    double sum_ = 0.0;
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

/// Open-ball membership |x - center| < radius. Points within rounding of the
/// sphere count as outside, so lattice points exactly on the boundary are
/// excluded regardless of how (alpha +- eps) * T happens to round.
inline bool in_open_ball(const Vec& x, const Vec& center, double radius) {
    return distance(x, center) < radius * (1.0 - 1e-12);
}

inline bool in_open_ball(double x, double center, double radius) {
    return std::abs(x - center) < radius * (1.0 - 1e-12);
}

}  // namespace ldplab
