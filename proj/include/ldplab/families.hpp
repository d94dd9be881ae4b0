#pragma once

// Built-in families {zeta_T}: samplers plus whatever closed forms each family
// admits (local ball probabilities, truncated exponential moments, tails,
// exactly tilted samplers).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ldplab/core.hpp"
#include "ldplab/normal_tail.hpp"
#include "ldplab/random.hpp"

namespace ldplab {

using TiltedDraw = std::function<Vec(Stream&)>;

/// Capability record for a family. Empty std::function members mean the
/// capability is absent.
struct FamilyModel {
    std::string id;
    int dimension = 1;

    /// One draw of zeta_T.
    std::function<Vec(double T, Stream&)> sampler;
    /// ln P(zeta_T in (alpha)_eps), open Euclidean ball.
    std::function<double(const Vec& alpha, double eps, double T)> exact_log_local_prob;
    /// ln E(e^{T<mu,zeta_T>}; |zeta_T| <= M).
    std::function<double(const Vec& mu, double M, double T)> exact_trunc_log_mgf;
    /// ln P(|zeta_T| > v).
    std::function<double(double v, double T)> exact_log_tail;
    /// Builds a sampler for the tilted law dP~ = e^{T<mu,x>} 1(|x|<=M) dP / E_{T,M}(mu).
    std::function<TiltedDraw(const Vec& mu, double M, double T)> tilted_sampler;
    /// ln E e^{T<mu,zeta_T>} without truncation; +inf when the moment is infinite.
    std::function<double(const Vec& mu, double T)> exact_log_mgf;
    /// ln E(e^{T<mu,zeta_T>}; <mu,zeta_T> >= threshold).
    std::function<double(const Vec& mu, double threshold, double T)> exact_log_upper_moment;

    /// Limiting local rate function D and WSFF A where known in closed form.
    std::function<double(const Vec& alpha)> reference_rate;
    std::function<double(const Vec& mu)> reference_wsff;

    /// Point where the local rate vanishes, when the family concentrates.
    std::optional<Vec> law_mean;
    /// zeta_T lies on the coordinate axes a.s., so box and ball truncation agree.
    bool support_on_axes = false;
};

/// ceil(T) as a step count, at least 1.
inline std::size_t integer_time(double T) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(T - 1e-9)));
}

// ---------------------------------------------------------------------------
// Finite atomic laws (two-atom, Markov occupation, binomial means).

struct AtomLaw {
    std::vector<Vec> atoms;
    std::vector<double> log_prob;
};

namespace detail {

inline double atoms_log_local(const AtomLaw& law, const Vec& alpha, double eps) {
    LogAccumulator acc;
    for (std::size_t i = 0; i < law.atoms.size(); ++i)
        if (in_open_ball(law.atoms[i], alpha, eps)) acc.add(law.log_prob[i]);
    return acc.value();
}

inline double atoms_trunc_log_mgf(const AtomLaw& law, const Vec& mu, double M, double T) {
    LogAccumulator acc;
    for (std::size_t i = 0; i < law.atoms.size(); ++i)
        if (norm(law.atoms[i]) <= M) acc.add(law.log_prob[i] + T * dot(mu, law.atoms[i]));
    return acc.value();
}

inline double atoms_log_tail(const AtomLaw& law, double v) {
    LogAccumulator acc;
    for (std::size_t i = 0; i < law.atoms.size(); ++i)
        if (norm(law.atoms[i]) > v) acc.add(law.log_prob[i]);
    return acc.value();
}

inline double atoms_log_upper_moment(const AtomLaw& law, const Vec& mu, double threshold, double T) {
    LogAccumulator acc;
    for (std::size_t i = 0; i < law.atoms.size(); ++i) {
        const double ip = dot(mu, law.atoms[i]);
        if (ip >= threshold) acc.add(law.log_prob[i] + T * ip);
    }
    return acc.value();
}

inline TiltedDraw atoms_tilted(AtomLaw law, const Vec& mu, double M, double T) {
    std::vector<double> logw(law.atoms.size(), -kInf);
    double top = -kInf;
    for (std::size_t i = 0; i < law.atoms.size(); ++i) {
        if (norm(law.atoms[i]) <= M) logw[i] = law.log_prob[i] + T * dot(mu, law.atoms[i]);
        top = std::max(top, logw[i]);
    }
    if (is_neg_inf(top)) throw NumericalFailure("tilted law: no atom inside the truncation ball");
    std::vector<double> cdf(logw.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        total += std::exp(logw[i] - top);
        cdf[i] = total;
    }
    return [law = std::move(law), cdf = std::move(cdf), total](Stream& s) {
        const double u = s.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cdf.begin());
        if (i >= cdf.size()) i = cdf.size() - 1;
        while (i > 0 && cdf[i] == cdf[i - 1]) --i;  // skip zero-weight atoms
        return law.atoms[i];
    };
}

inline void attach_atom_capabilities(FamilyModel& m, std::function<AtomLaw(double T)> law_at) {
    m.exact_log_local_prob = [law_at](const Vec& a, double eps, double T) {
        return atoms_log_local(law_at(T), a, eps);
    };
    m.exact_trunc_log_mgf = [law_at](const Vec& mu, double M, double T) {
        return atoms_trunc_log_mgf(law_at(T), mu, M, T);
    };
    m.exact_log_tail = [law_at](double v, double T) { return atoms_log_tail(law_at(T), v); };
    m.tilted_sampler = [law_at](const Vec& mu, double M, double T) { return atoms_tilted(law_at(T), mu, M, T); };
    m.exact_log_mgf = [law_at](const Vec& mu, double T) { return atoms_trunc_log_mgf(law_at(T), mu, kInf, T); };
    m.exact_log_upper_moment = [law_at](const Vec& mu, double thr, double T) {
        return atoms_log_upper_moment(law_at(T), mu, thr, T);
    };
}

// ln of int_a^b e^{k z} z^{-2} dz for 0 < a < b. With t = |k| distance from
// the anchor endpoint (b for k > 0, a for k < 0) the integrand is
// e^{-t} z(t)^{-2}, smooth and decaying on [0, |k| (b - a)].
inline double log_exp_over_square(double k, double a, double b) {
    if (!(a < b)) return -kInf;
    if (k == 0.0) return std::log(1.0 / a - 1.0 / b);
    using boost::math::quadrature::gauss_kronrod;
    const double ak = std::abs(k);
    const double anchor = k > 0 ? b : a;
    auto integrand = [&](double t) {
        const double z = k > 0 ? b - t / ak : a + t / ak;
        return std::exp(-t) / (z * z);
    };
    const double J = gauss_kronrod<double, 31>::integrate(integrand, 0.0, ak * (b - a), 15, 1e-14);
    return k * anchor - std::log(ak) + std::log(J);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// mills-tail: symmetric law with a normal body and a Pareto-1 tail,
//   P(zeta_T > z) = Qbar(z sqrt T)   for 0 < z < sqrt T,
//                 = c_T / z         for z >= sqrt T,  c_T = sqrt(T) Qbar(T).

namespace mills {

inline double log_c(double T) { return 0.5 * std::log(T) + normal::log_upper_tail(T); }

/// ln P(zeta_T > z) for z >= 0.
inline double log_upper(double z, double T) {
    const double r = std::sqrt(T);
    if (z < r) return normal::log_upper_tail(z * r);
    return log_c(T) - std::log(z);
}

inline double log_interval(double a, double b, double T) {
    if (!(a < b)) return -kInf;
    if (a >= 0.0) {
        const double r = std::sqrt(T);
        if (b <= r) return normal::log_interval(a * r, b * r);
        return log_sub(log_upper(a, T), log_upper(b, T));
    }
    if (b <= 0.0) return log_interval(-b, -a, T);
    return log1mexp(log_add(log_upper(b, T), log_upper(-a, T)));
}

inline double trunc_log_mgf(double mu, double M, double T) {
    const double r = std::sqrt(T);
    const double m = std::min(M, r);
    const double s = mu * r;
    // Normal body: zeta = Z / sqrt T on |Z| < T.
    double total = T * mu * mu / 2.0 + normal::log_interval(-m * r - s, m * r - s);
    if (M > r) {
        // Pareto tail density c_T / z^2 on both sides of (-sqrt T, sqrt T).
        const double lc = log_c(T);
        total = log_add(total, lc + detail::log_exp_over_square(T * mu, r, M));
        total = log_add(total, lc + detail::log_exp_over_square(-T * mu, r, M));
    }
    return total;
}

}  // namespace mills

inline FamilyModel mills_tail() {
    FamilyModel m;
    m.id = "mills-tail";
    m.dimension = 1;
    m.sampler = [](double T, Stream& s) {
        const double z = s.normal();
        if (std::abs(z) < T) return Vec{z / std::sqrt(T)};
        // Conditionally on |zeta| >= sqrt T the tail c_T / z is a Pareto-1 law.
        const double tail = std::sqrt(T) / s.uniform();
        return Vec{z > 0 ? tail : -tail};
    };
    m.exact_log_local_prob = [](const Vec& a, double eps, double T) {
        return mills::log_interval(a[0] - eps, a[0] + eps, T);
    };
    m.exact_trunc_log_mgf = [](const Vec& mu, double M, double T) { return mills::trunc_log_mgf(mu[0], M, T); };
    m.exact_log_tail = [](double v, double T) { return kLn2 + mills::log_upper(v, T); };
    m.exact_log_mgf = [](const Vec& mu, double) { return mu[0] == 0.0 ? 0.0 : kInf; };
    m.exact_log_upper_moment = [](const Vec& mu, double thr, double) {
        // The Pareto tail makes the moment infinite on any unbounded half-line.
        if (mu[0] != 0.0) return kInf;
        return thr <= 0.0 ? 0.0 : -kInf;
    };
    m.reference_rate = [](const Vec& a) { return a[0] * a[0] / 2.0; };
    m.reference_wsff = [](const Vec& mu) { return mu[0] * mu[0] / 2.0; };
    m.law_mean = Vec{0.0};
    return m;
}

// ---------------------------------------------------------------------------
// two-atom families: P(zeta_T = 1) = 2^{-T}, P(zeta_T = a_T) = 1 - 2^{-T}.

enum class AtomSchedule { Vanishing, Escaping };

inline AtomLaw two_atom_law(AtomSchedule sched, double T) {
    const double a = sched == AtomSchedule::Vanishing ? 1.0 / T : T;
    const double lp1 = -T * kLn2;
    const double lpa = log1mexp(lp1);
    if (a == 1.0) return AtomLaw{{Vec{1.0}}, {0.0}};
    return AtomLaw{{Vec{1.0}, Vec{a}}, {lp1, lpa}};
}

inline FamilyModel two_atom(AtomSchedule sched) {
    FamilyModel m;
    m.id = sched == AtomSchedule::Vanishing ? "two-atom-vanishing" : "two-atom-escaping";
    m.dimension = 1;
    m.sampler = [sched](double T, Stream& s) {
        const double a = sched == AtomSchedule::Vanishing ? 1.0 / T : T;
        return Vec{std::log(s.uniform()) < -T * kLn2 ? 1.0 : a};
    };
    detail::attach_atom_capabilities(m, [sched](double T) { return two_atom_law(sched, T); });
    if (sched == AtomSchedule::Vanishing) {
        m.reference_rate = [](const Vec& a) {
            if (a[0] == 0.0) return 0.0;
            if (a[0] == 1.0) return kLn2;
            return kInf;
        };
        m.reference_wsff = [](const Vec& mu) { return std::max(0.0, mu[0] - kLn2); };
        m.law_mean = Vec{0.0};
    } else {
        m.reference_rate = [](const Vec& a) { return a[0] == 1.0 ? kLn2 : kInf; };
        m.reference_wsff = [](const Vec& mu) { return mu[0] - kLn2; };
    }
    return m;
}

// ---------------------------------------------------------------------------
// markov-occupation: occupation fractions of states 1 and 2 for the chain with rows
// (1/2, 0, 1/2), (0, 1/2, 1/2), (0, 0, 1) and Y_1 uniform on {1, 2}.
// Starting from state j the chain occupies it for C of the steps t = 1..n,
// P(C = c) = 2^{-c} for 1 <= c < n and P(C = n) = 2^{-(n-1)}.

inline AtomLaw markov_occupation_law(double T) {
    const std::size_t n = integer_time(T);
    AtomLaw law;
    law.atoms.reserve(2 * n);
    law.log_prob.reserve(2 * n);
    for (int start = 0; start < 2; ++start) {
        for (std::size_t c = 1; c <= n; ++c) {
            const double k = c < n ? static_cast<double>(c) : static_cast<double>(n - 1);
            Vec atom{0.0, 0.0};
            atom[static_cast<std::size_t>(start)] = static_cast<double>(c) / static_cast<double>(n);
            law.atoms.push_back(atom);
            law.log_prob.push_back(-kLn2 - k * kLn2);
        }
    }
    return law;
}

/// Window sum sum_{k=floor((alpha-eps)T)+2}^{ceil((alpha+eps)T)} 2^{-k} in the
/// printed form of the one-coordinate ball probability.
inline double markov_printed_window_log_sum(double alpha, double eps, double T) {
    const auto lo = static_cast<long long>(std::floor((alpha - eps) * T)) + 2;
    const auto hi = static_cast<long long>(std::ceil((alpha + eps) * T));
    LogAccumulator acc;
    for (long long k = lo; k <= hi; ++k) acc.add(-static_cast<double>(k) * kLn2);
    return acc.value();
}

/// The printed closed sum for the truncated moment,
/// (1/2)(sum_{k=0}^{T} e^{mu_1 k} 2^{-k} + sum_{k=0}^{T} e^{mu_2 k} 2^{-k}).
inline double markov_printed_mgf_log_sum(const Vec& mu, double T) {
    const std::size_t n = integer_time(T);
    LogAccumulator acc;
    for (int j = 0; j < 2; ++j)
        for (std::size_t k = 0; k <= n; ++k)
            acc.add(-kLn2 + static_cast<double>(k) * (mu[static_cast<std::size_t>(j)] - kLn2));
    return acc.value();
}

inline FamilyModel markov_occupation() {
    FamilyModel m;
    m.id = "markov-occupation";
    m.dimension = 2;
    m.support_on_axes = true;
    m.sampler = [](double T, Stream& s) {
        const std::size_t n = integer_time(T);
        // State labels 0, 1 stand for chain states 1, 2; label 2 is absorbing.
        int state = (s.bits() >> 63) ? 1 : 0;
        Vec count{0.0, 0.0};
        for (std::size_t t = 1; t <= n; ++t) {
            if (t > 1 && s.uniform() < 0.5) state = 2;
            if (state == 2) break;
            count[static_cast<std::size_t>(state)] += 1.0;
        }
        return Vec{count[0] / static_cast<double>(n), count[1] / static_cast<double>(n)};
    };
    detail::attach_atom_capabilities(m, markov_occupation_law);
    m.reference_rate = [](const Vec& a) {
        const double tol = 1e-12;
        if (std::abs(a[1]) <= tol && a[0] >= -tol && a[0] <= 1.0 + tol) return std::max(0.0, a[0]) * kLn2;
        if (std::abs(a[0]) <= tol && a[1] >= -tol && a[1] <= 1.0 + tol) return std::max(0.0, a[1]) * kLn2;
        return kInf;
    };
    m.reference_wsff = [](const Vec& mu) { return std::max(0.0, std::max(mu[0], mu[1]) - kLn2); };
    m.law_mean = Vec{0.0, 0.0};
    return m;
}

// ---------------------------------------------------------------------------
// Classical sample means of ceil(T) IID increments.

enum class IncrementLaw { Normal, Bernoulli, Exponential, Pareto };

struct IIDMeanConfig {
    IncrementLaw law = IncrementLaw::Normal;
    double p = 0.5;      // Bernoulli success probability
    double rate = 1.0;   // exponential rate
    double index = 3.0;  // Pareto tail index (x_min = 1)
};

inline AtomLaw binomial_mean_law(double p, double T) {
    const std::size_t n = integer_time(T);
    AtomLaw law;
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double lchoose = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
        const double lp = lchoose + (k > 0 ? kk * std::log(p) : 0.0) + (k < n ? (nn - kk) * std::log1p(-p) : 0.0);
        law.atoms.push_back(Vec{kk / nn});
        law.log_prob.push_back(lp);
    }
    return law;
}

namespace detail {

// ln P(x < S) for S ~ Gamma(n, rate), via the regularized upper gamma.
inline double log_gamma_upper(double n, double x) {
    if (x <= 0.0) return 0.0;
    return std::log(boost::math::gamma_q(n, x));
}
inline double log_gamma_lower(double n, double x) {
    if (x <= 0.0) return -kInf;
    return std::log(boost::math::gamma_p(n, x));
}

// ln int_0^b x^{n-1} e^{c x} dx for c >= 0, via x = b y.
inline double log_power_exp_integral(double n, double c, double b) {
    using boost::math::quadrature::gauss_kronrod;
    const double cb = c * b;
    auto integrand = [&](double y) { return y <= 0.0 ? 0.0 : std::exp((n - 1.0) * std::log(y) + cb * (y - 1.0)); };
    const double J = gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-12);
    return n * std::log(b) + cb + std::log(J);
}

inline double log_pareto_mgf_negative(double t, double a) {
    // ln E e^{tX}, t <= 0, X Pareto(a) with x_min = 1.
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double x) { return a * std::exp(t * x - (a + 1.0) * std::log(x)); };
    const double v = gauss_kronrod<double, 31>::integrate(f, 1.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
    return std::log(v);
}

}  // namespace detail

inline FamilyModel iid_mean(IIDMeanConfig cfg) {
    FamilyModel m;
    m.dimension = 1;
    switch (cfg.law) {
        case IncrementLaw::Normal: {
            m.id = "iid-normal";
            m.sampler = [](double T, Stream& s) {
                const double n = static_cast<double>(integer_time(T));
                return Vec{s.normal() / std::sqrt(n)};
            };
            m.exact_log_local_prob = [](const Vec& a, double eps, double T) {
                const double r = std::sqrt(static_cast<double>(integer_time(T)));
                return normal::log_interval((a[0] - eps) * r, (a[0] + eps) * r);
            };
            m.exact_trunc_log_mgf = [](const Vec& mu, double M, double T) {
                const double r = std::sqrt(static_cast<double>(integer_time(T)));
                const double s = T * mu[0] / r;
                return s * s / 2.0 + normal::log_interval(-M * r - s, M * r - s);
            };
            m.exact_log_tail = [](double v, double T) {
                const double r = std::sqrt(static_cast<double>(integer_time(T)));
                return kLn2 + normal::log_upper_tail(v * r);
            };
            m.exact_log_mgf = [](const Vec& mu, double T) {
                const double r = std::sqrt(static_cast<double>(integer_time(T)));
                const double s = T * mu[0] / r;
                return s * s / 2.0;
            };
            m.exact_log_upper_moment = [](const Vec& mu, double thr, double T) {
                const double r = std::sqrt(static_cast<double>(integer_time(T)));
                const double u = mu[0];
                if (u == 0.0) return thr <= 0.0 ? 0.0 : -kInf;
                const double s = T * u / r;
                const double z0 = thr / u * r;
                return s * s / 2.0 + (u > 0 ? normal::log_upper_tail(z0 - s) : normal::log_cdf(z0 - s));
            };
            m.tilted_sampler = [](const Vec& mu, double M, double T) -> TiltedDraw {
                const double n = static_cast<double>(integer_time(T));
                const double mean = T * mu[0] / n;
                const double sd = 1.0 / std::sqrt(n);
                const double log_accept = normal::log_interval((-M - mean) / sd, (M - mean) / sd);
                if (log_accept < std::log(1e-6))
                    throw NumericalFailure("tilted sampler: acceptance below 1e-6, truncation radius M too small for the tilt");
                return [mean, sd, M](Stream& s) {
                    for (;;) {
                        const double x = mean + sd * s.normal();
                        if (std::abs(x) <= M) return Vec{x};
                    }
                };
            };
            m.reference_rate = [](const Vec& a) { return a[0] * a[0] / 2.0; };
            m.reference_wsff = [](const Vec& mu) { return mu[0] * mu[0] / 2.0; };
            m.law_mean = Vec{0.0};
            break;
        }
        case IncrementLaw::Bernoulli: {
            const double p = cfg.p;
            if (!(p > 0.0 && p < 1.0)) throw DomainError("iid-bernoulli: p must lie in (0, 1)");
            m.id = "iid-bernoulli";
            m.sampler = [p](double T, Stream& s) {
                const std::size_t n = integer_time(T);
                std::size_t k = 0;
                for (std::size_t i = 0; i < n; ++i) k += s.uniform() < p ? 1 : 0;
                return Vec{static_cast<double>(k) / static_cast<double>(n)};
            };
            detail::attach_atom_capabilities(m, [p](double T) { return binomial_mean_law(p, T); });
            m.reference_rate = [p](const Vec& a) {
                const double x = a[0];
                if (x < 0.0 || x > 1.0) return kInf;
                const double l = x > 0.0 ? x * std::log(x / p) : 0.0;
                const double r = x < 1.0 ? (1.0 - x) * std::log((1.0 - x) / (1.0 - p)) : 0.0;
                return l + r;
            };
            m.reference_wsff = [p](const Vec& mu) { return std::log1p(p * std::expm1(mu[0])); };
            m.law_mean = Vec{p};
            break;
        }
        case IncrementLaw::Exponential: {
            const double lam = cfg.rate;
            if (!(lam > 0.0)) throw DomainError("iid-exponential: rate must be positive");
            m.id = "iid-exponential";
            m.sampler = [lam](double T, Stream& s) {
                const std::size_t n = integer_time(T);
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) sum += s.exponential(lam);
                return Vec{sum / static_cast<double>(n)};
            };
            m.exact_log_local_prob = [lam](const Vec& a, double eps, double T) {
                const double n = static_cast<double>(integer_time(T));
                const double lo = std::max(0.0, a[0] - eps), hi = a[0] + eps;
                if (!(lo < hi)) return -kInf;
                // Pick the tail that avoids cancellation.
                if (lam * lo >= 1.0)
                    return log_sub(detail::log_gamma_upper(n, n * lam * lo), detail::log_gamma_upper(n, n * lam * hi));
                return log_sub(detail::log_gamma_lower(n, n * lam * hi), detail::log_gamma_lower(n, n * lam * lo));
            };
            m.exact_trunc_log_mgf = [lam](const Vec& mu, double M, double T) {
                const double n = static_cast<double>(integer_time(T));
                const double s = T * mu[0] / n;
                if (s < lam) return n * std::log(lam / (lam - s)) + detail::log_gamma_lower(n, (lam - s) * n * M);
                return n * std::log(lam) - std::lgamma(n) + detail::log_power_exp_integral(n, s - lam, n * M);
            };
            m.exact_log_tail = [lam](double v, double T) {
                const double n = static_cast<double>(integer_time(T));
                return detail::log_gamma_upper(n, n * lam * v);
            };
            m.exact_log_mgf = [lam](const Vec& mu, double T) {
                const double n = static_cast<double>(integer_time(T));
                const double s = T * mu[0] / n;
                return s < lam ? n * std::log(lam / (lam - s)) : kInf;
            };
            m.tilted_sampler = [lam](const Vec& mu, double M, double T) -> TiltedDraw {
                const std::size_t n = integer_time(T);
                const double rate = lam - T * mu[0] / static_cast<double>(n);
                if (!(rate > 0.0)) throw CapabilityError("iid-exponential: exact tilt needs mu < rate");
                if (detail::log_gamma_lower(static_cast<double>(n), rate * static_cast<double>(n) * M) < std::log(1e-6))
                    throw NumericalFailure("tilted sampler: acceptance below 1e-6, truncation radius M too small for the tilt");
                return [n, rate, M](Stream& s) {
                    for (;;) {
                        double sum = 0.0;
                        for (std::size_t i = 0; i < n; ++i) sum += s.exponential(rate);
                        const double x = sum / static_cast<double>(n);
                        if (x <= M) return Vec{x};
                    }
                };
            };
            m.reference_rate = [lam](const Vec& a) {
                const double x = a[0];
                if (x <= 0.0) return kInf;
                return lam * x - 1.0 - std::log(lam * x);
            };
            m.reference_wsff = [lam](const Vec& mu) { return mu[0] < lam ? -std::log1p(-mu[0] / lam) : kInf; };
            m.law_mean = Vec{1.0 / lam};
            break;
        }
        case IncrementLaw::Pareto: {
            const double a = cfg.index;
            if (!(a > 0.0)) throw DomainError("iid-pareto: index must be positive");
            m.id = "iid-pareto";
            m.sampler = [a](double T, Stream& s) {
                const std::size_t n = integer_time(T);
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) sum += std::pow(s.uniform(), -1.0 / a);
                return Vec{sum / static_cast<double>(n)};
            };
            m.exact_log_mgf = [a](const Vec& mu, double T) {
                if (mu[0] > 0.0) return kInf;
                if (mu[0] == 0.0) return 0.0;
                const double n = static_cast<double>(integer_time(T));
                return n * detail::log_pareto_mgf_negative(T * mu[0] / n, a);
            };
            if (a > 1.0) m.law_mean = Vec{a / (a - 1.0)};
            break;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

struct FamilyParams {
    double p = 0.5;
    double rate = 1.0;
    double index = 3.0;
};

inline const std::vector<std::string>& builtin_family_ids() {
    static const std::vector<std::string> ids{"mills-tail",        "two-atom-vanishing", "two-atom-escaping",
                                              "markov-occupation", "iid-normal",         "iid-bernoulli",
                                              "iid-exponential",   "iid-pareto"};
    return ids;
}

inline FamilyModel make_family(const std::string& id, const FamilyParams& params = {}) {
    if (id == "mills-tail") return mills_tail();
    if (id == "two-atom-vanishing") return two_atom(AtomSchedule::Vanishing);
    if (id == "two-atom-escaping") return two_atom(AtomSchedule::Escaping);
    if (id == "markov-occupation") return markov_occupation();
    if (id == "iid-normal") return iid_mean({IncrementLaw::Normal});
    if (id == "iid-bernoulli") return iid_mean({IncrementLaw::Bernoulli, params.p});
    if (id == "iid-exponential") return iid_mean({IncrementLaw::Exponential, 0.5, params.rate});
    if (id == "iid-pareto") return iid_mean({IncrementLaw::Pareto, 0.5, 1.0, params.index});
    throw DomainError("unknown model '" + id + "'");
}

// ---------------------------------------------------------------------------
// Capability-checked entry points.

inline Vec sample(const FamilyModel& m, double T, std::uint64_t seed) {
    if (!(T > 0.0)) throw DomainError("sample: T must be positive");
    Stream s(seed);
    return m.sampler(T, s);
}

inline double exact_log_local_prob(const FamilyModel& m, const Vec& alpha, double eps, double T) {
    if (!m.exact_log_local_prob) throw CapabilityError(m.id + ": no closed-form local probability");
    if (!(eps > 0.0)) throw DomainError("exact_log_local_prob: eps must be positive");
    return m.exact_log_local_prob(alpha, eps, T);
}

inline double exact_trunc_log_mgf(const FamilyModel& m, const Vec& mu, double M, double T) {
    if (!m.exact_trunc_log_mgf) throw CapabilityError(m.id + ": no closed-form truncated moment");
    if (!(M > 0.0)) throw DomainError("exact_trunc_log_mgf: M must be positive");
    return m.exact_trunc_log_mgf(mu, M, T);
}

inline double exact_log_tail(const FamilyModel& m, double v, double T) {
    if (!m.exact_log_tail) throw CapabilityError(m.id + ": no closed-form tail");
    return m.exact_log_tail(v, T);
}

inline Vec tilted_sample(const FamilyModel& m, const Vec& mu, double M, double T, std::uint64_t seed) {
    if (!m.tilted_sampler) throw CapabilityError(m.id + ": no tilted sampler");
    Stream s(seed);
    return m.tilted_sampler(mu, M, T)(s);
}

}  // namespace ldplab
