#pragma once

// Local rate functions D(alpha) = -lim (1/T) ln P(zeta_T in (alpha)_eps):
// direct estimates, tilts solving grad A(mu) = alpha, tilted importance
// sampling and tightness probes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ldplab/convex.hpp"
#include "ldplab/core.hpp"
#include "ldplab/estimate.hpp"
#include "ldplab/families.hpp"
#include "ldplab/random.hpp"
#include "ldplab/wsff.hpp"

namespace ldplab {

enum class RateMethod { Exact, NaiveMC, TiltedIS };

inline std::string to_string(RateMethod m) {
    switch (m) {
        case RateMethod::Exact: return "exact";
        case RateMethod::NaiveMC: return "naive-mc";
        case RateMethod::TiltedIS: return "tilted-is";
    }
    return "?";
}

enum class TiltStatus { Interior, BoundaryClamped, FailedNonsmooth };

inline std::string to_string(TiltStatus s) {
    switch (s) {
        case TiltStatus::Interior: return "interior";
        case TiltStatus::BoundaryClamped: return "boundary-clamped";
        case TiltStatus::FailedNonsmooth: return "failed-nonsmooth";
    }
    return "?";
}

struct TiltSolution {
    Vec mu_star;
    Vec achieved_gradient;
    double residual = kInf;
    TiltStatus status = TiltStatus::FailedNonsmooth;
    double tolerance = 0.0;
};

struct RatePoint {
    Vec alpha;
    LogEstimate D_hat;
    RateMethod method = RateMethod::Exact;
    double eps_used = 0.0;
    double T_used = 0.0;
    double M_used = kInf;
    std::vector<double> rung_values;
    std::optional<TiltSolution> tilt;
    double tilted_hit_fraction = std::numeric_limits<double>::quiet_NaN();
    Vec evaluated_at;  // differs from alpha after an interior shift
};

struct RateOptions {
    bool force_monte_carlo = false;
    unsigned jobs = 1;
};

// ---------------------------------------------------------------------------

namespace detail {

inline LogEstimate naive_rung(const FamilyModel& model, const Vec& alpha, double eps, double T, std::size_t N,
                              std::uint64_t seed, bool force_mc) {
    if (model.exact_log_local_prob && !force_mc)
        return LogEstimate::exact(-model.exact_log_local_prob(alpha, eps, T) / T, static_cast<double>(N));
    Stream s(seed);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (in_open_ball(model.sampler(T, s), alpha, eps)) ++hits;
    LogEstimate e;
    e.provenance = Provenance::MonteCarlo;
    e.n_effective = static_cast<double>(hits);
    if (hits == 0) {
        e.value = kInf;
        e.ci_half_width = kInf;
        e.flags |= flag::undersampled;
        return e;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(N);
    e.value = -std::log(p) / T;
    e.ci_half_width = 1.96 * std::sqrt((1.0 - p) / static_cast<double>(hits)) / T;
    if (static_cast<double>(hits) < kEffectiveSampleFloor) e.flags |= flag::unreliable;
    return e;
}

}  // namespace detail

/// -(1/T) ln P(zeta_T in (alpha)_eps) per rung with eps = eps_schedule(T).
/// The reported rate is the last rung that is not undersampled; a run where
/// every rung is undersampled reports +inf with the flag.
inline RatePoint estimate_local_rate_naive(const FamilyModel& model, const Vec& alpha, const ScheduleSpec& eps_schedule,
                                           const std::vector<double>& T_ladder, std::size_t N, std::uint64_t seed,
                                           const RateOptions& opt = {}) {
    if (static_cast<int>(alpha.size()) != model.dimension) throw DomainError("estimate_local_rate_naive: dimension mismatch");
    detail::check_ladder(T_ladder, 1, "estimate_local_rate_naive");
    const std::function<LogEstimate(std::size_t)> task = [&](std::size_t r) {
        const double T = T_ladder[r];
        return detail::naive_rung(model, alpha, eps_schedule.vanishing(T), T, N, derive_seed(seed, r), opt.force_monte_carlo);
    };
    const auto rungs = parallel_map<LogEstimate>(T_ladder.size(), opt.jobs, task);
    RatePoint p;
    p.alpha = alpha;
    p.evaluated_at = alpha;
    std::size_t pick = rungs.size() - 1;
    for (std::size_t r = rungs.size(); r-- > 0;) {
        if (!rungs[r].has(flag::undersampled)) {
            pick = r;
            break;
        }
    }
    for (const auto& e : rungs) p.rung_values.push_back(e.value);
    p.D_hat = rungs[pick];
    p.method = p.D_hat.provenance == Provenance::Exact ? RateMethod::Exact : RateMethod::NaiveMC;
    p.T_used = T_ladder[pick];
    p.eps_used = eps_schedule.vanishing(p.T_used);
    return p;
}

// ---------------------------------------------------------------------------
// Tilt solving.

struct TiltOptions {
    std::optional<double> tol;       // default 2 h
    std::optional<double> jump_tol;  // default 10 h
    double damping = 0.8;
    int max_sweeps = 400;
};

namespace detail {

struct Tilt1D {
    double mu = 0.0;
    double gradient = 0.0;
    TiltStatus status = TiltStatus::FailedNonsmooth;
};

// Values v on nodes lower + i h (+inf allowed outside a contiguous domain).
inline Tilt1D solve_tilt_line(const std::vector<double>& v, double lower, double h, double alpha, double tol,
                              double jump_tol) {
    constexpr double eta = 1e-9;
    std::size_t first = kNoIndex, last = kNoIndex;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) continue;
        if (first == kNoIndex) first = i;
        last = i;
    }
    auto node = [&](std::size_t i) { return lower + h * static_cast<double>(i); };
    if (first == kNoIndex) return {};
    if (first == last) return {node(first), std::numeric_limits<double>::quiet_NaN(), TiltStatus::FailedNonsmooth};

    // s[k] is the slope on [node(first + k), node(first + k + 1)].
    std::vector<double> s;
    for (std::size_t i = first; i < last; ++i) s.push_back((v[i + 1] - v[i]) / h);
    const std::size_t K = s.size();
    const std::size_t r =
        static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), alpha - eta) - s.begin());
    if (r == K) return {node(last), s.back(), TiltStatus::BoundaryClamped};
    if (r == 0) return {node(first), s.front(), TiltStatus::BoundaryClamped};

    const double sl = s[r - 1], sr = s[r];
    if (sr - sl <= jump_tol) {
        const double m_left = node(first + r - 1) + 0.5 * h;
        const double t = sr > sl ? (alpha - sl) / (sr - sl) : 0.5;
        return {m_left + h * std::clamp(t, 0.0, 1.0), sl + (sr - sl) * std::clamp(t, 0.0, 1.0), TiltStatus::Interior};
    }
    // A slope jump. Segments cut by the kink carry intermediate slopes; step
    // past them to the clean slopes on either side.
    std::size_t a = r - 1, b = r;
    while (a > 0 && s[a] - s[a - 1] > jump_tol) --a;
    while (b + 1 < K && s[b + 1] - s[b] > jump_tol) ++b;
    const double sL = s[a], sR = s[b];
    if (std::abs(alpha - sR) <= tol) return {node(first + b), sR, TiltStatus::Interior};
    if (std::abs(alpha - sL) <= tol) return {node(first + a + 1), sL, TiltStatus::Interior};
    const double kink = 0.5 * (node(first + a + 1) + node(first + b));
    return {kink, std::abs(alpha - sL) < std::abs(alpha - sR) ? sL : sR, TiltStatus::FailedNonsmooth};
}

// Values of a 2-D grid function along axis k with the other coordinate at
// `other`, linearly interpolated between the two neighbouring grid lines.
inline std::vector<double> slice(const GridFunction& f, int axis, double other) {
    const GridSpec& g = f.spec();
    const int o = 1 - axis;
    const Axis& ao = g.axis(o);
    double t = (other - ao.lower) / ao.spacing();
    t = std::clamp(t, 0.0, static_cast<double>(ao.count - 1));
    auto j = static_cast<std::size_t>(std::floor(t));
    if (j + 1 >= ao.count) j = ao.count - 2;
    const double w = t - static_cast<double>(j);
    const std::size_t n = g.axis(axis).count;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = axis == 0 ? g.flatten(i, j) : g.flatten(j, i);
        const std::size_t q = axis == 0 ? g.flatten(i, j + 1) : g.flatten(j + 1, i);
        const double a = f[p], b = f[q];
        if (w == 0.0) out[i] = a;
        else if (w == 1.0) out[i] = b;
        else out[i] = (std::isfinite(a) && std::isfinite(b)) ? (1.0 - w) * a + w * b : kInf;
    }
    return out;
}

}  // namespace detail

/// Solves grad A(mu) = alpha on a convex grid function A.
/// 1-D: bracket alpha between consecutive segment slopes and interpolate
/// between segment midpoints; a slope jump straddling alpha fails. 2-D:
/// damped coordinate-wise solves on interpolated slices.
inline TiltSolution solve_tilt(const GridFunction& A, const Vec& alpha, const TiltOptions& opt = {}) {
    const GridSpec& g = A.spec();
    if (static_cast<int>(alpha.size()) != g.dimension()) throw DomainError("solve_tilt: dimension mismatch");
    detail::require_convex(A, 1e-8);
    TiltSolution sol;
    sol.tolerance = opt.tol.value_or(2.0 * g.spacing());
    const double jump_tol = opt.jump_tol.value_or(10.0 * g.spacing());

    if (g.dimension() == 1) {
        const Axis& ax = g.axis(0);
        const auto r = detail::solve_tilt_line(A.values(), ax.lower, ax.spacing(), alpha[0], sol.tolerance, jump_tol);
        sol.mu_star = {r.mu};
        sol.achieved_gradient = {r.gradient};
        sol.residual = std::abs(r.gradient - alpha[0]);
        sol.status = r.status;
        if (sol.status == TiltStatus::Interior && !(sol.residual <= sol.tolerance))
            sol.status = TiltStatus::FailedNonsmooth;
        return sol;
    }

    Vec mu{0.5 * (g.axis(0).lower + g.axis(0).upper), 0.5 * (g.axis(1).lower + g.axis(1).upper)};
    Vec grad{0.0, 0.0};
    std::array<TiltStatus, 2> status{TiltStatus::Interior, TiltStatus::Interior};
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        double moved = 0.0;
        for (int k = 0; k < 2; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const Axis& ax = g.axis(k);
            const auto line = detail::slice(A, k, mu[1 - ku]);
            const auto r = detail::solve_tilt_line(line, ax.lower, ax.spacing(), alpha[ku], sol.tolerance, jump_tol);
            status[ku] = r.status;
            grad[ku] = r.gradient;
            if (r.status == TiltStatus::FailedNonsmooth) {
                sol.mu_star = mu;
                sol.mu_star[ku] = r.mu;
                sol.achieved_gradient = grad;
                sol.residual = std::abs(r.gradient - alpha[ku]);
                sol.status = TiltStatus::FailedNonsmooth;
                return sol;
            }
            const double next = mu[ku] + opt.damping * (r.mu - mu[ku]);
            moved = std::max(moved, std::abs(next - mu[ku]));
            mu[ku] = next;
        }
        if (moved < 1e-10 * (1.0 + g.spacing())) break;
    }
    sol.mu_star = mu;
    try {
        sol.achieved_gradient = numeric_gradient(A, mu);
    } catch (const DomainError&) {
        sol.achieved_gradient = grad;
    }
    sol.residual = distance(sol.achieved_gradient, alpha);
    if (status[0] == TiltStatus::BoundaryClamped || status[1] == TiltStatus::BoundaryClamped)
        sol.status = TiltStatus::BoundaryClamped;
    else
        sol.status = sol.residual <= sol.tolerance ? TiltStatus::Interior : TiltStatus::FailedNonsmooth;
    return sol;
}

// ---------------------------------------------------------------------------
// Tilted importance sampling.

namespace detail {

struct TiltedRung {
    LogEstimate estimate;
    double hit_fraction = 0.0;
};

inline TiltedRung tilted_rung(const FamilyModel& model, const Vec& alpha, const Vec& mu, double eps, double T, double M,
                              std::size_t N, std::uint64_t seed) {
    TiltedRung out;
    LogEstimate& e = out.estimate;
    e.provenance = Provenance::MonteCarlo;
    double log_E = 0.0, log_E_ci = 0.0;
    std::vector<double> logw(N, -kInf);
    std::size_t hits = 0;
    if (model.tilted_sampler) {
        if (model.exact_trunc_log_mgf) {
            log_E = model.exact_trunc_log_mgf(mu, M, T);
        } else {
            const LogEstimate est = estimate_trunc_log_mgf(model, mu, T, M, N, mix64(seed));
            log_E = est.value * T;
            log_E_ci = est.ci_half_width * T;
        }
        const TiltedDraw draw = model.tilted_sampler(mu, M, T);
        Stream s(seed);
        for (std::size_t i = 0; i < N; ++i) {
            const Vec x = draw(s);
            if (!in_open_ball(x, alpha, eps)) continue;
            ++hits;
            logw[i] = -T * dot(mu, x);
        }
        const WeightSummary w = summarize_log_weights(logw, N);
        out.hit_fraction = static_cast<double>(hits) / static_cast<double>(N);
        e.n_effective = w.n_effective;
        if (hits == 0) {
            e.value = kInf;
            e.ci_half_width = kInf;
            e.flags |= flag::undersampled;
            return out;
        }
        e.value = -(log_E + w.log_mean) / T;
        e.ci_half_width = (1.96 * w.relative_se + log_E_ci) / T;
    } else {
        // Self-normalised reweighting of raw draws by e^{T<mu,x>} 1(x in B_M).
        Stream s(seed);
        std::vector<double> tilt_w(N, -kInf);
        for (std::size_t i = 0; i < N; ++i) {
            const Vec x = model.sampler(T, s);
            if (norm(x) > M) continue;
            tilt_w[i] = T * dot(mu, x);
            if (in_open_ball(x, alpha, eps)) {
                ++hits;
                logw[i] = 0.0;
            }
        }
        const WeightSummary all = summarize_log_weights(tilt_w, N);
        std::vector<double> hit_tilt(N, -kInf);
        for (std::size_t i = 0; i < N; ++i)
            if (!is_neg_inf(logw[i])) hit_tilt[i] = tilt_w[i];
        const WeightSummary hit = summarize_log_weights(hit_tilt, N);
        out.hit_fraction = is_neg_inf(all.log_mean) ? 0.0 : std::exp(hit.log_mean - all.log_mean);
        e.n_effective = static_cast<double>(hits);
        if (hits == 0) {
            e.value = kInf;
            e.ci_half_width = kInf;
            e.flags |= flag::undersampled;
            return out;
        }
        const double p = static_cast<double>(hits) / static_cast<double>(N);
        e.value = -std::log(p) / T;
        e.ci_half_width = 1.96 * std::sqrt((1.0 - p) / static_cast<double>(hits)) / T;
    }
    if (e.n_effective < kEffectiveSampleFloor) e.flags |= flag::unreliable;
    return out;
}

}  // namespace detail

/// D-hat via P = E_{T,M}(mu) * E~[e^{-T<mu,x>} 1(x in (alpha)_eps)] with mu
/// solving grad A(mu) = alpha on the supplied A grid. A boundary-clamped tilt
/// is retried at the interior-shifted point alpha -+ eps/2.
inline RatePoint estimate_local_rate_tilted(const FamilyModel& model, const Vec& alpha, const GridFunction& A,
                                            const ScheduleSpec& eps_schedule, const std::vector<double>& T_ladder,
                                            const ScheduleSpec& M_schedule, std::size_t N, std::uint64_t seed,
                                            const RateOptions& opt = {}, const TiltOptions& tilt_opt = {}) {
    if (static_cast<int>(alpha.size()) != model.dimension) throw DomainError("estimate_local_rate_tilted: dimension mismatch");
    detail::check_ladder(T_ladder, 1, "estimate_local_rate_tilted");
    RatePoint p;
    p.alpha = alpha;
    p.evaluated_at = alpha;
    p.method = RateMethod::TiltedIS;
    TiltSolution tilt = solve_tilt(A, alpha, tilt_opt);
    unsigned extra = 0;
    if (tilt.status == TiltStatus::BoundaryClamped) {
        const double eps = eps_schedule.vanishing(T_ladder.back());
        Vec shifted = alpha;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            const double dir = tilt.achieved_gradient[k] > alpha[k] ? 1.0 : (tilt.achieved_gradient[k] < alpha[k] ? -1.0 : 0.0);
            shifted[k] += dir * 0.5 * eps;
        }
        TiltSolution retry = solve_tilt(A, shifted, tilt_opt);
        if (retry.status != TiltStatus::FailedNonsmooth) {
            tilt = retry;
            p.evaluated_at = shifted;
            extra |= flag::interior_shift;
        }
    }
    if (tilt.status == TiltStatus::FailedNonsmooth)
        throw NumericalFailure("tilt failed: alpha lies inside a subgradient jump of A (no mu with grad A(mu) = alpha)");
    p.tilt = tilt;

    const std::function<detail::TiltedRung(std::size_t)> task = [&](std::size_t r) {
        const double T = T_ladder[r];
        return detail::tilted_rung(model, p.evaluated_at, tilt.mu_star, eps_schedule.vanishing(T), T,
                                   M_schedule.growing(T), N, derive_seed(seed, r));
    };
    const auto rungs = parallel_map<detail::TiltedRung>(T_ladder.size(), opt.jobs, task);
    for (const auto& r : rungs) p.rung_values.push_back(r.estimate.value);
    p.D_hat = rungs.back().estimate;
    p.D_hat.flags |= extra;
    p.tilted_hit_fraction = rungs.back().hit_fraction;
    p.T_used = T_ladder.back();
    p.eps_used = eps_schedule.vanishing(p.T_used);
    p.M_used = M_schedule.growing(p.T_used);
    if (!(p.D_hat.n_effective >= kEffectiveSampleFloor))
        throw NumericalFailure("tilted estimate: effective sample size " + std::to_string(p.D_hat.n_effective) +
                               " below the floor");
    return p;
}

// ---------------------------------------------------------------------------

struct ConcentrationReport {
    double miss_probability = 1.0;
    double ci_half_width = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

/// Fraction of tilted draws falling outside (alpha)_eps; passes at <= 1/2.
inline ConcentrationReport tilted_concentration_check(const FamilyModel& model, const Vec& mu, const Vec& alpha, double eps,
                                                      double M, double T, std::size_t N, std::uint64_t seed) {
    if (!model.tilted_sampler) throw CapabilityError(model.id + ": no tilted sampler");
    const TiltedDraw draw = model.tilted_sampler(mu, M, T);
    Stream s(seed);
    std::size_t miss = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (!in_open_ball(draw(s), alpha, eps)) ++miss;
    ConcentrationReport r;
    r.samples = N;
    r.miss_probability = static_cast<double>(miss) / static_cast<double>(N);
    r.ci_half_width = 1.96 * std::sqrt(r.miss_probability * (1.0 - r.miss_probability) / static_cast<double>(N));
    r.pass = r.miss_probability <= 0.5;
    return r;
}

// ---------------------------------------------------------------------------

enum class TightnessVerdict { Decaying, MassEscaping };

inline std::string to_string(TightnessVerdict v) { return v == TightnessVerdict::Decaying ? "decaying" : "mass-escaping"; }

struct TightnessTable {
    std::vector<double> v_grid;
    std::vector<double> T_ladder;
    std::vector<std::vector<LogEstimate>> values;  // [v][T]
    std::vector<TightnessVerdict> verdicts;
};

/// (1/T) ln P(|zeta_T| > v) per (v, T). A value at the last rung within 0.05
/// of zero is read as mass escaping.
inline TightnessTable exponential_tightness_probe(const FamilyModel& model, const std::vector<double>& v_grid,
                                                  const std::vector<double>& T_ladder, std::size_t N, std::uint64_t seed,
                                                  unsigned jobs = 1) {
    if (v_grid.empty()) throw DomainError("exponential_tightness_probe: empty v grid");
    detail::check_ladder(T_ladder, 1, "exponential_tightness_probe");
    const std::size_t R = T_ladder.size();
    const std::function<LogEstimate(std::size_t)> task = [&](std::size_t idx) {
        const double v = v_grid[idx / R], T = T_ladder[idx % R];
        if (model.exact_log_tail) return LogEstimate::exact(model.exact_log_tail(v, T) / T, static_cast<double>(N));
        Stream s(derive_seed(seed, idx));
        std::size_t k = 0;
        for (std::size_t i = 0; i < N; ++i)
            if (norm(model.sampler(T, s)) > v) ++k;
        LogEstimate e;
        e.provenance = Provenance::MonteCarlo;
        e.n_effective = static_cast<double>(k);
        if (k == 0) {
            e.value = -kInf;
            e.ci_half_width = kInf;
            e.flags |= flag::undersampled;
            return e;
        }
        const double p = static_cast<double>(k) / static_cast<double>(N);
        e.value = std::log(p) / T;
        e.ci_half_width = 1.96 * std::sqrt((1.0 - p) / static_cast<double>(k)) / T;
        if (e.n_effective < kEffectiveSampleFloor) e.flags |= flag::unreliable;
        return e;
    };
    const auto all = parallel_map<LogEstimate>(v_grid.size() * R, jobs, task);
    TightnessTable t;
    t.v_grid = v_grid;
    t.T_ladder = T_ladder;
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
        t.values.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(i * R),
                              all.begin() + static_cast<std::ptrdiff_t>((i + 1) * R));
        const double last = t.values.back().back().value;
        t.verdicts.push_back(last >= -0.05 ? TightnessVerdict::MassEscaping : TightnessVerdict::Decaying);
    }
    return t;
}

// ---------------------------------------------------------------------------

struct RobustnessReport {
    std::vector<double> multipliers;
    std::vector<double> values;
    double spread = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline RobustnessReport robustness_from_values(std::vector<double> labels, std::vector<double> values, double tol) {
    RobustnessReport r;
    r.multipliers = std::move(labels);
    r.values = std::move(values);
    r.tolerance = tol;
    double lo = kInf, hi = -kInf;
    bool mixed_inf = false;
    for (double v : r.values) {
        if (std::isnan(v)) mixed_inf = true;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (r.values.empty()) r.spread = 0.0;
    else if (lo == hi) r.spread = 0.0;
    else if (std::isinf(lo) || std::isinf(hi) || mixed_inf) r.spread = kInf;
    else r.spread = hi - lo;
    r.pass = r.spread <= tol;
    return r;
}

/// Re-runs a schedule-parameterized estimator once per multiplier of the
/// schedule scale and reports the largest pairwise deviation.
inline RobustnessReport schedule_robustness(const std::function<double(double multiplier)>& runner,
                                            const std::vector<double>& multipliers, double tol) {
    std::vector<double> values;
    values.reserve(multipliers.size());
    for (double m : multipliers) values.push_back(runner(m));
    return robustness_from_values(multipliers, std::move(values), tol);
}

}  // namespace ldplab
