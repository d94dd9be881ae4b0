#pragma once

// Estimation of A(mu) = lim (1/T) ln E(e^{T<mu,zeta_T>}; zeta_T in B_{M_T}).

#include <algorithm>
#include <cmath>
#include <vector>

#include "ldplab/core.hpp"
#include "ldplab/estimate.hpp"
#include "ldplab/families.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/random.hpp"

namespace ldplab {

/// Shape of the truncation set B_M.
enum class Truncation { Ball, Box };

inline bool inside_truncation(const Vec& x, double M, Truncation t) {
    if (t == Truncation::Ball) return norm(x) <= M;
    for (double v : x)
        if (std::abs(v) > M) return false;
    return true;
}

struct MgfOptions {
    bool force_monte_carlo = false;
    Truncation truncation = Truncation::Ball;
};

/// (1/T) ln E_{T,M}(mu). Uses the closed form when the model has one (and,
/// for box truncation, when box and ball agree on the support); otherwise N
/// raw draws, log-space accumulation, delta-method CI.
inline LogEstimate estimate_trunc_log_mgf(const FamilyModel& model, const Vec& mu, double T, double M, std::size_t N,
                                          std::uint64_t seed, const MgfOptions& opt = {}) {
    if (static_cast<int>(mu.size()) != model.dimension) throw DomainError("estimate_trunc_log_mgf: dimension mismatch");
    const bool exact_ok = model.exact_trunc_log_mgf && !opt.force_monte_carlo &&
                          (opt.truncation == Truncation::Ball || model.support_on_axes || model.dimension == 1);
    if (exact_ok) {
        const double v = std::isinf(M) ? (model.exact_log_mgf ? model.exact_log_mgf(mu, T) : kInf)
                                       : model.exact_trunc_log_mgf(mu, M, T);
        return LogEstimate::exact(v / T, static_cast<double>(N));
    }
    if (N < 100) throw DomainError("estimate_trunc_log_mgf: Monte Carlo needs N >= 100");
    Stream s(seed);
    std::vector<double> logw(N, -kInf);
    for (std::size_t i = 0; i < N; ++i) {
        const Vec x = model.sampler(T, s);
        if (inside_truncation(x, M, opt.truncation)) logw[i] = T * dot(mu, x);
    }
    const WeightSummary w = summarize_log_weights(logw, N);
    LogEstimate e;
    e.provenance = Provenance::MonteCarlo;
    e.n_effective = w.n_effective;
    if (w.positive == 0) {
        e.value = -kInf;
        e.ci_half_width = kInf;
        e.flags |= flag::undersampled;
        return e;
    }
    e.value = w.log_mean / T;
    e.ci_half_width = 1.96 * w.relative_se / T;
    if (w.n_effective < kEffectiveSampleFloor) e.flags |= flag::unreliable;
    return e;
}

/// (1/T) ln E e^{T<mu,zeta_T>} without truncation.
inline LogEstimate estimate_log_mgf(const FamilyModel& model, const Vec& mu, double T, std::size_t N,
                                    std::uint64_t seed, bool force_monte_carlo = false) {
    if (model.exact_log_mgf && !force_monte_carlo) return LogEstimate::exact(model.exact_log_mgf(mu, T) / T, static_cast<double>(N));
    MgfOptions opt;
    opt.force_monte_carlo = true;
    return estimate_trunc_log_mgf(model, mu, T, kInf, N, seed, opt);
}

// ---------------------------------------------------------------------------

struct CurveOptions {
    double tolerance = 0.02;            // last-two-rung agreement for the converged flag
    double divergence_per_doubling = 0.5;
    unsigned jobs = 1;
    bool untruncated = false;           // estimate the FF instead of the WSFF
    MgfOptions mgf;
};

namespace detail {

inline void check_ladder(const std::vector<double>& ladder, std::size_t min_len, const char* what) {
    if (ladder.size() < min_len) throw DomainError(std::string(what) + ": ladder too short");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0)) throw DomainError(std::string(what) + ": ladder values must be positive");
        if (i > 0 && !(ladder[i] > ladder[i - 1])) throw DomainError(std::string(what) + ": ladder must be ascending");
    }
}

inline bool rungs_agree(double a, double b, double tol) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= tol;
}

inline std::vector<Vec> grid_points(const GridSpec& g) {
    std::vector<Vec> pts(g.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = g.point(i);
    return pts;
}

}  // namespace detail

/// A-hat over a set of mu values. Each (mu, rung) task draws from its own
/// stream derive_seed(seed, mu_index * rungs + rung).
inline Curve estimate_wsff_curve(const FamilyModel& model, const std::vector<Vec>& mus, const std::vector<double>& T_ladder,
                                 const ScheduleSpec& M_schedule, std::size_t N, std::uint64_t seed,
                                 const CurveOptions& opt = {}) {
    if (mus.empty()) throw DomainError("estimate_wsff_curve: empty mu grid");
    detail::check_ladder(T_ladder, 3, "estimate_wsff_curve");
    const std::size_t R = T_ladder.size();
    Curve c;
    c.arguments = mus;
    c.T_ladder = T_ladder;
    c.tolerance = opt.tolerance;
    for (double T : T_ladder) c.M_ladder.push_back(opt.untruncated ? kInf : M_schedule.growing(T));

    const std::function<LogEstimate(std::size_t)> task = [&](std::size_t idx) {
        const std::size_t i = idx / R, r = idx % R;
        const std::uint64_t s = derive_seed(seed, idx);
        if (opt.untruncated) return estimate_log_mgf(model, mus[i], T_ladder[r], N, s, opt.mgf.force_monte_carlo);
        return estimate_trunc_log_mgf(model, mus[i], T_ladder[r], c.M_ladder[r], N, s, opt.mgf);
    };
    const auto all = parallel_map<LogEstimate>(mus.size() * R, opt.jobs, task);

    for (std::size_t i = 0; i < mus.size(); ++i) {
        std::vector<double> rungs(R);
        for (std::size_t r = 0; r < R; ++r) rungs[r] = all[i * R + r].value;
        LogEstimate last = all[i * R + R - 1];
        const bool conv = detail::rungs_agree(rungs[R - 1], rungs[R - 2], opt.tolerance);
        if (!conv) last.flags |= flag::not_converged;
        for (std::size_t r = 1; r < R; ++r) {
            const double doublings = std::log2(T_ladder[r] / T_ladder[r - 1]);
            const double rise = rungs[r] - rungs[r - 1];
            if (is_pos_inf(rungs[r]) || (std::isfinite(rise) && rise > opt.divergence_per_doubling * doublings))
                last.flags |= flag::diverging;
        }
        c.estimates.push_back(last);
        c.converged.push_back(conv);
        c.rung_values.push_back(std::move(rungs));
    }
    return c;
}

inline Curve estimate_wsff_curve(const FamilyModel& model, const GridSpec& mu_grid, const std::vector<double>& T_ladder,
                                 const ScheduleSpec& M_schedule, std::size_t N, std::uint64_t seed,
                                 const CurveOptions& opt = {}) {
    if (mu_grid.dimension() != model.dimension) throw DomainError("estimate_wsff_curve: grid dimension mismatch");
    Curve c = estimate_wsff_curve(model, detail::grid_points(mu_grid), T_ladder, M_schedule, N, seed, opt);
    c.grid = mu_grid;
    return c;
}

// ---------------------------------------------------------------------------

/// Liminf/limsup proxies of (1/T) ln E_{T,N}(mu) for fixed ball radii.
struct DoubleLimitReport {
    std::vector<double> radii;
    std::vector<double> lower;  // min over the top half of the T ladder
    std::vector<double> upper;  // max over the top half of the T ladder
    double gap_at_largest = kInf;
    double common_value = kInf;
    bool agreement = false;
    double tolerance = 0.0;
};

inline DoubleLimitReport double_limit_check(const FamilyModel& model, const Vec& mu, const std::vector<double>& radii,
                                            const std::vector<double>& T_ladder, std::size_t N, std::uint64_t seed,
                                            double tol = 0.02, unsigned jobs = 1) {
    detail::check_ladder(radii, 3, "double_limit_check radii");
    detail::check_ladder(T_ladder, 3, "double_limit_check T");
    const std::size_t R = T_ladder.size();
    const std::function<double(std::size_t)> task = [&](std::size_t idx) {
        const std::size_t k = idx / R, r = idx % R;
        return estimate_trunc_log_mgf(model, mu, T_ladder[r], radii[k], N, derive_seed(seed, idx)).value;
    };
    const auto all = parallel_map<double>(radii.size() * R, jobs, task);
    DoubleLimitReport rep;
    rep.radii = radii;
    rep.tolerance = tol;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        double lo = kInf, hi = -kInf;
        for (std::size_t r = R / 2; r < R; ++r) {
            lo = std::min(lo, all[k * R + r]);
            hi = std::max(hi, all[k * R + r]);
        }
        rep.lower.push_back(lo);
        rep.upper.push_back(hi);
    }
    const double lo = rep.lower.back(), hi = rep.upper.back();
    rep.gap_at_largest = (std::isfinite(lo) && std::isfinite(hi)) ? hi - lo : (lo == hi ? 0.0 : kInf);
    rep.common_value = 0.5 * (lo + hi);
    if (lo == hi) rep.common_value = lo;
    rep.agreement = rep.gap_at_largest <= tol;
    return rep;
}

// ---------------------------------------------------------------------------

enum class TailVerdict { Decaying, NonDecaying };

inline std::string to_string(TailVerdict v) { return v == TailVerdict::Decaying ? "decaying" : "non-decaying"; }

struct TailMassReport {
    std::vector<double> thresholds;
    std::vector<LogEstimate> contributions;
    TailVerdict verdict = TailVerdict::Decaying;
};

/// (1/T) ln E(e^{T<mu,zeta_T>}; <mu,zeta_T> >= M) per threshold M.
inline TailMassReport tail_mass_diagnostic(const FamilyModel& model, const Vec& mu, const std::vector<double>& M_ladder,
                                           double T, std::size_t N, std::uint64_t seed) {
    detail::check_ladder(M_ladder, 1, "tail_mass_diagnostic");
    TailMassReport rep;
    rep.thresholds = M_ladder;
    for (std::size_t k = 0; k < M_ladder.size(); ++k) {
        const double thr = M_ladder[k];
        if (model.exact_log_upper_moment) {
            rep.contributions.push_back(LogEstimate::exact(model.exact_log_upper_moment(mu, thr, T) / T, static_cast<double>(N)));
            continue;
        }
        Stream s(derive_seed(seed, k));
        std::vector<double> logw(N, -kInf);
        for (std::size_t i = 0; i < N; ++i) {
            const Vec x = model.sampler(T, s);
            const double ip = dot(mu, x);
            if (ip >= thr) logw[i] = T * ip;
        }
        const WeightSummary w = summarize_log_weights(logw, N);
        LogEstimate e;
        e.provenance = Provenance::MonteCarlo;
        e.n_effective = w.n_effective;
        e.value = w.positive ? w.log_mean / T : -kInf;
        e.ci_half_width = w.positive ? 1.96 * w.relative_se / T : kInf;
        if (!w.positive) e.flags |= flag::undersampled;
        else if (w.n_effective < kEffectiveSampleFloor) e.flags |= flag::unreliable;
        rep.contributions.push_back(e);
    }
    const double first = rep.contributions.front().value;
    const double last = rep.contributions.back().value;
    if (is_pos_inf(last) || (!is_neg_inf(last) && !(last <= first - 1.0)))
        rep.verdict = TailVerdict::NonDecaying;
    return rep;
}

}  // namespace ldplab
