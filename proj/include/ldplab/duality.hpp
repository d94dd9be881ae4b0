#pragma once

// Cross-checks between rate functions and fundamental functions:
// A = L_D, D = L_A under essential smoothness, the minorant property of the
// biconjugate and agreement of truncated and untruncated moments.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ldplab/convex.hpp"
#include "ldplab/core.hpp"
#include "ldplab/estimate.hpp"
#include "ldplab/families.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/wsff.hpp"

namespace ldplab {

enum class DualityDirection { Forward, Converse, Minorant, FFAgreement };

inline std::string to_string(DualityDirection d) {
    switch (d) {
        case DualityDirection::Forward: return "forward";
        case DualityDirection::Converse: return "converse";
        case DualityDirection::Minorant: return "minorant";
        case DualityDirection::FFAgreement: return "ff-agreement";
    }
    return "?";
}

struct Witness {
    Vec point;
    double discrepancy = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct DualityReport {
    DualityDirection direction = DualityDirection::Forward;
    double sup_distance = 0.0;
    GridSpec window;
    bool pass = false;
    double tolerance = 0.0;
    std::vector<Witness> witnesses;  // largest discrepancy first, at most 5
    bool precondition_failed = false;
    bool diverging = false;
    std::optional<SmoothnessReport> smoothness;
    std::optional<GridFunction> transform;  // the computed conjugate / biconjugate
    std::vector<Vec> exposed;               // nodes where the transform is attained inside the window
    std::string note;
};

inline constexpr std::size_t kDefaultMargin = 3;
inline constexpr std::size_t kMaxWitnesses = 5;

namespace detail {

/// Window with `margin` cells trimmed from every side.
inline GridSpec trimmed_window(const GridSpec& g, std::size_t margin) {
    std::vector<Axis> axes;
    for (const auto& a : g.axes()) {
        if (a.count <= 2 * margin + 1) throw DomainError("comparison window is empty after the edge margin");
        axes.push_back(Axis{a.node(margin), a.node(a.count - 1 - margin), a.count - 2 * margin});
    }
    return GridSpec(axes);
}

class WitnessSet {
public:
    void add(const Vec& p, double d, double lhs, double rhs) {
        if (!(d > 0.0)) return;
        sup_ = std::max(sup_, d);
        items_.push_back({p, d, lhs, rhs});
        std::stable_sort(items_.begin(), items_.end(),
                         [](const Witness& a, const Witness& b) { return a.discrepancy > b.discrepancy; });
        if (items_.size() > kMaxWitnesses) items_.resize(kMaxWitnesses);
    }
    double sup() const { return sup_; }
    std::vector<Witness> take() { return std::move(items_); }

private:
    double sup_ = 0.0;
    std::vector<Witness> items_;
};

// Discrepancy of a computed transform value `lhs` against a reference
// `rhs`. A clipped transform is only a lower bound for the full-space
// transform, so only lhs > rhs counts there, and rhs = +inf is consistent.
inline double discrepancy(double lhs, double rhs, double slack, bool lhs_clipped) {
    if (lhs_clipped) {
        if (is_pos_inf(rhs)) return 0.0;
        return std::max(0.0, lhs - rhs - slack);
    }
    const bool fl = std::isfinite(lhs), fr = std::isfinite(rhs);
    if (fl && fr) return std::max(0.0, std::abs(lhs - rhs) - slack);
    if (!fl && !fr && lhs == rhs) return 0.0;
    return kInf;
}

inline void finish(DualityReport& r, WitnessSet& w) {
    r.sup_distance = w.sup();
    r.witnesses = w.take();
    r.pass = !r.precondition_failed && r.sup_distance <= r.tolerance;
}

}  // namespace detail

/// Compares A-hat (values plus CI per node on its grid) with L_D computed on
/// the same grid, inside the grid trimmed by `margin` cells.
inline DualityReport verify_forward(const GridFunction& D, const GridFunction& A_hat, const std::vector<double>& A_ci,
                                    double tol, std::size_t margin = kDefaultMargin) {
    DualityReport r;
    r.direction = DualityDirection::Forward;
    r.tolerance = tol;
    r.window = detail::trimmed_window(A_hat.spec(), margin);
    const ConjugateResult L = conjugate_detailed(D, A_hat.spec());
    detail::WitnessSet w;
    for (std::size_t i = 0; i < A_hat.size(); ++i) {
        if (A_hat.spec().edge_distance(i) < margin) continue;
        const double slack = A_ci.empty() ? 0.0 : A_ci[i];
        w.add(A_hat.spec().point(i), detail::discrepancy(L.value[i], A_hat[i], slack, L.clipped[i]), L.value[i], A_hat[i]);
    }
    r.transform = L.value;
    detail::finish(r, w);
    return r;
}

inline DualityReport verify_forward(const GridFunction& D, const Curve& A_curve, double tol,
                                    std::size_t margin = kDefaultMargin) {
    std::vector<double> ci;
    for (const auto& e : A_curve.estimates) ci.push_back(std::isfinite(e.ci_half_width) ? e.ci_half_width : 0.0);
    return verify_forward(D, A_curve.to_grid_function(), ci, tol, margin);
}

/// Compares L_{A-hat} with a rate function on D's grid. Requires A-hat to be
/// essentially smooth; otherwise the report carries precondition_failed and
/// the distance is informational only.
inline DualityReport verify_converse(const GridFunction& A_hat, double A_ci, const GridFunction& D, double tol,
                                     std::size_t margin = kDefaultMargin, const SmoothnessOptions& smooth = {}) {
    DualityReport r;
    r.direction = DualityDirection::Converse;
    r.tolerance = tol;
    r.window = detail::trimmed_window(D.spec(), margin);
    r.smoothness = check_essential_smoothness(A_hat, smooth);
    if (r.smoothness->verdict != SmoothnessVerdict::EssentiallySmooth) {
        r.precondition_failed = true;
        r.note = "A-hat is not essentially smooth (" + to_string(r.smoothness->verdict) + "); distance is informational";
    }
    const ConjugateResult L = conjugate_detailed(A_hat, D.spec());
    detail::WitnessSet w;
    for (std::size_t i = 0; i < D.size(); ++i) {
        if (D.spec().edge_distance(i) < margin) continue;
        const Vec p = D.spec().point(i);
        if (!L.clipped[i]) r.exposed.push_back(p);
        w.add(p, detail::discrepancy(L.value[i], D[i], A_ci, L.clipped[i]), L.value[i], D[i]);
    }
    r.transform = L.value;
    detail::finish(r, w);
    return r;
}

inline DualityReport verify_converse(const Curve& A_curve, const GridFunction& D, double tol,
                                     std::size_t margin = kDefaultMargin, const SmoothnessOptions& smooth = {}) {
    return verify_converse(A_curve.to_grid_function(), A_curve.max_ci(), D, tol, margin, smooth);
}

/// Checks that the biconjugate (through the dual grid) lies below D, is
/// convex, and equals D at the nodes that are exposed points of D's hull.
inline DualityReport minorant_check(const GridFunction& D, const GridSpec& dual, double tol) {
    DualityReport r;
    r.direction = DualityDirection::Minorant;
    r.tolerance = tol;
    r.window = D.spec();
    const ConjugateResult first = conjugate_detailed(D, dual);
    const GridFunction B = conjugate(first.value, D.spec());
    detail::WitnessSet w;
    std::vector<bool> exposed(D.size(), false);
    for (std::size_t j = 0; j < dual.size(); ++j)
        if (first.argmax[j] != kNoIndex && !first.clipped[j]) exposed[first.argmax[j]] = true;
    for (std::size_t i = 0; i < D.size(); ++i) {
        const Vec p = D.spec().point(i);
        if (!D.finite(i)) continue;
        if (exposed[i]) {
            r.exposed.push_back(p);
            w.add(p, std::abs(B[i] - D[i]), B[i], D[i]);
        } else {
            w.add(p, std::max(0.0, B[i] - D[i]), B[i], D[i]);
        }
    }
    // Convexity of the biconjugate along every grid line.
    double worst = 0.0;
    Vec worst_at;
    const GridSpec& g = B.spec();
    for (int axis = 0; axis < g.dimension(); ++axis) {
        detail::for_each_line(g, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
            for (std::size_t k = 1; k + 1 < n; ++k) {
                const double a = B[start + (k - 1) * stride], b = B[start + k * stride], c = B[start + (k + 1) * stride];
                const double second = a - 2.0 * b + c;
                const double scale = 1e-12 * (1.0 + std::abs(a) + std::abs(b) + std::abs(c));
                if (second < -scale && -second > worst) {
                    worst = -second;
                    worst_at = g.point(start + k * stride);
                }
            }
        });
    }
    if (worst > 0.0) {
        r.note = "biconjugate fails discrete convexity";
        w.add(worst_at, kInf, worst, 0.0);
    }
    r.transform = B;
    detail::finish(r, w);
    return r;
}

/// Compares truncated (M-scheduled) and untruncated (1/T) log-moments on a
/// mu window. An untruncated value that is +inf or flagged as diverging is
/// reported through `diverging`, not thrown.
inline DualityReport ff_wsff_agreement(const FamilyModel& model, const GridSpec& mu_window,
                                       const std::vector<double>& T_ladder, const ScheduleSpec& M_schedule,
                                       std::size_t N, std::uint64_t seed, double tol, unsigned jobs = 1) {
    DualityReport r;
    r.direction = DualityDirection::FFAgreement;
    r.tolerance = tol;
    r.window = mu_window;
    CurveOptions opt;
    opt.jobs = jobs;
    const Curve trunc = estimate_wsff_curve(model, mu_window, T_ladder, M_schedule, N, seed, opt);
    opt.untruncated = true;
    const Curve full = estimate_wsff_curve(model, mu_window, T_ladder, M_schedule, N, seed ^ 0x5bd1e995ULL, opt);
    detail::WitnessSet w;
    for (std::size_t i = 0; i < trunc.size(); ++i) {
        const LogEstimate& a = trunc.estimates[i];
        const LogEstimate& b = full.estimates[i];
        if (is_pos_inf(b.value) || b.has(flag::diverging)) r.diverging = true;
        const double slack = (std::isfinite(a.ci_half_width) ? a.ci_half_width : 0.0) +
                             (std::isfinite(b.ci_half_width) ? b.ci_half_width : 0.0);
        w.add(trunc.arguments[i], detail::discrepancy(a.value, b.value, slack, false), a.value, b.value);
    }
    if (r.diverging) r.note = "untruncated moment diverges on the window";
    detail::finish(r, w);
    if (r.diverging) r.pass = false;
    return r;
}

}  // namespace ldplab
