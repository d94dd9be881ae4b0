#pragma once

// Discrete convex analysis on uniform grids: Legendre-Fenchel transforms,
// biconjugates, effective domains and the essential-smoothness diagnostics.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldplab/core.hpp"
#include "ldplab/grid.hpp"

namespace ldplab {

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

namespace detail {

// Linear-time discrete Legendre transform in one dimension.
//
// Given primal nodes x[i] (ascending) with values f[i] (+inf allowed) and
// ascending dual slopes mu[j], writes out[j] = max_i (mu[j] x[i] - f[i]) and
// the maximizing primal index. The maximum over a finite point set is
// attained on the lower convex hull of the epigraph, and the maximizing
// vertex moves monotonically with mu, so one hull build plus a single scan
// suffices. If every f[i] is +inf the output is -inf with kNoIndex.
inline void legendre_1d(std::span<const double> x, std::span<const double> f, std::span<const double> mu,
                        std::span<double> out, std::span<std::size_t> arg) {
    std::vector<std::size_t> hull;
    hull.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(f[i])) continue;
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            // Drop b unless slope(a,b) < slope(b,i) strictly.
            const double lhs = (f[b] - f[a]) * (x[i] - x[b]);
            const double rhs = (f[i] - f[b]) * (x[b] - x[a]);
            if (lhs >= rhs)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    if (hull.empty()) {
        std::fill(out.begin(), out.end(), -kInf);
        std::fill(arg.begin(), arg.end(), kNoIndex);
        return;
    }
    std::size_t k = 0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        const double m = mu[j];
        double best = m * x[hull[k]] - f[hull[k]];
        while (k + 1 < hull.size()) {
            const double next = m * x[hull[k + 1]] - f[hull[k + 1]];
            if (next > best) {
                best = next;
                ++k;
            } else {
                break;
            }
        }
        out[j] = best;
        arg[j] = hull[k];
    }
}

inline std::vector<double> axis_nodes(const Axis& a) {
    std::vector<double> v(a.count);
    for (std::size_t i = 0; i < a.count; ++i) v[i] = a.node(i);
    return v;
}

// Raw transform; values may be -inf only when f has no finite node.
inline void conjugate_raw(const GridSpec& primal, std::span<const double> f, const GridSpec& dual,
                          std::vector<double>& out, std::vector<std::size_t>& arg) {
    out.assign(dual.size(), -kInf);
    arg.assign(dual.size(), kNoIndex);
    if (primal.dimension() == 1) {
        const auto x = axis_nodes(primal.axis(0));
        const auto mu = axis_nodes(dual.axis(0));
        legendre_1d(x, f, mu, out, arg);
        return;
    }
    // sup_{x0,x1} (mu0 x0 + mu1 x1 - f) = sup_{x0} (mu0 x0 + sup_{x1} (mu1 x1 - f(x0, .)))
    const auto x0 = axis_nodes(primal.axis(0));
    const auto x1 = axis_nodes(primal.axis(1));
    const auto m0 = axis_nodes(dual.axis(0));
    const auto m1 = axis_nodes(dual.axis(1));
    const std::size_t n0 = x0.size(), n1 = x1.size(), k0 = m0.size(), k1 = m1.size();

    std::vector<double> inner(n0 * k1);
    std::vector<std::size_t> inner_arg(n0 * k1);
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
        legendre_1d(x1, f.subspan(i0 * n1, n1), m1, std::span<double>(inner).subspan(i0 * k1, k1),
                    std::span<std::size_t>(inner_arg).subspan(i0 * k1, k1));
    }
    std::vector<double> column(n0), col_out(k0);
    std::vector<std::size_t> col_arg(k0);
    for (std::size_t j1 = 0; j1 < k1; ++j1) {
        for (std::size_t i0 = 0; i0 < n0; ++i0) {
            const double h = inner[i0 * k1 + j1];
            column[i0] = is_neg_inf(h) ? kInf : -h;
        }
        legendre_1d(x0, column, m0, col_out, col_arg);
        for (std::size_t j0 = 0; j0 < k0; ++j0) {
            const std::size_t flat = j0 * k1 + j1;
            out[flat] = col_out[j0];
            if (col_arg[j0] != kNoIndex) {
                const std::size_t i0 = col_arg[j0];
                arg[flat] = i0 * n1 + inner_arg[i0 * k1 + j1];
            }
        }
    }
}

}  // namespace detail

/// Conjugate together with, per dual node, the maximizing primal node and a
/// flag telling whether the supremum is only attained on the primal window
/// edge. A clipped value is a lower bound for the transform of the function
/// extended beyond the window (possibly +inf).
struct ConjugateResult {
    GridFunction value;
    std::vector<std::size_t> argmax;
    std::vector<bool> clipped;
};

inline void check_dims(const GridFunction& f, const GridSpec& dual) {
    if (f.spec().dimension() != dual.dimension()) throw DomainError("conjugate: dimension mismatch");
}

/// Legendre-Fenchel transform g(mu) = max_x (<mu, x> - f(x)) over the finite
/// nodes of f, evaluated on the dual grid.
inline ConjugateResult conjugate_detailed(const GridFunction& f, const GridSpec& dual) {
    check_dims(f, dual);
    std::vector<double> out;
    std::vector<std::size_t> arg;
    detail::conjugate_raw(f.spec(), f.values(), dual, out, arg);

    std::vector<double> interior(f.values());
    for (std::size_t i = 0; i < interior.size(); ++i)
        if (f.spec().on_window_edge(i)) interior[i] = kInf;
    std::vector<double> inner;
    std::vector<std::size_t> inner_arg;
    detail::conjugate_raw(f.spec(), interior, dual, inner, inner_arg);

    std::vector<bool> clipped(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double gap = out[j] - inner[j];
        clipped[j] = is_neg_inf(inner[j]) || gap > 1e-9 * (1.0 + std::abs(out[j]));
    }
    return ConjugateResult{GridFunction(dual, std::move(out)), std::move(arg), std::move(clipped)};
}

inline GridFunction conjugate(const GridFunction& f, const GridSpec& dual) {
    check_dims(f, dual);
    std::vector<double> out;
    std::vector<std::size_t> arg;
    detail::conjugate_raw(f.spec(), f.values(), dual, out, arg);
    return GridFunction(dual, std::move(out));
}

/// conjugate(conjugate(f, dual), f.spec()): the discrete closed convex
/// minorant of f.
inline GridFunction biconjugate(const GridFunction& f, const GridSpec& dual) {
    return conjugate(conjugate(f, dual), f.spec());
}

// ---------------------------------------------------------------------------

struct DomainBox {
    std::vector<double> lower;
    std::vector<double> upper;
    bool interior_nonempty = false;
};

/// Per-axis extent of the finite nodes; interior_nonempty when some node
/// away from the window edge has all axis neighbours finite.
inline DomainBox effective_domain(const GridFunction& f) {
    const GridSpec& g = f.spec();
    const int d = g.dimension();
    DomainBox box;
    box.lower.assign(static_cast<std::size_t>(d), kInf);
    box.upper.assign(static_cast<std::size_t>(d), -kInf);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f.finite(i)) continue;
        const Vec p = g.point(i);
        for (int k = 0; k < d; ++k) {
            box.lower[static_cast<std::size_t>(k)] = std::min(box.lower[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k)]);
            box.upper[static_cast<std::size_t>(k)] = std::max(box.upper[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(k)]);
        }
        if (box.interior_nonempty || g.on_window_edge(i)) continue;
        bool all = true;
        for (int k = 0; k < d && all; ++k) {
            const std::size_t s = g.stride(k);
            all = f.finite(i - s) && f.finite(i + s);
        }
        box.interior_nonempty = all;
    }
    return box;
}

// ---------------------------------------------------------------------------

enum class SmoothnessVerdict { EssentiallySmooth, KinkDetected, NotSteep, EmptyInterior };

inline std::string to_string(SmoothnessVerdict v) {
    switch (v) {
        case SmoothnessVerdict::EssentiallySmooth: return "essentially-smooth";
        case SmoothnessVerdict::KinkDetected: return "kink-detected";
        case SmoothnessVerdict::NotSteep: return "not-steep";
        case SmoothnessVerdict::EmptyInterior: return "empty-interior";
    }
    return "?";
}

struct BoundaryFace {
    int axis = 0;
    bool upper = false;
    /// Smallest last-segment slope magnitude over the grid lines whose domain
    /// ends inside the window on this face; nullopt if the domain reaches the
    /// window edge on every such line (treated as unbounded in that direction).
    std::optional<double> steepness;
};

struct SmoothnessReport {
    bool interior_nonempty = false;
    double max_subgradient_gap = 0.0;
    Vec kink_location;
    std::vector<BoundaryFace> boundary;
    SmoothnessVerdict verdict = SmoothnessVerdict::EmptyInterior;
    double gap_tol = 0.0;
    double steepness_threshold = 0.0;
};

struct SmoothnessOptions {
    std::optional<double> gap_tol;              // default 10 h
    std::optional<double> steepness_threshold;  // default 0.5 / h
    double convexity_tol = 1e-8;                // relative slack for the convexity pre-check
};

namespace detail {

// Calls fn(start_flat, stride, count) for every grid line along `axis`.
template <typename Fn>
void for_each_line(const GridSpec& g, int axis, Fn&& fn) {
    if (g.dimension() == 1) {
        fn(std::size_t{0}, std::size_t{1}, g.axis(0).count);
        return;
    }
    const int other = 1 - axis;
    for (std::size_t j = 0; j < g.axis(other).count; ++j) {
        const std::size_t start = axis == 0 ? g.flatten(0, j) : g.flatten(j, 0);
        fn(start, g.stride(axis), g.axis(axis).count);
    }
}

inline void require_convex(const GridFunction& f, double rel_tol) {
    const GridSpec& g = f.spec();
    double scale = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.finite(i)) scale = std::max(scale, std::abs(f[i]));
    const double tol = rel_tol * scale;
    for (int axis = 0; axis < g.dimension(); ++axis) {
        for_each_line(g, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
            std::size_t first = kNoIndex, last = kNoIndex;
            for (std::size_t k = 0; k < n; ++k) {
                if (!f.finite(start + k * stride)) continue;
                if (first == kNoIndex) first = k;
                last = k;
            }
            if (first == kNoIndex) return;
            for (std::size_t k = first; k <= last; ++k)
                if (!f.finite(start + k * stride)) throw DomainError("non-convex input: effective domain has a gap");
            for (std::size_t k = first + 1; k + 1 <= last; ++k) {
                const double second = f[start + (k - 1) * stride] - 2.0 * f[start + k * stride] + f[start + (k + 1) * stride];
                if (second < -tol) throw DomainError("non-convex input: negative second difference");
            }
        });
    }
}

}  // namespace detail

/// Finite-grid essential-smoothness check.
///
/// Differentiability: at every edge (j, j+1) with two finite nodes on each
/// side, the slope jump across it, s[j+1] - s[j-1], minus the jumps one cell
/// further out, s[j-1] - s[j-2] and s[j+2] - s[j+1]. Curvature that is
/// resolved by the grid cancels (to O(h^3 f'''')); a derivative jump does not.
/// Steepness: last-segment slope on every face where the domain stops inside
/// the window. Faces where the domain reaches the window edge carry no
/// steepness requirement.
inline SmoothnessReport check_essential_smoothness(const GridFunction& f, const SmoothnessOptions& opt = {}) {
    detail::require_convex(f, opt.convexity_tol);
    const GridSpec& g = f.spec();
    SmoothnessReport r;
    r.gap_tol = opt.gap_tol.value_or(10.0 * g.spacing());
    r.steepness_threshold = opt.steepness_threshold.value_or(0.5 / g.spacing());
    r.interior_nonempty = effective_domain(f).interior_nonempty;

    for (int axis = 0; axis < g.dimension(); ++axis) {
        const double h = g.axis(axis).spacing();
        BoundaryFace lo{axis, false, std::nullopt}, hi{axis, true, std::nullopt};
        detail::for_each_line(g, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
            auto val = [&](std::size_t k) { return f[start + k * stride]; };
            auto fin = [&](std::size_t k) { return f.finite(start + k * stride); };
            std::size_t first = kNoIndex, last = kNoIndex;
            for (std::size_t k = 0; k < n; ++k) {
                if (!fin(k)) continue;
                if (first == kNoIndex) first = k;
                last = k;
            }
            if (first == kNoIndex) return;
            std::vector<double> s;
            for (std::size_t k = first; k < last; ++k) s.push_back((val(k + 1) - val(k)) / h);
            // s[m] spans nodes first+m, first+m+1.
            for (std::size_t m = 2; m + 2 < s.size(); ++m) {
                const double pair = s[m + 1] - s[m - 1];
                const double background = (s[m - 1] - s[m - 2]) + (s[m + 2] - s[m + 1]);
                const double gap = pair - background;
                if (gap > r.max_subgradient_gap) {
                    r.max_subgradient_gap = gap;
                    Vec p = g.point(start + (first + m) * stride);
                    p[static_cast<std::size_t>(axis)] += 0.5 * h;
                    r.kink_location = p;
                }
            }
            auto face_update = [](BoundaryFace& face, double value) {
                face.steepness = face.steepness ? std::min(*face.steepness, value) : value;
            };
            if (first > 0) face_update(lo, s.empty() ? 0.0 : std::abs(s.front()));
            if (last + 1 < n) face_update(hi, s.empty() ? 0.0 : std::abs(s.back()));
        });
        r.boundary.push_back(lo);
        r.boundary.push_back(hi);
    }

    if (!r.interior_nonempty) {
        r.verdict = SmoothnessVerdict::EmptyInterior;
    } else if (r.max_subgradient_gap > r.gap_tol) {
        r.verdict = SmoothnessVerdict::KinkDetected;
    } else {
        r.verdict = SmoothnessVerdict::EssentiallySmooth;
        for (const auto& face : r.boundary)
            if (face.steepness && *face.steepness < r.steepness_threshold) r.verdict = SmoothnessVerdict::NotSteep;
    }
    return r;
}

// ---------------------------------------------------------------------------

/// Sublevel-set test with the window it was evaluated on. On a finite grid
/// "compact" means: nonempty and not touching the window edge.
struct SublevelReport {
    bool compact = false;
    bool nonempty = false;
    bool touches_window = false;
    GridSpec window;
};

inline SublevelReport sublevel_compact(const GridFunction& f, double v) {
    if (!(v > 0.0)) throw DomainError("sublevel_compact: level must be positive");
    SublevelReport r{false, false, false, f.spec()};
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] <= v)) continue;
        r.nonempty = true;
        if (f.spec().on_window_edge(i)) r.touches_window = true;
    }
    r.compact = r.nonempty && !r.touches_window;
    return r;
}

// ---------------------------------------------------------------------------

/// Central-difference gradient at an arbitrary point, multilinearly
/// interpolated from the surrounding nodes. Exact for quadratics.
inline Vec numeric_gradient(const GridFunction& f, const Vec& point) {
    const GridSpec& g = f.spec();
    const int d = g.dimension();
    if (static_cast<int>(point.size()) != d) throw DomainError("numeric_gradient: dimension mismatch");
    if (!g.contains(point)) throw DomainError("numeric_gradient: point outside the grid window");

    std::array<std::size_t, 2> base{0, 0};
    std::array<double, 2> frac{0.0, 0.0};
    for (int k = 0; k < d; ++k) {
        const Axis& a = g.axis(k);
        const double t = (point[static_cast<std::size_t>(k)] - a.lower) / a.spacing();
        auto i = static_cast<std::size_t>(std::floor(t));
        if (i >= a.count - 1) i = a.count - 1;
        double fr = t - static_cast<double>(i);
        if (std::abs(fr) < 1e-9) fr = 0.0;
        if (std::abs(fr - 1.0) < 1e-9) {
            ++i;
            fr = 0.0;
        }
        base[static_cast<std::size_t>(k)] = i;
        frac[static_cast<std::size_t>(k)] = fr;
    }

    auto central = [&](std::size_t i0, std::size_t i1) {
        Vec grad(static_cast<std::size_t>(d));
        const std::array<std::size_t, 2> idx{i0, i1};
        for (int k = 0; k < d; ++k) {
            const std::size_t ik = idx[static_cast<std::size_t>(k)];
            if (ik == 0 || ik + 1 >= g.axis(k).count)
                throw DomainError("numeric_gradient: point too close to the window edge");
            const std::size_t flat = g.flatten(i0, i1);
            const std::size_t s = g.stride(k);
            if (!f.finite(flat) || !f.finite(flat - s) || !f.finite(flat + s))
                throw DomainError("numeric_gradient: point outside the domain or adjacent to +inf");
            grad[static_cast<std::size_t>(k)] = (f[flat + s] - f[flat - s]) / (2.0 * g.axis(k).spacing());
        }
        return grad;
    };

    Vec out(static_cast<std::size_t>(d), 0.0);
    const std::size_t c0 = frac[0] > 0.0 ? 2 : 1;
    const std::size_t c1 = (d == 2 && frac[1] > 0.0) ? 2 : 1;
    for (std::size_t a = 0; a < c0; ++a) {
        for (std::size_t b = 0; b < c1; ++b) {
            const double w = (a ? frac[0] : 1.0 - frac[0]) * (d == 2 ? (b ? frac[1] : 1.0 - frac[1]) : 1.0);
            const Vec gr = central(base[0] + a, d == 2 ? base[1] + b : 0);
            for (int k = 0; k < d; ++k) out[static_cast<std::size_t>(k)] += w * gr[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

}  // namespace ldplab
