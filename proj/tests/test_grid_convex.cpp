#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ldplab/convex.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/random.hpp"

using namespace ldplab;

namespace {

// O(n m) reference transform.
std::vector<double> brute_conjugate(const GridFunction& f, const GridSpec& dual) {
    std::vector<double> out(dual.size(), -kInf);
    for (std::size_t j = 0; j < dual.size(); ++j) {
        const Vec mu = dual.point(j);
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f.finite(i)) out[j] = std::max(out[j], dot(mu, f.spec().point(i)) - f[i]);
    }
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

GridFunction two_atom_D() {
    const GridSpec g = GridSpec::line(-1.0, 3.0, 4001);
    return GridFunction::sample(g, [](const Vec& a) {
        if (a[0] == 0.0) return 0.0;
        if (a[0] == 1.0) return kLn2;
        return kInf;
    });
}

GridFunction L_shaped_D(std::size_t n) {
    const GridSpec g = GridSpec::square(-0.5, 1.5, n);
    return GridFunction::sample(g, [](const Vec& a) {
        const double tol = 1e-12;
        if (std::abs(a[1]) < tol && a[0] >= -tol && a[0] <= 1.0 + tol) return a[0] * kLn2;
        if (std::abs(a[0]) < tol && a[1] >= -tol && a[1] <= 1.0 + tol) return a[1] * kLn2;
        return kInf;
    });
}

double hinge2(const Vec& m) { return std::max(0.0, std::max(m[0], m[1]) - kLn2); }

// Dyadic random piecewise-linear input on a dyadic grid: every product and
// difference in the transform is exact in double precision.
GridFunction dyadic_pl(Stream& s, const GridSpec& g, bool allow_inf) {
    std::vector<double> v(g.size());
    for (auto& x : v) {
        x = static_cast<double>(static_cast<int>(s.bits() % 129) - 64) / 8.0;
        if (allow_inf && s.uniform() < 0.2) x = kInf;
    }
    v[s.bits() % v.size()] = 0.0;
    return GridFunction(g, v);
}

// Random convex piecewise-linear function whose domain sits inside the window.
GridFunction random_convex(Stream& s, const GridSpec& g, std::size_t lo, std::size_t hi) {
    const std::size_t n = g.axis(0).count;
    const double h = g.axis(0).spacing();
    std::vector<double> slopes(hi - lo);
    for (auto& x : slopes) x = 6.0 * s.uniform() - 3.0;
    std::sort(slopes.begin(), slopes.end());
    std::vector<double> v(n, kInf);
    v[lo] = 4.0 * s.uniform() - 2.0;
    for (std::size_t k = lo + 1; k <= hi; ++k) v[k] = v[k - 1] + h * slopes[k - lo - 1];
    return GridFunction(g, v);
}

}  // namespace

// --- grid plumbing ---------------------------------------------------------

TEST(Grid, SpecInvariants) {
    EXPECT_THROW(GridSpec::line(1.0, 1.0, 5), DomainError);
    EXPECT_THROW(GridSpec::line(0.0, 1.0, 1), DomainError);
    EXPECT_THROW(GridSpec(std::vector<Axis>{}), DomainError);
    EXPECT_THROW(GridSpec({Axis{}, Axis{}, Axis{}}), DomainError);
    const GridSpec g = GridSpec::rect(Axis{-1, 1, 5}, Axis{0, 3, 4});
    EXPECT_EQ(g.size(), 20u);
    EXPECT_DOUBLE_EQ(g.spacing(), 1.0);
    EXPECT_EQ(g.flatten(2, 3), 11u);
    EXPECT_EQ(g.point(11), (Vec{0.0, 3.0}));
    EXPECT_TRUE(g.on_window_edge(11));
    EXPECT_FALSE(g.on_window_edge(g.flatten(2, 1)));
    EXPECT_EQ(g.edge_distance(g.flatten(2, 1)), 1u);
}

TEST(Grid, FunctionInvariants) {
    const GridSpec g = GridSpec::line(0, 1, 3);
    EXPECT_THROW(GridFunction(g, {0, 1}), DomainError);
    EXPECT_THROW(GridFunction(g, {kInf, kInf, kInf}), DomainError);
    EXPECT_THROW(GridFunction(g, {0, -kInf, 1}), DomainError);
    EXPECT_THROW(GridFunction(g, {0, std::nan(""), 1}), DomainError);
    const GridFunction f(g, {kInf, 2.0, kInf});
    EXPECT_EQ(f.finite_count(), 1u);
}

TEST(Grid, CsvRoundTrip1D) {
    const GridFunction f(GridSpec::line(-1, 1, 5), {kInf, 0.25, 1.0 / 3.0, -2.5e-300, kInf});
    std::stringstream ss;
    write_csv(ss, f);
    EXPECT_EQ(ss.str().substr(0, 12), "axis0,value\n");
    const GridFunction g = read_csv(ss);
    EXPECT_EQ(g.spec(), f.spec());
    EXPECT_EQ(g.values(), f.values());
}

TEST(Grid, CsvRoundTrip2D) {
    Stream s(3);
    const GridSpec spec = GridSpec::rect(Axis{-1, 2, 7}, Axis{0.1, 0.7, 4});
    std::vector<double> v(spec.size());
    for (auto& x : v) x = s.uniform() < 0.3 ? kInf : s.normal();
    v[0] = 1.0;
    const GridFunction f(spec, v);
    std::stringstream ss;
    write_csv(ss, f);
    const GridFunction g = read_csv(ss);
    EXPECT_EQ(g.spec().dimension(), 2);
    EXPECT_EQ(g.values(), f.values());
}

TEST(Grid, CsvErrors) {
    std::stringstream bad_header("x,value\n0,1\n1,2\n");
    EXPECT_THROW(read_csv(bad_header), DomainError);
    std::stringstream uneven("axis0,value\n0,1\n1,2\n3,4\n");
    EXPECT_THROW(read_csv(uneven), DomainError);
    std::stringstream junk("axis0,value\n0,1\n1,abc\n");
    EXPECT_THROW(read_csv(junk), DomainError);
    std::stringstream empty("");
    EXPECT_THROW(read_csv(empty), DomainError);
}

// --- conjugate -------------------------------------------------------------

TEST(Conjugate, TwoAtomGoldenExact) {
    const GridFunction D = two_atom_D();
    const GridFunction g = conjugate(D, D.spec());
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(g[j] - std::max(0.0, g.spec().point(j)[0] - kLn2)));
    EXPECT_LE(err, 1e-12);
}

TEST(Conjugate, QuadraticSelfDual) {
    const GridSpec p = GridSpec::line(-10, 10, 2001);
    const double h = p.spacing();
    const GridFunction f = GridFunction::sample(p, [](const Vec& x) { return 0.5 * x[0] * x[0]; });
    const GridFunction g = conjugate(f, GridSpec::line(-3, 3, 601));
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double mu = g.spec().point(j)[0];
        err = std::max(err, std::abs(g[j] - 0.5 * mu * mu));
    }
    EXPECT_LE(err, 0.5 * h * h + 3.0 * h);
}

TEST(Conjugate, LShapedGolden2D) {
    const GridFunction D = L_shaped_D(81);
    const GridSpec dual = GridSpec::square(-1, 2, 61);
    const GridFunction g = conjugate(D, dual);
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(g[j] - hinge2(dual.point(j))));
    EXPECT_LE(err, 2.0 * D.spec().spacing());
}

TEST(Conjugate, Errors) {
    const GridFunction f(GridSpec::line(0, 1, 3), {0, 0, 0});
    EXPECT_THROW(conjugate(f, GridSpec::square(0, 1, 3)), DomainError);
}

TEST(Conjugate, MatchesBruteForce1D) {
    Stream s(101);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + s.bits() % 200;
        const GridSpec p = GridSpec::line(-2.0 - s.uniform(), 1.0 + 3.0 * s.uniform(), n);
        std::vector<double> v(n);
        for (auto& x : v) x = s.uniform() < 0.3 ? kInf : 3.0 * s.normal();
        v[s.bits() % n] = s.normal();
        const GridFunction f(p, v);
        const GridSpec d = GridSpec::line(-5.0 * s.uniform() - 0.1, 5.0 * s.uniform() + 0.1, 2 + s.bits() % 150);
        EXPECT_LE(max_abs_diff(conjugate(f, d).values(), brute_conjugate(f, d)), 1e-11) << "trial " << trial;
    }
}

TEST(Conjugate, MatchesBruteForce2D) {
    Stream s(202);
    for (int trial = 0; trial < 20; ++trial) {
        const GridSpec p = GridSpec::rect(Axis{-1.0, 1.0 + s.uniform(), 2 + s.bits() % 15},
                                          Axis{-2.0 * s.uniform() - 0.1, 1.0, 2 + s.bits() % 15});
        std::vector<double> v(p.size());
        for (auto& x : v) x = s.uniform() < 0.4 ? kInf : 2.0 * s.normal();
        v[s.bits() % v.size()] = 0.0;
        const GridFunction f(p, v);
        const GridSpec d = GridSpec::rect(Axis{-3, 2, 2 + s.bits() % 12}, Axis{-1, 4, 2 + s.bits() % 12});
        EXPECT_LE(max_abs_diff(conjugate(f, d).values(), brute_conjugate(f, d)), 1e-11) << "trial " << trial;
    }
}

TEST(Conjugate, ArgmaxAndClipping) {
    const GridFunction f = GridFunction::sample(GridSpec::line(-2, 2, 41), [](const Vec& x) { return 0.5 * x[0] * x[0]; });
    const ConjugateResult r = conjugate_detailed(f, GridSpec::line(-4, 4, 9));
    // Slopes |mu| > 2 exceed the window: maximiser on the edge, value clipped.
    EXPECT_TRUE(r.clipped[0]);
    EXPECT_TRUE(r.clipped[8]);
    EXPECT_FALSE(r.clipped[4]);
    EXPECT_EQ(r.argmax[4], 20u);
    EXPECT_EQ(r.argmax[0], 0u);
    EXPECT_EQ(r.argmax[8], 40u);
}

// --- properties --------------------------------------------------------------

TEST(ConjugateProperty, ConvexAndMonotoneExact) {
    Stream s(8);
    const GridSpec p = GridSpec::line(-4, 4, 33);
    const GridSpec d = GridSpec::line(-2, 2, 17);
    for (int trial = 0; trial < 200; ++trial) {
        const GridFunction f = dyadic_pl(s, p, true);
        const GridFunction g = conjugate(f, d);
        for (std::size_t j = 1; j + 1 < g.size(); ++j) ASSERT_GE(g[j - 1] + g[j + 1] - 2.0 * g[j], 0.0) << trial;
        std::vector<double> bigger(f.values());
        for (auto& x : bigger)
            if (std::isfinite(x)) x += static_cast<double>(s.bits() % 9) / 4.0;
        const GridFunction gb = conjugate(GridFunction(p, bigger), d);
        for (std::size_t j = 0; j < g.size(); ++j) ASSERT_LE(gb[j], g[j]) << trial;
        EXPECT_EQ(g.values(), brute_conjugate(f, d)) << trial;
    }
}

TEST(ConjugateProperty, ConvexAndMonotoneExact2D) {
    Stream s(9);
    const GridSpec p = GridSpec::square(-2, 2, 9);
    const GridSpec d = GridSpec::square(-1, 1, 9);
    for (int trial = 0; trial < 50; ++trial) {
        const GridFunction f = dyadic_pl(s, p, true);
        const GridFunction g = conjugate(f, d);
        for (int axis = 0; axis < 2; ++axis)
            detail::for_each_line(d, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
                for (std::size_t k = 1; k + 1 < n; ++k)
                    ASSERT_GE(g[start + (k - 1) * stride] + g[start + (k + 1) * stride] - 2.0 * g[start + k * stride], 0.0);
            });
        EXPECT_EQ(g.values(), brute_conjugate(f, d));
    }
}

TEST(ConjugateProperty, InvolutionOnConvexInputs) {
    Stream s(10);
    const GridSpec p = GridSpec::line(-3, 3, 241);
    const GridSpec d = GridSpec::line(-4, 4, 321);
    const double h = std::max(p.spacing(), d.spacing());
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t lo = 5 + s.bits() % 60, hi = 180 + s.bits() % 55;
        const GridFunction f = random_convex(s, p, lo, hi);
        const GridFunction b = biconjugate(f, d);
        // Domain width (<= 6) times the dual spacing bounds the chord error.
        double err = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!f.finite(i)) continue;
            err = std::max(err, std::abs(b[i] - f[i]));
        }
        EXPECT_LE(err, 6.0 * h) << trial;
    }
}

TEST(ConjugateProperty, MinorantOnArbitraryInputs) {
    Stream s(12);
    const GridSpec p = GridSpec::line(-2, 2, 81);
    const GridSpec d = GridSpec::line(-6, 6, 241);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(p.size());
        for (auto& x : v) x = s.uniform() < 0.25 ? kInf : std::abs(2.0 * s.normal());
        v[40] = 0.0;
        const GridFunction f(p, v);
        const GridFunction b = biconjugate(f, d);
        const ConjugateResult c = conjugate_detailed(f, d);
        double L = 0.0;
        for (std::size_t j = 1; j < c.value.size(); ++j) L = std::max(L, std::abs(c.value[j] - c.value[j - 1]) / d.spacing());
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f.finite(i)) {
                ASSERT_LE(b[i], f[i] + 2.0 * p.spacing() * L + 1e-12) << trial;
            }
    }
}

TEST(ConjugateProperty, TiltConsistencyOnQuadratics) {
    Stream s(13);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = 0.5 + 2.0 * s.uniform(), b = s.normal();
        const GridSpec p = GridSpec::line(-6, 6, 1201);
        const GridFunction f = GridFunction::sample(p, [&](const Vec& x) { return 0.5 * a * x[0] * x[0] + b * x[0]; });
        const GridSpec d = GridSpec::line(-3, 3, 601);
        const ConjugateResult c = conjugate_detailed(f, d);
        for (double mu : {-1.5, -0.2, 0.7, 2.0}) {
            const std::size_t j = static_cast<std::size_t>(std::lround((mu + 3.0) / d.spacing()));
            const double primal = p.point(c.argmax[j])[0];
            const double grad = numeric_gradient(c.value, d.point(j))[0];
            EXPECT_NEAR(grad, primal, 2.0 * std::max(p.spacing(), d.spacing()));
            EXPECT_NEAR(primal, (d.point(j)[0] - b) / a, p.spacing());
        }
    }
}

// --- biconjugate -------------------------------------------------------------

TEST(Biconjugate, TwoAtomHull) {
    const GridFunction D = two_atom_D();
    const GridFunction b = biconjugate(D, GridSpec::line(-1, 3, 4001));
    const double h = D.spec().spacing();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double a = D.spec().point(i)[0];
        if (a >= 0.0 && a <= 1.0) {
            ASSERT_NEAR(b[i], a * kLn2, 2.0 * h) << a;
        }
        if (a < -0.5 || a > 1.5) {
            ASSERT_GT(b[i], 0.4);
        }
    }
}

TEST(Biconjugate, QuadraticFixedPoint) {
    const GridSpec p = GridSpec::line(-2, 2, 401);
    const GridFunction f = GridFunction::sample(p, [](const Vec& x) { return 0.5 * x[0] * x[0]; });
    const GridFunction b = biconjugate(f, GridSpec::line(-3, 3, 601));
    EXPECT_LE(max_abs_diff(b.values(), f.values()), 2.0 * p.spacing());
}

TEST(Biconjugate, LShapedSimplex) {
    const GridFunction D = L_shaped_D(81);
    const GridFunction b = biconjugate(D, GridSpec::square(-1, 2, 301));
    const double h = D.spec().spacing();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Vec a = D.spec().point(i);
        if (a[0] >= -1e-12 && a[1] >= -1e-12 && a[0] + a[1] <= 1.0 + 1e-12) {
            ASSERT_NEAR(b[i], (a[0] + a[1]) * kLn2, 2.0 * h);
        }
    }
}

// --- domain, smoothness, sublevel, gradient ----------------------------------

TEST(EffectiveDomain, Examples) {
    const GridSpec g = GridSpec::line(-3, 3, 61);
    const DomainBox hinge = effective_domain(GridFunction::sample(g, [](const Vec& m) { return std::max(0.0, m[0] - kLn2); }));
    EXPECT_EQ(hinge.lower[0], -3.0);
    EXPECT_EQ(hinge.upper[0], 3.0);
    EXPECT_TRUE(hinge.interior_nonempty);

    const DomainBox atom = effective_domain(GridFunction::sample(g, [](const Vec& m) { return std::abs(m[0] - 1.0) < 1e-9 ? 0.0 : kInf; }));
    EXPECT_NEAR(atom.lower[0], 1.0, 1e-12);
    EXPECT_NEAR(atom.upper[0], 1.0, 1e-12);
    EXPECT_FALSE(atom.interior_nonempty);

    const GridFunction barrier = GridFunction::sample(g, [](const Vec& m) { return m[0] < 1.0 - 1e-12 ? -std::log(1.0 - m[0]) : kInf; });
    const DomainBox b = effective_domain(barrier);
    EXPECT_EQ(b.lower[0], -3.0);
    EXPECT_NEAR(b.upper[0], 0.9, 1e-12);
}

TEST(Smoothness, HingeKinkAtLn2) {
    const GridSpec g = GridSpec::line(-2, 3, 501);
    const SmoothnessReport r = check_essential_smoothness(GridFunction::sample(g, [](const Vec& m) { return std::max(0.0, m[0] - kLn2); }));
    EXPECT_EQ(r.verdict, SmoothnessVerdict::KinkDetected);
    EXPECT_NEAR(r.max_subgradient_gap, 1.0, 1e-9);
    ASSERT_EQ(r.kink_location.size(), 1u);
    EXPECT_NEAR(r.kink_location[0], kLn2, g.spacing());
}

TEST(Smoothness, QuadraticIsSmooth) {
    const SmoothnessReport r =
        check_essential_smoothness(GridFunction::sample(GridSpec::line(-5, 5, 501), [](const Vec& m) { return 0.5 * m[0] * m[0]; }));
    EXPECT_EQ(r.verdict, SmoothnessVerdict::EssentiallySmooth);
    EXPECT_LT(r.max_subgradient_gap, 1e-9);
    for (const auto& face : r.boundary) EXPECT_FALSE(face.steepness.has_value());
}

TEST(Smoothness, BarrierIsSteep) {
    const GridSpec g = GridSpec::line(-3, 1.5, 451);
    const GridFunction f = GridFunction::sample(g, [](const Vec& m) { return m[0] < 1.0 - 1e-12 ? -std::log(1.0 - m[0]) : kInf; });
    const SmoothnessReport r = check_essential_smoothness(f);
    EXPECT_EQ(r.verdict, SmoothnessVerdict::EssentiallySmooth);
    bool saw_face = false;
    for (const auto& face : r.boundary)
        if (face.upper && face.steepness) {
            saw_face = true;
            EXPECT_GT(*face.steepness, r.steepness_threshold);
        }
    EXPECT_TRUE(saw_face);
}

TEST(Smoothness, BoundedSlopeAtFiniteBoundaryIsNotSteep) {
    const GridSpec g = GridSpec::line(-2, 2, 201);
    const GridFunction f = GridFunction::sample(g, [](const Vec& m) { return m[0] <= 1.0 + 1e-12 ? 0.5 * m[0] * m[0] : kInf; });
    EXPECT_EQ(check_essential_smoothness(f).verdict, SmoothnessVerdict::NotSteep);
}

TEST(Smoothness, EmptyInteriorAndNonConvex) {
    const GridSpec g = GridSpec::line(-1, 3, 41);
    const GridFunction atoms = GridFunction::sample(g, [](const Vec& m) { return std::abs(m[0]) < 1e-9 ? 0.0 : kInf; });
    EXPECT_EQ(check_essential_smoothness(atoms).verdict, SmoothnessVerdict::EmptyInterior);
    const GridFunction wave = GridFunction::sample(g, [](const Vec& m) { return std::sin(3.0 * m[0]); });
    EXPECT_THROW(check_essential_smoothness(wave), DomainError);
    const GridFunction gap(GridSpec::line(0, 1, 5), {0, kInf, 0, 1, 2});
    EXPECT_THROW(check_essential_smoothness(gap), DomainError);
}

TEST(Smoothness, TwoDimensionalKink) {
    const GridFunction f = GridFunction::sample(GridSpec::square(-1, 2, 61), hinge2);
    EXPECT_EQ(check_essential_smoothness(f).verdict, SmoothnessVerdict::KinkDetected);
    const GridFunction q = GridFunction::sample(GridSpec::square(-1, 2, 61), [](const Vec& m) { return m[0] * m[0] + 0.5 * m[1] * m[1]; });
    EXPECT_EQ(check_essential_smoothness(q).verdict, SmoothnessVerdict::EssentiallySmooth);
}

TEST(Sublevel, Examples) {
    const GridFunction quad = GridFunction::sample(GridSpec::line(-10, 10, 201), [](const Vec& a) { return 0.5 * a[0] * a[0]; });
    const SublevelReport q = sublevel_compact(quad, 2.0);
    EXPECT_TRUE(q.compact);
    EXPECT_EQ(q.window, quad.spec());
    const GridFunction atom =
        GridFunction::sample(GridSpec::line(-1, 3, 41), [](const Vec& a) { return std::abs(a[0] - 1.0) < 1e-9 ? kLn2 : kInf; });
    EXPECT_TRUE(sublevel_compact(atom, 1.0).compact);
    const GridFunction flat(GridSpec::line(0, 1, 5), {0, 0, 0, 0, 0});
    const SublevelReport z = sublevel_compact(flat, 0.5);
    EXPECT_FALSE(z.compact);
    EXPECT_TRUE(z.touches_window);
    EXPECT_THROW(sublevel_compact(flat, 0.0), DomainError);
}

TEST(NumericGradient, Examples) {
    const GridSpec g = GridSpec::line(-3, 3, 601);
    const double h = g.spacing();
    const GridFunction q = GridFunction::sample(g, [](const Vec& m) { return 0.5 * m[0] * m[0]; });
    EXPECT_NEAR(numeric_gradient(q, {1.0})[0], 1.0, h * h);
    EXPECT_NEAR(numeric_gradient(q, {0.1234})[0], 0.1234, h * h);
    const GridFunction hinge = GridFunction::sample(g, [](const Vec& m) { return std::max(0.0, m[0] - kLn2); });
    EXPECT_NEAR(numeric_gradient(hinge, {2.0})[0], 1.0, h);
    const GridSpec g2 = GridSpec::square(-1, 2, 301);
    const Vec grad = numeric_gradient(GridFunction::sample(g2, hinge2), {1.5, 0.0});
    EXPECT_NEAR(grad[0], 1.0, g2.spacing());
    EXPECT_NEAR(grad[1], 0.0, g2.spacing());
    EXPECT_THROW(numeric_gradient(q, {5.0}), DomainError);
    const GridFunction barrier = GridFunction::sample(g, [](const Vec& m) { return m[0] < 1.0 - 1e-12 ? -std::log(1.0 - m[0]) : kInf; });
    EXPECT_THROW(numeric_gradient(barrier, {0.995}), DomainError);
}
