#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ldplab/convex.hpp"
#include "ldplab/duality.hpp"
#include "ldplab/families.hpp"
#include "ldplab/lldp.hpp"
#include "ldplab/wsff.hpp"

using namespace ldplab;

namespace {

const ScheduleSpec kM = ScheduleSpec::power(1.0 / 3.0);

GridFunction vanishing_rate(const GridSpec& g) {
    return GridFunction::sample(g, [](const Vec& a) {
        if (a[0] == 0.0) return 0.0;
        if (a[0] == 1.0) return kLn2;
        return kInf;
    });
}

GridFunction occupation_rate(const GridSpec& g) {
    return GridFunction::sample(g, [](const Vec& a) {
        if (a[1] == 0.0 && a[0] >= 0.0 && a[0] <= 1.0) return a[0] * kLn2;
        if (a[0] == 0.0 && a[1] >= 0.0 && a[1] <= 1.0) return a[1] * kLn2;
        return kInf;
    });
}

GridFunction reference_rate_on(const FamilyModel& m, const GridSpec& g) {
    return GridFunction::sample(g, [&](const Vec& a) { return m.reference_rate(a); });
}

Curve exact_curve(const FamilyModel& m, const GridSpec& g, const std::vector<double>& T) {
    return estimate_wsff_curve(m, g, T, kM, 0, 0);
}

}  // namespace

TEST(Forward, VanishingAtomHinge) {
    const auto m = make_family("two-atom-vanishing");
    const auto c = exact_curve(m, GridSpec::line(-1.0, 2.0, 301), {50.0, 100.0, 200.0});
    const auto r = verify_forward(vanishing_rate(GridSpec::line(-1.0, 3.0, 401)), c, 0.02);
    EXPECT_TRUE(r.pass) << r.sup_distance;
    EXPECT_LE(r.sup_distance, 0.02);
    EXPECT_EQ(r.direction, DualityDirection::Forward);
    ASSERT_TRUE(r.transform.has_value());
    EXPECT_NEAR((*r.transform)[200], std::max(0.0, 1.0 - kLn2), 1e-12);
}

TEST(Forward, OccupationSurface) {
    const auto m = make_family("markov-occupation");
    const auto c = exact_curve(m, GridSpec::square(-1.0, 1.5, 51), {100.0, 300.0, 500.0});
    const auto r = verify_forward(occupation_rate(GridSpec::square(-0.5, 1.5, 81)), c, 0.02);
    EXPECT_TRUE(r.pass) << r.sup_distance;
}

TEST(Forward, QuadraticPair) {
    const GridSpec mu = GridSpec::line(-2.0, 2.0, 201);
    const GridSpec al = GridSpec::line(-3.0, 3.0, 301);
    const GridFunction D = GridFunction::sample(al, [](const Vec& a) { return 0.5 * a[0] * a[0]; });
    const GridFunction A = GridFunction::sample(mu, [](const Vec& x) { return 0.5 * x[0] * x[0]; });
    const auto r = verify_forward(D, A, {}, 2.0 * al.spacing());
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.sup_distance, 2.0 * al.spacing());
    EXPECT_LE(r.witnesses.size(), kMaxWitnesses);
    for (std::size_t k = 1; k < r.witnesses.size(); ++k)
        EXPECT_GE(r.witnesses[k - 1].discrepancy, r.witnesses[k].discrepancy);
}

TEST(Forward, OneSidedFiniteIsInfiniteDiscrepancy) {
    const GridSpec g = GridSpec::line(-1.0, 1.0, 21);
    const GridFunction D = GridFunction::sample(g, [](const Vec& a) { return 0.5 * a[0] * a[0]; });
    const GridFunction A = GridFunction::sample(g, [](const Vec& x) { return x[0] > 0.5 ? kInf : 0.5 * x[0] * x[0]; });
    const auto r = verify_forward(D, A, {}, 0.5);
    EXPECT_TRUE(is_pos_inf(r.sup_distance));
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.witnesses.front().point[0], 0.5);
}

TEST(Converse, EscapingAtomPasses) {
    const auto m = make_family("two-atom-escaping");
    const auto c = exact_curve(m, GridSpec::line(-1.0, 2.0, 301), {50.0, 100.0, 200.0});
    const GridSpec al = GridSpec::line(-1.0, 3.0, 401);
    const auto r = verify_converse(c, reference_rate_on(m, al), 0.02);
    EXPECT_TRUE(r.pass) << r.note;
    EXPECT_FALSE(r.precondition_failed);
    ASSERT_FALSE(r.exposed.empty());
    for (const auto& p : r.exposed) EXPECT_NEAR(p[0], 1.0, 2.0 * al.spacing());
    EXPECT_NEAR((*r.transform)[200], kLn2, 0.02);
}

TEST(Converse, VanishingAtomPreconditionFails) {
    const auto m = make_family("two-atom-vanishing");
    const auto c = exact_curve(m, GridSpec::line(-1.0, 2.0, 301), {50.0, 100.0, 200.0});
    const GridSpec al = GridSpec::line(-1.0, 3.0, 401);
    const auto r = verify_converse(c, vanishing_rate(al), 0.02);
    EXPECT_TRUE(r.precondition_failed);
    EXPECT_FALSE(r.pass);
    ASSERT_TRUE(r.smoothness.has_value());
    EXPECT_EQ(r.smoothness->verdict, SmoothnessVerdict::KinkDetected);
    // Informational: L_A = alpha ln 2 on [0, 1].
    for (double a : {0.25, 0.5, 0.75}) {
        const std::size_t i = static_cast<std::size_t>(std::lround((a + 1.0) / al.spacing()));
        EXPECT_NEAR((*r.transform)[i], a * kLn2, 0.02) << a;
    }
}

TEST(Converse, MillsQuadratic) {
    const auto m = make_family("mills-tail");
    const auto c = exact_curve(m, GridSpec::line(-2.0, 2.0, 201), {2500.0, 5000.0, 10000.0});
    const auto r = verify_converse(c, reference_rate_on(m, GridSpec::line(-1.5, 1.5, 151)), 0.05);
    EXPECT_TRUE(r.pass) << r.note << " " << r.sup_distance;

    const GridSpec inner = GridSpec::line(-1.0, 1.0, 101);
    const GridFunction D = GridFunction::sample(inner, [&](const Vec& a) {
        return estimate_local_rate_naive(m, a, ScheduleSpec::power(1.0 / 3.0), {1e4}, 0, 0).D_hat.value;
    });
    const auto re = verify_converse(c, D, 0.05);
    EXPECT_TRUE(re.pass) << re.sup_distance;
}

TEST(Minorant, OccupationSimplex) {
    const GridSpec g = GridSpec::square(-0.5, 1.5, 81);
    const GridFunction D = occupation_rate(g);
    const auto r = minorant_check(D, GridSpec::square(-6.0, 6.0, 241), 1e-9);
    EXPECT_TRUE(r.pass) << r.note << " " << r.sup_distance;
    const GridFunction& B = *r.transform;
    const double h = g.spacing();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec p = g.point(i);
        const bool simplex = p[0] >= -1e-12 && p[1] >= -1e-12 && p[0] + p[1] <= 1.0 + 1e-12;
        if (!simplex) continue;
        EXPECT_NEAR(B[i], (p[0] + p[1]) * kLn2, 2.0 * h) << p[0] << "," << p[1];
        if (p[0] > h / 2 && p[1] > h / 2) EXPECT_TRUE(is_pos_inf(D[i]));
    }
}

TEST(Minorant, ConvexInputReproduced) {
    const GridSpec g = GridSpec::line(-2.0, 2.0, 201);
    const GridFunction D = GridFunction::sample(g, [](const Vec& a) { return std::abs(a[0] - 0.3) + a[0] * a[0]; });
    const auto r = minorant_check(D, GridSpec::line(-8.0, 8.0, 801), 2.0 * g.spacing());
    EXPECT_TRUE(r.pass) << r.sup_distance;
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR((*r.transform)[i], D[i], 2.0 * g.spacing());
}

TEST(Minorant, VanishingAtomHull) {
    const GridSpec g = GridSpec::line(-1.0, 3.0, 401);
    const GridSpec dual = GridSpec::line(-4.0, 4.0, 801);
    const auto r = minorant_check(vanishing_rate(g), dual, 1e-9);
    EXPECT_TRUE(r.pass);
    // The slope ln 2 is resolved to the nearest dual node.
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = g.point(i)[0];
        if (a >= 0.0 && a <= 1.0) EXPECT_NEAR((*r.transform)[i], a * kLn2, 0.5 * dual.spacing() * a + 1e-12) << a;
    }
    ASSERT_EQ(r.exposed.size(), 2u);
    EXPECT_NEAR(r.exposed[0][0], 0.0, 1e-12);
    EXPECT_NEAR(r.exposed[1][0], 1.0, 1e-12);
}

TEST(FFAgreement, NormalWindow) {
    const auto r = ff_wsff_agreement(make_family("iid-normal"), GridSpec::line(-2.0, 2.0, 41), {25.0, 50.0, 100.0}, kM, 0, 0, 0.05);
    EXPECT_TRUE(r.pass) << r.sup_distance;
    EXPECT_FALSE(r.diverging);
}

TEST(FFAgreement, OccupationIsExact) {
    const auto r =
        ff_wsff_agreement(make_family("markov-occupation"), GridSpec::square(-1.0, 1.5, 11), {10.0, 20.0, 40.0}, kM, 0, 0, 0.0);
    EXPECT_EQ(r.sup_distance, 0.0);
    EXPECT_TRUE(r.pass);
}

TEST(FFAgreement, MillsDiverges) {
    const auto r = ff_wsff_agreement(make_family("mills-tail"), GridSpec::line(0.5, 1.5, 11), {10.0, 20.0, 40.0}, kM, 0, 0, 0.05);
    EXPECT_TRUE(r.diverging);
    EXPECT_FALSE(r.pass);
    EXPECT_FALSE(r.note.empty());
}

TEST(Properties, ForwardConverseCompose) {
    struct Case {
        const char* id;
        GridSpec mu, alpha;
        std::vector<double> T;
        double tol;
    };
    const Case cases[] = {
        {"mills-tail", GridSpec::line(-2.0, 2.0, 201), GridSpec::line(-1.5, 1.5, 151), {2500.0, 5000.0, 10000.0}, 0.05},
        {"two-atom-escaping", GridSpec::line(-1.0, 2.0, 301), GridSpec::line(-1.0, 3.0, 401), {50.0, 100.0, 200.0}, 0.02},
        {"iid-normal", GridSpec::line(-2.0, 2.0, 201), GridSpec::line(-1.5, 1.5, 151), {25.0, 50.0, 100.0}, 0.02},
    };
    for (const auto& k : cases) {
        const auto m = make_family(k.id);
        const auto c = exact_curve(m, k.mu, k.T);
        const GridFunction D = reference_rate_on(m, k.alpha);
        EXPECT_TRUE(verify_forward(D, c, k.tol).pass) << k.id;
        EXPECT_TRUE(verify_converse(c, D, k.tol).pass) << k.id;
        const GridFunction DD = conjugate(conjugate(D, k.mu), k.alpha);
        for (std::size_t i = 0; i < k.alpha.size(); ++i) {
            if (k.alpha.edge_distance(i) < kDefaultMargin || !D.finite(i)) continue;
            const double a = k.alpha.point(i)[0];
            if (std::abs(a) >= k.mu.axis(0).upper - 3.0 * k.mu.spacing()) continue;
            EXPECT_NEAR(DD[i], D[i], 2.0 * k.alpha.spacing()) << k.id << " " << a;
        }
    }
}

TEST(Properties, OccupationIsNotClaimedConverse) {
    const auto m = make_family("markov-occupation");
    const auto c = exact_curve(m, GridSpec::square(-1.0, 1.5, 51), {100.0, 300.0, 500.0});
    const GridFunction D = occupation_rate(GridSpec::square(-0.5, 1.5, 81));
    const auto fwd = verify_forward(D, c, 0.02);
    const auto conv = verify_converse(c, D, 0.02);
    EXPECT_TRUE(fwd.pass);
    EXPECT_FALSE(conv.pass);
    EXPECT_TRUE(conv.precondition_failed || conv.sup_distance > 0.02);
}

TEST(Properties, ReportsAreDeterministic) {
    const auto m = make_family("iid-pareto");
    const auto a = ff_wsff_agreement(m, GridSpec::line(-0.5, 0.0, 6), {5.0, 10.0, 20.0}, kM, 2000, 9, 0.05, 1);
    const auto b = ff_wsff_agreement(m, GridSpec::line(-0.5, 0.0, 6), {5.0, 10.0, 20.0}, kM, 2000, 9, 0.05, 4);
    EXPECT_EQ(a.sup_distance, b.sup_distance);
    EXPECT_EQ(a.pass, b.pass);
    ASSERT_EQ(a.witnesses.size(), b.witnesses.size());
    for (std::size_t k = 0; k < a.witnesses.size(); ++k) EXPECT_EQ(a.witnesses[k].point, b.witnesses[k].point);
}
