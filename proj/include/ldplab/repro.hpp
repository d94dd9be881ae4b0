#pragma once

// Reproduction checks for the closed-form examples. Each group is a list of
// named pass/fail items with a one-line detail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ldplab/convex.hpp"
#include "ldplab/duality.hpp"
#include "ldplab/estimate.hpp"
#include "ldplab/families.hpp"
#include "ldplab/lldp.hpp"
#include "ldplab/wsff.hpp"

namespace ldplab::repro {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CheckGroup {
    explicit CheckGroup(std::string t = {}) : title(std::move(t)) {}

    std::string title;
    std::vector<Check> checks;
    double seconds = 0.0;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    template <typename... Args>
    void add(const std::string& name, bool ok, const char* fmt, Args... args) {
        char buf[512];
        if constexpr (sizeof...(Args) == 0) std::snprintf(buf, sizeof buf, "%s", fmt);
        else std::snprintf(buf, sizeof buf, fmt, args...);
        checks.push_back({name, ok, buf});
    }

    void append(const CheckGroup& other) {
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
        seconds += other.seconds;
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// Rate functions on grids.

/// D = 0 at 0, ln 2 at 1, +inf elsewhere.
inline GridFunction two_atom_rate(const GridSpec& g) {
    return GridFunction::sample(g, [](const Vec& a) {
        if (a[0] == 0.0) return 0.0;
        if (a[0] == 1.0) return kLn2;
        return kInf;
    });
}

/// D = ln 2 at 1, +inf elsewhere.
inline GridFunction escaping_rate(const GridSpec& g) {
    return GridFunction::sample(g, [](const Vec& a) { return a[0] == 1.0 ? kLn2 : kInf; });
}

/// L-shaped occupation rate: alpha_1 ln 2 on [0,1] x {0}, alpha_2 ln 2 on {0} x [0,1].
inline GridFunction occupation_rate(const GridSpec& g) {
    return GridFunction::sample(g, [](const Vec& a) {
        if (a[1] == 0.0 && a[0] >= 0.0 && a[0] <= 1.0) return a[0] * kLn2;
        if (a[0] == 0.0 && a[1] >= 0.0 && a[1] <= 1.0) return a[1] * kLn2;
        return kInf;
    });
}

inline double hinge(double mu) { return std::max(0.0, mu - kLn2); }

inline const GridSpec& two_atom_window() {
    static const GridSpec g = GridSpec::line(-1.0, 3.0, 4001);
    return g;
}
inline const GridSpec& occupation_alpha_window() {
    static const GridSpec g = GridSpec::square(-0.5, 1.5, 81);
    return g;
}

// ---------------------------------------------------------------------------

inline CheckGroup conjugate_golden() {
    Stopwatch sw;
    CheckGroup g("conjugate golden values");
    {
        const GridSpec& w = two_atom_window();
        const GridFunction L = conjugate(two_atom_rate(w), w);
        double err = 0.0;
        for (std::size_t i = 0; i < L.size(); ++i) err = std::max(err, std::abs(L[i] - hinge(w.point(i)[0])));
        g.add("two-atom conjugate = max{0, mu - ln 2}", err <= 1e-12, "max error %.3e (tol 1e-12)", err);
    }
    {
        const GridSpec& a = occupation_alpha_window();
        const GridSpec dual = GridSpec::square(-1.0, 2.0, 61);
        const GridFunction L = conjugate(occupation_rate(a), dual);
        double err = 0.0;
        for (std::size_t i = 0; i < L.size(); ++i) {
            const Vec m = dual.point(i);
            err = std::max(err, std::abs(L[i] - hinge(std::max(m[0], m[1]))));
        }
        const double tol = 2.0 * a.spacing();
        g.add("occupation 2-D conjugate = max{0, max(mu) - ln 2}", err <= tol, "max error %.3e (tol 2h = %.3g)", err, tol);
    }
    g.seconds = sw.seconds();
    return g;
}

inline CheckGroup biconjugate_minorant() {
    Stopwatch sw;
    CheckGroup g("biconjugate minorant");
    {
        const GridSpec& w = two_atom_window();
        const GridFunction B = biconjugate(two_atom_rate(w), w);
        double err = 0.0;
        for (std::size_t i = 0; i < B.size(); ++i) {
            const double a = w.point(i)[0];
            if (a >= 0.0 && a <= 1.0) err = std::max(err, std::abs(B[i] - a * kLn2));
        }
        const double tol = 2.0 * w.spacing();
        g.add("two-atom biconjugate = alpha ln 2 on [0,1]", err <= tol, "max error %.3e (tol 2h = %.3g)", err, tol);
    }
    {
        const GridSpec& a = occupation_alpha_window();
        const GridSpec dual = GridSpec::square(-1.0, 2.0, 301);
        const DualityReport r = minorant_check(occupation_rate(a), dual, 2.0 * a.spacing());
        const GridFunction& B = *r.transform;
        double err = 0.0;
        for (std::size_t i = 0; i < B.size(); ++i) {
            const Vec p = a.point(i);
            if (p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0 + 1e-12)
                err = std::max(err, std::abs(B[i] - (p[0] + p[1]) * kLn2));
        }
        const double tol = 2.0 * a.spacing();
        g.add("occupation biconjugate = (alpha1 + alpha2) ln 2 on the simplex", err <= tol,
              "max error %.3e (tol 2h = %.3g)", err, tol);
        g.add("occupation minorant check", r.pass, "sup distance %.3e, %zu exposed nodes", r.sup_distance, r.exposed.size());
    }
    g.seconds = sw.seconds();
    return g;
}

// ---------------------------------------------------------------------------
// mills-tail (repro example1).

inline double mills_rate_exact(double alpha, const ScheduleSpec& eps, double T) {
    const FamilyModel m = mills_tail();
    return estimate_local_rate_naive(m, {alpha}, eps, {T}, 0, 0).D_hat.value;
}

inline CheckGroup example1_rate(bool with_robustness) {
    Stopwatch sw;
    CheckGroup g("mills-tail rate");
    const double T = 1e4;
    const ScheduleSpec legal = ScheduleSpec::power(1.0 / 3.0);
    const double d1 = mills_rate_exact(1.0, legal, T);
    g.add("D-hat(1), eps = T^(-1/3), T = 1e4", std::abs(d1 - 0.5) <= 0.05, "D-hat = %.6f (target 0.5 +- 0.05)", d1);
    if (with_robustness) {
        const auto rob = schedule_robustness([&](double m) { return mills_rate_exact(1.0, legal.scaled(m), T); },
                                             legal.multipliers, 0.05);
        g.add("robustness over multipliers {1/2,1,2,4}", rob.pass,
              "values %.4f %.4f %.4f %.4f, spread %.4f (tol 0.05)", rob.values[0], rob.values[1], rob.values[2],
              rob.values[3], rob.spread);
        ScheduleSpec illegal = ScheduleSpec::power(1.0, 1.0);
        const double di = mills_rate_exact(1.0, illegal, T);
        const auto cmp = robustness_from_values({1.0 / 3.0, 1.0}, {d1, di}, 0.05);
        const auto rob_illegal = schedule_robustness([&](double m) { return mills_rate_exact(1.0, illegal.scaled(m), T); },
                                                     illegal.multipliers, 0.05);
        g.add("illegal eps = T^(-1) fails robustness", !cmp.pass,
              "D-hat(T^-1) = %.4f vs %.4f, spread %.4f (must exceed 0.05); multiplier spread under T^-1 %.4f", di, d1,
              cmp.spread, rob_illegal.spread);
    }
    g.seconds = sw.seconds();
    return g;
}

inline CheckGroup example1_wsff_tails() {
    Stopwatch sw;
    CheckGroup g("mills-tail wsff and tails");
    const FamilyModel m = mills_tail();
    const GridSpec mu = GridSpec::line(-2.0, 2.0, 81);
    const Curve c = estimate_wsff_curve(m, mu, {2500.0, 5000.0, 10000.0}, ScheduleSpec::power(1.0 / 3.0), 0, 0);
    double err = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double x = c.arguments[i][0];
        err = std::max(err, std::abs(c.estimates[i].value - 0.5 * x * x));
    }
    g.add("A-hat = mu^2/2 on [-2,2], M = T^(1/3), T = 1e4", err <= 0.05, "max error %.3e (tol 0.05), A-hat(2) = %.6f", err,
          c.estimates.back().value);
    const TightnessTable t = exponential_tightness_probe(m, {2.0}, {100.0, 1000.0, 10000.0}, 0, 0);
    const double tail = t.values[0].back().value;
    g.add("tightness probe v = 2 -> -2", std::abs(tail + 2.0) <= 0.1 && t.verdicts[0] == TightnessVerdict::Decaying,
          "(1/T) ln P(|zeta|>2) = %.6f at T = 1e4, verdict %s", tail, to_string(t.verdicts[0]).c_str());
    const TailMassReport tm = tail_mass_diagnostic(m, {1.0}, {1.0, 2.0, 4.0, 8.0}, 100.0, 0, 0);
    g.add("tail mass at mu = 1 does not decay", tm.verdict == TailVerdict::NonDecaying,
          "contributions %s .. %s, verdict %s", format_real(tm.contributions.front().value).c_str(),
          format_real(tm.contributions.back().value).c_str(), to_string(tm.verdict).c_str());
    g.seconds = sw.seconds();
    return g;
}

// ---------------------------------------------------------------------------
// two-atom families (repro example2a, example2b).

inline CheckGroup example2_vanishing() {
    Stopwatch sw;
    CheckGroup g("two-atom vanishing");
    const FamilyModel m = two_atom(AtomSchedule::Vanishing);
    const ScheduleSpec eps = ScheduleSpec::constant(0.3);
    const double d0 = estimate_local_rate_naive(m, {0.0}, eps, {30.0}, 0, 0).D_hat.value;
    const double d1 = estimate_local_rate_naive(m, {1.0}, eps, {30.0}, 0, 0).D_hat.value;
    g.add("D-hat(0) = 0", std::abs(d0) <= 1e-9, "D-hat(0) = %.3e at T = 30", d0);
    g.add("D-hat(1) = ln 2", std::abs(d1 - kLn2) <= 1e-12, "D-hat(1) - ln 2 = %.3e at T = 30", d1 - kLn2);

    const GridSpec mu = GridSpec::line(-1.0, 2.0, 301);
    const Curve c = estimate_wsff_curve(m, mu, {50.0, 100.0, 200.0}, ScheduleSpec::power(1.0 / 3.0), 0, 0);
    const GridFunction A = c.to_grid_function();
    const SmoothnessReport s = check_essential_smoothness(A);
    const double at = s.kink_location.empty() ? kInf : s.kink_location[0];
    g.add("A-hat kink detected at ln 2",
          s.verdict == SmoothnessVerdict::KinkDetected && std::abs(at - kLn2) <= 2.0 * mu.spacing(),
          "verdict %s, gap %.3f at mu = %.4f", to_string(s.verdict).c_str(), s.max_subgradient_gap, at);
    const GridSpec alpha = GridSpec::line(-1.0, 3.0, 401);
    const DualityReport r = verify_converse(c, two_atom_rate(alpha), 0.02);
    g.add("verify_converse reports precondition-failed", r.precondition_failed && !r.pass, "%s",
          r.note.empty() ? "no note" : r.note.c_str());
    g.seconds = sw.seconds();
    return g;
}

inline CheckGroup example2_escaping() {
    Stopwatch sw;
    CheckGroup g("two-atom escaping");
    const FamilyModel m = two_atom(AtomSchedule::Escaping);
    const GridSpec mu = GridSpec::line(-1.0, 2.0, 301);
    const Curve c = estimate_wsff_curve(m, mu, {50.0, 100.0, 200.0}, ScheduleSpec::power(1.0 / 3.0), 0, 0);
    double err = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) err = std::max(err, std::abs(c.estimates[i].value - (c.arguments[i][0] - kLn2)));
    g.add("A-hat = mu - ln 2 on [-1,2], T = 200", err <= 0.02, "max error %.3e (tol 0.02)", err);

    const GridSpec alpha = GridSpec::line(-1.0, 3.0, 401);
    const DualityReport r = verify_converse(c, escaping_rate(alpha), 0.02);
    bool concentrated = !r.exposed.empty();
    for (const auto& p : r.exposed) concentrated = concentrated && std::abs(p[0] - 1.0) <= 2.0 * alpha.spacing();
    const double at1 = (*r.transform)[200];
    g.add("verify_converse passes", r.pass, "sup distance %.3e, smoothness %s", r.sup_distance,
          r.smoothness ? to_string(r.smoothness->verdict).c_str() : "?");
    g.add("L_A concentrated at alpha = 1 with value ln 2", concentrated && std::abs(at1 - kLn2) <= 0.02,
          "%zu exposed nodes, L_A(1) = %.6f", r.exposed.size(), at1);
    const TightnessTable t = exponential_tightness_probe(m, {2.0}, {50.0, 100.0, 200.0}, 0, 0);
    const double tail = t.values[0].back().value;
    g.add("tightness probe v = 2 -> 0, mass escaping", std::abs(tail) <= 0.02 && t.verdicts[0] == TightnessVerdict::MassEscaping,
          "(1/T) ln P(|zeta|>2) = %.3e, verdict %s", tail, to_string(t.verdicts[0]).c_str());
    g.seconds = sw.seconds();
    return g;
}

// ---------------------------------------------------------------------------
// markov-occupation (repro example3).

inline CheckGroup example3() {
    Stopwatch sw;
    CheckGroup g("markov occupation fractions");
    const FamilyModel m = markov_occupation();
    const double a10 = exact_trunc_log_mgf(m, {1.0, 0.0}, 2.0, 500.0) / 500.0;
    g.add("A(1,0) = 1 - ln 2 at T = 500", std::abs(a10 - (1.0 - kLn2)) <= 0.01, "value %.6f vs %.6f", a10, 1.0 - kLn2);

    const GridSpec mu = GridSpec::square(-1.0, 1.5, 51);
    const Curve c = estimate_wsff_curve(m, mu, {100.0, 300.0, 500.0}, ScheduleSpec::power(1.0 / 3.0), 0, 0);
    double err = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Vec& p = c.arguments[i];
        err = std::max(err, std::abs(c.estimates[i].value - hinge(std::max(p[0], p[1]))));
    }
    g.add("A-hat surface = max{0, max(mu) - ln 2} on [-1,1.5]^2", err <= 0.02, "max error %.3e (tol 0.02)", err);

    const GridFunction D = occupation_rate(occupation_alpha_window());
    const DualityReport fwd = verify_forward(D, c, 0.02);
    g.add("verify_forward passes", fwd.pass, "sup distance %.3e (tol 0.02)", fwd.sup_distance);

    const CheckGroup minor = biconjugate_minorant();
    for (const auto& ch : minor.checks)
        if (ch.name.rfind("occupation", 0) == 0) g.checks.push_back(ch);

    const DualityReport conv = verify_converse(c, D, 0.02);
    g.add("verify_converse does not claim D = L_A", !conv.pass,
          "precondition_failed = %s, sup distance %s", conv.precondition_failed ? "true" : "false",
          format_real(conv.sup_distance).c_str());
    g.seconds = sw.seconds();
    return g;
}

// ---------------------------------------------------------------------------
// Tilted importance sampling on the normal sample mean.

struct TiltedRunResult {
    RatePoint tilted;
    RatePoint naive;
};

inline TiltedRunResult tilted_normal_run(std::uint64_t seed, unsigned jobs) {
    const FamilyModel m = iid_mean({IncrementLaw::Normal});
    const double T = 50.0;
    const ScheduleSpec eps = ScheduleSpec::power(1.0 / 3.0, 0.375);
    const ScheduleSpec M = ScheduleSpec::power(1.0 / 3.0);
    CurveOptions co;
    co.jobs = jobs;
    const Curve A = estimate_wsff_curve(m, GridSpec::line(-3.0, 3.0, 601), {12.5, 25.0, 50.0}, M, 0, seed, co);
    RateOptions ro;
    ro.jobs = jobs;
    TiltedRunResult out{estimate_local_rate_tilted(m, {1.0}, A.to_grid_function(), eps, {T}, M, 100000, seed, ro),
                        {}};
    ro.force_monte_carlo = true;
    out.naive = estimate_local_rate_naive(m, {1.0}, eps, {T}, 100000, seed ^ 0x9e37ULL, ro);
    return out;
}

inline CheckGroup tilted_is(std::uint64_t seed = 7, unsigned jobs = 1) {
    Stopwatch sw;
    CheckGroup g("tilted importance sampling, normal sample mean");
    const auto r = tilted_normal_run(seed, jobs);
    const auto& t = r.tilted;
    g.add("tilted D-hat(1) at T = 50, N = 1e5", std::abs(t.D_hat.value - 0.5) <= 0.05,
          "D-hat = %.4f +- %.4f, tilt mu* = %.4f (%s), eps = %.4f", t.D_hat.value, t.D_hat.ci_half_width,
          t.tilt ? t.tilt->mu_star[0] : kInf, t.tilt ? to_string(t.tilt->status).c_str() : "?", t.eps_used);
    g.add("tilted n_effective >= 1e3", t.D_hat.n_effective >= 1e3, "n_effective = %.0f, tilted hit fraction %.3f",
          t.D_hat.n_effective, t.tilted_hit_fraction);
    g.add("naive MC records zero hits", r.naive.D_hat.has(flag::undersampled) && r.naive.D_hat.n_effective == 0.0,
          "naive D-hat = %s, flags %s", format_real(r.naive.D_hat.value).c_str(), flags_to_string(r.naive.D_hat.flags).c_str());
    g.seconds = sw.seconds();
    return g;
}

// ---------------------------------------------------------------------------

/// Checks run by `repro <target>`.
inline CheckGroup run_target(const std::string& target) {
    if (target == "example1") {
        CheckGroup g = example1_rate(false);
        g.title = "example1";
        g.append(example1_wsff_tails());
        return g;
    }
    if (target == "example2a") {
        CheckGroup g = example2_vanishing();
        g.title = "example2a";
        const CheckGroup conj = conjugate_golden();
        const CheckGroup bic = biconjugate_minorant();
        g.checks.push_back(conj.checks.front());
        g.checks.push_back(bic.checks.front());
        return g;
    }
    if (target == "example2b") {
        CheckGroup g = example2_escaping();
        g.title = "example2b";
        return g;
    }
    if (target == "example3") {
        CheckGroup g = example3();
        g.title = "example3";
        g.checks.push_back(conjugate_golden().checks.back());
        return g;
    }
    throw DomainError("unknown repro target '" + target + "'");
}

}  // namespace ldplab::repro
