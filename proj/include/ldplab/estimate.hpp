#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ldplab/core.hpp"
#include "ldplab/grid.hpp"

namespace ldplab {

// ---------------------------------------------------------------------------
// Schedules for eps_T -> 0 and M_T -> infinity.

enum class ScheduleKind { Power, Logarithmic, Constant };

inline std::string to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::Power: return "power";
        case ScheduleKind::Logarithmic: return "logarithmic";
        case ScheduleKind::Constant: return "constant";
    }
    return "?";
}

inline ScheduleKind parse_schedule_kind(const std::string& s) {
    if (s == "power") return ScheduleKind::Power;
    if (s == "logarithmic" || s == "log") return ScheduleKind::Logarithmic;
    if (s == "constant") return ScheduleKind::Constant;
    throw DomainError("unknown schedule kind '" + s + "'");
}

/// s(T) = c T^p, c ln(1 + T) or c. A vanishing schedule uses the reciprocal
/// shape: c T^{-p}, c / ln(1 + T), c.
struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::Power;
    double exponent = 1.0 / 3.0;
    double scale = 1.0;
    std::vector<double> multipliers{0.5, 1.0, 2.0, 4.0};

    static ScheduleSpec power(double p, double c = 1.0) { return {ScheduleKind::Power, p, c}; }
    static ScheduleSpec logarithmic(double c = 1.0) { return {ScheduleKind::Logarithmic, 0.0, c}; }
    static ScheduleSpec constant(double c) { return {ScheduleKind::Constant, 0.0, c}; }

    double growing(double T) const {
        switch (kind) {
            case ScheduleKind::Power: return scale * std::pow(T, exponent);
            case ScheduleKind::Logarithmic: return scale * std::log1p(T);
            case ScheduleKind::Constant: return scale;
        }
        return scale;
    }

    double vanishing(double T) const {
        switch (kind) {
            case ScheduleKind::Power: return scale * std::pow(T, -exponent);
            case ScheduleKind::Logarithmic: return scale / std::log1p(T);
            case ScheduleKind::Constant: return scale;
        }
        return scale;
    }

    ScheduleSpec scaled(double multiplier) const {
        ScheduleSpec s = *this;
        s.scale *= multiplier;
        return s;
    }

    /// Power schedules need 0 < p < 1: s(T) -> infinity with s(T)/T -> 0, and
    /// the reciprocal tends to 0 strictly slower than 1/T.
    bool is_admissible() const {
        if (!(scale > 0.0) || !std::isfinite(scale)) return false;
        if (kind == ScheduleKind::Power && !(exponent > 0.0 && exponent < 1.0)) return false;
        for (double m : multipliers)
            if (!(m > 0.0)) return false;
        return true;
    }

    void validate(const std::string& what) const {
        if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError(what + ": scale must be positive");
        if (kind == ScheduleKind::Power && !(exponent > 0.0 && exponent < 1.0))
            throw DomainError(what + ": power exponent must lie in (0, 1); p >= 1 shrinks at least as fast as 1/T");
        for (double m : multipliers)
            if (!(m > 0.0)) throw DomainError(what + ": multipliers must be positive");
    }

    std::string describe() const {
        char buf[96];
        switch (kind) {
            case ScheduleKind::Power: std::snprintf(buf, sizeof buf, "%g*T^%g", scale, exponent); break;
            case ScheduleKind::Logarithmic: std::snprintf(buf, sizeof buf, "%g*ln(1+T)", scale); break;
            case ScheduleKind::Constant: std::snprintf(buf, sizeof buf, "%g", scale); break;
        }
        return buf;
    }
};

// ---------------------------------------------------------------------------
// Log-scale estimates.

enum class Provenance { Exact, MonteCarlo };

inline std::string to_string(Provenance p) { return p == Provenance::Exact ? "exact" : "monte-carlo"; }

namespace flag {
inline constexpr unsigned undersampled = 1u << 0;
inline constexpr unsigned unreliable = 1u << 1;
inline constexpr unsigned diverging = 1u << 2;
inline constexpr unsigned schedule_sensitive = 1u << 3;
inline constexpr unsigned precondition_failed = 1u << 4;
inline constexpr unsigned interior_shift = 1u << 5;
inline constexpr unsigned not_converged = 1u << 6;
}  // namespace flag

inline std::string flags_to_string(unsigned flags) {
    static const std::pair<unsigned, const char*> names[] = {
        {flag::undersampled, "undersampled"},          {flag::unreliable, "unreliable"},
        {flag::diverging, "diverging"},                {flag::schedule_sensitive, "schedule-sensitive"},
        {flag::precondition_failed, "precondition-failed"}, {flag::interior_shift, "interior-shift"},
        {flag::not_converged, "not-converged"}};
    std::string out;
    for (const auto& [bit, name] : names) {
        if (!(flags & bit)) continue;
        if (!out.empty()) out += '|';
        out += name;
    }
    return out;
}

/// Minimum effective sample size for a Monte Carlo estimate to be trusted.
inline constexpr double kEffectiveSampleFloor = 30.0;

struct LogEstimate {
    double value = 0.0;
    double ci_half_width = 0.0;
    double n_effective = 0.0;
    Provenance provenance = Provenance::Exact;
    unsigned flags = 0;

    bool has(unsigned f) const { return (flags & f) != 0; }
    bool reliable() const { return !has(flag::undersampled) && !has(flag::unreliable); }

    static LogEstimate exact(double v, double n = 0.0) { return {v, 0.0, n, Provenance::Exact, 0}; }
};

/// Summary of a batch of nonnegative weights given as logs: log of the mean,
/// relative standard error of the mean, and (sum w)^2 / sum w^2.
struct WeightSummary {
    double log_mean = -kInf;
    double relative_se = kInf;
    double n_effective = 0.0;
    std::size_t positive = 0;
};

inline WeightSummary summarize_log_weights(const std::vector<double>& logw, std::size_t n_total) {
    WeightSummary s;
    double top = -kInf;
    for (double v : logw) top = std::max(top, v);
    if (is_neg_inf(top) || n_total == 0) return s;
    double sum = 0.0, sum_sq = 0.0;
    for (double v : logw) {
        if (is_neg_inf(v)) continue;
        const double w = std::exp(v - top);
        sum += w;
        sum_sq += w * w;
        ++s.positive;
    }
    const double n = static_cast<double>(n_total);
    s.log_mean = top + std::log(sum) - std::log(n);
    s.n_effective = sum * sum / sum_sq;
    s.relative_se = std::sqrt(std::max(0.0, n / s.n_effective - 1.0) / n);
    return s;
}

// ---------------------------------------------------------------------------

/// Map from arguments (mu or alpha) to estimates, with per-rung history.
struct Curve {
    std::optional<GridSpec> grid;
    std::vector<Vec> arguments;
    std::vector<LogEstimate> estimates;
    std::vector<double> T_ladder;
    std::vector<double> M_ladder;
    std::vector<bool> converged;
    std::vector<std::vector<double>> rung_values;  // [argument][rung]
    double tolerance = 0.0;

    std::size_t size() const { return arguments.size(); }

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(estimates.size());
        for (const auto& e : estimates) v.push_back(e.value);
        return v;
    }

    double max_ci() const {
        double c = 0.0;
        for (const auto& e : estimates)
            if (std::isfinite(e.ci_half_width)) c = std::max(c, e.ci_half_width);
        return c;
    }

    bool all_converged() const {
        for (bool c : converged)
            if (!c) return false;
        return true;
    }

    /// Final-rung values as a GridFunction on the curve's grid. Values of
    /// -inf (every sample missed the ball) are not representable and throw.
    GridFunction to_grid_function() const {
        if (!grid) throw DomainError("curve has no grid");
        std::vector<double> v = values();
        for (double x : v)
            if (is_neg_inf(x) || std::isnan(x)) throw NumericalFailure("curve holds -inf or NaN values");
        return GridFunction(*grid, std::move(v));
    }
};

}  // namespace ldplab
