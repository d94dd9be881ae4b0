#pragma once

// Command orchestration: config -> computations -> files + manifest.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldplab/config.hpp"
#include "ldplab/convex.hpp"
#include "ldplab/duality.hpp"
#include "ldplab/families.hpp"
#include "ldplab/io.hpp"
#include "ldplab/lldp.hpp"
#include "ldplab/repro.hpp"
#include "ldplab/wsff.hpp"

namespace ldplab {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2, kExitAssertion = 3 };

/// Reads an INI document or a manifest JSON (whose "config" field holds
/// the resolved INI).
inline RunConfig load_config_file(const std::string& path, const ConfigOverrides& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
        }
        if (!j.contains("config") || !j["config"].is_string()) throw ConfigError("manifest has no \"config\" string");
        text = j["config"].get<std::string>();
    }
    return parse_config(text, overrides);
}

namespace detail {

struct RunContext {
    const RunConfig& cfg;
    std::filesystem::path dir;
    std::vector<std::string> outputs;
    std::size_t tasks = 0;
    std::ostream& log;

    std::string path(const std::string& name) {
        outputs.push_back(name);
        return (dir / name).string();
    }
    bool json() const { return cfg.format == OutputFormat::Json; }
};

inline void write_text(const std::string& path, const std::string& text) {
    auto out = io::open_out(path);
    out << text;
    if (!out) throw DomainError("write failed: " + path);
}

inline std::string hex64(std::uint64_t x) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

/// FNV-1a over the per-task seeds derive_seed(master, 0..n-1).
inline std::string seeds_digest(std::uint64_t master, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t s = derive_seed(master, i);
        for (int b = 0; b < 8; ++b) {
            h ^= (s >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    }
    return hex64(h);
}

inline FamilyModel model_of(const RunConfig& c) { return make_family(c.model_id, c.params); }

inline CurveOptions curve_options(const RunConfig& c) {
    CurveOptions o;
    o.jobs = c.jobs;
    o.tolerance = c.curve_tolerance;
    o.mgf.truncation = c.truncation;
    return o;
}

inline void write_curve(RunContext& ctx, const Curve& curve, const std::string& stem) {
    if (ctx.json()) write_text(ctx.path(stem + ".json"), io::curve_json(curve).dump(2) + "\n");
    else {
        auto out = io::open_out(ctx.path(stem + ".csv"));
        io::write_curve_csv(out, curve);
    }
    io::emit_plot_data(curve, ctx.path(stem + ".dat"), stem, ctx.cfg.plot_script);
    if (ctx.cfg.plot_script) ctx.outputs.push_back(stem + ".dat.gp");
}

/// Rate function on the alpha grid: the model's closed form when it has one,
/// otherwise exact-path local rates at the last rung.
inline GridFunction rate_on_grid(const RunConfig& c, const FamilyModel& m) {
    const GridSpec& g = *c.alpha_grid;
    if (m.reference_rate) return GridFunction::sample(g, m.reference_rate);
    if (!m.exact_log_local_prob) throw CapabilityError(m.id + ": no closed-form rate or local probability for duality");
    const double T = c.T_ladder.back();
    const double eps = c.eps_schedule.vanishing(T);
    return GridFunction::sample(g, [&](const Vec& a) { return -m.exact_log_local_prob(a, eps, T) / T; });
}

inline int cmd_conjugate(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const GridFunction f = read_csv_file(c.conjugate_input);
    const GridSpec dual = c.dual_grid.value_or(f.spec());
    const GridFunction g = conjugate(f, dual);
    if (ctx.json()) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < g.size(); ++i) rows.push_back({{"point", io::vec(dual.point(i))}, {"value", io::real(g[i])}});
        write_text(ctx.path("conjugate.json"), rows.dump(2) + "\n");
    } else {
        auto out = io::open_out(ctx.path("conjugate.csv"));
        write_csv(out, g);
    }
    io::emit_plot_data(g, ctx.path("conjugate.dat"), "conjugate", c.plot_script);
    ctx.log << "conjugate: " << g.size() << " dual nodes\n";
    return kExitOk;
}

inline int cmd_wsff(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const FamilyModel m = model_of(c);
    const Curve curve = estimate_wsff_curve(m, *c.mu_grid, c.T_ladder, c.M_schedule, c.N, c.seed, curve_options(c));
    ctx.tasks = curve.size() * c.T_ladder.size();
    write_curve(ctx, curve, "wsff");
    std::size_t diverging = 0;
    for (const auto& e : curve.estimates) diverging += e.has(flag::diverging) ? 1 : 0;
    ctx.log << "wsff: " << curve.size() << " points, " << (curve.all_converged() ? "all converged" : "not all converged") << ", "
            << diverging << " flagged diverging\n";
    return kExitOk;
}

inline int cmd_rate(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const FamilyModel m = model_of(c);
    RateOptions ro;
    ro.jobs = c.jobs;
    std::vector<RatePoint> pts;
    std::optional<GridFunction> A;
    for (std::size_t k = 0; k < c.alphas.size(); ++k) {
        const Vec& a = c.alphas[k];
        const std::uint64_t seed = derive_seed(c.seed, 1000003ULL * (k + 1));
        std::string method = c.rate_method;
        if (method == "auto") method = m.exact_log_local_prob ? "exact" : (m.tilted_sampler ? "tilted" : "naive");
        if (method == "exact" || method == "naive") {
            ro.force_monte_carlo = method == "naive";
            if (method == "exact" && !m.exact_log_local_prob) throw CapabilityError(m.id + ": no closed-form local probability");
            pts.push_back(estimate_local_rate_naive(m, a, c.eps_schedule, c.T_ladder, c.N, seed, ro));
        } else {
            if (!A) A = estimate_wsff_curve(m, *c.mu_grid, c.T_ladder, c.M_schedule, c.N, c.seed, curve_options(c)).to_grid_function();
            ro.force_monte_carlo = false;
            pts.push_back(estimate_local_rate_tilted(m, a, *A, c.eps_schedule, c.T_ladder, c.M_schedule, c.N, seed, ro));
        }
        ctx.tasks += c.T_ladder.size();
    }
    if (ctx.json()) write_text(ctx.path("rate.json"), io::rate_json(pts).dump(2) + "\n");
    else {
        auto out = io::open_out(ctx.path("rate.csv"));
        io::write_rate_csv(out, pts);
    }
    for (const auto& p : pts) {
        ctx.log << "rate at (";
        for (std::size_t i = 0; i < p.alpha.size(); ++i) ctx.log << (i ? ", " : "") << p.alpha[i];
        ctx.log << "): " << format_real(p.D_hat.value) << " [" << to_string(p.method) << "]";
        if (p.D_hat.flags) ctx.log << " flags " << flags_to_string(p.D_hat.flags);
        ctx.log << '\n';
    }
    return kExitOk;
}

inline int cmd_duality(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const FamilyModel m = model_of(c);
    DualityReport r;
    const std::string& dir = c.duality_direction;
    if (dir == "ff-agreement") {
        r = ff_wsff_agreement(m, *c.mu_grid, c.T_ladder, c.M_schedule, c.N, c.seed, c.tolerance, c.jobs);
        ctx.tasks = 2 * c.mu_grid->size() * c.T_ladder.size();
    } else {
        const GridFunction D = rate_on_grid(c, m);
        if (dir == "minorant") {
            r = minorant_check(D, *c.mu_grid, c.tolerance);
        } else {
            const Curve A = estimate_wsff_curve(m, *c.mu_grid, c.T_ladder, c.M_schedule, c.N, c.seed, curve_options(c));
            ctx.tasks = A.size() * c.T_ladder.size();
            r = dir == "forward" ? verify_forward(D, A, c.tolerance) : verify_converse(A, D, c.tolerance);
            write_curve(ctx, A, "wsff");
        }
    }
    write_text(ctx.path("duality.json"), io::duality_json(r).dump(2) + "\n");
    if (r.transform) io::emit_plot_data(*r.transform, ctx.path("transform.dat"), "transform", c.plot_script);
    ctx.log << "duality " << to_string(r.direction) << ": sup distance " << format_real(r.sup_distance) << ", "
            << (r.pass ? "pass" : "fail") << (r.precondition_failed ? " (precondition-failed)" : "")
            << (r.diverging ? " (diverging)" : "") << '\n';
    return kExitOk;
}

inline int cmd_tightness(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const FamilyModel m = model_of(c);
    const TightnessTable t = exponential_tightness_probe(m, c.v_grid, c.T_ladder, c.N, c.seed, c.jobs);
    ctx.tasks = c.v_grid.size() * c.T_ladder.size();
    if (ctx.json()) write_text(ctx.path("tightness.json"), io::tightness_json(t).dump(2) + "\n");
    else {
        auto out = io::open_out(ctx.path("tightness.csv"));
        io::write_tightness_csv(out, t);
    }
    for (std::size_t i = 0; i < t.v_grid.size(); ++i)
        ctx.log << "tightness v = " << t.v_grid[i] << ": " << format_real(t.values[i].back().value) << " ("
                << to_string(t.verdicts[i]) << ")\n";
    return kExitOk;
}

inline int cmd_repro(RunContext& ctx) {
    const repro::CheckGroup g = repro::run_target(ctx.cfg.repro_target);
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& ch : g.checks) {
        checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
        ctx.log << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
    }
    write_text(ctx.path("repro_" + ctx.cfg.repro_target + ".json"),
               nlohmann::ordered_json{{"target", ctx.cfg.repro_target}, {"pass", g.pass()}, {"checks", checks}}.dump(2) + "\n");
    return g.pass() ? kExitOk : kExitAssertion;
}

inline std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

/// Runs one configured command. Exit codes: 0 ok, 1 configuration or
/// capability error, 2 numerical failure, 3 failed repro assertion.
inline int run(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    const auto start = std::chrono::steady_clock::now();
    detail::RunContext ctx{cfg, cfg.out, {}, 0, log};
    int code = kExitOk;
    try {
        std::filesystem::create_directories(ctx.dir);
        switch (cfg.command) {
            case Command::Conjugate: code = detail::cmd_conjugate(ctx); break;
            case Command::Wsff: code = detail::cmd_wsff(ctx); break;
            case Command::Rate: code = detail::cmd_rate(ctx); break;
            case Command::Duality: code = detail::cmd_duality(ctx); break;
            case Command::Tightness: code = detail::cmd_tightness(ctx); break;
            case Command::Repro: code = detail::cmd_repro(ctx); break;
        }
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::ordered_json manifest = {{"artifact", "ldplab"},
                                       {"version", kVersion},
                                       {"command", to_string(cfg.command)},
                                       {"started_utc", detail::utc_now()},
                                       {"wall_clock_seconds", wall},
                                       {"master_seed", cfg.seed},
                                       {"tasks", ctx.tasks},
                                       {"seeds_digest", detail::seeds_digest(cfg.seed, ctx.tasks)},
                                       {"outputs", ctx.outputs},
                                       {"exit_code", code},
                                       {"config", to_ini(cfg)}};
    try {
        detail::write_text((ctx.dir / "manifest.json").string(), manifest.dump(2) + "\n");
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return code;
}

}  // namespace ldplab
