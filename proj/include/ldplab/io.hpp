#pragma once

// CSV / JSON emission for curves, rate points, duality reports, tightness
// tables, and plain-text plot data.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldplab/duality.hpp"
#include "ldplab/estimate.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/lldp.hpp"

namespace ldplab::io {

using json = nlohmann::ordered_json;

/// JSON has no infinities; they travel as the strings "inf" / "-inf".
inline json real(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

inline json vec(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(real(x));
    return a;
}

inline json grid_json(const GridSpec& g) {
    json axes = json::array();
    for (const auto& a : g.axes()) axes.push_back({{"lower", a.lower}, {"upper", a.upper}, {"count", a.count}});
    return {{"dimension", g.dimension()}, {"axes", axes}};
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path);
    return out;
}

// ---------------------------------------------------------------------------
// Curves: mu0[,mu1],value,ci,neff,T,M,converged

inline void write_curve_csv(std::ostream& os, const Curve& c) {
    const std::size_t d = c.arguments.empty() ? (c.grid ? static_cast<std::size_t>(c.grid->dimension()) : 1)
                                              : c.arguments.front().size();
    os << (d == 1 ? "mu0" : "mu0,mu1") << ",value,ci,neff,T,M,converged\n";
    const double T = c.T_ladder.empty() ? 0.0 : c.T_ladder.back();
    const double M = c.M_ladder.empty() ? 0.0 : c.M_ladder.back();
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (double x : c.arguments[i]) os << format_real(x) << ',';
        const auto& e = c.estimates[i];
        os << format_real(e.value) << ',' << format_real(e.ci_half_width) << ',' << format_real(e.n_effective) << ','
           << format_real(T) << ',' << format_real(M) << ',' << (c.converged[i] ? 1 : 0) << '\n';
    }
}

inline json curve_json(const Curve& c) {
    json rows = json::array();
    const double T = c.T_ladder.empty() ? 0.0 : c.T_ladder.back();
    const double M = c.M_ladder.empty() ? 0.0 : c.M_ladder.back();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& e = c.estimates[i];
        json row;
        for (std::size_t k = 0; k < c.arguments[i].size(); ++k) row["mu" + std::to_string(k)] = real(c.arguments[i][k]);
        row["value"] = real(e.value);
        row["ci"] = real(e.ci_half_width);
        row["neff"] = real(e.n_effective);
        row["T"] = real(T);
        row["M"] = real(M);
        row["converged"] = static_cast<bool>(c.converged[i]);
        row["provenance"] = to_string(e.provenance);
        row["flags"] = flags_to_string(e.flags);
        rows.push_back(row);
    }
    json T_ladder = json::array(), M_ladder = json::array();
    for (double t : c.T_ladder) T_ladder.push_back(real(t));
    for (double m : c.M_ladder) M_ladder.push_back(real(m));
    return {{"T_ladder", T_ladder}, {"M_ladder", M_ladder}, {"tolerance", c.tolerance}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Rate points: alpha0[,alpha1],D_hat,ci,method,eps,T,M,neff,flags

inline void write_rate_csv(std::ostream& os, const std::vector<RatePoint>& pts) {
    const std::size_t d = pts.empty() ? 1 : pts.front().alpha.size();
    os << (d == 1 ? "alpha0" : "alpha0,alpha1") << ",D_hat,ci,method,eps,T,M,neff,flags\n";
    for (const auto& p : pts) {
        for (double x : p.alpha) os << format_real(x) << ',';
        os << format_real(p.D_hat.value) << ',' << format_real(p.D_hat.ci_half_width) << ',' << to_string(p.method) << ','
           << format_real(p.eps_used) << ',' << format_real(p.T_used) << ',' << format_real(p.M_used) << ','
           << format_real(p.D_hat.n_effective) << ',' << flags_to_string(p.D_hat.flags) << '\n';
    }
}

inline json rate_json(const std::vector<RatePoint>& pts) {
    json rows = json::array();
    for (const auto& p : pts) {
        json row;
        for (std::size_t k = 0; k < p.alpha.size(); ++k) row["alpha" + std::to_string(k)] = real(p.alpha[k]);
        row["D_hat"] = real(p.D_hat.value);
        row["ci"] = real(p.D_hat.ci_half_width);
        row["method"] = to_string(p.method);
        row["eps"] = real(p.eps_used);
        row["T"] = real(p.T_used);
        row["M"] = real(p.M_used);
        row["neff"] = real(p.D_hat.n_effective);
        row["flags"] = flags_to_string(p.D_hat.flags);
        if (p.tilt) {
            row["tilt"] = {{"mu", vec(p.tilt->mu_star)},
                           {"residual", real(p.tilt->residual)},
                           {"status", to_string(p.tilt->status)}};
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

inline json duality_json(const DualityReport& r) {
    json w = json::array();
    for (const auto& x : r.witnesses)
        w.push_back({{"point", vec(x.point)}, {"discrepancy", real(x.discrepancy)}, {"lhs", real(x.lhs)}, {"rhs", real(x.rhs)}});
    json j = {{"direction", to_string(r.direction)},
              {"sup_distance", real(r.sup_distance)},
              {"pass", r.pass},
              {"window", grid_json(r.window)},
              {"witnesses", w},
              {"tolerance", real(r.tolerance)},
              {"precondition_failed", r.precondition_failed},
              {"diverging", r.diverging}};
    if (r.smoothness) j["smoothness"] = to_string(r.smoothness->verdict);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

// ---------------------------------------------------------------------------

inline void write_tightness_csv(std::ostream& os, const TightnessTable& t) {
    os << "v,T,value,ci,neff,verdict\n";
    for (std::size_t i = 0; i < t.v_grid.size(); ++i)
        for (std::size_t r = 0; r < t.T_ladder.size(); ++r) {
            const auto& e = t.values[i][r];
            os << format_real(t.v_grid[i]) << ',' << format_real(t.T_ladder[r]) << ',' << format_real(e.value) << ','
               << format_real(e.ci_half_width) << ',' << format_real(e.n_effective) << ',' << to_string(t.verdicts[i]) << '\n';
        }
}

inline json tightness_json(const TightnessTable& t) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.v_grid.size(); ++i)
        for (std::size_t r = 0; r < t.T_ladder.size(); ++r) {
            const auto& e = t.values[i][r];
            rows.push_back({{"v", real(t.v_grid[i])},
                            {"T", real(t.T_ladder[r])},
                            {"value", real(e.value)},
                            {"ci", real(e.ci_half_width)},
                            {"neff", real(e.n_effective)},
                            {"verdict", to_string(t.verdicts[i])}});
        }
    return rows;
}

// ---------------------------------------------------------------------------
// Plot data: whitespace-separated columns, `#` header. 2-D data is written
// row by row with a blank line after each row of the first axis.

inline void write_plot_data(std::ostream& os, const std::vector<Vec>& args, const std::vector<double>& values,
                            const std::optional<GridSpec>& grid, const std::string& value_name) {
    const std::size_t d = args.empty() ? (grid ? static_cast<std::size_t>(grid->dimension()) : 1) : args.front().size();
    os << (d == 1 ? "# x " : "# x y ") << value_name << '\n';
    const std::size_t row = (grid && grid->dimension() == 2) ? grid->axis(1).count : 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        for (double x : args[i]) os << format_real(x) << ' ';
        os << format_real(values[i]) << '\n';
        if (row && (i + 1) % row == 0 && i + 1 < args.size()) os << '\n';
    }
}

inline void write_plot_data(std::ostream& os, const Curve& c, const std::string& value_name = "value") {
    write_plot_data(os, c.arguments, c.values(), c.grid, value_name);
}

inline void write_plot_data(std::ostream& os, const GridFunction& f, const std::string& value_name = "value") {
    std::vector<Vec> args(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) args[i] = f.spec().point(i);
    write_plot_data(os, args, f.values(), f.spec(), value_name);
}

/// Companion script in gnuplot syntax for a data file written above.
inline std::string plot_script(const std::string& data_file, int dimension, const std::string& title) {
    std::ostringstream s;
    s << "set title \"" << title << "\"\n";
    if (dimension == 1)
        s << "plot \"" << data_file << "\" using 1:2 with lines title \"" << title << "\"\n";
    else
        s << "splot \"" << data_file << "\" using 1:2:3 with lines title \"" << title << "\"\n";
    return s.str();
}

template <typename T>
void emit_plot_data(const T& item, const std::string& path, const std::string& title = "value", bool with_script = false) {
    auto out = open_out(path);
    write_plot_data(out, item, title);
    if (!out) throw DomainError("write failed: " + path);
    if (with_script) {
        int d = 1;
        if constexpr (std::is_same_v<T, GridFunction>) d = item.spec().dimension();
        else if (item.grid) d = item.grid->dimension();
        else if (!item.arguments.empty()) d = static_cast<int>(item.arguments.front().size());
        auto script = open_out(path + ".gp");
        script << plot_script(std::filesystem::path(path).filename().string(), d, title);
    }
}

}  // namespace ldplab::io
