#pragma once

// Sectioned key = value run configuration.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ldplab/core.hpp"
#include "ldplab/estimate.hpp"
#include "ldplab/families.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/wsff.hpp"

namespace ldplab {

class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Raw document: section -> key -> value, in file order of sections.
struct IniDocument {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::map<std::string, std::map<std::string, int>> lines;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline IniDocument parse_ini(const std::string& text) {
    IniDocument doc;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of(";#");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            doc.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (doc.sections[section].count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        doc.sections[section][key] = trim(line.substr(eq + 1));
        doc.lines[section][key] = lineno;
    }
    return doc;
}

// ---------------------------------------------------------------------------

enum class Command { Conjugate, Wsff, Rate, Duality, Tightness, Repro };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::Conjugate: return "conjugate";
        case Command::Wsff: return "wsff";
        case Command::Rate: return "rate";
        case Command::Duality: return "duality";
        case Command::Tightness: return "tightness";
        case Command::Repro: return "repro";
    }
    return "?";
}

inline Command parse_command(const std::string& s) {
    if (s == "conjugate") return Command::Conjugate;
    if (s == "wsff") return Command::Wsff;
    if (s == "rate") return Command::Rate;
    if (s == "duality") return Command::Duality;
    if (s == "tightness") return Command::Tightness;
    if (s == "repro") return Command::Repro;
    throw ConfigError("unknown command '" + s + "'");
}

enum class OutputFormat { Csv, Json };

inline const std::vector<std::string>& repro_targets() {
    static const std::vector<std::string> t{"example1", "example2a", "example2b", "example3"};
    return t;
}

struct RunConfig {
    Command command = Command::Rate;
    std::string repro_target;

    std::string model_id;
    FamilyParams params;

    std::optional<GridSpec> mu_grid;     // defaults depend on the model dimension
    std::optional<GridSpec> alpha_grid;
    ScheduleSpec eps_schedule = ScheduleSpec::power(1.0 / 3.0);
    ScheduleSpec M_schedule = ScheduleSpec::power(1.0 / 3.0);

    std::vector<double> T_ladder{100.0, 1000.0, 10000.0};
    std::size_t N = 10000;
    std::uint64_t seed = 20240601;
    unsigned jobs = 1;
    std::string out = "out";
    OutputFormat format = OutputFormat::Csv;

    std::vector<Vec> alphas;
    std::string rate_method = "auto";  // auto | exact | naive | tilted
    std::vector<double> v_grid{1.0, 2.0};
    std::string duality_direction = "forward";
    double tolerance = 0.05;
    double curve_tolerance = 0.02;
    Truncation truncation = Truncation::Ball;
    std::string conjugate_input;
    std::optional<GridSpec> dual_grid;
    bool plot_script = false;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

inline double to_real(const std::string& key, const std::string& v) {
    try {
        return parse_real(v);
    } catch (const DomainError&) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
}

inline std::vector<double> to_reals(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& x : split_list(v, ',')) out.push_back(to_real(key, x));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used, 0);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
    }
    if (used != v.size() || v.front() == '-') throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
    return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline std::string join_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_real(v[i]);
    }
    return s;
}

class Reader {
public:
    explicit Reader(const IniDocument& doc) : doc_(doc) {}

    const std::string* get(const std::string& section, const std::string& key) {
        seen_.insert(section + "\x1f" + key);
        auto s = doc_.sections.find(section);
        if (s == doc_.sections.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    bool has_section(const std::string& section) const { return doc_.sections.count(section) > 0; }

    std::vector<std::string> unknown() const {
        std::vector<std::string> out;
        for (const auto& [section, keys] : doc_.sections)
            for (const auto& [key, value] : keys)
                if (!seen_.count(section + "\x1f" + key))
                    out.push_back((section.empty() ? std::string() : "[" + section + "] ") + key);
        return out;
    }

private:
    const IniDocument& doc_;
    std::set<std::string> seen_;
};

// dimension 0: take it from the longest per-axis list.
inline std::optional<GridSpec> read_grid(Reader& r, const std::string& section, int dimension) {
    const std::string* lo = r.get(section, "lower");
    const std::string* hi = r.get(section, "upper");
    const std::string* n = r.get(section, "count");
    if (!lo && !hi && !n) return std::nullopt;
    if (!lo || !hi || !n) throw ConfigError("[" + section + "] needs lower, upper and count");
    auto lows = to_reals(section + ".lower", *lo);
    auto highs = to_reals(section + ".upper", *hi);
    auto counts = to_reals(section + ".count", *n);
    if (dimension == 0) dimension = static_cast<int>(std::max({lows.size(), highs.size(), counts.size()}));
    auto widen = [&](std::vector<double>& v, const char* what) {
        if (v.size() == 1) v.assign(static_cast<std::size_t>(dimension), v[0]);
        if (static_cast<int>(v.size()) != dimension)
            throw ConfigError("[" + section + "] " + what + " has " + std::to_string(v.size()) + " entries, dimension is " +
                              std::to_string(dimension));
    };
    widen(lows, "lower");
    widen(highs, "upper");
    widen(counts, "count");
    std::vector<Axis> axes;
    for (int k = 0; k < dimension; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (!(counts[ku] >= 2) || counts[ku] != std::floor(counts[ku])) throw ConfigError("[" + section + "] count must be an integer >= 2");
        axes.push_back(Axis{lows[ku], highs[ku], static_cast<std::size_t>(counts[ku])});
    }
    try {
        return GridSpec(axes);
    } catch (const DomainError& e) {
        throw ConfigError("[" + section + "] " + e.what());
    }
}

inline ScheduleSpec read_schedule(Reader& r, const std::string& section, ScheduleSpec s) {
    if (const auto* v = r.get(section, "kind")) {
        try {
            s.kind = parse_schedule_kind(*v);
        } catch (const DomainError& e) {
            throw ConfigError("[" + section + "] " + e.what());
        }
    }
    if (const auto* v = r.get(section, "exponent")) s.exponent = to_real(section + ".exponent", *v);
    if (const auto* v = r.get(section, "scale")) s.scale = to_real(section + ".scale", *v);
    if (const auto* v = r.get(section, "multipliers")) s.multipliers = to_reals(section + ".multipliers", *v);
    try {
        s.validate("[" + section + "] schedule");
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid schedule: ") + e.what());
    }
    return s;
}

inline std::string grid_ini(const std::string& section, const GridSpec& g) {
    std::vector<double> lo, hi, n;
    for (const auto& a : g.axes()) {
        lo.push_back(a.lower);
        hi.push_back(a.upper);
        n.push_back(static_cast<double>(a.count));
    }
    return "[" + section + "]\nlower = " + join_reals(lo) + "\nupper = " + join_reals(hi) + "\ncount = " + join_reals(n) + "\n\n";
}

inline std::string schedule_ini(const std::string& section, const ScheduleSpec& s) {
    return "[" + section + "]\nkind = " + to_string(s.kind) + "\nexponent = " + format_real(s.exponent) +
           "\nscale = " + format_real(s.scale) + "\nmultipliers = " + join_reals(s.multipliers) + "\n\n";
}

}  // namespace detail

/// Default grids per model dimension.
inline GridSpec default_mu_grid(int dimension) {
    return dimension == 1 ? GridSpec::line(-2.0, 2.0, 81) : GridSpec::square(-1.0, 2.0, 61);
}
inline GridSpec default_alpha_grid(int dimension) {
    return dimension == 1 ? GridSpec::line(-3.0, 3.0, 121) : GridSpec::square(-0.5, 1.5, 81);
}

/// Command-line style overrides: (section, key) -> value, applied on top of
/// the document before validation.
using ConfigOverrides = std::map<std::pair<std::string, std::string>, std::string>;

inline RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {}) {
    IniDocument doc = parse_ini(text);
    for (const auto& [where, value] : overrides) doc.sections[where.first][where.second] = value;
    detail::Reader r(doc);
    RunConfig c;

    if (const auto* v = r.get("run", "command")) c.command = parse_command(*v);
    if (const auto* v = r.get("run", "target")) c.repro_target = *v;
    if (c.command == Command::Repro) {
        if (c.repro_target.empty()) throw ConfigError("repro needs [run] target");
        const auto& t = repro_targets();
        if (std::find(t.begin(), t.end(), c.repro_target) == t.end())
            throw ConfigError("unknown repro target '" + c.repro_target + "'");
    }
    if (const auto* v = r.get("run", "seed")) c.seed = detail::to_u64("run.seed", *v);
    if (const auto* v = r.get("run", "jobs")) {
        const auto j = detail::to_u64("run.jobs", *v);
        if (j == 0 || j > 1024) throw ConfigError("run.jobs must be in [1, 1024]");
        c.jobs = static_cast<unsigned>(j);
    }
    if (const auto* v = r.get("run", "out")) c.out = *v;
    if (const auto* v = r.get("run", "format")) {
        if (*v == "csv") c.format = OutputFormat::Csv;
        else if (*v == "json") c.format = OutputFormat::Json;
        else throw ConfigError("run.format must be csv or json");
    }
    if (const auto* v = r.get("run", "plot_script")) c.plot_script = detail::to_bool("run.plot_script", *v);

    const std::string* id = r.get("model", "id");
    if (const auto* v = r.get("model", "p")) c.params.p = detail::to_real("model.p", *v);
    if (const auto* v = r.get("model", "rate")) c.params.rate = detail::to_real("model.rate", *v);
    if (const auto* v = r.get("model", "index")) c.params.index = detail::to_real("model.index", *v);
    int dimension = 1;
    if (id) {
        c.model_id = *id;
        const auto& ids = builtin_family_ids();
        if (std::find(ids.begin(), ids.end(), c.model_id) == ids.end())
            throw ConfigError("unknown model '" + c.model_id + "'");
        try {
            dimension = make_family(c.model_id, c.params).dimension;
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[model] ") + e.what());
        }
    } else if (c.command != Command::Conjugate && c.command != Command::Repro) {
        throw ConfigError("missing model: [model] id is required for " + to_string(c.command));
    }

    c.mu_grid = detail::read_grid(r, "mu_grid", dimension);
    if (!c.mu_grid && !c.model_id.empty()) c.mu_grid = default_mu_grid(dimension);
    c.alpha_grid = detail::read_grid(r, "alpha_grid", dimension);
    if (!c.alpha_grid && !c.model_id.empty()) c.alpha_grid = default_alpha_grid(dimension);

    c.eps_schedule = detail::read_schedule(r, "eps", c.eps_schedule);
    c.M_schedule = detail::read_schedule(r, "M", c.M_schedule);

    if (const auto* v = r.get("ladder", "T")) c.T_ladder = detail::to_reals("ladder.T", *v);
    for (std::size_t i = 0; i < c.T_ladder.size(); ++i)
        if (!(c.T_ladder[i] > 0.0) || (i && !(c.T_ladder[i] > c.T_ladder[i - 1])))
            throw ConfigError("ladder.T must be positive and ascending");
    if (const auto* v = r.get("ladder", "N")) c.N = detail::to_u64("ladder.N", *v);
    if (c.N < 100) throw ConfigError("ladder.N must be at least 100");

    if (const auto* v = r.get("rate", "alpha")) {
        for (const auto& pt : detail::split_list(*v, ';')) {
            Vec a = detail::to_reals("rate.alpha", pt);
            if (static_cast<int>(a.size()) != dimension) throw ConfigError("rate.alpha: point dimension does not match the model");
            c.alphas.push_back(a);
        }
    }
    if (c.alphas.empty()) c.alphas.push_back(Vec(static_cast<std::size_t>(dimension), 1.0));
    if (const auto* v = r.get("rate", "method")) {
        if (*v != "auto" && *v != "exact" && *v != "naive" && *v != "tilted")
            throw ConfigError("rate.method must be auto, exact, naive or tilted");
        c.rate_method = *v;
    }
    if (const auto* v = r.get("tightness", "v")) c.v_grid = detail::to_reals("tightness.v", *v);
    if (const auto* v = r.get("duality", "direction")) {
        if (*v != "forward" && *v != "converse" && *v != "minorant" && *v != "ff-agreement")
            throw ConfigError("duality.direction must be forward, converse, minorant or ff-agreement");
        c.duality_direction = *v;
    }
    if (const auto* v = r.get("duality", "tolerance")) c.tolerance = detail::to_real("duality.tolerance", *v);
    if (const auto* v = r.get("wsff", "tolerance")) c.curve_tolerance = detail::to_real("wsff.tolerance", *v);
    if (const auto* v = r.get("wsff", "truncation")) {
        if (*v == "ball") c.truncation = Truncation::Ball;
        else if (*v == "box") c.truncation = Truncation::Box;
        else throw ConfigError("wsff.truncation must be ball or box");
    }
    if (const auto* v = r.get("conjugate", "input")) c.conjugate_input = *v;
    if (c.command == Command::Conjugate && c.conjugate_input.empty())
        throw ConfigError("conjugate needs [conjugate] input = <csv path>");
    // Without a model, the dual grid's dimension is read off its per-axis lists.
    c.dual_grid = detail::read_grid(r, "dual_grid", c.model_id.empty() ? 0 : dimension);

    const auto unknown = r.unknown();
    if (!unknown.empty()) {
        std::string msg = "unknown keys:";
        for (const auto& k : unknown) msg += " " + k + ";";
        msg.pop_back();
        throw ConfigError(msg);
    }
    return c;
}

/// Resolved configuration with every default written out; parse_config of
/// the result yields the same RunConfig.
inline std::string to_ini(const RunConfig& c) {
    std::ostringstream s;
    s << "[run]\ncommand = " << to_string(c.command) << '\n';
    if (!c.repro_target.empty()) s << "target = " << c.repro_target << '\n';
    s << "seed = " << c.seed << "\njobs = " << c.jobs << "\nout = " << c.out
      << "\nformat = " << (c.format == OutputFormat::Csv ? "csv" : "json") << "\nplot_script = " << (c.plot_script ? "true" : "false")
      << "\n\n";
    if (!c.model_id.empty()) {
        s << "[model]\nid = " << c.model_id << "\np = " << format_real(c.params.p) << "\nrate = " << format_real(c.params.rate)
          << "\nindex = " << format_real(c.params.index) << "\n\n";
    }
    if (c.mu_grid) s << detail::grid_ini("mu_grid", *c.mu_grid);
    if (c.alpha_grid) s << detail::grid_ini("alpha_grid", *c.alpha_grid);
    s << detail::schedule_ini("eps", c.eps_schedule) << detail::schedule_ini("M", c.M_schedule);
    s << "[ladder]\nT = " << detail::join_reals(c.T_ladder) << "\nN = " << c.N << "\n\n";
    if (!c.model_id.empty()) {
        s << "[rate]\nalpha = ";
        for (std::size_t i = 0; i < c.alphas.size(); ++i) s << (i ? "; " : "") << detail::join_reals(c.alphas[i]);
        s << "\nmethod = " << c.rate_method << "\n\n";
    }
    s << "[tightness]\nv = " << detail::join_reals(c.v_grid) << "\n\n";
    s << "[duality]\ndirection = " << c.duality_direction << "\ntolerance = " << format_real(c.tolerance) << "\n\n";
    s << "[wsff]\ntolerance = " << format_real(c.curve_tolerance)
      << "\ntruncation = " << (c.truncation == Truncation::Ball ? "ball" : "box") << "\n\n";
    if (!c.conjugate_input.empty()) s << "[conjugate]\ninput = " << c.conjugate_input << "\n\n";
    if (c.dual_grid) s << detail::grid_ini("dual_grid", *c.dual_grid);
    return s.str();
}

}  // namespace ldplab
