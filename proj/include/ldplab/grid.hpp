#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ldplab/core.hpp"

namespace ldplab {

/// One uniform axis: `count` nodes from `lower` to `upper` inclusive.
struct Axis {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t count = 2;

    double spacing() const { return (upper - lower) / static_cast<double>(count - 1); }

    // Written as lower + (upper - lower) * i / (n - 1) so that nodes which are
    // exact binary fractions of the window (0, 1, ...) come out exact.
    double node(std::size_t i) const {
        if (i + 1 == count) return upper;
        return lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(count - 1);
    }

    bool operator==(const Axis&) const = default;
};

/// Uniform rectangular grid over R^d, d in {1, 2}. Flat indices are
/// row-major: flat = i0 * count1 + i1.
class GridSpec {
public:
    GridSpec() : GridSpec(std::vector<Axis>{Axis{}}) {}

    explicit GridSpec(std::vector<Axis> axes) : axes_(std::move(axes)) {
        if (axes_.empty() || axes_.size() > 2) throw DomainError("grid dimension must be 1 or 2");
        for (const auto& a : axes_) {
            if (a.count < 2) throw DomainError("grid axis needs at least 2 points");
            if (!(a.lower < a.upper)) throw DomainError("grid axis needs lower < upper");
            if (!std::isfinite(a.lower) || !std::isfinite(a.upper)) throw DomainError("grid bounds must be finite");
        }
    }

    static GridSpec line(double lower, double upper, std::size_t count) {
        return GridSpec({Axis{lower, upper, count}});
    }
    static GridSpec square(double lower, double upper, std::size_t count) {
        return GridSpec({Axis{lower, upper, count}, Axis{lower, upper, count}});
    }
    static GridSpec rect(Axis a0, Axis a1) { return GridSpec({a0, a1}); }

    int dimension() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int k) const { return axes_.at(static_cast<std::size_t>(k)); }
    const std::vector<Axis>& axes() const { return axes_; }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : axes_) n *= a.count;
        return n;
    }

    /// Largest per-axis spacing.
    double spacing() const {
        double h = 0.0;
        for (const auto& a : axes_) h = std::max(h, a.spacing());
        return h;
    }

    std::array<std::size_t, 2> unflatten(std::size_t flat) const {
        if (axes_.size() == 1) return {flat, 0};
        return {flat / axes_[1].count, flat % axes_[1].count};
    }

    std::size_t flatten(std::size_t i0, std::size_t i1 = 0) const {
        if (axes_.size() == 1) return i0;
        return i0 * axes_[1].count + i1;
    }

    /// Stride of axis k in flat indexing.
    std::size_t stride(int k) const { return (axes_.size() == 2 && k == 0) ? axes_[1].count : 1; }

    Vec point(std::size_t flat) const {
        const auto idx = unflatten(flat);
        Vec p(axes_.size());
        for (std::size_t k = 0; k < axes_.size(); ++k) p[k] = axes_[k].node(idx[k]);
        return p;
    }

    /// True when the node lies on the outer edge of the window.
    bool on_window_edge(std::size_t flat) const {
        const auto idx = unflatten(flat);
        for (std::size_t k = 0; k < axes_.size(); ++k)
            if (idx[k] == 0 || idx[k] + 1 == axes_[k].count) return true;
        return false;
    }

    /// Cells from the window edge (0 for edge nodes).
    std::size_t edge_distance(std::size_t flat) const {
        const auto idx = unflatten(flat);
        std::size_t d = static_cast<std::size_t>(-1);
        for (std::size_t k = 0; k < axes_.size(); ++k)
            d = std::min({d, idx[k], axes_[k].count - 1 - idx[k]});
        return d;
    }

    bool contains(const Vec& p) const {
        if (p.size() != axes_.size()) return false;
        for (std::size_t k = 0; k < axes_.size(); ++k)
            if (p[k] < axes_[k].lower || p[k] > axes_[k].upper) return false;
        return true;
    }

    bool operator==(const GridSpec&) const = default;

private:
    std::vector<Axis> axes_;
};

/// Extended-real function sampled on a GridSpec. Values are finite or +inf;
/// at least one value is finite.
class GridFunction {
public:
    GridFunction(GridSpec spec, std::vector<double> values) : spec_(std::move(spec)), values_(std::move(values)) {
        if (values_.size() != spec_.size()) throw DomainError("grid function: value count does not match grid");
        finite_count_ = 0;
        for (double v : values_) {
            if (std::isnan(v) || v == -kInf) throw DomainError("grid function values must be finite or +inf");
            if (std::isfinite(v)) ++finite_count_;
        }
        if (finite_count_ == 0) throw DomainError("grid function is entirely +inf");
    }

    static GridFunction sample(const GridSpec& spec, const std::function<double(const Vec&)>& f) {
        std::vector<double> v(spec.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(spec.point(i));
        return GridFunction(spec, std::move(v));
    }

    const GridSpec& spec() const { return spec_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t flat) const { return values_[flat]; }
    double at(std::size_t i0, std::size_t i1 = 0) const { return values_[spec_.flatten(i0, i1)]; }
    std::size_t finite_count() const { return finite_count_; }
    std::size_t size() const { return values_.size(); }
    bool finite(std::size_t flat) const { return std::isfinite(values_[flat]); }

private:
    GridSpec spec_;
    std::vector<double> values_;
    std::size_t finite_count_ = 0;
};

// ---------------------------------------------------------------------------
// CSV: header `axis0[,axis1],value`, +inf written as `inf`.

inline std::string format_real(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_real(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s == "inf" || s == "+inf" || s == "Inf" || s == "infinity") return kInf;
    if (s == "-inf" || s == "-Inf") return -kInf;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError("not a number: '" + raw + "'");
    }
    if (used != s.size()) throw DomainError("not a number: '" + raw + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline void write_csv(std::ostream& os, const GridFunction& f) {
    const int d = f.spec().dimension();
    os << (d == 1 ? "axis0,value\n" : "axis0,axis1,value\n");
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec p = f.spec().point(i);
        for (double x : p) os << format_real(x) << ',';
        os << format_real(f[i]) << '\n';
    }
}

namespace detail {
inline Axis infer_axis(std::vector<double> coords) {
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    if (coords.size() < 2) throw DomainError("csv grid: axis needs at least 2 distinct coordinates");
    Axis a{coords.front(), coords.back(), coords.size()};
    const double h = a.spacing();
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (std::abs(coords[i] - a.node(i)) > 1e-9 * std::max(1.0, std::abs(h)) + 1e-6 * h)
            throw DomainError("csv grid: coordinates are not uniformly spaced");
    return a;
}
}  // namespace detail

inline GridFunction read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    int d = 0;
    if (header.size() == 2 && header[0] == "axis0" && header[1] == "value")
        d = 1;
    else if (header.size() == 3 && header[0] == "axis0" && header[1] == "axis1" && header[2] == "value")
        d = 2;
    else
        throw DomainError("csv: header must be 'axis0,value' or 'axis0,axis1,value'");

    std::vector<std::array<double, 3>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != d + 1) throw DomainError("csv: wrong number of columns in '" + line + "'");
        std::array<double, 3> r{0, 0, 0};
        for (int k = 0; k <= d; ++k) r[static_cast<std::size_t>(k)] = parse_real(cells[static_cast<std::size_t>(k)]);
        rows.push_back(r);
    }
    std::vector<Axis> axes;
    for (int k = 0; k < d; ++k) {
        std::vector<double> c;
        c.reserve(rows.size());
        for (const auto& r : rows) c.push_back(r[static_cast<std::size_t>(k)]);
        axes.push_back(detail::infer_axis(std::move(c)));
    }
    GridSpec spec(axes);
    if (rows.size() != spec.size()) throw DomainError("csv: grid is not a full rectangle");
    std::vector<double> values(spec.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : rows) {
        std::array<std::size_t, 2> idx{0, 0};
        for (int k = 0; k < d; ++k) {
            const Axis& a = spec.axis(k);
            idx[static_cast<std::size_t>(k)] =
                static_cast<std::size_t>(std::llround((r[static_cast<std::size_t>(k)] - a.lower) / a.spacing()));
        }
        const std::size_t flat = spec.flatten(idx[0], idx[1]);
        if (!std::isnan(values[flat])) throw DomainError("csv: duplicate grid node");
        values[flat] = r[static_cast<std::size_t>(d)];
    }
    return GridFunction(spec, std::move(values));
}

inline GridFunction read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    return read_csv(in);
}

}  // namespace ldplab
