#include "fdabs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace fdabs {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    if (token == "inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    if (!token.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, x);
    if (res.ec != std::errc() || res.ptr != end || token.empty()) {
        throw FormatError("not a number: '" + token + "'");
    }
    return x;
}

namespace {

void write_header(std::ostream& os, const Header& extra, const Header& builtin) {
    for (const auto& [k, v] : extra) {
        if (builtin.count(k)) continue;
        os << "# " << k << '=' << v << '\n';
    }
    for (const auto& [k, v] : builtin) os << "# " << k << '=' << v << '\n';
}

struct Parsed {
    Header header;
    std::vector<double> x;
    std::vector<double> v;
};

Parsed parse(std::istream& is) {
    Parsed p;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::size_t b = 1;
            while (b < eq && line[b] == ' ') ++b;
            p.header[line.substr(b, eq - b)] = line.substr(eq + 1);
            continue;
        }
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a >> b) || (ls >> extra)) {
            throw FormatError("line " + std::to_string(lineno) + ": expected two columns");
        }
        p.x.push_back(parse_double(a));
        p.v.push_back(parse_double(b));
    }
    if (p.x.empty()) throw FormatError("no data lines");
    return p;
}

const std::string& require(const Header& h, const std::string& key) {
    const auto it = h.find(key);
    if (it == h.end()) throw FormatError("missing header key '" + key + "'");
    return it->second;
}

int parse_int(const std::string& s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("not an integer: '" + s + "'");
    return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const Snapshot& snap, const Header& extra) {
    const RadialGrid& g = *snap.field.grid;
    const Header builtin{{"kind", "snapshot"},
                         {"N", std::to_string(g.dimension())},
                         {"R_max", format_double(g.R_max())},
                         {"n_cells", std::to_string(g.n_cells())},
                         {"stretch", format_double(g.stretch())},
                         {"t", format_double(snap.t)},
                         {"mass", format_double(snap.mass)},
                         {"sup", format_double(snap.sup)},
                         {"center_value", format_double(snap.center_value)}};
    write_header(os, extra, builtin);
    const auto r = g.centers();
    for (std::size_t i = 0; i < r.size(); ++i) {
        os << format_double(r[i]) << ' ' << format_double(snap.field.values[i]) << '\n';
    }
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, const Header& extra) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    write_snapshot(os, snap, extra);
    if (!os) throw FormatError("write failed for " + path.string());
}

LoadedSnapshot read_snapshot(std::istream& is) {
    Parsed p = parse(is);
    if (require(p.header, "kind") != "snapshot") throw FormatError("not a snapshot file");
    const int N = parse_int(require(p.header, "N"));
    const double t = parse_double(require(p.header, "t"));
    GridPtr grid;
    try {
        const double R = parse_double(require(p.header, "R_max"));
        const int n = parse_int(require(p.header, "n_cells"));
        const double stretch = parse_double(require(p.header, "stretch"));
        GridPtr candidate = build_grid(N, R, n, stretch);
        const auto c = candidate->centers();
        if (c.size() == p.x.size() && std::equal(c.begin(), c.end(), p.x.begin())) grid = candidate;
    } catch (const ParameterError&) {
    } catch (const FormatError&) {
    }
    if (!grid) grid = grid_from_centers(N, p.x);
    Field f{grid, std::move(p.v)};
    f.validate();
    return LoadedSnapshot{make_snapshot(t, std::move(f)), std::move(p.header)};
}

LoadedSnapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path.string());
    return read_snapshot(is);
}

void write_profile(std::ostream& os, const RescaledProfile& profile, const Header& extra) {
    const Header builtin{{"kind", "rescaled_profile"}, {"s", format_double(profile.s)}, {"T", format_double(profile.T)}};
    write_header(os, extra, builtin);
    for (std::size_t i = 0; i < profile.y.size(); ++i) {
        os << format_double(profile.y[i]) << ' ' << format_double(profile.values[i]) << '\n';
    }
}

LoadedProfile read_profile(std::istream& is) {
    Parsed p = parse(is);
    if (require(p.header, "kind") != "rescaled_profile") throw FormatError("not a rescaled profile file");
    RescaledProfile prof{parse_double(require(p.header, "s")), parse_double(require(p.header, "T")), std::move(p.x),
                         std::move(p.v), nullptr};
    return LoadedProfile{std::move(prof), std::move(p.header)};
}

}  // namespace fdabs
