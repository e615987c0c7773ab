#include "fdabs/config.hpp"

#include "fdabs/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fdabs {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) out.push_back(trim(item));
    if (!value.empty() && value.back() == ',') out.push_back("");
    return out;
}

double to_number(const std::string& token, const std::string& what) {
    try {
        return parse_double(token);
    } catch (const FormatError&) {
        throw ConfigError(what + ": '" + token + "' is not a number");
    }
}

long long to_integer(const std::string& token, const std::string& what) {
    long long v = 0;
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw ConfigError(what + ": '" + token + "' is not an integer");
    return v;
}

bool to_bool(const std::string& token, const std::string& what) {
    if (token == "true" || token == "yes" || token == "1" || token == "on") return true;
    if (token == "false" || token == "no" || token == "0" || token == "off") return false;
    throw ConfigError(what + ": '" + token + "' is not a boolean");
}

/// Tracks which keys of one section were consumed so leftovers can be
/// reported as unknown.
class Section {
public:
    Section(const IniDocument& doc, const std::string& name) : name_(name) {
        const auto it = doc.sections.find(name);
        if (it != doc.sections.end()) entries_ = &it->second;
    }

    bool present() const { return entries_ != nullptr; }

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (!entries_) return std::nullopt;
        const auto it = entries_->find(key);
        if (it == entries_->end()) return std::nullopt;
        return it->second.value;
    }

    std::string label(const std::string& key) const { return "[" + name_ + "] " + key; }

    std::optional<double> number(const std::string& key) {
        const auto v = raw(key);
        if (!v) return std::nullopt;
        return to_number(*v, label(key));
    }
    double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    std::optional<long long> integer(const std::string& key) {
        const auto v = raw(key);
        if (!v) return std::nullopt;
        return to_integer(*v, label(key));
    }
    std::optional<bool> boolean(const std::string& key) {
        const auto v = raw(key);
        if (!v) return std::nullopt;
        return to_bool(*v, label(key));
    }
    std::optional<std::vector<double>> list(const std::string& key) {
        const auto v = raw(key);
        if (!v) return std::nullopt;
        try {
            return parse_number_list(*v);
        } catch (const ConfigError& e) {
            throw ConfigError(label(key) + ": " + e.what());
        }
    }
    double required_number(const std::string& key) {
        const auto v = number(key);
        if (!v) throw ConfigError("missing " + label(key));
        return *v;
    }

    void finish() const {
        if (!entries_) return;
        for (const auto& [key, entry] : *entries_) {
            if (!used_.count(key)) {
                throw ConfigError("unknown key '" + key + "' in [" + name_ + "] (line " +
                                  std::to_string(entry.line) + ")");
            }
        }
    }

private:
    std::string name_;
    const std::map<std::string, IniDocument::Entry>* entries_ = nullptr;
    std::set<std::string> used_;
};

void require_positive(double v, const std::string& what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}

InitialProfile parse_initial(Section& sec) {
    const auto kind = sec.raw("kind");
    if (!kind) throw ConfigError("missing [initial] kind");
    if (*kind == "indicator") {
        return initial::Indicator{sec.number("R0", 1.0), sec.number("height", 1.0)};
    }
    if (*kind == "barenblatt") return initial::Barenblatt{sec.number("A", 1.0)};
    if (*kind == "power_tail") {
        return initial::PowerTail{sec.number("height", 1.0), sec.required_number("C"), sec.required_number("l")};
    }
    if (*kind == "constant") return initial::Constant{sec.number("height", 1.0)};
    if (*kind == "table") {
        auto r = sec.list("r");
        auto u = sec.list("u");
        if (!r || !u) throw ConfigError("[initial] table needs r and u lists");
        return initial::Table{*r, *u};
    }
    throw ConfigError("[initial] unknown kind '" + *kind + "'");
}

void parse_solver(Section& sec, SolverConfig& s) {
    if (const auto bc = sec.raw("bc")) {
        if (*bc == "zero_flux") s.bc = BoundaryCondition::zero_flux;
        else if (*bc == "dirichlet_zero") s.bc = BoundaryCondition::dirichlet_zero;
        else if (*bc == "dirichlet_data") s.bc = BoundaryCondition::dirichlet_data;
        else throw ConfigError("[solver] bc: unknown value '" + *bc + "'");
    }
    if (const auto mode = sec.raw("absorption_mode")) {
        if (*mode == "split_exact") s.absorption_mode = AbsorptionMode::split_exact;
        else if (*mode == "coupled_implicit") s.absorption_mode = AbsorptionMode::coupled_implicit;
        else throw ConfigError("[solver] absorption_mode: unknown value '" + *mode + "'");
    }
    if (const auto a = sec.boolean("absorption")) s.absorption = *a;
    if (const auto dt = sec.number("dt")) {
        // Fixed step.
        s.dt_init = *dt;
        s.dt_max = *dt;
    }
    s.dt_init = sec.number("dt_init", s.dt_init);
    s.dt_max = sec.number("dt_max", s.dt_max);
    s.dt_rel_max = sec.number("dt_rel_max", s.dt_rel_max);
    s.dt_min = sec.number("dt_min", s.dt_min);
    s.dt_growth = sec.number("dt_growth", s.dt_growth);
    s.dt_cut = sec.number("dt_cut", s.dt_cut);
    s.newton_tol = sec.number("newton_tol", s.newton_tol);
    s.floor = sec.number("floor", s.floor);
    if (const auto it = sec.integer("newton_max_iter")) s.newton_max_iter = static_cast<int>(*it);
    if (const auto it = sec.integer("easy_iterations")) s.easy_iterations = static_cast<int>(*it);
}

const std::set<std::string>& bound_types() {
    static const std::set<std::string> t{"gradient", "upper_bound", "lower_bound", "envelope",
                                         "positivity_transform"};
    return t;
}

checks::Spec parse_check(const std::string& type, Section& sec) {
    using namespace checks;
    if (type == "constants") {
        checks::Constants c;
        c.B0 = sec.number("B0");
        c.q_star = sec.number("q_star");
        c.k = sec.number("k");
        c.delta = sec.number("delta");
        c.A_star = sec.number("A_star");
        c.tol = sec.number("tol", c.tol);
        c.A_star_tol = sec.number("A_star_tol", c.A_star_tol);
        return c;
    }
    if (type == "flat_ode") return FlatOde{sec.number("tol", 1e-4)};
    if (type == "barenblatt_oracle") {
        BarenblattOracle b;
        b.times = sec.list("times").value_or(std::vector<double>{});
        b.tol = sec.number("tol", b.tol);
        b.min_ratio = sec.number("min_ratio");
        return b;
    }
    if (type == "stationarity") {
        Stationarity st;
        st.A = sec.list("A").value_or(st.A);
        st.y_max = sec.number("y_max", st.y_max);
        st.window = sec.number("window", st.window);
        st.h = sec.number("h", st.h);
        st.levels = static_cast<int>(sec.integer("levels").value_or(st.levels));
        st.min_order = sec.number("min_order", st.min_order);
        if (st.levels < 2) throw ConfigError("[check] stationarity needs levels >= 2");
        if (!(st.window < st.y_max)) throw ConfigError("[check] stationarity needs window < y_max");
        return st;
    }
    if (bound_types().count(type)) {
        Bound b;
        b.times = sec.list("times").value_or(std::vector<double>{});
        b.tol = sec.number("tol");
        if (type == "envelope") b.eps = sec.number("eps", b.eps);
        return b;
    }
    if (type == "tail_fit") {
        TailFit f;
        f.time = sec.number("time", f.time);
        f.r_lo = sec.number("r_lo", f.r_lo);
        f.r_hi = sec.number("r_hi");
        f.target = sec.number("target");
        f.rel_tol = sec.number("rel_tol", f.rel_tol);
        return f;
    }
    if (type == "boundary_monitor") {
        BoundaryMonitor b;
        b.times = sec.list("times").value_or(std::vector<double>{});
        b.tol = sec.number("tol", b.tol);
        return b;
    }
    if (type == "residual_sign") {
        ResidualSign r;
        r.kind = sec.raw("kind").value_or(r.kind);
        if (r.kind != "sub" && r.kind != "super") throw ConfigError("[check] residual_sign kind must be sub or super");
        if (const auto n = sec.integer("N")) r.N = static_cast<int>(*n);
        r.m = sec.number("m");
        r.A = sec.list("A").value_or(std::vector<double>{});
        r.s = sec.list("s").value_or(std::vector<double>{});
        if (r.A.empty() || r.s.empty()) throw ConfigError("[check] residual_sign needs A and s lists");
        r.y_max = sec.number("y_max", r.y_max);
        r.nodes = static_cast<int>(sec.integer("nodes").value_or(r.nodes));
        r.tol = sec.number("tol", r.tol);
        r.max_threshold = sec.raw("max_threshold");
        if (r.max_threshold && *r.max_threshold != "sufficient") to_number(*r.max_threshold, "max_threshold");
        r.require_unit_interval = sec.boolean("require_unit_interval").value_or(false);
        return r;
    }
    if (type == "sandwich") {
        Sandwich w;
        w.T = sec.number("T", w.T);
        w.A = sec.list("A").value_or(std::vector<double>{});
        w.sub_s = sec.list("sub_s").value_or(std::vector<double>{});
        w.super_s = sec.list("super_s").value_or(std::vector<double>{});
        w.gamma = sec.list("gamma").value_or(std::vector<double>{0.0});
        if (w.A.empty() || w.sub_s.empty() || w.super_s.empty()) {
            throw ConfigError("[check] sandwich needs A, sub_s and super_s lists");
        }
        w.sub_y_max = sec.number("sub_y_max", w.sub_y_max);
        w.super_y_max = sec.number("super_y_max", w.super_y_max);
        w.residual_tol = sec.number("residual_tol", w.residual_tol);
        w.tol = sec.number("tol", w.tol);
        w.trend = sec.boolean("trend").value_or(w.trend);
        w.trend_from = sec.number("trend_from", w.trend_from);
        w.metric_points = static_cast<int>(sec.integer("metric_points").value_or(w.metric_points));
        w.max_rel_error = sec.number("max_rel_error", w.max_rel_error);
        if (w.metric_points < 2) throw ConfigError("[check] sandwich metric_points must be >= 2");
        return w;
    }
    if (type == "comparison") {
        Comparison c;
        const auto pairs = sec.integer("pairs").value_or(c.pairs);
        const auto seed = sec.integer("seed").value_or(1);
        if (pairs < 1 || seed < 0) throw ConfigError("[check] comparison needs pairs >= 1 and seed >= 0");
        c.pairs = static_cast<int>(pairs);
        c.seed = static_cast<unsigned long long>(seed);
        c.tol = sec.number("tol", c.tol);
        return c;
    }
    throw ConfigError("unknown check type '" + type + "'");
}

bool valid_identifier(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

}  // namespace

IniDocument parse_ini(const std::string& text) {
    IniDocument doc;
    std::istringstream is(text);
    std::string line;
    std::string current;
    bool have_section = false;
    int number = 0;
    while (std::getline(is, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = " (line " + std::to_string(number) + ")";
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("malformed section header" + where);
            current = trim(std::string_view(t).substr(1, t.size() - 2));
            if (current.empty()) throw ConfigError("empty section name" + where);
            if (doc.sections.count(current)) throw ConfigError("duplicate section [" + current + "]" + where);
            doc.sections[current];
            have_section = true;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value" + where);
        if (!have_section) throw ConfigError("key outside any section" + where);
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key" + where);
        auto& sec = doc.sections[current];
        if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'" + where);
        sec[key] = IniDocument::Entry{value, number};
    }
    return doc;
}

std::vector<double> parse_number_list(const std::string& value) {
    const std::string v = trim(value);
    for (const char* fn : {"linspace", "logspace"}) {
        const std::string prefix = std::string(fn) + "(";
        if (v.rfind(prefix, 0) != 0) continue;
        if (v.back() != ')') throw ConfigError("unterminated " + std::string(fn) + "(...)");
        const auto args = split_commas(v.substr(prefix.size(), v.size() - prefix.size() - 1));
        if (args.size() != 3) throw ConfigError(std::string(fn) + " takes (first, last, count)");
        const double a = to_number(args[0], fn);
        const double b = to_number(args[1], fn);
        const long long n = to_integer(args[2], fn);
        if (n < 1) throw ConfigError(std::string(fn) + " count must be >= 1");
        const bool geometric = std::string(fn) == "logspace";
        if (geometric && !(a > 0.0 && b > 0.0)) throw ConfigError("logspace needs positive end points");
        if (n == 1) return {a};
        if (geometric) return log_schedule(a, b, static_cast<int>(n));
        std::vector<double> out(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        out.back() = b;
        return out;
    }
    std::vector<double> out;
    for (const auto& item : split_commas(v)) out.push_back(to_number(item, "list"));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::string to_string(ReportFormat format) { return format == ReportFormat::csv ? "csv" : "json"; }

ReportFormat parse_format(const std::string& value) {
    if (value == "csv") return ReportFormat::csv;
    if (value == "json") return ReportFormat::json;
    throw ConfigError("unknown format '" + value + "' (expected csv or json)");
}

Params RunConfig::params() const {
    try {
        return q ? Params::with_q(N, m, *q) : Params::critical_case(N, m);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("[params] ") + e.what());
    }
}

void RunConfig::set_exponents(int new_N, double new_m) {
    N = new_N;
    m = new_m;
    solver.params = params();
}

bool RunConfig::needs_solve() const {
    static const std::set<std::string> pure{"constants", "stationarity", "residual_sign"};
    return std::any_of(checks.begin(), checks.end(), [](const CheckEntry& c) { return !pure.count(c.type); }) ||
           checks.empty();
}

RunConfig parse_config(const std::string& text) {
    const IniDocument doc = parse_ini(text);
    static const std::set<std::string> known{"params", "grid", "solver", "initial",
                                             "schedule", "checks", "output", "sweep"};
    for (const auto& [name, entries] : doc.sections) {
        if (!known.count(name) && name.rfind("check.", 0) != 0) throw ConfigError("unknown section [" + name + "]");
    }

    RunConfig cfg;

    Section params(doc, "params");
    if (!params.present()) throw ConfigError("missing [params] section");
    const auto N = params.integer("N");
    if (!N) throw ConfigError("missing [params] N");
    cfg.N = static_cast<int>(*N);
    cfg.m = params.required_number("m");
    if (const auto q = params.raw("q"); q && *q != "critical") cfg.q = to_number(*q, "[params] q");
    params.finish();
    cfg.solver.params = cfg.params();

    Section grid(doc, "grid");
    cfg.grid.R_max = grid.number("R_max", cfg.grid.R_max);
    cfg.grid.n_cells = static_cast<int>(grid.integer("n_cells").value_or(cfg.grid.n_cells));
    cfg.grid.stretch = grid.number("stretch", cfg.grid.stretch);
    grid.finish();
    require_positive(cfg.grid.R_max, "[grid] R_max");
    if (cfg.grid.n_cells < 8) throw ConfigError("[grid] n_cells must be >= 8");
    if (!(cfg.grid.stretch >= 1.0)) throw ConfigError("[grid] stretch must be >= 1");

    Section solver(doc, "solver");
    parse_solver(solver, cfg.solver);
    solver.finish();

    Section init(doc, "initial");
    if (init.present()) cfg.initial = parse_initial(init);
    init.finish();
    if (cfg.initial) {
        // Rejects inadmissible descriptors, including data vanishing on the grid.
        try {
            init_field(build_grid(cfg.N, cfg.grid.R_max, cfg.grid.n_cells, cfg.grid.stretch), *cfg.initial,
                       cfg.solver.params);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("[initial] ") + e.what());
        }
    }

    Section schedule(doc, "schedule");
    if (const auto times = schedule.list("times")) cfg.schedule = *times;
    schedule.finish();

    Section checks_sec(doc, "checks");
    std::vector<std::string> names;
    if (const auto list = checks_sec.raw("names"); list && !list->empty()) names = split_commas(*list);
    if (const auto tol = checks_sec.raw("tol"); tol && *tol != "refine") cfg.default_tol = to_number(*tol, "[checks] tol");
    cfg.refine_factor = checks_sec.number("refine_factor", cfg.refine_factor);
    checks_sec.finish();

    std::set<std::string> seen;
    for (const auto& name : names) {
        if (!valid_identifier(name)) throw ConfigError("[checks] names: invalid check name '" + name + "'");
        if (!seen.insert(name).second) throw ConfigError("[checks] names: duplicate check '" + name + "'");
        Section sec(doc, "check." + name);
        const std::string type = sec.raw("type").value_or(name);
        CheckEntry entry{name, type, parse_check(type, sec)};
        sec.finish();
        cfg.checks.push_back(std::move(entry));
    }
    for (const auto& [name, entries] : doc.sections) {
        if (name.rfind("check.", 0) == 0 && !seen.count(name.substr(6))) {
            throw ConfigError("section [" + name + "] does not match any entry of [checks] names");
        }
    }

    Section output(doc, "output");
    if (const auto dir = output.raw("dir")) cfg.out_dir = *dir;
    if (const auto fmt = output.raw("format")) cfg.format = parse_format(*fmt);
    cfg.write_snapshots = output.boolean("snapshots").value_or(false);
    output.finish();

    Section sweep(doc, "sweep");
    if (sweep.present()) {
        SweepSpec s;
        for (double n : sweep.list("N").value_or(std::vector<double>{static_cast<double>(cfg.N)})) {
            if (n != std::floor(n)) throw ConfigError("[sweep] N must be integers");
            s.N.push_back(static_cast<int>(n));
        }
        s.m = sweep.list("m").value_or(std::vector<double>{cfg.m});
        cfg.sweep = std::move(s);
    }
    sweep.finish();

    // Cross-section consistency.
    if (cfg.needs_solve()) {
        if (!cfg.initial) throw ConfigError("missing [initial] section");
        if (cfg.schedule.empty()) throw ConfigError("missing [schedule] times");
        for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
            if (!(cfg.schedule[i] >= 0.0) || (i > 0 && !(cfg.schedule[i] > cfg.schedule[i - 1]))) {
                throw ConfigError("[schedule] times must be nonnegative and strictly increasing");
            }
        }
    }
    if (cfg.solver.bc == BoundaryCondition::dirichlet_data) {
        if (!cfg.initial || !std::holds_alternative<initial::Barenblatt>(*cfg.initial) || cfg.solver.absorption) {
            throw ConfigError("[solver] bc = dirichlet_data uses the Barenblatt trace and needs "
                              "kind = barenblatt with absorption = false");
        }
        // The runner installs the trace for each grid it builds.
        cfg.solver.boundary_data = [](double) { return 0.0; };
    }
    try {
        cfg.solver.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("[solver] ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fdabs
