#pragma once

// Run configuration read from sectioned key = value text:
//
//   [params]    N, m, q (number or "critical")
//   [grid]      R_max, n_cells, stretch
//   [solver]    SolverConfig fields by name, bc, absorption, absorption_mode
//   [initial]   kind plus the descriptor fields of that kind
//   [schedule]  times
//   [checks]    names, tol, refine_factor
//   [check.X]   options of the check named X (optional)
//   [output]    dir, format, snapshots
//   [sweep]     N, m (parameter grid, sweep subcommand only)
//
// Lines starting with '#' or ';' are comments. Unknown sections and keys
// are rejected. Numeric lists accept "a, b, c", "linspace(a, b, n)" and
// "logspace(a, b, n)" (n values from a to b, geometric).

#include "fdabs/field.hpp"
#include "fdabs/params.hpp"
#include "fdabs/solver.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fdabs {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw parsed file: section -> key -> value, in file order of first appearance.
struct IniDocument {
    struct Entry {
        std::string value;
        int line;
    };
    std::map<std::string, std::map<std::string, Entry>> sections;
};

IniDocument parse_ini(const std::string& text);

/// Parses a numeric list value (see the file comment).
std::vector<double> parse_number_list(const std::string& value);

enum class ReportFormat { csv, json };

namespace checks {

struct Constants {
    std::optional<double> B0, q_star, k, delta, A_star;
    double tol = 1e-14;
    double A_star_tol = 1e-8;
};
/// Relative error against the exact flat ODE solution; requires constant data.
struct FlatOde {
    double tol = 1e-4;
};
/// Inner-half relative L1 error against the pure fast-diffusion Barenblatt
/// solution started from sigma_A (oracle time t + 1). With min_ratio set, the
/// (h, dt) -> (h/2, dt/2) error ratio is checked as well.
struct BarenblattOracle {
    std::vector<double> times;
    double tol = 1e-2;
    std::optional<double> min_ratio;
};
/// Empirical order of max |autonomous_residual(sigma_A)| over y <= window
/// on uniform nodes of spacing h / 2^k, k = 0..levels-1.
struct Stationarity {
    std::vector<double> A{0.5, 1.0, 2.0};
    double y_max = 10.0;
    double window = 5.0;
    double h = 0.1;
    int levels = 4;
    double min_order = 1.8;
};
/// gradient, upper_bound, lower_bound, envelope and positivity_transform.
struct Bound {
    std::vector<double> times;  ///< empty: every scheduled time
    std::optional<double> tol;
    double eps = 0.1;           ///< envelope only
};
struct TailFit {
    double time = 1.0;
    double r_lo = 3.0;
    std::optional<double> r_hi;      ///< default R_max / 2
    std::optional<double> target;    ///< default 2 / (1 - m)
    double rel_tol = 0.15;
};
struct BoundaryMonitor {
    std::vector<double> times;  ///< empty: every scheduled time
    double tol = 1e-3;
};
struct ResidualSign {
    std::string kind = "sub";
    std::optional<int> N;
    std::optional<double> m;
    std::vector<double> A;
    std::vector<double> s;
    double y_max = 20.0;
    int nodes = 1001;
    double tol = 1e-6;
    /// Number, or "sufficient" for the analytic sub bound when m < (N-1)/N.
    std::optional<std::string> max_threshold;
    bool require_unit_interval = false;  ///< super: threshold in (0, 1)
};
/// Sandwich search on the rescaled series plus the convergence trend.
struct Sandwich {
    double T = 2.718281828459045;
    std::vector<double> A;
    std::vector<double> sub_s;
    std::vector<double> super_s;
    double sub_y_max = 20.0;
    double super_y_max = 50.0;
    double residual_tol = 1e-6;
    std::vector<double> gamma;
    double tol = 0.0;
    bool trend = true;
    double trend_from = 0.0;         ///< first physical time of the trend window
    int metric_points = 3;
    double max_rel_error = 0.5;
};
/// Ordered random pairs evolved with the run's solver settings.
struct Comparison {
    int pairs = 20;
    unsigned long long seed = 1;
    double tol = 1e-12;
};

using Spec = std::variant<Constants, FlatOde, BarenblattOracle, Stationarity, Bound, TailFit, BoundaryMonitor,
                          ResidualSign, Sandwich, Comparison>;

}  // namespace checks

struct CheckEntry {
    std::string name;  ///< report name, also the [check.name] section
    std::string type;  ///< implementation, defaults to the name
    checks::Spec spec;
};

struct GridSpec {
    double R_max = 50.0;
    int n_cells = 1000;
    double stretch = 1.0;
};

struct SweepSpec {
    std::vector<int> N;
    std::vector<double> m;
};

struct RunConfig {
    int N = 2;
    double m = 0.5;
    std::optional<double> q;  ///< empty: critical q = m + 2/N
    GridSpec grid;
    SolverConfig solver{Params::critical_case(2, 0.5)};
    std::optional<InitialProfile> initial;
    std::vector<double> schedule;

    std::vector<CheckEntry> checks;
    /// Empty: "refine" (5x the h vs h/2 difference) for bound checks.
    std::optional<double> default_tol;
    double refine_factor = 5.0;

    std::filesystem::path out_dir = "out";
    ReportFormat format = ReportFormat::csv;
    bool write_snapshots = false;

    std::optional<SweepSpec> sweep;

    /// Params built from N, m, q; throws ConfigError when inadmissible.
    Params params() const;
    /// Re-targets exponents (sweeps); keeps q critical when it was.
    void set_exponents(int N, double m);
    bool needs_solve() const;
};

RunConfig parse_config(const std::string& text);
/// Throws ConfigError when the file cannot be read or is invalid.
RunConfig load_config(const std::filesystem::path& path);

std::string to_string(ReportFormat format);
ReportFormat parse_format(const std::string& value);

}  // namespace fdabs
