#pragma once

// Config-driven runs behind the fdabs command-line tool. Every cmd_* returns
// a process exit code:
//   0 success / all checks passed
//   2 configuration or usage error
//   3 solver failure
//   4 at least one check failed (reports are still written)
//   5 sweep with at least one failed run

#include "fdabs/config.hpp"
#include "fdabs/verifier.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fdabs::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_solver = 3,
    exit_check_failed = 4,
    exit_sweep_partial = 5,
};

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::filesystem::path> out_dir;
    std::optional<double> tol;
    std::optional<ReportFormat> format;
    int threads = 1;
};

void apply(const Overrides& overrides, RunConfig& config);

struct VerifyOutcome {
    std::vector<BoundReport> reports;
    bool all_passed() const;
};

/// Runs the solves and checks of `config` and writes observables, reports
/// and plot data under config.out_dir. Throws ConfigError, SolverError or
/// CheckAborted; messages go to `log`.
VerifyOutcome run_verify(const RunConfig& config, std::ostream& log);

/// Writes observables.csv (t, mass, sup, center_value) and optional snapshots.
void run_solve(const RunConfig& config, std::ostream& log);

int cmd_solve(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err);
int cmd_verify(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
               std::ostream& err);
/// Prints A* for the critical exponent; `tol` is the quadrature tolerance.
int cmd_astar(int N, double m, std::optional<double> tol, ReportFormat format, std::ostream& out,
              std::ostream& err);
int cmd_sweep(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err);
/// Summarizes <out_dir>/report.json; exit 0 iff every check passed.
int cmd_report(const std::filesystem::path& out_dir, ReportFormat format, std::ostream& out, std::ostream& err);

/// Sweep grid after removing repeated (N, m) points, first occurrence kept.
std::vector<std::pair<int, double>> sweep_points(const SweepSpec& sweep);

/// RFC 4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(const std::string& value);

}  // namespace fdabs::cli
