#include "fdabs/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace fdabs;

    CLI::App app{"Radial fast diffusion with critical absorption: runs, checks and reports"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string format;
    double tol = 0.0;
    int threads = 1;
    int N = 2;
    double m = 0.5;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config) sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out-dir", out_dir, "output directory (overrides [output] dir)");
        sub->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* solve = app.add_subcommand("solve", "integrate and write observables and snapshots");
    add_common(solve, true);

    CLI::App* verify = app.add_subcommand("verify", "integrate and run the configured checks");
    add_common(verify, true);
    CLI::Option* tol_opt = verify->add_option("--tol", tol, "tolerance for bound checks without their own");

    CLI::App* astar = app.add_subcommand("astar", "print the asymptotic mass-selection constant");
    astar->add_option("--N", N, "space dimension")->required();
    astar->add_option("--m", m, "diffusion exponent")->required();
    CLI::Option* astar_tol = astar->add_option("--tol", tol, "quadrature tolerance");
    astar->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* sweep = app.add_subcommand("sweep", "run the checks over the [sweep] parameter grid");
    add_common(sweep, true);
    CLI::Option* sweep_tol = sweep->add_option("--tol", tol, "tolerance for bound checks without their own");
    sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    CLI::App* report = app.add_subcommand("report", "summarize <out-dir>/report.json");
    report->add_option("--out-dir", out_dir, "directory holding report.json")->required();
    report->add_option("--format", format, "summary format")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_config;
    }

    cli::Overrides overrides;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    if (!format.empty()) overrides.format = parse_format(format);
    const ReportFormat print_format = overrides.format.value_or(ReportFormat::csv);
    overrides.threads = threads;
    if (tol_opt->count() || sweep_tol->count()) overrides.tol = tol;

    if (solve->parsed()) return cli::cmd_solve(config_path, overrides, std::cout, std::cerr);
    if (verify->parsed()) return cli::cmd_verify(config_path, overrides, std::cout, std::cerr);
    if (sweep->parsed()) return cli::cmd_sweep(config_path, overrides, std::cout, std::cerr);
    if (astar->parsed()) {
        std::optional<double> quad_tol;
        if (astar_tol->count()) quad_tol = tol;
        return cli::cmd_astar(N, m, quad_tol, print_format, std::cout, std::cerr);
    }
    return cli::cmd_report(out_dir, print_format, std::cout, std::cerr);
}
