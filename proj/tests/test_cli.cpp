#include <doctest.h>

#include "fdabs/cli.hpp"
#include "fdabs/io.hpp"
#include "fdabs/oracle.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fdabs;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory per test case.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("fdabs_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }

    fs::path write(const std::string& file, const std::string& text) const {
        const fs::path p = dir / file;
        std::ofstream(p) << text;
        return p;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(slurp(p));
    for (std::string line; std::getline(is, line);) {
        std::vector<std::string> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

const char* flat_config = R"(
[params]
N = 2
m = 0.5

[grid]
R_max = 5
n_cells = 16

[solver]
dt = 1e-3

[initial]
kind = constant
height = 1

[schedule]
times = 0.5, 1, 2
)";

const char* sweep_config = R"(
[params]
N = 2
m = 0.5

[grid]
R_max = 10
n_cells = 60

[solver]
dt_max = 0.01

[initial]
kind = indicator
R0 = 1
height = 1

[schedule]
times = 0.25, 0.5

[checks]
names = upper_bound, constants
tol = 1e-12
)";

}  // namespace

TEST_CASE("astar prints the closed form value and honours the tolerance") {
    std::ostringstream out, err;
    CHECK(cli::cmd_astar(2, 0.5, std::nullopt, ReportFormat::csv, out, err) == cli::exit_ok);
    CHECK(parse_double(out.str().substr(0, out.str().size() - 1)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

    std::ostringstream loose, json;
    CHECK(cli::cmd_astar(3, 0.6, 1e-6, ReportFormat::csv, loose, err) == cli::exit_ok);
    CHECK(cli::cmd_astar(3, 0.6, std::nullopt, ReportFormat::json, json, err) == cli::exit_ok);
    const auto j = nlohmann::json::parse(json.str());
    const double tight = j.at("A_star").get<double>();
    CHECK(std::abs(parse_double(loose.str().substr(0, loose.str().size() - 1)) - tight) < 1e-5);
    CHECK(j.at("q").get<double>() == doctest::Approx(0.6 + 2.0 / 3.0));

    std::ostringstream bad;
    CHECK(cli::cmd_astar(2, 1.5, std::nullopt, ReportFormat::csv, out, bad) == cli::exit_config);
    CHECK(bad.str().find("config error") != std::string::npos);
    CHECK(cli::cmd_astar(2, 0.5, -1.0, ReportFormat::csv, out, bad) == cli::exit_config);
}

TEST_CASE("solve writes observables matching the flat ODE") {
    Scratch s("solve");
    const fs::path cfg = s.write("flat.ini", flat_config);
    cli::Overrides o;
    o.out_dir = s.dir / "out";
    std::ostringstream out, err;
    REQUIRE(cli::cmd_solve(cfg, o, out, err) == cli::exit_ok);
    const auto rows = csv_rows(s.dir / "out" / "observables.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"t", "mass", "sup", "center_value"});
    const Params p = Params::critical_case(2, 0.5);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double t = parse_double(rows[k][0]);
        const double exact = oracle::flat_ode_exact(t, 1.0, p);
        CHECK(parse_double(rows[k][2]) == doctest::Approx(exact).epsilon(1e-12));
        CHECK(parse_double(rows[k][3]) == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK(fs::exists(s.dir / "out" / "snapshots" / "snap_0002.dat"));
    const auto loaded = read_snapshot(s.dir / "out" / "snapshots" / "snap_0002.dat");
    CHECK(loaded.snapshot.t == 2.0);
    CHECK(loaded.header.at("m") == "0.5");

    o.format = ReportFormat::json;
    REQUIRE(cli::cmd_solve(cfg, o, out, err) == cli::exit_ok);
    const auto j = nlohmann::json::parse(slurp(s.dir / "out" / "observables.json"));
    CHECK(j.size() == 3);
}

TEST_CASE("configuration failures exit with 2") {
    Scratch s("config");
    std::ostringstream out, err;
    CHECK(cli::cmd_solve(s.dir / "missing.ini", {}, out, err) == cli::exit_config);
    std::string zero = flat_config;
    zero.replace(zero.find("height = 1"), 10, "height = 0");
    CHECK(cli::cmd_solve(s.write("zero.ini", zero), {}, out, err) == cli::exit_config);
    CHECK(cli::cmd_solve(s.write("typo.ini", std::string(flat_config) + "[output]\ndirr = x\n"), {}, out, err) ==
          cli::exit_config);
    // verify without checks
    cli::Overrides o;
    o.out_dir = s.dir / "out";
    CHECK(cli::cmd_verify(s.write("flat.ini", flat_config), o, out, err) == cli::exit_config);
    CHECK(cli::cmd_report(s.dir / "nowhere", ReportFormat::csv, out, err) == cli::exit_config);
}

TEST_CASE("solver failure exits with 3") {
    Scratch s("solver");
    std::string cfg = flat_config;
    cfg.replace(cfg.find("dt = 1e-3"), 9, "dt = 1e-3\nnewton_max_iter = 1\nnewton_tol = 1e-300\ndt_min = 1e-4");
    std::ostringstream out, err;
    cli::Overrides o;
    o.out_dir = s.dir / "out";
    std::string indicator = cfg;
    indicator.replace(indicator.find("kind = constant"), 15, "kind = indicator\nR0 = 1");
    CHECK(cli::cmd_solve(s.write("bad.ini", indicator), o, out, err) == cli::exit_solver);
    CHECK(err.str().find("solver failure") != std::string::npos);
}

TEST_CASE("verify writes reports and exits 4 on a failed check") {
    Scratch s("verify");
    const std::string text = R"(
[params]
N = 2
m = 0.5

[checks]
names = low_A

[check.low_A]
type = residual_sign
kind = sub
A = 0.1, 0.2, 0.3
s = 1, 2
)";
    cli::Overrides o;
    o.out_dir = s.dir / "out";
    std::ostringstream out, err;
    CHECK(cli::cmd_verify(s.write("low.ini", text), o, out, err) == cli::exit_check_failed);
    const auto rows = csv_rows(s.dir / "out" / "report.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0][0] == "check");
    CHECK(rows[1][0] == "low_A");
    CHECK(rows[1][1] == "false");
    CHECK(fs::exists(s.dir / "out" / "residual_low_A.csv"));

    std::ostringstream summary;
    CHECK(cli::cmd_report(s.dir / "out", ReportFormat::csv, summary, err) == cli::exit_check_failed);
    CHECK(summary.str().find("low_A,false") != std::string::npos);

    std::string good = text;
    good.replace(good.find("A = 0.1, 0.2, 0.3"), 17, "A = 0.8, 1, 2");
    o.format = ReportFormat::json;
    CHECK(cli::cmd_verify(s.write("good.ini", good), o, out, err) == cli::exit_ok);
    std::ostringstream js;
    CHECK(cli::cmd_report(s.dir / "out", ReportFormat::json, js, err) == cli::exit_ok);
    CHECK(nlohmann::json::parse(js.str()).at("all_passed").get<bool>());
}

TEST_CASE("a tiny domain trips the boundary monitor and flags tail checks") {
    Scratch s("monitor");
    const std::string text = R"(
[params]
N = 2
m = 0.5

[grid]
R_max = 3
n_cells = 60

[solver]
dt_max = 0.01

[initial]
kind = indicator
R0 = 1
height = 1

[schedule]
times = 0.5, 1

[checks]
names = boundary_monitor, tail_fit, upper_bound
tol = 1e-10

[check.tail_fit]
r_lo = 1.1
r_hi = 1.5
)";
    cli::Overrides o;
    o.out_dir = s.dir / "out";
    std::ostringstream out, err;
    CHECK(cli::cmd_verify(s.write("tiny.ini", text), o, out, err) == cli::exit_check_failed);
    const auto doc = nlohmann::json::parse(slurp(s.dir / "out" / "report.json"));
    const auto& reports = doc.at("reports");
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].at("check_name") == "boundary_monitor");
    CHECK_FALSE(reports[0].at("passed").get<bool>());
    CHECK(reports[0].at("notes").get<std::string>().find("R_max too small") != std::string::npos);
    CHECK(reports[1].at("notes").get<std::string>().find("unreliable") != std::string::npos);
    CHECK(reports[2].at("notes").get<std::string>().find("unreliable") == std::string::npos);
}

TEST_CASE("refinement tolerances and the --tol override") {
    Scratch s("refine");
    std::string text = sweep_config;
    text.replace(text.find("names = upper_bound, constants\ntol = 1e-12"), 42, "names = gradient\ntol = refine");
    cli::Overrides o;
    o.out_dir = s.dir / "out";
    std::ostringstream out, err;
    const fs::path cfg = s.write("g.ini", text);
    CHECK(cli::cmd_verify(cfg, o, out, err) == cli::exit_ok);
    auto doc = nlohmann::json::parse(slurp(s.dir / "out" / "report.json"));
    CHECK(doc.at("reports")[0].at("notes").get<std::string>().find("margin(h/2)") != std::string::npos);
    const double tol_refine = doc.at("reports")[0].at("tol").get<double>();
    CHECK(tol_refine > 0.0);

    o.tol = 0.125;
    CHECK(cli::cmd_verify(cfg, o, out, err) == cli::exit_ok);
    doc = nlohmann::json::parse(slurp(s.dir / "out" / "report.json"));
    CHECK(doc.at("reports")[0].at("tol").get<double>() == 0.125);
}

TEST_CASE("sweep: dedup, determinism, partial failure") {
    Scratch s("sweep");
    SweepSpec spec{{2, 2, 3}, {0.5, 0.6, 0.5}};
    const auto pts = cli::sweep_points(spec);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0] == std::pair{2, 0.5});
    CHECK(pts[3] == std::pair{3, 0.6});

    const fs::path cfg = s.write("sweep.ini", std::string(sweep_config) + "[sweep]\nN = 1, 2, 3\nm = 0.5, 0.6, 0.7, 0.6\n");
    std::ostringstream out, err;
    cli::Overrides o;
    o.out_dir = s.dir / "one";
    o.threads = 1;
    REQUIRE(cli::cmd_sweep(cfg, o, out, err) == cli::exit_ok);
    const std::string serial = slurp(s.dir / "one" / "sweep.csv");
    o.out_dir = s.dir / "three";
    o.threads = 3;
    REQUIRE(cli::cmd_sweep(cfg, o, out, err) == cli::exit_ok);
    CHECK(slurp(s.dir / "three" / "sweep.csv") == serial);
    CHECK(slurp(s.dir / "three" / "run_004" / "report.csv") == slurp(s.dir / "one" / "run_004" / "report.csv"));
    CHECK(slurp(s.dir / "three" / "run_004" / "observables.csv") ==
          slurp(s.dir / "one" / "run_004" / "observables.csv"));
    const auto rows = csv_rows(s.dir / "one" / "sweep.csv");
    REQUIRE(rows.size() == 10);
    CHECK(rows[0][0] == "index");
    CHECK(rows[1][1] == "1");
    CHECK(rows[9][4] == "0");

    // m = 0.2 lies below m_c = 1/3 for N = 3: that point fails, the others run.
    const fs::path partial = s.write("partial.ini", std::string(sweep_config) + "[sweep]\nN = 2, 3\nm = 0.2\n");
    o.out_dir = s.dir / "partial";
    std::ostringstream perr;
    CHECK(cli::cmd_sweep(partial, o, out, perr) == cli::exit_sweep_partial);
    const auto prow = csv_rows(s.dir / "partial" / "sweep.csv");
    REQUIRE(prow.size() == 3);
    CHECK(prow[1][4] == "0");
    CHECK(prow[2][4] == "2");
    CHECK(perr.str().find("sweep point 1") != std::string::npos);

    // A single point behaves like verify.
    const fs::path single = s.write("single.ini", std::string(sweep_config) + "[sweep]\nN = 2\nm = 0.5\n");
    o.out_dir = s.dir / "single";
    CHECK(cli::cmd_sweep(single, o, out, err) == cli::exit_ok);
    cli::Overrides v;
    v.out_dir = s.dir / "verify";
    CHECK(cli::cmd_verify(single, v, out, err) == cli::exit_ok);
    CHECK(slurp(s.dir / "single" / "run_000" / "report.csv") == slurp(s.dir / "verify" / "report.csv"));

    CHECK(cli::cmd_sweep(s.write("nosweep.ini", sweep_config), o, out, err) == cli::exit_config);
}

TEST_CASE("csv quoting") {
    CHECK(cli::csv_field("plain") == "plain");
    CHECK(cli::csv_field("a,b") == "\"a,b\"");
    CHECK(cli::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}
