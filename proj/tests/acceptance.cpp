// Acceptance suite: runs the reference config of each criterion and prints
// one PASS/FAIL line per criterion (followed by its check records).
//
//   acceptance <configs dir> <output dir>

#include "fdabs/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Criterion {
    int id;
    const char* file;
    const char* title;
    double time_limit;  ///< seconds
};

const std::vector<Criterion> criteria{
    {1, "criterion_01_constants.ini", "closed-form constants and A*", 1.0},
    {2, "criterion_02_flat_ode.ini", "flat data follow the absorption ODE", 5.0},
    {3, "criterion_03_barenblatt.ini", "fast-diffusion Barenblatt oracle and refinement ratio", 120.0},
    {4, "criterion_04_stationarity.ini", "second-order stationarity of sigma_A", 30.0},
    {5, "criterion_05_gradient.ini", "gradient estimate", 120.0},
    {6, "criterion_06_lower_bound.ini", "universal lower bound and tail exponent", 120.0},
    {7, "criterion_07_residual_signs.ini", "residual signs of the comparison profiles", 60.0},
    {8, "criterion_08_sandwich.ini", "sandwich and convergence trend", 600.0},
    {9, "criterion_09_positivity.ini", "positivity transformation", 180.0},
    {10, "criterion_10_comparison.ini", "comparison principle on random pairs", 120.0},
};

}  // namespace

int main(int argc, char** argv) {
    namespace fs = std::filesystem;
    if (argc != 3) {
        std::cerr << "usage: acceptance <configs dir> <output dir>\n";
        return 2;
    }
    const fs::path configs = argv[1];
    const fs::path out = argv[2];

    int failed = 0;
    for (const Criterion& c : criteria) {
        std::ostringstream log;
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            fdabs::RunConfig cfg = fdabs::load_config(configs / c.file);
            cfg.out_dir = out / fs::path(c.file).stem();
            const fdabs::cli::VerifyOutcome outcome = fdabs::cli::run_verify(cfg, log);
            ok = !outcome.reports.empty() && outcome.all_passed();
            if (outcome.reports.empty()) detail = "no checks configured";
        } catch (const std::exception& e) {
            detail = e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.time_limit;
        if (!in_time) detail += (detail.empty() ? "" : "; ") + std::string("runtime over limit");
        const bool pass = ok && in_time;
        if (!pass) ++failed;

        char line[256];
        std::snprintf(line, sizeof line, "criterion %2d %s  %s (%.1fs, limit %.0fs)", c.id, pass ? "PASS" : "FAIL",
                      c.title, seconds, c.time_limit);
        std::cout << line << (detail.empty() ? "" : "  [" + detail + "]") << "\n";
        std::istringstream records(log.str());
        for (std::string rec; std::getline(records, rec);) std::cout << "    " << rec << "\n";
        std::cout.flush();
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
