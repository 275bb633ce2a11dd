#include "mvkl/mvkl.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct RunDeleter {
    void operator()(mvkl_run* r) const { mvkl_run_free(r); }
};
struct ReportDeleter {
    void operator()(mvkl_report* r) const { mvkl_report_free(r); }
};
using RunPtr = std::unique_ptr<mvkl_run, RunDeleter>;
using ReportPtr = std::unique_ptr<mvkl_report, ReportDeleter>;

int report_failure(const char* what, mvkl_status s)
{
    std::fprintf(stderr, "error: %s: %s\n", what, mvkl_last_error());
    return s == MVKL_ERR_VALIDATION || s == MVKL_ERR_ARGUMENT ? kExitValidation : kExitSolver;
}

int load(const std::string& path, RunPtr& run)
{
    mvkl_run* raw = nullptr;
    const mvkl_status s = mvkl_run_load(path.c_str(), &raw);
    run.reset(raw);
    if (s == MVKL_OK) return 0;
    std::fprintf(stderr, "error: loading %s: %s\n", path.c_str(), mvkl_last_error());
    return s == MVKL_ERR_SOLVER ? kExitSolver : kExitValidation;
}

int cmd_solve(const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> lhs_n,
              const std::string& out)
{
    RunPtr run;
    if (int rc = load(config, run)) return rc;
    if (seed) mvkl_run_set_seed(run.get(), *seed);
    if (lhs_n) {
        if (mvkl_status s = mvkl_run_set_lhs_count(run.get(), *lhs_n)) return report_failure("--lhs-n", s);
    }
    mvkl_report* raw = nullptr;
    mvkl_status s = mvkl_run_solve(run.get(), &raw);
    ReportPtr report(raw);
    if (s != MVKL_OK) return report_failure("solve", s == MVKL_ERR_VALIDATION ? s : MVKL_ERR_SOLVER);
    s = mvkl_run_write_outputs(run.get(), report.get(), out.c_str());
    if (s != MVKL_OK) return report_failure("writing outputs", s);

    double objective = 0.0;
    int admissible = 0;
    mvkl_report_objective(report.get(), &objective);
    mvkl_report_admissible_count(report.get(), &admissible);
    std::printf("objective %.17g\nadmissible_starts %d\noutputs %s\n", objective, admissible, out.c_str());
    return 0;
}

int cmd_check(const std::string& config)
{
    RunPtr run;
    if (int rc = load(config, run)) return rc;
    std::size_t len = 0;
    mvkl_status s = mvkl_run_check(run.get(), nullptr, 0, &len);
    if (s != MVKL_OK) return report_failure("check", s);
    std::string text(len + 1, '\0');
    s = mvkl_run_check(run.get(), text.data(), text.size(), &len);
    if (s != MVKL_OK) return report_failure("check", s);
    text.resize(len);
    std::fputs(text.c_str(), stdout);
    return 0;
}

int cmd_mesh(const std::string& config, const std::string& coeffs, const std::string& out)
{
    RunPtr run;
    if (int rc = load(config, run)) return rc;
    mvkl_report* raw = nullptr;
    mvkl_status s = mvkl_report_load(coeffs.c_str(), &raw);
    ReportPtr report(raw);
    if (s != MVKL_OK) return report_failure("loading report", MVKL_ERR_VALIDATION);
    s = mvkl_run_write_meshes(run.get(), report.get(), out.c_str());
    if (s != MVKL_OK) return report_failure("writing meshes", s);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiview kernel learning solver"};
    app.set_version_flag("--version", std::string(mvkl_version()));
    app.require_subcommand(1);

    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> lhs_n;
    std::string coeffs;

    auto* solve = app.add_subcommand("solve", "Solve and write report, trace and meshes");
    solve->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    solve->add_option("--seed", seed, "Override the multistart seed");
    solve->add_option("--lhs-n", lhs_n, "Override the number of Latin hypercube starts")
        ->check(CLI::PositiveNumber);
    solve->add_option("--out", out, "Output directory")->capture_default_str();

    auto* check = app.add_subcommand("check", "Print PSD, Laplacian and delta diagnostics");
    check->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);

    auto* mesh = app.add_subcommand("mesh", "Re-emit meshes from a saved report");
    mesh->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    mesh->add_option("--coeffs", coeffs, "Report written by solve")->required()->check(CLI::ExistingFile);
    mesh->add_option("--out", out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    if (*solve) return cmd_solve(config, seed, lhs_n, out);
    if (*check) return cmd_check(config);
    return cmd_mesh(config, coeffs, out);
}
