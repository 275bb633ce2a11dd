#include "mvkl/mvkl.h"

#include "mvkl/io.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <string>

struct mvkl_run {
    mvkl::RunConfig cfg;
    mvkl::ProblemSpec spec;
};

struct mvkl_report {
    mvkl::SolveReport report;
};

namespace {

thread_local std::string g_last_error;

mvkl_status set_error(mvkl_status s, const char* msg)
{
    g_last_error = msg;
    return s;
}

template <class F>
mvkl_status guarded(F&& body)
{
    try {
        g_last_error.clear();
        return body();
    } catch (const mvkl::ValidationError& e) {
        return set_error(MVKL_ERR_VALIDATION, e.what());
    } catch (const mvkl::NumericalError& e) {
        return set_error(MVKL_ERR_SOLVER, e.what());
    } catch (const mvkl::IoError& e) {
        return set_error(MVKL_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(MVKL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(MVKL_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(MVKL_ERR_INTERNAL, "unknown exception");
    }
}

#define MVKL_REQUIRE(cond, msg) \
    do {                        \
        if (!(cond)) return set_error(MVKL_ERR_ARGUMENT, msg); \
    } while (0)

}  // namespace

extern "C" {

const char* mvkl_version(void) { return "1.0.0"; }

const char* mvkl_last_error(void) { return g_last_error.c_str(); }

mvkl_status mvkl_run_load(const char* config_path, mvkl_run** out)
{
    MVKL_REQUIRE(config_path && out, "config_path and out must be non-null");
    *out = nullptr;
    return guarded([&] {
        mvkl::RunConfig cfg = mvkl::read_config(config_path);
        mvkl::ProblemSpec spec = mvkl::build_problem(cfg);
        *out = new mvkl_run{std::move(cfg), std::move(spec)};
        return MVKL_OK;
    });
}

void mvkl_run_free(mvkl_run* run) { delete run; }

mvkl_status mvkl_run_set_seed(mvkl_run* run, uint64_t seed)
{
    MVKL_REQUIRE(run, "run is null");
    run->cfg.solve.seed = seed;
    return MVKL_OK;
}

mvkl_status mvkl_run_set_lhs_count(mvkl_run* run, int count)
{
    MVKL_REQUIRE(run, "run is null");
    MVKL_REQUIRE(count >= 1, "lhs count must be >= 1");
    run->cfg.solve.lhs_count = count;
    return MVKL_OK;
}

mvkl_status mvkl_run_dims(const mvkl_run* run, size_t* n_coeffs, size_t* n_labeled, size_t* n_unlabeled)
{
    MVKL_REQUIRE(run, "run is null");
    if (n_coeffs) *n_coeffs = static_cast<size_t>(run->spec.N());
    if (n_labeled) *n_labeled = static_cast<size_t>(run->spec.l());
    if (n_unlabeled) *n_unlabeled = static_cast<size_t>(run->spec.u());
    return MVKL_OK;
}

mvkl_status mvkl_run_check(const mvkl_run* run, char* buf, size_t cap, size_t* len)
{
    MVKL_REQUIRE(run, "run is null");
    return guarded([&] {
        const std::string text = mvkl::check_diagnostics(run->cfg, run->spec);
        if (len) *len = text.size();
        if (!buf) return MVKL_OK;
        if (cap <= text.size()) return set_error(MVKL_ERR_ARGUMENT, "buffer too small");
        std::memcpy(buf, text.c_str(), text.size() + 1);
        return MVKL_OK;
    });
}

mvkl_status mvkl_run_solve(const mvkl_run* run, mvkl_report** out)
{
    MVKL_REQUIRE(run && out, "run and out must be non-null");
    *out = nullptr;
    return guarded([&] {
        *out = new mvkl_report{mvkl::solve(run->spec, run->cfg.solve)};
        return MVKL_OK;
    });
}

mvkl_status mvkl_run_write_outputs(const mvkl_run* run, const mvkl_report* report, const char* out_dir)
{
    MVKL_REQUIRE(run && report && out_dir, "run, report and out_dir must be non-null");
    return guarded([&] {
        (void)mvkl::write_outputs(run->cfg, run->spec, report->report, out_dir);
        return MVKL_OK;
    });
}

mvkl_status mvkl_run_write_meshes(const mvkl_run* run, const mvkl_report* report, const char* out_dir)
{
    MVKL_REQUIRE(run && report && out_dir, "run, report and out_dir must be non-null");
    return guarded([&] {
        (void)mvkl::write_meshes(run->cfg, run->spec, report->report.best_a, out_dir);
        return MVKL_OK;
    });
}

mvkl_status mvkl_run_objective(const mvkl_run* run, const double* a, size_t n, double* out)
{
    MVKL_REQUIRE(run && a && out, "run, a and out must be non-null");
    MVKL_REQUIRE(n == static_cast<size_t>(run->spec.N()), "coefficient length does not match N");
    return guarded([&] {
        const mvkl::Vector v = Eigen::Map<const mvkl::Vector>(a, static_cast<Eigen::Index>(n));
        *out = mvkl::learning_functional(run->spec, v);
        return MVKL_OK;
    });
}

mvkl_status mvkl_run_evaluate(const mvkl_run* run, const mvkl_report* report, const double* x, size_t x_len,
                              int region, int dx, double* out)
{
    MVKL_REQUIRE(run && report && x && out, "run, report, x and out must be non-null");
    MVKL_REQUIRE(x_len == static_cast<size_t>(run->cfg.ambient_dim), "x has the wrong number of coordinates");
    MVKL_REQUIRE(dx >= 1, "dx must be >= 1");
    MVKL_REQUIRE(report->report.best_a.size() == run->spec.N(), "report does not match this run");
    return guarded([&] {
        mvkl::InputPoint p{Eigen::Map<const mvkl::Vector>(x, static_cast<Eigen::Index>(x_len)), region};
        const mvkl::Vector f =
            mvkl::evaluate_section(report->report.best_a, run->spec.points, run->spec.dims, run->spec.kernel, p, dx);
        std::memcpy(out, f.data(), sizeof(double) * static_cast<size_t>(f.size()));
        return MVKL_OK;
    });
}

mvkl_status mvkl_report_load(const char* report_path, mvkl_report** out)
{
    MVKL_REQUIRE(report_path && out, "report_path and out must be non-null");
    *out = nullptr;
    return guarded([&] {
        *out = new mvkl_report{mvkl::report_from_text(mvkl::read_text_file(report_path))};
        return MVKL_OK;
    });
}

void mvkl_report_free(mvkl_report* report) { delete report; }

mvkl_status mvkl_report_objective(const mvkl_report* report, double* out)
{
    MVKL_REQUIRE(report && out, "report and out must be non-null");
    *out = report->report.objective;
    return MVKL_OK;
}

mvkl_status mvkl_report_coefficients(const mvkl_report* report, double* buf, size_t cap, size_t* n)
{
    MVKL_REQUIRE(report && n, "report and n must be non-null");
    const auto& a = report->report.best_a;
    *n = static_cast<size_t>(a.size());
    if (!buf) return MVKL_OK;
    MVKL_REQUIRE(cap >= *n, "buffer too small");
    std::memcpy(buf, a.data(), sizeof(double) * *n);
    return MVKL_OK;
}

mvkl_status mvkl_report_admissible_count(const mvkl_report* report, int* out)
{
    MVKL_REQUIRE(report && out, "report and out must be non-null");
    *out = report->report.admissible_count;
    return MVKL_OK;
}

}  // extern "C"
