#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvkl/mvkl.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kToy = std::string(MVKL_CONFIG_DIR) + "/toy.json";

}  // namespace

TEST_CASE("load, solve, inspect and write through the C interface")
{
    CHECK(std::strlen(mvkl_version()) > 0);

    mvkl_run* run = nullptr;
    REQUIRE(mvkl_run_load(kToy.c_str(), &run) == MVKL_OK);
    REQUIRE(run != nullptr);

    size_t n = 0, l = 0, u = 0;
    CHECK(mvkl_run_dims(run, &n, &l, &u) == MVKL_OK);
    CHECK(n == 9);
    CHECK(l == 2);
    CHECK(u == 4);

    size_t len = 0;
    CHECK(mvkl_run_check(run, nullptr, 0, &len) == MVKL_OK);
    std::vector<char> small(4);
    CHECK(mvkl_run_check(run, small.data(), small.size(), &len) == MVKL_ERR_ARGUMENT);
    std::vector<char> buf(len + 1);
    CHECK(mvkl_run_check(run, buf.data(), buf.size(), &len) == MVKL_OK);
    CHECK(std::string(buf.data()).find("\"gram\"") != std::string::npos);

    CHECK(mvkl_run_set_seed(run, 7) == MVKL_OK);
    CHECK(mvkl_run_set_lhs_count(run, 12) == MVKL_OK);
    CHECK(mvkl_run_set_lhs_count(run, 0) == MVKL_ERR_ARGUMENT);

    mvkl_report* report = nullptr;
    REQUIRE(mvkl_run_solve(run, &report) == MVKL_OK);
    double objective = 0.0;
    CHECK(mvkl_report_objective(report, &objective) == MVKL_OK);
    CHECK(std::isfinite(objective));
    int admissible = -1;
    CHECK(mvkl_report_admissible_count(report, &admissible) == MVKL_OK);
    CHECK(admissible >= 0);

    size_t count = 0;
    CHECK(mvkl_report_coefficients(report, nullptr, 0, &count) == MVKL_OK);
    REQUIRE(count == 9);
    std::vector<double> a(count);
    CHECK(mvkl_report_coefficients(report, a.data(), 3, &count) == MVKL_ERR_ARGUMENT);
    CHECK(mvkl_report_coefficients(report, a.data(), a.size(), &count) == MVKL_OK);

    double again = 0.0;
    CHECK(mvkl_run_objective(run, a.data(), a.size(), &again) == MVKL_OK);
    CHECK(again == objective);
    CHECK(mvkl_run_objective(run, a.data(), 2, &again) == MVKL_ERR_ARGUMENT);

    const double x1[2] = {0.5377, 0.3978};
    double f1 = 0.0;
    CHECK(mvkl_run_evaluate(run, report, x1, 2, 1, 1, &f1) == MVKL_OK);
    CHECK(mvkl_run_evaluate(run, report, x1, 3, 1, 1, &f1) == MVKL_ERR_ARGUMENT);

    const fs::path out = fs::temp_directory_path() / "mvkl_c_api_test";
    fs::remove_all(out);
    CHECK(mvkl_run_write_outputs(run, report, out.string().c_str()) == MVKL_OK);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "mesh_region2_c1.csv"));

    mvkl_report* loaded = nullptr;
    REQUIRE(mvkl_report_load((out / "report.json").string().c_str(), &loaded) == MVKL_OK);
    std::vector<double> b(count);
    CHECK(mvkl_report_coefficients(loaded, b.data(), b.size(), &count) == MVKL_OK);
    CHECK(a == b);
    const fs::path meshes = out / "again";
    CHECK(mvkl_run_write_meshes(run, loaded, meshes.string().c_str()) == MVKL_OK);
    CHECK(fs::exists(meshes / "mesh_region1_c0.csv"));

    mvkl_report_free(loaded);
    mvkl_report_free(report);
    mvkl_run_free(run);
}

TEST_CASE("errors are reported through status codes")
{
    mvkl_run* run = nullptr;
    CHECK(mvkl_run_load(nullptr, &run) == MVKL_ERR_ARGUMENT);
    CHECK(std::strlen(mvkl_last_error()) > 0);
    CHECK(mvkl_run_load("/nonexistent/config.json", &run) == MVKL_ERR_VALIDATION);
    CHECK(run == nullptr);
    CHECK(std::string(mvkl_last_error()).find("/nonexistent/config.json") != std::string::npos);
    mvkl_report* report = nullptr;
    CHECK(mvkl_report_load("/nonexistent/report.json", &report) == MVKL_ERR_IO);
    CHECK(mvkl_run_solve(nullptr, &report) == MVKL_ERR_ARGUMENT);
    CHECK(mvkl_run_dims(nullptr, nullptr, nullptr, nullptr) == MVKL_ERR_ARGUMENT);
    mvkl_run_free(nullptr);
    mvkl_report_free(nullptr);
}
