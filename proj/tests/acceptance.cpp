// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "golden.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

using namespace mvkl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok && pass) detail = "first failure: " + what + "; " + detail;
        pass = pass && ok;
    }
};

std::string fmt(double x) { return format_real(x); }

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Context {
    fs::path cli;
    fs::path configs;
    std::optional<SolveReport> toy;
    double toy_seconds = 0.0;
};

const SolveReport& toy_report(Context& ctx)
{
    if (!ctx.toy) {
        const RunConfig cfg = read_config(ctx.configs / "toy.json");
        const auto t0 = Clock::now();
        ctx.toy = solve(build_problem(cfg), cfg.solve);
        ctx.toy_seconds = seconds_since(t0);
    }
    return *ctx.toy;
}

Outcome toy_reproduction(Context& ctx)
{
    Outcome o;
    const ProblemSpec spec = testing::toy_spec();
    const SolveReport& r = toy_report(ctx);
    const double best = learning_functional(spec, r.best_a);
    const double ref = learning_functional(spec, testing::reference_a());
    const Vector diff = (r.best_a - testing::reference_a()).cwiseAbs();
    o.require(r.starts_run == 100, "lhs_count 100");
    o.require(best <= ref + 1e-4, "I(best_a) <= I(a_ref) + 1e-4");
    o.require(ctx.toy_seconds <= 300.0, "runtime <= 5 min");
    std::string comps;
    for (Eigen::Index k = 0; k < diff.size(); ++k) comps += (k ? " " : "") + fmt(diff(k));
    o.detail += "I(best_a)=" + fmt(best) + " I(a_ref)=" + fmt(ref) + " |best_a-a_ref|=[" + comps +
                "] max=" + fmt(diff.maxCoeff()) + " runtime_s=" + fmt(ctx.toy_seconds);
    return o;
}

Outcome weighted_residual(Context& ctx)
{
    Outcome o;
    const ProblemSpec spec = testing::toy_spec();
    const double h =
        residual_H(spec, toy_report(ctx).best_a, ResidualVariant::Weighted).lpNorm<Eigen::Infinity>();
    o.require(h <= 1e-4, "|H(best_a)|_inf <= 1e-4");
    o.detail += "|H(best_a)|_inf=" + fmt(h);
    return o;
}

Outcome ls_exactness(Context&)
{
    Outcome o;
    std::mt19937_64 rng(1001);
    double worst_a = 0.0, worst_g = 0.0;
    const auto t0 = Clock::now();
    for (int rep = 0; rep < 50; ++rep) {
        const ProblemSpec spec = testing::random_spec(rng, LossKind::LeastSquares, {.random_C = rep % 2 == 1});
        const Vector a = solve_ls(spec);
        worst_a = std::max(worst_a, (a - testing::quadratic_oracle(spec)).cwiseAbs().maxCoeff());
        const Vector g = testing::fd_gradient([&](const Vector& x) { return learning_functional(spec, x); }, a);
        worst_g = std::max(worst_g, g.lpNorm<Eigen::Infinity>());
    }
    const double secs = seconds_since(t0);
    o.require(worst_a <= 1e-8, "solve_ls vs quadratic oracle <= 1e-8");
    o.require(worst_g <= 1e-6, "finite-difference gradient <= 1e-6");
    o.require(secs < 10.0, "runtime < 10 s");
    o.detail += "max|a-oracle|=" + fmt(worst_a) + " max|fd grad|=" + fmt(worst_g) + " runtime_s=" + fmt(secs);
    return o;
}

Outcome derivative_checks(Context&)
{
    Outcome o;
    std::mt19937_64 rng(1002);
    double worst_grad = 0.0, worst_jac = 0.0;
    bool exact = true;
    for (LossKind k : {LossKind::LeastSquares, LossKind::ExponentialLeastSquares, LossKind::Sigmoid}) {
        for (int rep = 0; rep < 20; ++rep) {
            const ProblemSpec spec = testing::random_spec(rng, k, {.random_C = rep % 2 == 1});
            const Vector a = testing::random_vector(rng, spec.N());
            const Vector fd = testing::fd_gradient([&](const Vector& x) { return learning_functional(spec, x); }, a);
            worst_grad = std::max(worst_grad, testing::rel_err(gradient_I(spec, a), fd));
        }
    }
    for (int rep = 0; rep < 20; ++rep) {
        const ProblemSpec spec =
            testing::random_spec(rng, LossKind::ExponentialLeastSquares, {.random_C = rep % 2 == 1});
        const Vector a = testing::random_vector(rng, spec.N());
        const auto v = ResidualVariant::Weighted;
        const Matrix J = jacobian_H(spec, a, v);
        const Matrix fd = testing::fd_jacobian([&](const Vector& x) { return residual_H(spec, x, v); }, a);
        worst_jac = std::max(worst_jac, testing::rel_err(J, fd));
        Matrix assembled = jacobian_R(spec, a, v) / spec.gamma_A;
        assembled.diagonal().array() += 1.0;
        exact = exact && J == assembled;
    }
    o.require(worst_grad <= 1e-5, "gradient rel err <= 1e-5");
    o.require(worst_jac <= 1e-5, "jacobian rel err <= 1e-5");
    o.require(exact, "jacobian_H == I + R/gamma_A");
    o.detail += "max grad rel err=" + fmt(worst_grad) + " max jacobian rel err=" + fmt(worst_jac) +
                " exact assembly=" + (exact ? "yes" : "no");
    return o;
}

Outcome projection_lemma(Context&)
{
    Outcome o;
    std::mt19937_64 rng(1003);
    double worst = -1e300;
    for (int rep = 0; rep < 100; ++rep) {
        const LossKind k = rep % 2 ? LossKind::ExponentialLeastSquares : LossKind::LeastSquares;
        const ProblemSpec spec = testing::random_spec(rng, k);
        const int extra_n = testing::uniform_int(rng, 1, 3);
        std::vector<InputPoint> extra;
        std::vector<int> edims;
        for (int e = 0; e < extra_n; ++e) {
            extra.push_back({Eigen::Vector2d(testing::uniform(rng, -0.5, 1.5), testing::uniform(rng, -0.5, 1.5)), 0});
            edims.push_back(testing::uniform_int(rng, 1, 2));
        }
        const SpaceDims ed(edims);
        const Vector b = testing::random_vector(rng, spec.N() + ed.total(), 2.0);
        const double projected = learning_functional(spec, project_onto_span(spec, extra, ed, b));
        const double original = extended_functional(spec, extra, ed, b);
        worst = std::max(worst, projected - original);
    }
    o.require(worst <= 1e-12, "I(projected) <= I(original) + 1e-12");
    o.detail += "max I(projected)-I(original)=" + fmt(worst);
    return o;
}

Outcome kernel_theory(Context&)
{
    Outcome o;
    std::mt19937_64 rng(1004);
    std::vector<ProblemSpec> specs{testing::toy_spec()};
    for (int rep = 0; rep < 30; ++rep) specs.push_back(testing::random_spec(rng, LossKind::LeastSquares));
    bool psd = true;
    double recon = 0.0, repro = 0.0;
    for (const auto& spec : specs) {
        const BlockGram& g = spec.gram;
        psd = psd && check_psd(g.data).is_psd;
        const KolmogorovFactor f = kolmogorov_factor(g);
        recon = std::max(recon, (f.V.transpose() * f.V - g.data).cwiseAbs().maxCoeff());
        const Vector a = testing::random_vector(rng, spec.N(), 2.0);
        for (std::size_t i = 0; i < spec.dims.count(); ++i) {
            const int di = spec.dims.dim(i);
            const Vector fx = evaluate_section(a, spec.points, spec.dims, spec.kernel, spec.points[i], di);
            for (int h = 0; h < di; ++h) {
                const Vector e = Vector::Unit(di, h);
                const double rhs = a.dot(g.data.middleCols(spec.dims.offset(i), di) * e);
                repro = std::max(repro, std::abs(fx.dot(e) - rhs));
            }
        }
    }
    o.require(psd, "every Gram passes check_psd");
    o.require(recon <= 1e-10, "factor reconstruction <= 1e-10");
    o.require(repro <= 1e-10, "reproducing identity <= 1e-10");
    o.detail += "grams=" + std::to_string(specs.size()) + " max reconstruction err=" + fmt(recon) +
                " max reproducing err=" + fmt(repro);
    return o;
}

Outcome regularizer_identities(Context&)
{
    Outcome o;
    std::mt19937_64 rng(1005);
    double lap = 0.0, between = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const int n = testing::uniform_int(rng, 2, 8);
        const auto pts = testing::random_points(rng, n, 0.01);
        const GraphWeights w = gaussian_weights(pts, testing::uniform(rng, 0.2, 1.0));
        const Matrix L = graph_laplacian(w).L;
        const Vector a = testing::random_vector(rng, n, 2.0);
        double pairs = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) pairs += w.W(j, k) * (a(j) - a(k)) * (a(j) - a(k));
        lap = std::max(lap, std::abs(a.dot(L * a) - pairs));

        const int m = testing::uniform_int(rng, 1, 6);
        const Matrix Mm = between_view_operator(m, 1, 1).M;
        const Vector b = testing::random_vector(rng, m, 2.0);
        double diffs = 0.0;
        for (int j = 0; j < m; ++j)
            for (int k = j + 1; k < m; ++k) diffs += (b(j) - b(k)) * (b(j) - b(k));
        between = std::max(between, std::abs(b.dot(Mm * b) - diffs));
    }
    const LaplacianMatrix toy = testing::toy_laplacian();
    const bool exact = within_view_embed(toy, testing::toy_dims()).M == testing::printed_toy_m(toy.L);
    o.require(lap <= 1e-10, "Laplacian quadratic form <= 1e-10");
    o.require(between <= 1e-10, "between-view quadratic form <= 1e-10");
    o.require(exact, "toy embedding reproduces the reference matrix entrywise");
    o.detail += "max Laplacian err=" + fmt(lap) + " max between-view err=" + fmt(between) +
                " toy M exact=" + (exact ? "yes" : "no");
    return o;
}

Outcome delta_cube(Context&)
{
    Outcome o;
    const ProblemSpec spec = testing::toy_spec();
    const DeltaBound db = delta_bound(spec);
    const double i0 = learning_functional(spec, Vector::Zero(spec.N()));
    std::mt19937_64 rng(1006);
    double worst = 1e300;
    for (int rep = 0; rep < 100; ++rep) {
        Vector a = testing::random_vector(rng, spec.N());
        a *= db.delta / a.lpNorm<Eigen::Infinity>();
        a *= testing::uniform(rng, 1.01, 2.0);
        worst = std::min(worst, learning_functional(spec, a) - i0);
    }
    // Independent smallest eigenvalue: singular values of the SPD Gram.
    const double sigma_min = Eigen::JacobiSVD<Matrix>(spec.gram.data).singularValues().minCoeff();
    const double delta_ref = std::sqrt(i0 / (spec.gamma_A * sigma_min));
    o.require(worst >= -1e-12, "I(a) >= I(0) - 1e-12 outside the cube");
    o.require(std::abs(db.delta - delta_ref) <= 1e-10, "delta vs independent eigensolver <= 1e-10");
    o.require(std::abs(db.delta - golden::delta) <= 1e-10, "delta vs high-precision oracle <= 1e-10");
    o.detail += "delta=" + fmt(db.delta) + " reference=" + fmt(delta_ref) + " min I(a)-I(0)=" + fmt(worst);
    return o;
}

Outcome lhs_strata(Context&)
{
    Outcome o;
    int cases = 0;
    for (int count : {2, 10, 50}) {
        for (int dim : {1, 9}) {
            const double delta = 1.5;
            const auto s = lhs_sample(count, dim, delta, 99);
            for (int axis = 0; axis < dim; ++axis) {
                std::vector<int> hist(static_cast<std::size_t>(count), 0);
                for (const auto& p : s) {
                    const auto bin = static_cast<long>(std::floor((p(axis) + delta) / (2.0 * delta) * count));
                    if (bin >= 0 && bin < count) ++hist[static_cast<std::size_t>(bin)];
                }
                o.require(std::all_of(hist.begin(), hist.end(), [](int c) { return c == 1; }),
                          "one sample per stratum (count " + std::to_string(count) + ", dim " +
                              std::to_string(dim) + ")");
            }
            o.require(lhs_sample(count, dim, delta, 99) == s, "same seed gives identical samples");
            ++cases;
        }
    }
    o.detail += "cases=" + std::to_string(cases);
    return o;
}

Outcome cli_determinism(Context& ctx)
{
    Outcome o;
    const fs::path base = fs::temp_directory_path() / "mvkl_acceptance_cli";
    fs::remove_all(base);
    const fs::path d1 = base / "run1", d2 = base / "run2";
    for (const auto& d : {d1, d2}) {
        const std::string cmd = "\"" + ctx.cli.string() + "\" solve --config \"" +
                                (ctx.configs / "toy.json").string() + "\" --seed 1 --out \"" + d.string() +
                                "\" > \"" + (base / "stdout.txt").string() + "\" 2>&1";
        fs::create_directories(base);
        o.require(std::system(cmd.c_str()) == 0, "cli exit code 0");
    }
    int files = 0;
    for (const char* name :
         {"report.json", "trace.csv", "mesh_region1_c0.csv", "mesh_region2_c0.csv", "mesh_region2_c1.csv"}) {
        const bool present = fs::exists(d1 / name) && fs::exists(d2 / name);
        o.require(present, std::string("file written: ") + name);
        if (!present) continue;
        o.require(read_text_file(d1 / name) == read_text_file(d2 / name), std::string("identical bytes: ") + name);
        ++files;
    }
    o.detail += "files compared=" + std::to_string(files);
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <mvkl_cli> <configs-dir>\n", argv[0]);
        return 2;
    }
    Context ctx{argv[1], argv[2], std::nullopt, 0.0};

    struct Criterion {
        const char* name;
        Outcome (*run)(Context&);
    };
    const Criterion criteria[] = {
        {"toy model reproduction", toy_reproduction},
        {"weighted residual at best_a", weighted_residual},
        {"least-squares exactness", ls_exactness},
        {"gradient and jacobian checks", derivative_checks},
        {"projection lemma", projection_lemma},
        {"kernel psd, factor, reproducing identity", kernel_theory},
        {"regularizer identities", regularizer_identities},
        {"delta cube", delta_cube},
        {"latin hypercube stratification", lhs_strata},
        {"cli determinism", cli_determinism},
    };

    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
