#include "mvkl/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace mvkl {

std::string_view to_string(SolveMode m)
{
    return m == SolveMode::LeastSquares ? "ls" : "els";
}

std::string_view to_string(InnerObjective o)
{
    return o == InnerObjective::Residual ? "residual" : "objective";
}

SolveMode solve_mode_from_string(std::string_view s)
{
    if (s == "ls") return SolveMode::LeastSquares;
    if (s == "els") return SolveMode::ExponentialLeastSquares;
    throw ValidationError("unknown solve mode '" + std::string(s) + "' (expected ls or els)");
}

InnerObjective inner_objective_from_string(std::string_view s)
{
    if (s == "residual") return InnerObjective::Residual;
    if (s == "objective") return InnerObjective::Objective;
    throw ValidationError("unknown inner objective '" + std::string(s) +
                          "' (expected residual or objective)");
}

void SolveConfig::validate() const
{
    auto fail = [](const std::string& what) { throw ValidationError("solve." + what); };
    if (lhs_count < 1) fail("lhs_count must be >= 1");
    if (max_iters < 0) fail("max_iters must be >= 0");
    if (!(tol_opt > 0.0)) fail("tol_opt must be > 0");
    if (!(tol_step >= 0.0)) fail("tol_step must be >= 0");
    if (!(damping_init > 0.0)) fail("damping_init must be > 0");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("armijo_c must lie in (0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) fail("backtrack must lie in (0, 1)");
    if (threads < 0) fail("threads must be >= 0");
}

double projected_gradient_inf(const Vector& a, const Vector& g, double delta)
{
    return (a - (a - g).cwiseMax(-delta).cwiseMin(delta)).lpNorm<Eigen::Infinity>();
}

CoefficientVector solve_ls(const ProblemSpec& spec)
{
    if (spec.loss != LossKind::LeastSquares) {
        throw ValidationError("solve_ls needs least-squares loss, problem uses " +
                              std::string(to_string(spec.loss)));
    }
    const Eigen::Index N = spec.N();
    const double l = spec.l();
    const Matrix& K = spec.gram.data;

    Matrix A = (l * spec.gamma_A) * Matrix::Identity(N, N);
    Vector rhs = Vector::Zero(N);
    for (std::size_t i = 0; i < spec.labels.size(); ++i) {
        const auto off = spec.dims.offset(i);
        const auto d = spec.dims.dim(i);
        A.middleRows(off, d) += spec.C[i].transpose() * spec.C[i] * K.middleRows(off, d);
        rhs.segment(off, d) = spec.C[i].transpose() * spec.labels[i];
    }
    if (spec.gamma_I != 0.0) A += (l * spec.gamma_I) * (spec.M.M * K);

    const Eigen::PartialPivLU<Matrix> lu(A);
    const double rcond = lu.rcond();
    if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
        throw NumericalError("solve_ls: linear system is numerically singular (condition estimate " +
                             std::to_string(rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) +
                             ")");
    }
    Vector a = lu.solve(rhs);
    a += lu.solve(rhs - A * a);  // one step of iterative refinement
    return a;
}

DeltaBound delta_bound(const ProblemSpec& spec)
{
    if (spec.loss != LossKind::ExponentialLeastSquares) {
        throw ValidationError("delta_bound needs exponential-least-squares loss, problem uses " +
                              std::string(to_string(spec.loss)));
    }
    DeltaBound out;
    out.objective_at_zero = learning_functional(spec, Vector::Zero(spec.N()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(spec.gram.data, Eigen::EigenvaluesOnly);
    out.lambda_min = es.eigenvalues()(0);
    const double lambda_max = es.eigenvalues()(spec.N() - 1);

    const bool all_zero = std::all_of(spec.labels.begin(), spec.labels.end(),
                                      [](const Vector& y) { return y.isZero(0.0); });
    if (all_zero) {
        out.trivial = true;
        out.delta = 0.0;
        return out;
    }
    if (!(out.lambda_min > kDefaultPsdTol * std::max(1.0, lambda_max))) {
        throw NumericalError("delta_bound: Gram matrix is singular (least eigenvalue " +
                             std::to_string(out.lambda_min) + "); the search cube is unbounded");
    }
    out.delta = std::sqrt(out.objective_at_zero / (spec.gamma_A * out.lambda_min));
    return out;
}

namespace {

double uniform01(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n).
std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n)
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r = 0;
    do {
        r = gen();
    } while (r >= limit);
    return r % n;
}

}  // namespace

std::vector<CoefficientVector> lhs_sample(int count, int dim, double delta, std::uint64_t seed)
{
    if (count < 1) throw ValidationError("lhs_sample: count must be >= 1");
    if (dim < 0) throw ValidationError("lhs_sample: dim must be >= 0");
    if (!(delta > 0.0)) throw ValidationError("lhs_sample: delta must be > 0");

    std::mt19937_64 gen(seed);
    std::vector<CoefficientVector> out(static_cast<std::size_t>(count), Vector::Zero(dim));
    const double width = 2.0 * delta / count;
    std::vector<int> perm(static_cast<std::size_t>(count));
    for (int axis = 0; axis < dim; ++axis) {
        for (int k = 0; k < count; ++k) perm[static_cast<std::size_t>(k)] = k;
        for (int k = count - 1; k > 0; --k) {
            const auto j = uniform_index(gen, static_cast<std::uint64_t>(k) + 1);
            std::swap(perm[static_cast<std::size_t>(k)], perm[j]);
        }
        for (int k = 0; k < count; ++k) {
            const double u = uniform01(gen);
            const double v = -delta + (perm[static_cast<std::size_t>(k)] + u) * width;
            out[static_cast<std::size_t>(k)](axis) = std::min(v, delta);
        }
    }
    return out;
}

namespace {

// Smooth box-constrained problem for the projected Newton driver.
struct SmoothModel {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> curvature;  // Hessian or Gauss-Newton matrix
};

Vector clamp(const Vector& a, double delta)
{
    return a.cwiseMax(-delta).cwiseMin(delta);
}

struct DriverState {
    Vector a;
    double value = 0.0;
    Vector grad;
    int iters = 0;
    bool small_step = false;  // last accepted step was below tol_step
    bool stalled = false;     // no acceptable step could be found
};

// Active-set projected Newton with Levenberg damping and Armijo backtracking
// along the projection arc. `done` decides convergence at the current iterate;
// `on_iter` observes every accepted iterate (including the start).
template <class Done, class OnIter>
DriverState projected_newton(const SmoothModel& model, const Vector& a0, double delta,
                             const SolveConfig& cfg, Done done, OnIter on_iter)
{
    DriverState s;
    s.a = clamp(a0, delta);
    s.value = model.value(s.a);
    s.grad = model.gradient(s.a);
    double lambda = cfg.damping_init;
    on_iter(s);

    const Eigen::Index n = s.a.size();
    while (s.iters < cfg.max_iters) {
        if (done(s)) break;

        const double pg_inf = projected_gradient_inf(s.a, s.grad, delta);
        const double bind = std::min(1e-8 * std::max(delta, 1.0), pg_inf);
        std::vector<Eigen::Index> free_idx;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lower = s.a(i) <= -delta + bind && s.grad(i) > 0.0;
            const bool at_upper = s.a(i) >= delta - bind && s.grad(i) < 0.0;
            if (!at_lower && !at_upper) free_idx.push_back(i);
        }
        const auto nf = static_cast<Eigen::Index>(free_idx.size());
        const Matrix curv = model.curvature(s.a);
        Matrix h_ff(nf, nf);
        Vector g_f(nf);
        for (Eigen::Index r = 0; r < nf; ++r) {
            g_f(r) = s.grad(free_idx[r]);
            for (Eigen::Index c = 0; c < nf; ++c) h_ff(r, c) = curv(free_idx[r], free_idx[c]);
        }

        bool accepted = false;
        Vector trial;
        double trial_value = 0.0;
        const double scale = std::max(1.0, h_ff.size() > 0 ? h_ff.cwiseAbs().maxCoeff() : 1.0);
        while (!accepted) {
            Vector p = -s.grad;  // steepest descent fallback when damping saturates
            if (lambda <= 1e12 * scale) {
                Matrix damped = h_ff;
                damped.diagonal().array() += lambda;
                const Eigen::LLT<Matrix> llt(damped);
                if (llt.info() != Eigen::Success) {
                    lambda *= 10.0;
                    continue;
                }
                const Vector p_f = llt.solve(-g_f);
                p.setZero();
                for (Eigen::Index r = 0; r < nf; ++r) p(free_idx[r]) = p_f(r);
            }

            double t = 1.0;
            for (int ls = 0; ls < 60; ++ls, t *= cfg.backtrack) {
                trial = clamp(s.a + t * p, delta);
                const double predicted = s.grad.dot(trial - s.a);
                if (!(predicted < 0.0)) break;
                trial_value = model.value(trial);
                if (trial_value <= s.value + cfg.armijo_c * predicted) {
                    accepted = true;
                    break;
                }
            }
            if (accepted) break;
            if (lambda > 1e12 * scale) {
                s.stalled = true;
                return s;
            }
            lambda *= 10.0;
        }

        const double step = (trial - s.a).lpNorm<Eigen::Infinity>();
        s.a = trial;
        s.value = trial_value;
        s.grad = model.gradient(s.a);
        ++s.iters;
        lambda = std::max(0.5 * lambda, cfg.damping_init);
        on_iter(s);
        if (step <= cfg.tol_step) {
            s.small_step = true;
            break;
        }
    }
    return s;
}

void check_start(const ProblemSpec& spec, const CoefficientVector& a0, double delta)
{
    if (a0.size() != spec.N()) {
        throw ValidationError("start vector has length " + std::to_string(a0.size()) + ", expected " +
                              std::to_string(spec.N()));
    }
    if (!(delta > 0.0)) throw ValidationError("search cube half-width must be > 0");
}

}  // namespace

LocalResult local_minimize(const ProblemSpec& spec, const CoefficientVector& a0, double delta,
                           const SolveConfig& cfg)
{
    check_start(spec, a0, delta);
    const SmoothModel model{
        [&](const Vector& a) { return learning_functional(spec, a); },
        [&](const Vector& a) { return gradient_I(spec, a); },
        [&](const Vector& a) { return hessian_I(spec, a); },
    };
    LocalResult out;
    auto done = [&](const DriverState& s) {
        return projected_gradient_inf(s.a, s.grad, delta) <= cfg.tol_opt;
    };
    auto on_iter = [&](const DriverState& s) {
        out.trace.push_back({s.iters, s.value, projected_gradient_inf(s.a, s.grad, delta)});
    };
    const DriverState s = projected_newton(model, a0, delta, cfg, done, on_iter);
    out.a = s.a;
    out.objective = s.value;
    out.grad_inf = projected_gradient_inf(s.a, s.grad, delta);
    out.optimality = out.grad_inf;
    out.iters = s.iters;
    out.converged = out.grad_inf <= cfg.tol_opt || s.small_step;
    return out;
}

LocalResult local_root_find(const ProblemSpec& spec, const CoefficientVector& a0, double delta,
                            const SolveConfig& cfg)
{
    check_start(spec, a0, delta);
    constexpr auto variant = ResidualVariant::Weighted;
    const SmoothModel model{
        [&](const Vector& a) { return 0.5 * residual_H(spec, a, variant).squaredNorm(); },
        [&](const Vector& a) {
            return Vector(jacobian_H(spec, a, variant).transpose() * residual_H(spec, a, variant));
        },
        [&](const Vector& a) {
            const Matrix J = jacobian_H(spec, a, variant);
            return Matrix(J.transpose() * J);
        },
    };
    LocalResult out;
    auto done = [&](const DriverState& s) {
        return residual_H(spec, s.a, variant).lpNorm<Eigen::Infinity>() <= cfg.tol_opt;
    };
    auto on_iter = [&](const DriverState& s) {
        out.trace.push_back({s.iters, learning_functional(spec, s.a),
                             projected_gradient_inf(s.a, gradient_I(spec, s.a), delta)});
    };
    const DriverState s = projected_newton(model, a0, delta, cfg, done, on_iter);
    out.a = s.a;
    out.objective = learning_functional(spec, s.a);
    out.grad_inf = projected_gradient_inf(s.a, gradient_I(spec, s.a), delta);
    out.optimality = residual_H(spec, s.a, variant).lpNorm<Eigen::Infinity>();
    out.iters = s.iters;
    out.converged = out.optimality <= cfg.tol_opt;
    return out;
}

namespace {

// Strict weak order used to pick the winner: objective, then projected
// gradient, then start index. Independent of evaluation order.
bool better(const StartRecord& x, const StartRecord& y)
{
    if (x.final_objective != y.final_objective) return x.final_objective < y.final_objective;
    if (x.final_grad_inf != y.final_grad_inf) return x.final_grad_inf < y.final_grad_inf;
    return x.start_index < y.start_index;
}

SolveReport trivial_report(const ProblemSpec& spec, const SolveConfig& cfg, const DeltaBound& db)
{
    SolveReport r;
    r.mode = cfg.mode;
    r.inner = cfg.inner;
    r.best_a = Vector::Zero(spec.N());
    r.objective = db.objective_at_zero;
    r.resid_paper_inf = residual_H(spec, r.best_a, ResidualVariant::Weighted).lpNorm<Eigen::Infinity>();
    r.grad_inf = gradient_I(spec, r.best_a).lpNorm<Eigen::Infinity>();
    r.optimality = cfg.inner == InnerObjective::Residual ? r.resid_paper_inf : r.grad_inf;
    r.delta = 0.0;
    r.trivial = true;
    r.seed = cfg.seed;
    return r;
}

}  // namespace

SolveReport multistart_solve(const ProblemSpec& spec, const SolveConfig& cfg)
{
    cfg.validate();
    if (cfg.mode != SolveMode::ExponentialLeastSquares) {
        throw ValidationError("multistart_solve needs solve.mode = els");
    }
    const DeltaBound db = delta_bound(spec);
    if (db.trivial) return trivial_report(spec, cfg, db);

    const std::vector<CoefficientVector> starts = lhs_sample(cfg.lhs_count, spec.N(), db.delta, cfg.seed);
    std::vector<StartRecord> records(starts.size());

    auto run_one = [&](std::size_t k) {
        const LocalResult res = cfg.inner == InnerObjective::Residual
                                    ? local_root_find(spec, starts[k], db.delta, cfg)
                                    : local_minimize(spec, starts[k], db.delta, cfg);
        StartRecord& rec = records[k];
        rec.start_index = static_cast<int>(k);
        rec.a0 = starts[k];
        rec.final_objective = res.objective;
        rec.final_grad_inf = res.grad_inf;
        rec.final_optimality = res.optimality;
        rec.final_resid_inf =
            residual_H(spec, res.a, ResidualVariant::Weighted).lpNorm<Eigen::Infinity>();
        rec.iters = res.iters;
        rec.converged = res.converged;
        rec.admissible = res.optimality <= cfg.tol_opt && std::isfinite(res.objective);
        rec.trace = res.trace;
        return res.a;
    };

    std::vector<CoefficientVector> finals(starts.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<std::size_t>(
        std::min<std::size_t>(cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw, starts.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t k = next++; k < starts.size(); k = next++) finals[k] = run_one(k);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SolveReport r;
    r.mode = cfg.mode;
    r.inner = cfg.inner;
    r.delta = db.delta;
    r.seed = cfg.seed;
    r.starts_run = static_cast<int>(records.size());

    std::size_t best = records.size();
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (!records[k].admissible) continue;
        ++r.admissible_count;
        if (best == records.size() || better(records[k], records[best])) best = k;
    }
    if (best == records.size()) {
        r.no_admissible = true;
        best = 0;
        for (std::size_t k = 1; k < records.size(); ++k) {
            if (better(records[k], records[best])) best = k;
        }
    }
    r.best_a = finals[best];
    r.objective = records[best].final_objective;
    r.resid_paper_inf = records[best].final_resid_inf;
    r.grad_inf = records[best].final_grad_inf;
    r.optimality = records[best].final_optimality;
    r.per_start = std::move(records);
    return r;
}

SolveReport solve(const ProblemSpec& spec, const SolveConfig& cfg)
{
    cfg.validate();
    if (cfg.mode == SolveMode::ExponentialLeastSquares) return multistart_solve(spec, cfg);

    SolveReport r;
    r.mode = cfg.mode;
    r.inner = cfg.inner;
    r.seed = cfg.seed;
    r.best_a = solve_ls(spec);
    r.objective = learning_functional(spec, r.best_a);
    r.resid_paper_inf = residual_H(spec, r.best_a, ResidualVariant::Weighted).lpNorm<Eigen::Infinity>();
    r.grad_inf = gradient_I(spec, r.best_a).lpNorm<Eigen::Infinity>();
    r.optimality = r.resid_paper_inf;
    r.starts_run = 1;
    r.admissible_count = 1;

    StartRecord rec;
    rec.start_index = 0;
    rec.a0 = Vector::Zero(spec.N());
    rec.final_objective = r.objective;
    rec.final_grad_inf = r.grad_inf;
    rec.final_optimality = r.optimality;
    rec.final_resid_inf = r.resid_paper_inf;
    rec.converged = true;
    rec.admissible = true;
    rec.trace.push_back({0, r.objective, r.grad_inf});
    r.per_start.push_back(std::move(rec));
    return r;
}

}  // namespace mvkl
