#pragma once

#include "mvkl/objective.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mvkl {

enum class SolveMode { LeastSquares, ExponentialLeastSquares };

// What each multistart local solve drives to zero.
//   Residual: box-constrained damped Gauss-Newton on 0.5 |H_w(a)|^2.
//   Objective:     box-constrained damped Newton on I(a).
enum class InnerObjective { Residual, Objective };

[[nodiscard]] std::string_view to_string(SolveMode m);
[[nodiscard]] std::string_view to_string(InnerObjective o);
[[nodiscard]] SolveMode solve_mode_from_string(std::string_view s);
[[nodiscard]] InnerObjective inner_objective_from_string(std::string_view s);

struct SolveConfig {
    SolveMode mode = SolveMode::ExponentialLeastSquares;
    InnerObjective inner = InnerObjective::Residual;
    int lhs_count = 100;
    std::uint64_t seed = 1;
    int max_iters = 500;
    double tol_opt = 1e-6;
    double tol_step = 1e-12;
    double damping_init = 1e-3;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    // Worker threads for the multistart loop; 0 picks hardware concurrency.
    int threads = 0;

    void validate() const;
    bool operator==(const SolveConfig&) const = default;
};

struct TracePoint {
    int iter = 0;
    double objective = 0.0;
    double grad_inf = 0.0;
};

struct LocalResult {
    CoefficientVector a;
    double objective = 0.0;   // I(a)
    double grad_inf = 0.0;    // projected |grad I|_inf on the cube
    double optimality = 0.0;  // first-order measure of the inner problem
    int iters = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
};

struct StartRecord {
    int start_index = 0;
    CoefficientVector a0;
    double final_objective = 0.0;
    double final_grad_inf = 0.0;
    double final_optimality = 0.0;
    double final_resid_inf = 0.0;
    int iters = 0;
    bool converged = false;
    bool admissible = false;
    std::vector<TracePoint> trace;
};

struct SolveReport {
    SolveMode mode = SolveMode::LeastSquares;
    InnerObjective inner = InnerObjective::Residual;
    CoefficientVector best_a;
    double objective = 0.0;
    double resid_paper_inf = 0.0;
    double grad_inf = 0.0;
    double optimality = 0.0;
    std::optional<double> delta;  // search cube half-width; absent for the direct solve
    int starts_run = 0;
    int admissible_count = 0;
    bool trivial = false;        // all labels zero, a = 0 is the global minimizer
    bool no_admissible = false;  // best_a fell back to the lowest objective overall
    std::vector<StartRecord> per_start;
    std::uint64_t seed = 0;
};

struct DeltaBound {
    double delta = 0.0;
    double lambda_min = 0.0;
    double objective_at_zero = 0.0;
    bool trivial = false;
};

/// Exact minimizer for least-squares loss via the dense representer system
/// (l gA I + J_C K + l gI M K) a = y~.
[[nodiscard]] CoefficientVector solve_ls(const ProblemSpec& spec);

/// Half-width delta of a cube [-delta, delta]^N that contains every global
/// minimizer of the exponential least-squares functional:
/// delta = sqrt(I(0) / (gamma_A lambda_min(K))).
[[nodiscard]] DeltaBound delta_bound(const ProblemSpec& spec);

/// Latin hypercube sample of `count` points in [-delta, delta]^dim.
[[nodiscard]] std::vector<CoefficientVector> lhs_sample(int count, int dim, double delta,
                                                        std::uint64_t seed);

/// Projected damped Newton on I over the cube, starting from a0.
[[nodiscard]] LocalResult local_minimize(const ProblemSpec& spec, const CoefficientVector& a0,
                                         double delta, const SolveConfig& cfg);

/// Projected damped Gauss-Newton on 0.5 |H_w|^2 over the cube.
/// `optimality` is |H_w|_inf; converged means a root within tol_opt.
[[nodiscard]] LocalResult local_root_find(const ProblemSpec& spec, const CoefficientVector& a0,
                                          double delta, const SolveConfig& cfg);

/// LHS multistart of the configured local solver inside the delta cube.
[[nodiscard]] SolveReport multistart_solve(const ProblemSpec& spec, const SolveConfig& cfg);

/// Dispatch on cfg.mode: direct linear solve or multistart.
[[nodiscard]] SolveReport solve(const ProblemSpec& spec, const SolveConfig& cfg);

// |a - clamp(a - g)|_inf on [-delta, delta]^N.
[[nodiscard]] double projected_gradient_inf(const Vector& a, const Vector& g, double delta);

}  // namespace mvkl
