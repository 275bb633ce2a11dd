#pragma once

#include "mvkl/kernel.hpp"
#include "mvkl/loss.hpp"
#include "mvkl/regularizer.hpp"

#include <span>
#include <vector>

namespace mvkl {

// Everything needed to build a problem; make_problem validates it and
// assembles the Gram matrix.
struct ProblemData {
    std::vector<InputPoint> points;  // labeled points first
    std::vector<Vector> labels;      // one per labeled point
    SpaceDims dims;
    std::vector<Matrix> C;            // combination operators e_i x d_i; empty = identity
    std::optional<Matrix> M;          // N x N regularizer; empty = zero
    double gamma_A = 1.0;
    double gamma_I = 0.0;
    KernelConfig kernel;
    LossKind loss = LossKind::LeastSquares;
};

struct ProblemSpec {
    std::vector<InputPoint> points;
    std::vector<Vector> labels;
    SpaceDims dims;
    std::vector<Matrix> C;
    RegularizerOperator M;
    double gamma_A = 1.0;
    double gamma_I = 0.0;
    KernelConfig kernel;
    LossKind loss = LossKind::LeastSquares;
    BlockGram gram;

    [[nodiscard]] int l() const { return static_cast<int>(labels.size()); }
    [[nodiscard]] int u() const { return static_cast<int>(points.size()) - l(); }
    [[nodiscard]] int N() const { return dims.total(); }
};

[[nodiscard]] ProblemSpec make_problem(ProblemData data);

enum class ResidualVariant { Weighted, GradientConsistent };

/// I(a) = (1/l) sum_j V(y_j, C_j f_j) + gamma_A a^T K a + gamma_I f^T M f, f = K a.
[[nodiscard]] double learning_functional(const ProblemSpec& spec, const CoefficientVector& a);

/// Same functional for a section known only through its values at the data
/// points (f, block layout) and its squared RKHS norm.
[[nodiscard]] double functional_from_values(const ProblemSpec& spec, const Vector& f, double norm_sq);

[[nodiscard]] Vector gradient_I(const ProblemSpec& spec, const CoefficientVector& a);
[[nodiscard]] Matrix hessian_I(const ProblemSpec& spec, const CoefficientVector& a);

/// Residual map H(a). Weighted is the exp-weighted stationarity system
/// (labeled rows weight the coupling to labeled point j by
/// exp(-|y_j - C_j f_j|^2)); GradientConsistent is the stationarity system of
/// I itself, with grad I = 2 gamma_A K H. Both coincide for least squares.
[[nodiscard]] Vector residual_H(const ProblemSpec& spec, const CoefficientVector& a,
                                ResidualVariant v);

// Non-identity part R of the Jacobian, dH/da = I + R / gamma_A.
[[nodiscard]] Matrix jacobian_R(const ProblemSpec& spec, const CoefficientVector& a,
                                ResidualVariant v);
[[nodiscard]] Matrix jacobian_H(const ProblemSpec& spec, const CoefficientVector& a,
                                ResidualVariant v);

/// Coefficients c of the orthogonal projection of f = sum_z K_z b_z (z over
/// the data points followed by extra_points) onto span{K_{x_i}}.
[[nodiscard]] CoefficientVector project_onto_span(const ProblemSpec& spec,
                                                  std::span<const InputPoint> extra_points,
                                                  const SpaceDims& extra_dims, const Vector& b);

// I evaluated at f = sum_z K_z b_z over the extended point set.
[[nodiscard]] double extended_functional(const ProblemSpec& spec,
                                         std::span<const InputPoint> extra_points,
                                         const SpaceDims& extra_dims, const Vector& b);

}  // namespace mvkl
