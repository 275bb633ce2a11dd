#pragma once

#include "mvkl/types.hpp"

#include <string_view>

namespace mvkl {

enum class LossKind { LeastSquares, ExponentialLeastSquares, Sigmoid, Hinge, LeakyHockeyStick };

[[nodiscard]] std::string_view to_string(LossKind k);
[[nodiscard]] LossKind loss_kind_from_string(std::string_view name);

// True for kinds defined only on scalar labels.
[[nodiscard]] bool scalar_only(LossKind k);
// True for kinds the solvers can handle (smooth and bounded below).
[[nodiscard]] bool differentiable(LossKind k);

/// V(y, z) for label y and prediction z.
[[nodiscard]] double loss_value(LossKind k, const Vector& y, const Vector& z);

/// dV/dz. Throws NumericalError at the knee yz = 1 of hinge and leaky
/// hockey stick, where V is not differentiable.
[[nodiscard]] Vector loss_gradient(LossKind k, const Vector& y, const Vector& z);

// d^2V/dz^2, for the kinds the Newton solver uses.
[[nodiscard]] Matrix loss_hessian(LossKind k, const Vector& y, const Vector& z);

}  // namespace mvkl
