#include "mvkl/loss.hpp"

#include <cmath>
#include <string>

namespace mvkl {

namespace {

void check_args(LossKind k, const Vector& y, const Vector& z)
{
    if (y.size() != z.size()) {
        throw ValidationError(std::string(to_string(k)) + ": label has dimension " +
                              std::to_string(y.size()) + ", prediction " + std::to_string(z.size()));
    }
    if (scalar_only(k) && y.size() != 1) {
        throw ValidationError(std::string(to_string(k)) + " is defined for scalar labels only, got dimension " +
                              std::to_string(y.size()));
    }
}

[[noreturn]] void not_differentiable(LossKind k, const Vector& y, const Vector& z)
{
    throw NumericalError(std::string(to_string(k)) + " is not differentiable at y=" +
                         std::to_string(y(0)) + ", z=" + std::to_string(z(0)));
}

}  // namespace

std::string_view to_string(LossKind k)
{
    switch (k) {
    case LossKind::LeastSquares: return "least-squares";
    case LossKind::ExponentialLeastSquares: return "exponential-least-squares";
    case LossKind::Sigmoid: return "sigmoid";
    case LossKind::Hinge: return "hinge";
    case LossKind::LeakyHockeyStick: return "leaky-hockey-stick";
    }
    return "unknown";
}

LossKind loss_kind_from_string(std::string_view name)
{
    for (auto k : {LossKind::LeastSquares, LossKind::ExponentialLeastSquares, LossKind::Sigmoid,
                   LossKind::Hinge, LossKind::LeakyHockeyStick}) {
        if (to_string(k) == name) return k;
    }
    throw ValidationError("unknown loss kind '" + std::string(name) + "'");
}

bool scalar_only(LossKind k)
{
    return k == LossKind::Sigmoid || k == LossKind::Hinge || k == LossKind::LeakyHockeyStick;
}

bool differentiable(LossKind k)
{
    return k == LossKind::LeastSquares || k == LossKind::ExponentialLeastSquares ||
           k == LossKind::Sigmoid;
}

double loss_value(LossKind k, const Vector& y, const Vector& z)
{
    check_args(k, y, z);
    switch (k) {
    case LossKind::LeastSquares: return (y - z).squaredNorm();
    case LossKind::ExponentialLeastSquares: return -std::expm1(-(y - z).squaredNorm());
    case LossKind::Sigmoid: return 1.0 / (1.0 + std::exp(z(0) - y(0)));
    case LossKind::Hinge: return std::max(0.0, 1.0 - y(0) * z(0));
    case LossKind::LeakyHockeyStick: {
        const double yz = y(0) * z(0);
        return yz > 1.0 ? -std::log(yz) : 1.0 - yz;
    }
    }
    return 0.0;
}

Vector loss_gradient(LossKind k, const Vector& y, const Vector& z)
{
    check_args(k, y, z);
    switch (k) {
    case LossKind::LeastSquares: return 2.0 * (z - y);
    case LossKind::ExponentialLeastSquares:
        return 2.0 * std::exp(-(y - z).squaredNorm()) * (z - y);
    case LossKind::Sigmoid: {
        const double e = std::exp(z(0) - y(0));
        Vector g(1);
        g(0) = -e / ((1.0 + e) * (1.0 + e));
        return g;
    }
    case LossKind::Hinge: {
        const double yz = y(0) * z(0);
        if (yz == 1.0) not_differentiable(k, y, z);
        Vector g(1);
        g(0) = yz < 1.0 ? -y(0) : 0.0;
        return g;
    }
    case LossKind::LeakyHockeyStick: {
        const double yz = y(0) * z(0);
        if (yz == 1.0) not_differentiable(k, y, z);
        Vector g(1);
        g(0) = yz > 1.0 ? -1.0 / z(0) : -y(0);
        return g;
    }
    }
    return {};
}

Matrix loss_hessian(LossKind k, const Vector& y, const Vector& z)
{
    check_args(k, y, z);
    const auto n = z.size();
    switch (k) {
    case LossKind::LeastSquares: return 2.0 * Matrix::Identity(n, n);
    case LossKind::ExponentialLeastSquares: {
        const Vector r = z - y;
        const double w = std::exp(-r.squaredNorm());
        return 2.0 * w * (Matrix::Identity(n, n) - 2.0 * r * r.transpose());
    }
    case LossKind::Sigmoid: {
        const double e = std::exp(z(0) - y(0));
        Matrix h(1, 1);
        h(0, 0) = e * (e - 1.0) / ((1.0 + e) * (1.0 + e) * (1.0 + e));
        return h;
    }
    case LossKind::Hinge:
    case LossKind::LeakyHockeyStick: not_differentiable(k, y, z);
    }
    return {};
}

}  // namespace mvkl
