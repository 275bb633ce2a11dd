#pragma once

#include "mvkl/types.hpp"

#include <span>

namespace mvkl {

enum class KernelKind { ScalarGaussian, ToyBlock };

struct KernelConfig {
    KernelKind kind = KernelKind::ScalarGaussian;
    double sigma = 1.0;
    // Rate of the exponential second component on region-2 pairs (toy kernel).
    double alpha = 1.0;

    void validate() const;
    bool operator==(const KernelConfig&) const = default;
};

struct BlockGram {
    Matrix data;
    SpaceDims layout;
};

struct PsdCheck {
    double min_eig = 0.0;
    double max_eig = 0.0;
    bool is_psd = false;
};

// Minimal factorization gram = V^T V with V of shape rank x N.
struct KolmogorovFactor {
    Matrix V;
    int rank = 0;
};

inline constexpr double kDefaultPsdTol = 1e-10;

/// Kernel value K(xi, xj) as a di x dj matrix.
///
/// Scalar-gaussian returns exp(-|xi-xj|^2 / sigma^2) times the rectangular
/// identity pattern. Toy-block distinguishes region 1 (scalar labels) and
/// region 2 (2-vector labels); the region-2/region-2 block carries a second
/// diagonal entry exp(-alpha |xi-xj|).
[[nodiscard]] Matrix kernel_block(const KernelConfig& cfg, const InputPoint& xi, int di,
                                  const InputPoint& xj, int dj);

/// Dense N x N Gram matrix over the given points. Upper blocks are computed,
/// lower blocks are mirrored, so the result is exactly symmetric.
[[nodiscard]] BlockGram assemble_gram(std::span<const InputPoint> points, const SpaceDims& dims,
                                      const KernelConfig& cfg);

/// Cross Gram [K(x_i, z_j)] between two point sets (rows: xs, cols: zs).
[[nodiscard]] Matrix cross_gram(std::span<const InputPoint> xs, const SpaceDims& xdims,
                                std::span<const InputPoint> zs, const SpaceDims& zdims,
                                const KernelConfig& cfg);

[[nodiscard]] PsdCheck check_psd(const Matrix& m, double tol = kDefaultPsdTol);

[[nodiscard]] KolmogorovFactor kolmogorov_factor(const BlockGram& g, double tol = kDefaultPsdTol);

/// Section value f(x) = sum_j K(x, x_j) a_j for a representer-form f.
[[nodiscard]] Vector evaluate_section(const CoefficientVector& a, std::span<const InputPoint> points,
                                      const SpaceDims& dims, const KernelConfig& cfg,
                                      const InputPoint& x, int dx);

// ||f||^2 in the RKHS for f = sum_j K_{x_j} a_j.
[[nodiscard]] double rkhs_norm_sq(const CoefficientVector& a, const BlockGram& g);

// Relative symmetry test used by every symmetric-matrix entry point.
[[nodiscard]] bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

}  // namespace mvkl
