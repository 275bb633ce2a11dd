#pragma once

#include "mvkl/types.hpp"

#include <optional>
#include <span>

namespace mvkl {

struct GraphWeights {
    Matrix W;
};

struct LaplacianMatrix {
    Matrix L;
    bool normalized = false;
};

struct RegularizerOperator {
    Matrix M;
    SpaceDims layout;
};

struct RegularizerConfig {
    double gamma_I = 0.0;
    double gamma_B = 0.0;
    double gamma_W = 0.0;
    double sigma_graph = 1.0;
    std::optional<double> epsilon_neighbor;
    bool normalized = false;

    bool operator==(const RegularizerConfig&) const = default;
};

/// Gaussian similarity w_jk = exp(-|x_j - x_k|^2 / (2 sigma^2)), optionally
/// truncated to zero beyond the neighbourhood radius epsilon.
[[nodiscard]] GraphWeights gaussian_weights(std::span<const InputPoint> points, double sigma_graph,
                                            std::optional<double> epsilon_neighbor = std::nullopt);

/// L = V - W with V the degree matrix; normalized gives V^{-1/2} L V^{-1/2}.
/// Throws if any vertex has zero degree.
[[nodiscard]] LaplacianMatrix graph_laplacian(const GraphWeights& w, bool normalized = false);

/// I_n (x) (M_m (x) I_dimY) with M_m = m I - 1 1^T; penalizes disagreement
/// between the m views at each of the n points.
[[nodiscard]] RegularizerOperator between_view_operator(int m, int dim_y, int n);

/// Lifts an n x n Laplacian to the block layout. Homogeneous dims give
/// L (x) I_d. With mixed dims the first components couple through L and every
/// further component of point i only sees l_ii on its own diagonal.
[[nodiscard]] RegularizerOperator within_view_embed(const LaplacianMatrix& L, const SpaceDims& dims);

/// M = (gamma_B M_B + gamma_W M_W) / gamma_I, so that gamma_I M is the full
/// penalty. gamma_I == 0 yields the zero operator.
[[nodiscard]] RegularizerOperator combine_regularizer(const RegularizerConfig& cfg,
                                                      const std::optional<RegularizerOperator>& between,
                                                      const std::optional<RegularizerOperator>& within);

// Generic dense Kronecker product.
[[nodiscard]] Matrix kronecker(const Matrix& a, const Matrix& b);

}  // namespace mvkl
