#include "mvkl/regularizer.hpp"

#include "mvkl/kernel.hpp"

#include <cmath>
#include <string>

namespace mvkl {

GraphWeights gaussian_weights(std::span<const InputPoint> points, double sigma_graph,
                              std::optional<double> epsilon_neighbor)
{
    if (!(sigma_graph > 0.0)) {
        throw ValidationError("gaussian_weights: sigma_graph must be positive, got " +
                              std::to_string(sigma_graph));
    }
    if (epsilon_neighbor && !(*epsilon_neighbor > 0.0)) {
        throw ValidationError("gaussian_weights: epsilon_neighbor must be positive, got " +
                              std::to_string(*epsilon_neighbor));
    }
    const auto n = static_cast<Eigen::Index>(points.size());
    GraphWeights out{Matrix::Identity(n, n)};
    const double denom = 2.0 * sigma_graph * sigma_graph;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = j + 1; k < n; ++k) {
            const double d2 = (points[j].coords - points[k].coords).squaredNorm();
            double w = std::exp(-d2 / denom);
            if (epsilon_neighbor && std::sqrt(d2) > *epsilon_neighbor) w = 0.0;
            out.W(j, k) = w;
            out.W(k, j) = w;
        }
    }
    return out;
}

LaplacianMatrix graph_laplacian(const GraphWeights& w, bool normalized)
{
    if (w.W.rows() != w.W.cols()) throw ValidationError("graph_laplacian: weight matrix not square");
    if (!is_symmetric(w.W)) throw ValidationError("graph_laplacian: weight matrix not symmetric");
    if ((w.W.array() < 0.0).any()) throw ValidationError("graph_laplacian: negative weight");

    const Vector degree = w.W.rowwise().sum();
    for (Eigen::Index j = 0; j < degree.size(); ++j) {
        if (!(degree(j) > 0.0)) {
            throw NumericalError("graph_laplacian: vertex " + std::to_string(j) +
                                 " is isolated (zero degree)");
        }
    }
    LaplacianMatrix out{-w.W, normalized};
    out.L.diagonal() += degree;
    if (normalized) {
        const Vector s = degree.cwiseSqrt().cwiseInverse();
        out.L = s.asDiagonal() * out.L * s.asDiagonal();
        out.L = 0.5 * (out.L + out.L.transpose()).eval();
    }
    return out;
}

Matrix kronecker(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

RegularizerOperator between_view_operator(int m, int dim_y, int n)
{
    if (m < 1 || dim_y < 1 || n < 1) {
        throw ValidationError("between_view_operator: m, dimY and n must be >= 1");
    }
    Matrix mm = static_cast<double>(m) * Matrix::Identity(m, m) - Matrix::Ones(m, m);
    const Matrix per_point = kronecker(mm, Matrix::Identity(dim_y, dim_y));
    return {kronecker(Matrix::Identity(n, n), per_point),
            SpaceDims(std::vector<int>(static_cast<std::size_t>(n), m * dim_y))};
}

RegularizerOperator within_view_embed(const LaplacianMatrix& L, const SpaceDims& dims)
{
    const auto n = static_cast<Eigen::Index>(dims.count());
    if (L.L.rows() != n || L.L.cols() != n) {
        throw ValidationError("within_view_embed: Laplacian is " + std::to_string(L.L.rows()) + "x" +
                              std::to_string(L.L.cols()) + " but layout has " + std::to_string(n) +
                              " points");
    }
    if (n == 0) return {Matrix(), dims};
    if (dims.homogeneous()) {
        const int d = dims.dim(0);
        return {kronecker(L.L, Matrix::Identity(d, d)), dims};
    }
    Matrix M = Matrix::Zero(dims.total(), dims.total());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (Eigen::Index j = 0; j < n; ++j) {
            M(dims.offset(ui), dims.offset(static_cast<std::size_t>(j))) = L.L(i, j);
        }
        for (int c = 1; c < dims.dim(ui); ++c) {
            M(dims.offset(ui) + c, dims.offset(ui) + c) = L.L(i, i);
        }
    }
    return {std::move(M), dims};
}

RegularizerOperator combine_regularizer(const RegularizerConfig& cfg,
                                        const std::optional<RegularizerOperator>& between,
                                        const std::optional<RegularizerOperator>& within)
{
    if (!between && !within) {
        throw ValidationError("combine_regularizer: need at least one of M_B, M_W");
    }
    if (cfg.gamma_I < 0.0 || cfg.gamma_B < 0.0 || cfg.gamma_W < 0.0) {
        throw ValidationError("combine_regularizer: regularization coefficients must be >= 0");
    }
    if (between && within && !(between->layout == within->layout)) {
        throw ValidationError("combine_regularizer: M_B and M_W layouts differ");
    }
    const SpaceDims& layout = between ? between->layout : within->layout;
    RegularizerOperator out{Matrix::Zero(layout.total(), layout.total()), layout};
    if (cfg.gamma_I == 0.0) return out;
    if (between) out.M += (cfg.gamma_B / cfg.gamma_I) * between->M;
    if (within) out.M += (cfg.gamma_W / cfg.gamma_I) * within->M;
    return out;
}

}  // namespace mvkl
