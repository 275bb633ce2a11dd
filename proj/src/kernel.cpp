#include "mvkl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvkl {

namespace {

std::string describe(const InputPoint& x)
{
    std::string s = "(";
    for (Eigen::Index k = 0; k < x.coords.size(); ++k) {
        if (k > 0) s += ", ";
        s += std::to_string(x.coords[k]);
    }
    s += ")";
    if (x.region != 0) s += "@region" + std::to_string(x.region);
    return s;
}

int toy_dim(int region)
{
    if (region == 1) return 1;
    if (region == 2) return 2;
    return 0;
}

}  // namespace

void KernelConfig::validate() const
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ValidationError("kernel.sigma must be positive, got " + std::to_string(sigma));
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("kernel.alpha must be positive, got " + std::to_string(alpha));
    }
}

Matrix kernel_block(const KernelConfig& cfg, const InputPoint& xi, int di, const InputPoint& xj,
                    int dj)
{
    if (di <= 0 || dj <= 0) {
        throw ValidationError("kernel_block: nonpositive block size for pair " + describe(xi) +
                              ", " + describe(xj));
    }
    if (xi.coords.size() != xj.coords.size()) {
        throw ValidationError("kernel_block: ambient dimension mismatch for pair " + describe(xi) +
                              ", " + describe(xj));
    }
    const double dist_sq = (xi.coords - xj.coords).squaredNorm();
    const double g = std::exp(-dist_sq / (cfg.sigma * cfg.sigma));

    Matrix out = Matrix::Zero(di, dj);
    switch (cfg.kind) {
    case KernelKind::ScalarGaussian:
        for (int r = 0; r < std::min(di, dj); ++r) out(r, r) = g;
        break;
    case KernelKind::ToyBlock:
        if (toy_dim(xi.region) != di || toy_dim(xj.region) != dj) {
            throw ValidationError("kernel_block: toy kernel needs region 1 -> dim 1, region 2 -> dim 2; got " +
                                  describe(xi) + " with dim " + std::to_string(di) + " and " +
                                  describe(xj) + " with dim " + std::to_string(dj));
        }
        out(0, 0) = g;
        if (di == 2 && dj == 2) out(1, 1) = std::exp(-cfg.alpha * std::sqrt(dist_sq));
        break;
    }
    return out;
}

BlockGram assemble_gram(std::span<const InputPoint> points, const SpaceDims& dims,
                        const KernelConfig& cfg)
{
    if (points.size() != dims.count()) {
        throw ValidationError("assemble_gram: " + std::to_string(points.size()) + " points but " +
                              std::to_string(dims.count()) + " dimension entries");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i].coords.size() == points[j].coords.size() &&
                points[i].coords == points[j].coords) {
                throw ValidationError("assemble_gram: duplicate points " + std::to_string(i) +
                                      " and " + std::to_string(j) + " at " + describe(points[i]));
            }
        }
    }

    BlockGram g{Matrix::Zero(dims.total(), dims.total()), dims};
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i; j < points.size(); ++j) {
            const Matrix kij = kernel_block(cfg, points[i], dims.dim(i), points[j], dims.dim(j));
            block(g.data, dims, i, j) = kij;
            if (j != i) block(g.data, dims, j, i) = kij.transpose();
        }
    }
    return g;
}

Matrix cross_gram(std::span<const InputPoint> xs, const SpaceDims& xdims,
                  std::span<const InputPoint> zs, const SpaceDims& zdims, const KernelConfig& cfg)
{
    Matrix out = Matrix::Zero(xdims.total(), zdims.total());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < zs.size(); ++j) {
            out.block(xdims.offset(i), zdims.offset(j), xdims.dim(i), zdims.dim(j)) =
                kernel_block(cfg, xs[i], xdims.dim(i), zs[j], zdims.dim(j));
        }
    }
    return out;
}

bool is_symmetric(const Matrix& m, double rel_tol)
{
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

PsdCheck check_psd(const Matrix& m, double tol)
{
    if (m.rows() == 0) return {0.0, 0.0, true};
    if (!is_symmetric(m)) throw ValidationError("check_psd: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("check_psd: eigensolver failed");
    PsdCheck out;
    out.min_eig = es.eigenvalues()(0);
    out.max_eig = es.eigenvalues()(m.rows() - 1);
    out.is_psd = out.min_eig >= -tol * std::max(1.0, out.max_eig);
    return out;
}

KolmogorovFactor kolmogorov_factor(const BlockGram& g, double tol)
{
    const PsdCheck psd = check_psd(g.data, tol);
    if (!psd.is_psd) {
        throw NumericalError("kolmogorov_factor: Gram matrix is not positive semidefinite (min eigenvalue " +
                             std::to_string(psd.min_eig) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.data);
    const Vector& lambda = es.eigenvalues();
    const Eigen::Index n = lambda.size();
    const double cutoff = tol * std::max(0.0, lambda(n - 1));

    KolmogorovFactor out;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (lambda(k) > cutoff) ++out.rank;
    }
    out.V.resize(out.rank, n);
    // Largest eigenvalues first.
    for (int r = 0; r < out.rank; ++r) {
        const Eigen::Index k = n - 1 - r;
        out.V.row(r) = std::sqrt(lambda(k)) * es.eigenvectors().col(k).transpose();
    }
    return out;
}

Vector evaluate_section(const CoefficientVector& a, std::span<const InputPoint> points,
                        const SpaceDims& dims, const KernelConfig& cfg, const InputPoint& x, int dx)
{
    if (a.size() != dims.total() || points.size() != dims.count()) {
        throw ValidationError("evaluate_section: coefficient vector has length " +
                              std::to_string(a.size()) + ", layout expects " +
                              std::to_string(dims.total()));
    }
    Vector out = Vector::Zero(dx);
    for (std::size_t j = 0; j < points.size(); ++j) {
        out.noalias() += kernel_block(cfg, x, dx, points[j], dims.dim(j)) * block(a, dims, j);
    }
    return out;
}

double rkhs_norm_sq(const CoefficientVector& a, const BlockGram& g)
{
    if (a.size() != g.data.rows()) throw ValidationError("rkhs_norm_sq: size mismatch");
    return std::max(0.0, a.dot(g.data * a));
}

}  // namespace mvkl
