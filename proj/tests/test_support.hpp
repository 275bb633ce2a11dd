#pragma once

#include "mvkl/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using mvkl::Matrix;
using mvkl::Vector;

inline const std::array<double, 9> kReferenceA = {0.8433, 1.7226, 1.5475, 0.4395, 0.3944,
                                              0.1926, -0.0055, 1.4116, -0.1589};

inline Vector reference_a() { return Eigen::Map<const Vector>(kReferenceA.data(), 9); }

inline std::vector<mvkl::InputPoint> toy_points()
{
    const double xs[6][2] = {{0.5377, 0.3978}, {0.6342, -0.4584}, {0.3273, 0.3923},
                             {0.3472, 0.4305}, {0.6724, -0.7962}, {0.8174, -0.3601}};
    const int regions[6] = {1, 2, 1, 1, 2, 2};
    std::vector<mvkl::InputPoint> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({Eigen::Vector2d(xs[i][0], xs[i][1]), regions[i]});
    return pts;
}

inline mvkl::SpaceDims toy_dims() { return mvkl::SpaceDims({1, 2, 1, 1, 2, 2}); }

inline mvkl::KernelConfig toy_kernel() { return {mvkl::KernelKind::ToyBlock, 0.1, 10.0}; }

inline mvkl::LaplacianMatrix toy_laplacian()
{
    return mvkl::graph_laplacian(mvkl::gaussian_weights(toy_points(), 0.1));
}

// Reference 9x9 toy operator, row by row; "ij" stands for l_{i,j}.
inline const char* const kPrintedToyM[9] = {
    "11 12 0 13 14 15 0 16 0", "21 22 0 23 24 25 0 26 0", "0 0 22 0 0 0 0 0 0",
    "31 32 0 33 34 35 0 36 0", "41 42 0 43 44 45 0 46 0", "51 52 0 53 54 55 0 56 0",
    "0 0 0 0 0 0 55 0 0",       "61 62 0 63 64 65 0 66 0", "0 0 0 0 0 0 0 0 66"};

inline Matrix printed_toy_m(const Matrix& L)
{
    Matrix M(9, 9);
    for (int r = 0; r < 9; ++r) {
        std::istringstream row(kPrintedToyM[r]);
        for (int c = 0; c < 9; ++c) {
            std::string tok;
            row >> tok;
            M(r, c) = tok == "0" ? 0.0 : L(tok[0] - '1', tok[1] - '1');
        }
    }
    return M;
}

inline mvkl::ProblemSpec toy_spec()
{
    mvkl::ProblemData d;
    d.points = toy_points();
    d.dims = toy_dims();
    d.labels = {Vector::Constant(1, 1.2108), Eigen::Vector2d(1.6636, 4.3843)};
    d.M = mvkl::within_view_embed(toy_laplacian(), d.dims).M;
    d.gamma_A = 0.25;
    d.gamma_I = 10.0;
    d.kernel = toy_kernel();
    d.loss = mvkl::LossKind::ExponentialLeastSquares;
    return mvkl::make_problem(std::move(d));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0)
{
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = uniform(rng, -scale, scale);
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c)
{
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
    return m;
}

// Points in the unit square, pairwise at least min_sep apart.
inline std::vector<mvkl::InputPoint> random_points(std::mt19937_64& rng, int n, double min_sep = 0.15)
{
    std::vector<mvkl::InputPoint> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Eigen::Vector2d x(uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0));
        const bool far = std::all_of(pts.begin(), pts.end(),
                                     [&](const mvkl::InputPoint& p) { return (p.coords - x).norm() >= min_sep; });
        if (far) pts.push_back({x, 0});
    }
    return pts;
}

struct RandomSpecOptions {
    int max_l = 4;
    int max_u = 6;
    bool random_C = false;
    bool regularize = true;
};

/// Random problem with d_i in {1,2}, scalar-gaussian kernel and a within-view
/// Laplacian regularizer. Scalar-only losses get 1 x d_i combination rows.
inline mvkl::ProblemSpec random_spec(std::mt19937_64& rng, mvkl::LossKind loss, RandomSpecOptions opt = {})
{
    const int l = uniform_int(rng, 1, opt.max_l);
    const int u = uniform_int(rng, 0, opt.max_u);
    const int n = l + u;
    mvkl::ProblemData d;
    d.points = random_points(rng, n);
    std::vector<int> dims(n), edims(n);
    const bool scalar = mvkl::scalar_only(loss);
    for (int i = 0; i < n; ++i) {
        dims[i] = uniform_int(rng, 1, 2);
        edims[i] = scalar ? 1 : (opt.random_C ? uniform_int(rng, 1, dims[i]) : dims[i]);
    }
    d.dims = mvkl::SpaceDims(dims, edims);
    if (scalar || opt.random_C) {
        for (int i = 0; i < n; ++i) d.C.push_back(random_matrix(rng, edims[i], dims[i]));
    }
    for (int j = 0; j < l; ++j) d.labels.push_back(random_vector(rng, edims[j], 1.5));
    d.gamma_A = uniform(rng, 0.1, 1.0);
    d.gamma_I = opt.regularize && n > 1 && uniform(rng, 0.0, 1.0) < 0.75 ? uniform(rng, 0.05, 0.5) : 0.0;
    d.kernel = {mvkl::KernelKind::ScalarGaussian, uniform(rng, 0.4, 0.9), 1.0};
    if (d.gamma_I > 0.0) {
        const auto L = mvkl::graph_laplacian(mvkl::gaussian_weights(d.points, 0.5));
        d.M = mvkl::within_view_embed(L, d.dims).M;
    }
    d.loss = loss;
    return mvkl::make_problem(std::move(d));
}

// Central differences, step h.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6)
{
    Vector g(x.size());
    Vector xp = x, xm = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        xp(k) = x(k) + h;
        xm(k) = x(k) - h;
        g(k) = (f(xp) - f(xm)) / (2.0 * h);
        xp(k) = xm(k) = x(k);
    }
    return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-6)
{
    const Vector f0 = f(x);
    Matrix J(f0.size(), x.size());
    Vector xp = x, xm = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        xp(k) = x(k) + h;
        xm(k) = x(k) - h;
        J.col(k) = (f(xp) - f(xm)) / (2.0 * h);
        xp(k) = xm(k) = x(k);
    }
    return J;
}

// max |a - b| / max |b|, guarded against an all-zero reference.
inline double rel_err(const Matrix& a, const Matrix& b)
{
    const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Minimizer of the least-squares functional written as an explicit quadratic
/// a^T Q a - 2 r^T a + c, solved through a QR factorization of Q.
inline Vector quadratic_oracle(const mvkl::ProblemSpec& spec)
{
    const Matrix& K = spec.gram.data;
    const Eigen::Index N = spec.N();
    Matrix Q = spec.gamma_A * K + spec.gamma_I * K * spec.M.M * K;
    Vector r = Vector::Zero(N);
    for (int j = 0; j < spec.l(); ++j) {
        const Matrix E = spec.C[j] * K.middleRows(spec.dims.offset(j), spec.dims.dim(j));
        Q += E.transpose() * E / spec.l();
        r += E.transpose() * spec.labels[j] / spec.l();
    }
    return Q.colPivHouseholderQr().solve(r);
}

}  // namespace testing
