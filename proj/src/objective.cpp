#include "mvkl/objective.hpp"

#include <cmath>
#include <string>

namespace mvkl {

namespace {

std::string idx(std::size_t i) { return std::to_string(i); }

// Per-labeled-point data shared by the functional and its derivatives.
struct LabeledTerms {
    Vector f;   // K a
    Vector mf;  // M f (zero when gamma_I == 0)
};

LabeledTerms evaluate_terms(const ProblemSpec& spec, const CoefficientVector& a)
{
    if (a.size() != spec.N()) {
        throw ValidationError("coefficient vector has length " + std::to_string(a.size()) +
                              ", problem has N=" + std::to_string(spec.N()));
    }
    LabeledTerms t;
    t.f = spec.gram.data * a;
    if (spec.gamma_I != 0.0) {
        t.mf = spec.M.M * t.f;
    } else {
        t.mf = Vector::Zero(spec.N());
    }
    return t;
}

Vector prediction(const ProblemSpec& spec, const Vector& f, std::size_t j)
{
    return spec.C[j] * block(f, spec.dims, j);
}

// s with s_j = C_j^T dV/dz (y_j, C_j f_j) / l on labeled blocks.
Vector loss_term_gradient(const ProblemSpec& spec, const Vector& f)
{
    Vector s = Vector::Zero(spec.N());
    const double inv_l = 1.0 / spec.l();
    for (std::size_t j = 0; j < spec.labels.size(); ++j) {
        block(s, spec.dims, j) =
            inv_l * spec.C[j].transpose() * loss_gradient(spec.loss, spec.labels[j], prediction(spec, f, j));
    }
    return s;
}

void require_residual_loss(const ProblemSpec& spec)
{
    if (spec.loss != LossKind::LeastSquares && spec.loss != LossKind::ExponentialLeastSquares) {
        throw ValidationError("residual map is defined for least-squares and exponential-least-squares, not " +
                              std::string(to_string(spec.loss)));
    }
}

}  // namespace

ProblemSpec make_problem(ProblemData data)
{
    ProblemSpec spec;
    const std::size_t n = data.points.size();
    if (n == 0) throw ValidationError("problem has no points");
    if (data.dims.count() != n) {
        throw ValidationError("problem has " + idx(n) + " points but " + idx(data.dims.count()) +
                              " dimension entries");
    }
    if (data.labels.empty()) throw ValidationError("problem needs at least one labeled point (l >= 1)");
    if (data.labels.size() > n) throw ValidationError("more labels than points");
    if (!(data.gamma_A > 0.0)) {
        throw ValidationError("gamma_A must be > 0, got " + std::to_string(data.gamma_A));
    }
    if (!(data.gamma_I >= 0.0)) {
        throw ValidationError("gamma_I must be >= 0, got " + std::to_string(data.gamma_I));
    }
    data.kernel.validate();

    const auto p = data.points.front().coords.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (data.points[i].coords.size() != p) {
            throw ValidationError("point " + idx(i) + " has ambient dimension " +
                                  std::to_string(data.points[i].coords.size()) + ", expected " +
                                  std::to_string(p));
        }
        if (!data.points[i].coords.allFinite()) throw ValidationError("point " + idx(i) + " is not finite");
    }
    for (std::size_t j = 0; j < data.labels.size(); ++j) {
        if (data.labels[j].size() != data.dims.label_dim(j)) {
            throw ValidationError("label " + idx(j) + " has length " + std::to_string(data.labels[j].size()) +
                                  ", label space has dimension " + std::to_string(data.dims.label_dim(j)));
        }
        if (scalar_only(data.loss) && data.labels[j].size() != 1) {
            throw ValidationError(std::string(to_string(data.loss)) + " loss needs scalar labels; label " +
                                  idx(j) + " has dimension " + std::to_string(data.labels[j].size()));
        }
    }

    if (data.C.empty()) {
        data.C.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (data.dims.dim(i) != data.dims.label_dim(i)) {
                throw ValidationError("point " + idx(i) +
                                      ": combination operator required when label and hypothesis dims differ");
            }
            data.C.push_back(Matrix::Identity(data.dims.dim(i), data.dims.dim(i)));
        }
    }
    if (data.C.size() != n) throw ValidationError("need one combination operator per point");
    for (std::size_t i = 0; i < n; ++i) {
        if (data.C[i].rows() != data.dims.label_dim(i) || data.C[i].cols() != data.dims.dim(i)) {
            throw ValidationError("combination operator " + idx(i) + " must be " +
                                  std::to_string(data.dims.label_dim(i)) + "x" + std::to_string(data.dims.dim(i)));
        }
    }

    const int N = data.dims.total();
    Matrix M = data.M.value_or(Matrix::Zero(N, N));
    if (M.rows() != N || M.cols() != N) {
        throw ValidationError("regularizer must be " + std::to_string(N) + "x" + std::to_string(N));
    }
    const PsdCheck mpsd = check_psd(M);
    if (!mpsd.is_psd) {
        throw NumericalError("regularizer is not positive semidefinite (min eigenvalue " +
                             std::to_string(mpsd.min_eig) + ")");
    }

    spec.gram = assemble_gram(data.points, data.dims, data.kernel);
    spec.points = std::move(data.points);
    spec.labels = std::move(data.labels);
    spec.dims = data.dims;
    spec.C = std::move(data.C);
    spec.M = RegularizerOperator{std::move(M), data.dims};
    spec.gamma_A = data.gamma_A;
    spec.gamma_I = data.gamma_I;
    spec.kernel = data.kernel;
    spec.loss = data.loss;
    return spec;
}

double functional_from_values(const ProblemSpec& spec, const Vector& f, double norm_sq)
{
    double data_term = 0.0;
    for (std::size_t j = 0; j < spec.labels.size(); ++j) {
        data_term += loss_value(spec.loss, spec.labels[j], prediction(spec, f, j));
    }
    double value = data_term / spec.l() + spec.gamma_A * norm_sq;
    if (spec.gamma_I != 0.0) value += spec.gamma_I * f.dot(spec.M.M * f);
    return value;
}

double learning_functional(const ProblemSpec& spec, const CoefficientVector& a)
{
    const LabeledTerms t = evaluate_terms(spec, a);
    return functional_from_values(spec, t.f, a.dot(t.f));
}

Vector gradient_I(const ProblemSpec& spec, const CoefficientVector& a)
{
    if (!differentiable(spec.loss)) {
        throw ValidationError(std::string(to_string(spec.loss)) + " loss has no gradient");
    }
    const LabeledTerms t = evaluate_terms(spec, a);
    const Vector inner = loss_term_gradient(spec, t.f) + 2.0 * spec.gamma_A * a + 2.0 * spec.gamma_I * t.mf;
    return spec.gram.data * inner;
}

Matrix hessian_I(const ProblemSpec& spec, const CoefficientVector& a)
{
    if (!differentiable(spec.loss)) {
        throw ValidationError(std::string(to_string(spec.loss)) + " loss has no Hessian");
    }
    const LabeledTerms t = evaluate_terms(spec, a);
    const Matrix& K = spec.gram.data;
    Matrix D = Matrix::Zero(spec.N(), spec.N());
    for (std::size_t j = 0; j < spec.labels.size(); ++j) {
        const Matrix hv = loss_hessian(spec.loss, spec.labels[j], prediction(spec, t.f, j));
        block(D, spec.dims, j, j) = spec.C[j].transpose() * hv * spec.C[j] / spec.l();
    }
    if (spec.gamma_I != 0.0) D += 2.0 * spec.gamma_I * spec.M.M;
    Matrix h = K * D * K + 2.0 * spec.gamma_A * K;
    return 0.5 * (h + h.transpose());
}

Vector residual_H(const ProblemSpec& spec, const CoefficientVector& a, ResidualVariant v)
{
    require_residual_loss(spec);
    const LabeledTerms t = evaluate_terms(spec, a);
    const double la = spec.l() * spec.gamma_A;
    Vector h = a + (spec.gamma_I / spec.gamma_A) * t.mf;

    const bool weighted_els = spec.loss == LossKind::ExponentialLeastSquares && v == ResidualVariant::Weighted;
    if (!weighted_els) {
        // Stationarity of I: a_i + w_i C_i^T (C_i f_i - y_i) / (l gamma_A) + ...
        // with w_i = 1 for least squares.
        h += loss_term_gradient(spec, t.f) / (2.0 * spec.gamma_A);
        return h;
    }

    std::vector<double> w(spec.labels.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = std::exp(-(spec.labels[j] - prediction(spec, t.f, j)).squaredNorm());
    }
    for (std::size_t i = 0; i < spec.labels.size(); ++i) {
        const Matrix ctc = spec.C[i].transpose() * spec.C[i];
        auto hi = block(h, spec.dims, i);
        for (std::size_t j = 0; j < spec.labels.size(); ++j) {
            hi += (w[j] / la) * ctc * block(spec.gram.data, spec.dims, i, j) * block(a, spec.dims, j);
        }
        hi -= spec.C[i].transpose() * spec.labels[i] / la;
    }
    return h;
}

Matrix jacobian_R(const ProblemSpec& spec, const CoefficientVector& a, ResidualVariant v)
{
    require_residual_loss(spec);
    const LabeledTerms t = evaluate_terms(spec, a);
    const Matrix& K = spec.gram.data;
    const double inv_l = 1.0 / spec.l();
    const Eigen::Index N = spec.N();

    Matrix R = Matrix::Zero(N, N);
    if (spec.gamma_I != 0.0) R = spec.gamma_I * (spec.M.M * K);

    const bool weighted_els = spec.loss == LossKind::ExponentialLeastSquares && v == ResidualVariant::Weighted;
    if (!weighted_els) {
        // d/da of C_i^T dV/dz / (2 l): C_i^T d2V/dz2 C_i K_{i,:} / (2 l).
        for (std::size_t i = 0; i < spec.labels.size(); ++i) {
            const Matrix hv = loss_hessian(spec.loss, spec.labels[i], prediction(spec, t.f, i));
            R.middleRows(spec.dims.offset(i), spec.dims.dim(i)) +=
                (0.5 * inv_l) * spec.C[i].transpose() * hv * spec.C[i] *
                K.middleRows(spec.dims.offset(i), spec.dims.dim(i));
        }
        return R;
    }

    // Printed system: sum_{j<=l} w_j(a) C_i^T C_i K_ij a_j with
    // w_j = exp(-|y_j - C_j f_j|^2) and dw_j/da = 2 w_j (y_j - C_j f_j)^T C_j K_{j,:}.
    const std::size_t l = spec.labels.size();
    std::vector<double> w(l);
    std::vector<Eigen::RowVectorXd> dw(l);
    for (std::size_t j = 0; j < l; ++j) {
        const Vector resid = spec.labels[j] - prediction(spec, t.f, j);
        w[j] = std::exp(-resid.squaredNorm());
        dw[j] = 2.0 * w[j] * (resid.transpose() * spec.C[j]) * K.middleRows(spec.dims.offset(j), spec.dims.dim(j));
    }
    for (std::size_t i = 0; i < l; ++i) {
        const Matrix ctc = spec.C[i].transpose() * spec.C[i];
        auto rows = R.middleRows(spec.dims.offset(i), spec.dims.dim(i));
        for (std::size_t j = 0; j < l; ++j) {
            const Matrix cik = ctc * block(K, spec.dims, i, j);
            rows.middleCols(spec.dims.offset(j), spec.dims.dim(j)) += (inv_l * w[j]) * cik;
            const Vector u = cik * block(a, spec.dims, j);
            rows += inv_l * u * dw[j];
        }
    }
    return R;
}

Matrix jacobian_H(const ProblemSpec& spec, const CoefficientVector& a, ResidualVariant v)
{
    Matrix J = jacobian_R(spec, a, v) / spec.gamma_A;
    J.diagonal().array() += 1.0;
    return J;
}

namespace {

struct Extended {
    std::vector<InputPoint> points;
    SpaceDims dims;
};

Extended extend(const ProblemSpec& spec, std::span<const InputPoint> extra, const SpaceDims& extra_dims)
{
    if (extra.size() != extra_dims.count()) {
        throw ValidationError("extra points and their dimensions disagree in count");
    }
    Extended e;
    e.points = spec.points;
    e.points.insert(e.points.end(), extra.begin(), extra.end());
    std::vector<int> d = spec.dims.dims();
    d.insert(d.end(), extra_dims.dims().begin(), extra_dims.dims().end());
    e.dims = SpaceDims(std::move(d));
    return e;
}

}  // namespace

CoefficientVector project_onto_span(const ProblemSpec& spec, std::span<const InputPoint> extra_points,
                                    const SpaceDims& extra_dims, const Vector& b)
{
    const Extended ext = extend(spec, extra_points, extra_dims);
    if (b.size() != ext.dims.total()) {
        throw ValidationError("project_onto_span: b has length " + std::to_string(b.size()) +
                              ", extended layout has " + std::to_string(ext.dims.total()));
    }
    const BlockGram g_ext = assemble_gram(ext.points, ext.dims, spec.kernel);
    const PsdCheck psd = check_psd(g_ext.data);
    if (!psd.is_psd) {
        throw NumericalError("project_onto_span: extended Gram is not positive semidefinite (min eigenvalue " +
                             std::to_string(psd.min_eig) + ")");
    }
    const Vector rhs = g_ext.data.topRows(spec.N()) * b;

    // Minimum-norm solve of K c = rhs; a rank-deficient K drops eigenvalues
    // below 1e-10 lambda_max.
    Eigen::SelfAdjointEigenSolver<Matrix> es(spec.gram.data);
    const Vector& lambda = es.eigenvalues();
    const double cutoff = 1e-10 * std::max(0.0, lambda(lambda.size() - 1));
    Vector coeff = es.eigenvectors().transpose() * rhs;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        coeff(k) = lambda(k) > cutoff ? coeff(k) / lambda(k) : 0.0;
    }
    return es.eigenvectors() * coeff;
}

double extended_functional(const ProblemSpec& spec, std::span<const InputPoint> extra_points,
                           const SpaceDims& extra_dims, const Vector& b)
{
    const Extended ext = extend(spec, extra_points, extra_dims);
    if (b.size() != ext.dims.total()) throw ValidationError("extended_functional: size mismatch");
    const BlockGram g_ext = assemble_gram(ext.points, ext.dims, spec.kernel);
    const Vector fe = g_ext.data * b;
    return functional_from_values(spec, fe.head(spec.N()), std::max(0.0, b.dot(fe)));
}

}  // namespace mvkl
