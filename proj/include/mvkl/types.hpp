#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvkl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error taxonomy. The C API maps each kind onto a distinct status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: wrong sizes, bad parameters, config mistakes.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A numerical precondition failed (non-PSD matrix, singular system, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

// File system or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

struct InputPoint {
    Vector coords;
    // Region tag used by the block kernel; 0 means "untagged".
    int region = 0;
};

// Per-point dimensions of the hypothesis spaces (d) and label spaces (e),
// plus the prefix offsets of the flattened block layout.
class SpaceDims {
public:
    SpaceDims() = default;
    explicit SpaceDims(std::vector<int> d);
    SpaceDims(std::vector<int> d, std::vector<int> e);

    [[nodiscard]] std::size_t count() const { return d_.size(); }
    [[nodiscard]] int total() const { return offsets_.empty() ? 0 : offsets_.back(); }
    [[nodiscard]] int dim(std::size_t i) const { return d_.at(i); }
    [[nodiscard]] int label_dim(std::size_t i) const { return e_.at(i); }
    [[nodiscard]] int offset(std::size_t i) const { return offsets_.at(i); }
    [[nodiscard]] const std::vector<int>& dims() const { return d_; }
    [[nodiscard]] const std::vector<int>& label_dims() const { return e_; }
    [[nodiscard]] bool homogeneous() const;

    bool operator==(const SpaceDims&) const = default;

private:
    std::vector<int> d_;
    std::vector<int> e_;
    std::vector<int> offsets_;
};

// Representer coefficients a = (a_1, ..., a_{l+u}) in block layout.
using CoefficientVector = Vector;

inline auto block(Vector& v, const SpaceDims& dims, std::size_t i)
{
    return v.segment(dims.offset(i), dims.dim(i));
}

inline auto block(const Vector& v, const SpaceDims& dims, std::size_t i)
{
    return v.segment(dims.offset(i), dims.dim(i));
}

inline auto block(Matrix& m, const SpaceDims& dims, std::size_t i, std::size_t j)
{
    return m.block(dims.offset(i), dims.offset(j), dims.dim(i), dims.dim(j));
}

inline auto block(const Matrix& m, const SpaceDims& dims, std::size_t i, std::size_t j)
{
    return m.block(dims.offset(i), dims.offset(j), dims.dim(i), dims.dim(j));
}

}  // namespace mvkl
