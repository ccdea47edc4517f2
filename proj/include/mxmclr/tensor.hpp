#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "mxmclr/errors.hpp"
#include "mxmclr/rng.hpp"

namespace mxmclr {

/// Dense 2-D array of doubles in row-major order. Plain value type; all
/// differentiable structure lives in the autodiff layer.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);
    Tensor(std::initializer_list<std::initializer_list<double>> rows);

    static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor(rows, cols); }
    static Tensor full(std::size_t rows, std::size_t cols, double v);
    static Tensor identity(std::size_t n);
    /// Entries drawn i.i.d. N(0, scale^2) from the given stream.
    static Tensor randn(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const;
    void fill(double v);
    double scalar() const;  // value of a 1x1 tensor

    bool operator==(const Tensor& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Boolean matrix companion to Tensor, used for masks and selections.
class BoolMatrix {
public:
    BoolMatrix() = default;
    BoolMatrix(std::size_t rows, std::size_t cols, bool v = false)
        : rows_(rows), cols_(cols), data_(rows * cols, v ? 1 : 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool same_shape(const Tensor& t) const { return rows_ == t.rows() && cols_ == t.cols(); }

    void set(std::size_t r, std::size_t c, bool v) { data_[r * cols_ + c] = v ? 1 : 0; }
    bool operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c] != 0; }

    std::size_t count() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> data_;
};

// Dense kernels shared by the autodiff layer and the plain (gradient-free)
// forward paths, so both compute bit-identical values.
namespace kernels {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_rowvec(const Tensor& a, const Tensor& row);
Tensor tanh_elem(const Tensor& a);
Tensor row_l2_normalize(const Tensor& a, double eps);
Tensor log_softmax_rows(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor logsumexp_rows(const Tensor& a);
Tensor masked_fill(const Tensor& a, const BoolMatrix& mask, double fill);
Tensor softplus(const Tensor& a);
Tensor fold_rows_mean(const Tensor& a, std::size_t fold);

}  // namespace kernels

}  // namespace mxmclr
