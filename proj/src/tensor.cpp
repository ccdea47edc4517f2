#include "mxmclr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mxmclr {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw DimensionError("Tensor data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(rows_) + "x" +
                             std::to_string(cols_));
}

Tensor::Tensor(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("ragged initializer for Tensor");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double v) {
    Tensor t(rows, cols);
    t.fill(v);
    return t;
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::randn(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
    Tensor t(rows, cols);
    for (auto& v : t.data_) v = scale * rng.gaussian();
    return t;
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Tensor::scalar() const {
    if (rows_ != 1 || cols_ != 1) throw ContractError("Tensor::scalar requires a 1x1 tensor");
    return data_[0];
}

std::size_t BoolMatrix::count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

namespace kernels {

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    Tensor out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw DimensionError("add: shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

Tensor add_rowvec(const Tensor& a, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != a.cols())
        throw DimensionError("add_rowvec: bias must be 1x" + std::to_string(a.cols()));
    Tensor out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += row(0, j);
    return out;
}

Tensor tanh_elem(const Tensor& a) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::tanh(out.data()[i]);
    return out;
}

Tensor row_l2_normalize(const Tensor& a, double eps) {
    Tensor out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) sq += a(i, j) * a(i, j);
        const double norm = std::max(std::sqrt(sq), eps);
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) / norm;
    }
    return out;
}

Tensor log_softmax_rows(const Tensor& a) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, a(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) sum += std::exp(a(i, j) - m);
        const double lse = m + std::log(sum);
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - lse;
    }
    return out;
}

Tensor softmax_rows(const Tensor& a) {
    Tensor out = log_softmax_rows(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::exp(out.data()[i]);
    return out;
}

Tensor logsumexp_rows(const Tensor& a) {
    Tensor out(a.rows(), 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, a(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) sum += std::exp(a(i, j) - m);
        out(i, 0) = m + std::log(sum);
    }
    return out;
}

Tensor masked_fill(const Tensor& a, const BoolMatrix& mask, double fill) {
    if (!mask.same_shape(a)) throw DimensionError("masked_fill: mask shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (mask(i, j)) out(i, j) = fill;
    return out;
}

Tensor softplus(const Tensor& a) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = out.data()[i];
        out.data()[i] = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    return out;
}

Tensor fold_rows_mean(const Tensor& a, std::size_t fold) {
    if (fold == 0 || a.rows() % fold != 0)
        throw DimensionError("fold_rows_mean: row count " + std::to_string(a.rows()) +
                             " not divisible by fold " + std::to_string(fold));
    const std::size_t groups = a.rows() / fold;
    Tensor out(groups, a.cols());
    for (std::size_t g = 0; g < groups; ++g)
        for (std::size_t f = 0; f < fold; ++f)
            for (std::size_t j = 0; j < a.cols(); ++j) out(g, j) += a(g * fold + f, j) / double(fold);
    return out;
}

}  // namespace kernels

}  // namespace mxmclr
