#include "lwgnn/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "lwgnn/error.hpp"

namespace lwgnn {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutableMap = Eigen::Map<RowMajor>;

ConstMap view(const DenseMatrix& m) {
    return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

MutableMap view(DenseMatrix& m) {
    return MutableMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

std::string dims(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(what) + ": " + dims(a) + " vs " + dims(b));
    }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw ShapeError("DenseMatrix: value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("DenseMatrix: ragged initializer");
        values_.insert(values_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void DenseMatrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }

DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("dense_matmul: " + dims(a) + " · " + dims(b));
    DenseMatrix out(a.rows(), b.cols());
    if (a.cols() == 0) return out;
    view(out).noalias() = view(a) * view(b);
    return out;
}

DenseMatrix matmul_transpose_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_transpose_b: " + dims(a) + " · (" + dims(b) + ")ᵀ");
    DenseMatrix out(a.rows(), b.rows());
    if (a.cols() == 0) return out;
    view(out).noalias() = view(a) * view(b).transpose();
    return out;
}

DenseMatrix matmul_transpose_a(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("matmul_transpose_a: (" + dims(a) + ")ᵀ · " + dims(b));
    DenseMatrix out(a.cols(), b.cols());
    if (a.rows() == 0) return out;
    view(out).noalias() = view(a).transpose() * view(b);
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
    return out;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "hadamard");
    DenseMatrix out = a;
    auto dst = out.values();
    auto src = b.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
    return out;
}

void add_row_vector(DenseMatrix& x, const DenseMatrix& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols()) {
        throw ShapeError("add_row_vector: bias " + dims(bias) + " for " + dims(x));
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias(0, c);
    }
}

DenseMatrix column_sums(const DenseMatrix& x) {
    DenseMatrix out(1, x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) out(0, c) += row[c];
    }
    return out;
}

DenseMatrix concat_columns(std::span<const DenseMatrix> blocks) {
    if (blocks.empty()) return {};
    const std::size_t rows = blocks.front().rows();
    std::size_t cols = 0;
    for (const auto& b : blocks) {
        if (b.rows() != rows) throw ShapeError("concat_columns: row count mismatch");
        cols += b.cols();
    }
    DenseMatrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double* dst = out.row(r).data();
        for (const auto& b : blocks) {
            auto src = b.row(r);
            dst = std::copy(src.begin(), src.end(), dst);
        }
    }
    return out;
}

DenseMatrix column_block(const DenseMatrix& x, std::size_t first, std::size_t count) {
    if (first + count > x.cols()) throw ShapeError("column_block: range exceeds " + dims(x));
    DenseMatrix out(x.rows(), count);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto src = x.row(r).subspan(first, count);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

double frobenius_norm_squared(const DenseMatrix& x) noexcept {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return s;
}

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "max_abs_difference");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

}  // namespace lwgnn
