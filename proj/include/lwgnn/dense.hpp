#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lwgnn {

// Row-major matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {values_.data() + r * cols_, cols_};
    }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }

    void fill(double v);
    bool all_finite() const noexcept;

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s) noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(DenseMatrix a, double s);

// a · b. Upstream gradient g maps to g·bᵀ (for a) and aᵀ·g (for b).
DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b);
// a · bᵀ
DenseMatrix matmul_transpose_b(const DenseMatrix& a, const DenseMatrix& b);
// aᵀ · b
DenseMatrix matmul_transpose_a(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

// Adds a 1×cols row vector to every row.
void add_row_vector(DenseMatrix& x, const DenseMatrix& bias);
// Column sums as a 1×cols matrix (gradient of add_row_vector w.r.t. the bias).
DenseMatrix column_sums(const DenseMatrix& x);

// Concatenates equal-height blocks left to right.
DenseMatrix concat_columns(std::span<const DenseMatrix> blocks);
// Copies columns [first, first + count).
DenseMatrix column_block(const DenseMatrix& x, std::size_t first, std::size_t count);

double frobenius_norm_squared(const DenseMatrix& x) noexcept;
double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace lwgnn
