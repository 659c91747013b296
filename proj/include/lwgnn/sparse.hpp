#pragma once

#include <cstddef>
#include <cstdint>
#include <tuple>
#include <vector>

#include "lwgnn/dense.hpp"

namespace lwgnn {

// Compressed sparse row matrix. Column indices are strictly increasing within a row.
class SparseMatrix {
public:
    using Index = std::uint32_t;

    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);
    // Validates the CSR invariants; throws ShapeError on violation.
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                 std::vector<Index> col_indices, std::vector<double> values);

    // Builds from (row, col, value) triplets. Duplicates are summed.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<std::tuple<Index, Index, double>> triplets);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return col_indices_.size(); }

    const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
    const std::vector<Index>& col_indices() const noexcept { return col_indices_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::size_t row_nnz(std::size_t r) const noexcept { return row_offsets_[r + 1] - row_offsets_[r]; }
    // Returns 0 for structurally absent entries.
    double at(std::size_t r, std::size_t c) const;

    SparseMatrix transposed() const;
    DenseMatrix to_dense() const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

// s · b with a fixed per-row summation order. The gradient with respect to b is sᵀ · g.
DenseMatrix sparse_dense_matmul(const SparseMatrix& s, const DenseMatrix& b);

}  // namespace lwgnn
