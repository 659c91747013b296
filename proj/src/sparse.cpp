#include "lwgnn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lwgnn/error.hpp"

namespace lwgnn {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0) {
        throw ShapeError("SparseMatrix: row offsets must have rows+1 entries starting at 0");
    }
    if (row_offsets_.back() != col_indices_.size() || values_.size() != col_indices_.size()) {
        throw ShapeError("SparseMatrix: last offset must equal nnz");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        if (row_offsets_[r] > row_offsets_[r + 1]) throw ShapeError("SparseMatrix: offsets decrease");
        for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            if (col_indices_[k] >= cols_) throw ShapeError("SparseMatrix: column index out of range");
            if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1]) {
                throw ShapeError("SparseMatrix: columns not strictly increasing in row " + std::to_string(r));
            }
            if (!std::isfinite(values_[k])) throw ShapeError("SparseMatrix: non-finite entry");
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<std::tuple<Index, Index, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<std::size_t> offsets(rows + 1, 0);
    std::vector<Index> cols_out;
    std::vector<double> vals;
    cols_out.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        const auto [r, c, v] = triplets[i];
        if (r >= rows || c >= cols) throw ShapeError("from_triplets: index out of range");
        if (i > 0 && std::get<0>(triplets[i - 1]) == r && std::get<1>(triplets[i - 1]) == c) {
            vals.back() += v;
            continue;
        }
        cols_out.push_back(c);
        vals.push_back(v);
        ++offsets[r + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
    return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<Index> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] = i + 1;
        cols[i] = static_cast<Index>(i);
    }
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw ShapeError("SparseMatrix::at: index out of range");
    auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
    auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
    auto it = std::lower_bound(first, last, static_cast<Index>(c));
    if (it == last || *it != c) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<std::size_t> offsets(cols_ + 1, 0);
    for (Index c : col_indices_) ++offsets[c + 1];
    for (std::size_t c = 0; c < cols_; ++c) offsets[c + 1] += offsets[c];
    std::vector<Index> out_cols(nnz());
    std::vector<double> out_vals(nnz());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    // Rows are visited in increasing order, so each output row comes out sorted.
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            const std::size_t dst = cursor[col_indices_[k]]++;
            out_cols[dst] = static_cast<Index>(r);
            out_vals[dst] = values_[k];
        }
    }
    return SparseMatrix(cols_, rows_, std::move(offsets), std::move(out_cols), std::move(out_vals));
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) out(r, col_indices_[k]) = values_[k];
    return out;
}

DenseMatrix sparse_dense_matmul(const SparseMatrix& s, const DenseMatrix& b) {
    if (s.cols() != b.rows()) {
        throw ShapeError("sparse_dense_matmul: " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                         " · " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    DenseMatrix out(s.rows(), b.cols());
    const auto& offsets = s.row_offsets();
    const auto& cols = s.col_indices();
    const auto& vals = s.values();
    const std::size_t width = b.cols();
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double* dst = out.row(r).data();
        for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
            const double w = vals[k];
            const double* src = b.row(cols[k]).data();
            for (std::size_t j = 0; j < width; ++j) dst[j] += w * src[j];
        }
    }
    return out;
}

}  // namespace lwgnn
