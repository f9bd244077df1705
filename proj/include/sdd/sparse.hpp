/// @file sparse.hpp
/// @brief CSR sparse matrix with owned storage and the kernels built on it.

#ifndef SDD_SPARSE_HPP
#define SDD_SPARSE_HPP

#include "sdd/types.hpp"

#include <Eigen/SparseCore>
#include <span>
#include <tuple>
#include <vector>

namespace sdd {

struct Triplet {
    int row, col;
    double val;
};

/// Compressed sparse row matrix. Invariants after assembly: row_ptr is
/// monotone, column indices are sorted and unique within a row, and no
/// explicit zeros are stored.
class SparseMat {
public:
    SparseMat() = default;
    SparseMat(int nrows, int ncols) : nrows_(nrows), ncols_(ncols), row_ptr_(nrows + 1, 0) {}

    static SparseMat from_triplets(int nrows, int ncols, std::vector<Triplet> trips);
    static SparseMat from_dense(const Matrix& M, double drop_tol = 0.0);
    static SparseMat identity(int n);
    /// Boolean restriction: row k selects global index rows[k].
    static SparseMat restriction(const std::vector<int>& rows, int ncols);

    int rows() const { return nrows_; }
    int cols() const { return ncols_; }
    int nnz() const { return static_cast<int>(vals_.size()); }

    std::span<const int> row_ptr() const { return row_ptr_; }
    std::span<const int> col_idx() const { return col_idx_; }
    std::span<const double> vals() const { return vals_; }

    /// Entries of row i as (col, val) spans.
    std::pair<std::span<const int>, std::span<const double>> row(int i) const {
        const int b = row_ptr_[i], e = row_ptr_[i + 1];
        return {std::span<const int>(col_idx_.data() + b, e - b),
                std::span<const double>(vals_.data() + b, e - b)};
    }

    Vector apply(const Vector& x) const;            // y = M x
    Vector apply_transpose(const Vector& x) const;  // y = Mᵀ x
    void apply_add(const Vector& x, Vector& y) const;

    SparseMat transpose() const;
    /// Principal/rectangular submatrix on global row and column index sets.
    SparseMat submatrix(std::span<const int> rows, std::span<const int> cols) const;
    Matrix to_dense() const;
    Eigen::SparseMatrix<double> to_eigen() const;

    double max_norm() const;
    bool is_symmetric(double rel_tol) const;
    bool is_diagonal() const;
    Vector diagonal() const;

    double coeff(int i, int j) const;  // 0 when absent (binary search)

private:
    int nrows_ = 0, ncols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> vals_;
};

/// y = R A Rᵀ for a boolean restriction R (one unit entry per row).
/// Throws DimensionError when R is not a 0/1 selection matrix.
SparseMat triple_product(const SparseMat& R, const SparseMat& A);

/// Selected global indices of a restriction matrix (validates shape).
std::vector<int> restriction_indices(const SparseMat& R);

/// Gather/scatter helpers for index-set restrictions.
Vector gather(const Vector& x, std::span<const int> idx);
void scatter_add(const Vector& local, std::span<const int> idx, Vector& out);

} // namespace sdd

#endif
