#include "sdd/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace sdd {

SparseMat SparseMat::from_triplets(int nrows, int ncols, std::vector<Triplet> trips) {
    SparseMat M(nrows, ncols);
    for (const auto& t : trips) {
        require(t.row >= 0 && t.row < nrows && t.col >= 0 && t.col < ncols,
                "triplet index out of range");
    }
    std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    std::vector<int> counts(nrows, 0);
    // sum duplicates, drop exact zeros
    std::size_t w = 0;
    for (std::size_t r = 0; r < trips.size();) {
        std::size_t s = r + 1;
        double sum = trips[r].val;
        while (s < trips.size() && trips[s].row == trips[r].row && trips[s].col == trips[r].col) {
            sum += trips[s].val;
            ++s;
        }
        if (sum != 0.0) {
            trips[w] = {trips[r].row, trips[r].col, sum};
            ++counts[trips[r].row];
            ++w;
        }
        r = s;
    }
    trips.resize(w);
    M.row_ptr_.assign(nrows + 1, 0);
    for (int i = 0; i < nrows; ++i) M.row_ptr_[i + 1] = M.row_ptr_[i] + counts[i];
    M.col_idx_.resize(w);
    M.vals_.resize(w);
    for (std::size_t k = 0; k < w; ++k) {
        M.col_idx_[k] = trips[k].col;
        M.vals_[k] = trips[k].val;
    }
    return M;
}

SparseMat SparseMat::from_dense(const Matrix& M, double drop_tol) {
    std::vector<Triplet> t;
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j)
            if (std::abs(M(i, j)) > drop_tol) t.push_back({i, j, M(i, j)});
    return from_triplets(static_cast<int>(M.rows()), static_cast<int>(M.cols()), std::move(t));
}

SparseMat SparseMat::identity(int n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
}

SparseMat SparseMat::restriction(const std::vector<int>& rows, int ncols) {
    std::vector<Triplet> t;
    t.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
        t.push_back({static_cast<int>(k), rows[k], 1.0});
    return from_triplets(static_cast<int>(rows.size()), ncols, std::move(t));
}

Vector SparseMat::apply(const Vector& x) const {
    require(x.size() == ncols_, "spmv: dimension mismatch");
    Vector y = Vector::Zero(nrows_);
    for (int i = 0; i < nrows_; ++i) {
        double s = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[col_idx_[k]];
        y[i] = s;
    }
    return y;
}

Vector SparseMat::apply_transpose(const Vector& x) const {
    require(x.size() == nrows_, "spmv_t: dimension mismatch");
    Vector y = Vector::Zero(ncols_);
    for (int i = 0; i < nrows_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            y[col_idx_[k]] += vals_[k] * x[i];
    return y;
}

void SparseMat::apply_add(const Vector& x, Vector& y) const {
    require(x.size() == ncols_ && y.size() == nrows_, "spmv add: dimension mismatch");
    for (int i = 0; i < nrows_; ++i) {
        double s = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[col_idx_[k]];
        y[i] += s;
    }
}

SparseMat SparseMat::transpose() const {
    std::vector<Triplet> t;
    t.reserve(vals_.size());
    for (int i = 0; i < nrows_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            t.push_back({col_idx_[k], i, vals_[k]});
    return from_triplets(ncols_, nrows_, std::move(t));
}

SparseMat SparseMat::submatrix(std::span<const int> rows, std::span<const int> cols) const {
    std::unordered_map<int, int> colmap;
    colmap.reserve(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) colmap[cols[k]] = static_cast<int>(k);
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int i = rows[r];
        require(i >= 0 && i < nrows_, "submatrix: row out of range");
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            auto it = colmap.find(col_idx_[k]);
            if (it != colmap.end()) t.push_back({static_cast<int>(r), it->second, vals_[k]});
        }
    }
    return from_triplets(static_cast<int>(rows.size()), static_cast<int>(cols.size()), std::move(t));
}

Matrix SparseMat::to_dense() const {
    Matrix M = Matrix::Zero(nrows_, ncols_);
    for (int i = 0; i < nrows_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) M(i, col_idx_[k]) = vals_[k];
    return M;
}

Eigen::SparseMatrix<double> SparseMat::to_eigen() const {
    Eigen::SparseMatrix<double> M(nrows_, ncols_);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(vals_.size());
    for (int i = 0; i < nrows_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            t.emplace_back(i, col_idx_[k], vals_[k]);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

double SparseMat::max_norm() const {
    double m = 0.0;
    for (double v : vals_) m = std::max(m, std::abs(v));
    return m;
}

double SparseMat::coeff(int i, int j) const {
    const int b = row_ptr_[i], e = row_ptr_[i + 1];
    auto it = std::lower_bound(col_idx_.begin() + b, col_idx_.begin() + e, j);
    if (it != col_idx_.begin() + e && *it == j) return vals_[it - col_idx_.begin()];
    return 0.0;
}

bool SparseMat::is_symmetric(double rel_tol) const {
    if (nrows_ != ncols_) return false;
    const double scale = max_norm();
    for (int i = 0; i < nrows_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            if (std::abs(vals_[k] - coeff(col_idx_[k], i)) > rel_tol * scale) return false;
    return true;
}

bool SparseMat::is_diagonal() const {
    for (int i = 0; i < nrows_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            if (col_idx_[k] != i) return false;
    return true;
}

Vector SparseMat::diagonal() const {
    const int d = std::min(nrows_, ncols_);
    Vector v = Vector::Zero(d);
    for (int i = 0; i < d; ++i) v[i] = coeff(i, i);
    return v;
}

std::vector<int> restriction_indices(const SparseMat& R) {
    std::vector<int> idx(R.rows());
    for (int i = 0; i < R.rows(); ++i) {
        auto [cols, vals] = R.row(i);
        require(cols.size() == 1 && vals[0] == 1.0,
                "restriction matrix must have exactly one unit entry per row");
        idx[i] = cols[0];
    }
    return idx;
}

SparseMat triple_product(const SparseMat& R, const SparseMat& A) {
    require(R.cols() == A.rows() && A.rows() == A.cols(), "triple_product: dimension mismatch");
    const std::vector<int> idx = restriction_indices(R);
    return A.submatrix(idx, idx);
}

Vector gather(const Vector& x, std::span<const int> idx) {
    Vector v(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) v[static_cast<Eigen::Index>(k)] = x[idx[k]];
    return v;
}

void scatter_add(const Vector& local, std::span<const int> idx, Vector& out) {
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += local[static_cast<Eigen::Index>(k)];
}

} // namespace sdd
