/// @file oracle.hpp
/// @brief Dense brute-force reference computations for desk-scale testing.

#ifndef SDD_ORACLE_HPP
#define SDD_ORACLE_HPP

#include "sdd/system.hpp"

#include <functional>
#include <utility>

namespace sdd {

using LinOp = std::function<Vector(const Vector&)>;

namespace oracle {

/// Assemble the matrix of a linear operator column by column.
/// Throws ConfigError when dim exceeds the cap.
Matrix assemble(const LinOp& op, int dim, int cap = 5000);

/// Extreme generalized eigenvalues of the pencil (P, Q), Q SPD.
std::pair<double, double> gen_eig_extremes(const Matrix& P, const Matrix& Q);

/// Extreme eigenvalues of K·S for SPD K (given as the applied inverse)
/// and symmetric S: the pencil (S, K⁻¹) without forming K⁻¹.
std::pair<double, double> precond_spectrum(const Matrix& K, const Matrix& S);

/// All eigenvalues of K·S (same pencil), ascending.
Vector precond_eigenvalues(const Matrix& K, const Matrix& S);

} // namespace oracle

/// Dense copies of the blocks plus direct solves for cross-checking.
struct DenseOracle {
    Matrix A, B, C;

    static DenseOracle from(const SaddleSystem& sys, int cap = 5000);

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.rows()); }

    Matrix saddle_matrix() const;            // [[A, Bᵀ], [B, −C]]
    Vector solve_saddle(const Vector& fu, const Vector& fp) const;
    Matrix schur() const;                    // C + B A⁻¹ Bᵀ
};

} // namespace sdd

#endif
