/// @file system.hpp
/// @brief The saddle point system [[A, Bᵀ],[B, −C]] and its validation.

#ifndef SDD_SYSTEM_HPP
#define SDD_SYSTEM_HPP

#include "sdd/psd_split.hpp"
#include "sdd/sparse.hpp"

#include <optional>

namespace sdd {

/// A is n×n SPD, B m×n full rank, C m×m PSD. A_split is the element-level
/// PSD splitting of A that the adaptive coarse spaces are built from;
/// C_split plays the same role for a non-diagonal C. `coords` optionally
/// carries point coordinates per primal dof (n×d) for partitioning.
struct SaddleSystem {
    SparseMat A, B, C;
    PsdSplit A_split;
    std::optional<PsdSplit> C_split;
    Matrix coords;

    int n() const { return A.rows(); }
    int m() const { return B.rows(); }

    /// Structural and numerical invariants; throws on violation.
    void validate(const Tolerances& tol = {}) const;
};

} // namespace sdd

#endif
