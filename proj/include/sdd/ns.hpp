/// @file ns.hpp
/// @brief N_S = S₀ + M_{S₁} applied through the small dense system M_{A₀}.

#ifndef SDD_NS_HPP
#define SDD_NS_HPP

#include "sdd/schur.hpp"

namespace sdd {

/// Column-sparsity counts behind the scalable assembly of M_{A₀}.
struct SparsityReport {
    std::vector<int> counts_bz;   // per subdomain: nonzero columns of D̃ᵢR̃ᵢ(B Z_A)
    std::vector<int> counts_s1z;  // per subdomain: nonzero columns of D̃ᵢR̃ᵢ(S₁ Z_{S₁})
    int max_bz = 0, max_s1z = 0;
};

SparsityReport check_sparsity_assumptions(const DualPrecondState& st);

enum class MA0Assembly { locality, naive };

struct MA0System {
    Matrix M;      // I + G M_{S₁}⁻¹ Gᵀ, dim(V₀) square
    CholFactor chol_factor;
    Matrix G;      // L₀⁻¹ (B Z_A)ᵀ, dim(V₀) × m
    MA0Assembly mode = MA0Assembly::locality;
};

/// Assemble and factor M_{A₀}. The locality path precomputes the local
/// pseudo-solves against S₁Z_{S₁} once (columns touched per subdomain only)
/// and skips subdomains outside each column's support; the naive path
/// applies the full M_{S₁}⁻¹ operator per column. Both agree to round-off.
MA0System assemble_MA0(const DualPrecondState& st, MA0Assembly mode = MA0Assembly::locality);

/// The four-step matvec P = N_S⁻¹ G.
Vector apply_NS_inv(const DualPrecondState& st, const MA0System& ma0, const Vector& g);

} // namespace sdd

#endif
