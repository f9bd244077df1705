/// @file decomposition.hpp
/// @brief Overlapping algebraic decomposition of the primal space and the
///        induced dual-space objects (restrictions, weights, local blocks).

#ifndef SDD_DECOMPOSITION_HPP
#define SDD_DECOMPOSITION_HPP

#include "sdd/chol.hpp"
#include "sdd/system.hpp"

#include <vector>

namespace sdd {

struct Subdomain {
    int id = 0;
    std::vector<int> primal;   // sorted global primal dofs (with overlap)
    Vector D;                  // primal partition-of-unity weights (local)
    std::vector<int> dual;     // sorted global dual dofs = support of B Rᵢᵀ
    Vector Dt;                 // dual partition-of-unity weights (local)
    SparseMat A_loc;           // Rᵢ A Rᵢᵀ
    SparseMat Bt;              // B̃ᵢ = R̃ᵢ B Rᵢᵀ
    Matrix Ct;                 // C̃ᵢ (dense, |dual|²)
    CholFactor A_chol;         // factor of A_loc
    Matrix A_neu;              // local Neumann matrix on covered dofs
    std::vector<int> neu_map;  // local primal indices covered by contained elements
    int straddling_elems = 0;  // elements touching but not contained

    int np() const { return static_cast<int>(primal.size()); }
    int nd() const { return static_cast<int>(dual.size()); }
    SparseMat R(int n) const { return SparseMat::restriction(primal, n); }
    SparseMat Rt(int m) const { return SparseMat::restriction(dual, m); }
};

struct Decomposition {
    int n = 0, m = 0, N = 0;
    std::vector<Subdomain> subs;
    std::vector<std::vector<int>> neighbors;  // O(i), sorted, contains i when dual(i) nonempty
    int k0 = 0;
    std::vector<int> primal_mult, dual_mult;
};

/// Non-overlapping seeds (coordinate bisection when sys.coords present,
/// greedy BFS otherwise) grown by `overlap` adjacency layers of graph(A).
Decomposition build_partition(const SaddleSystem& sys, int N, int overlap);

void build_pou(Decomposition& dec);
void build_dual_objects(const SaddleSystem& sys, Decomposition& dec);
void build_Ct(const SaddleSystem& sys, Decomposition& dec, const Tolerances& tol = {});
void compute_k0_and_neighbors(Decomposition& dec);

/// Local Dirichlet factorizations and element-assembled Neumann matrices.
void factor_locals(const SaddleSystem& sys, Decomposition& dec, const Tolerances& tol = {},
                   int nthreads = 1);

/// All of the above in order.
Decomposition build_decomposition(const SaddleSystem& sys, int N, int overlap,
                                  const Tolerances& tol = {}, int nthreads = 1);

} // namespace sdd

#endif
