/// @file schur.hpp
/// @brief Dual-space operator chain: the exact Schur complement S, its
///        spectrally equivalent surrogate M_S = S₀ + S₁, the adaptive
///        coarse space for S₁ and the two-level preconditioner M_{S₁}⁻¹.

#ifndef SDD_SCHUR_HPP
#define SDD_SCHUR_HPP

#include "sdd/pcg.hpp"
#include "sdd/schwarz.hpp"

#include <Eigen/SparseLU>
#include <atomic>
#include <memory>

namespace sdd {

/// T_i = C̃ᵢ + B̃ᵢ·(local solve)·B̃ᵢᵀ, dense, with its pseudo-inverse and
/// (for the ASM2 local solve) the equivalent augmented sparse factorization.
struct LocalDualSchur {
    Matrix T;
    PsdPinv pinv;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> aug;
    bool aug_ok = false;

    /// Solve T_i P = g through the augmented saddle system.
    Vector solve_aug(const Subdomain& s, const Vector& g) const;
};

std::vector<LocalDualSchur> build_local_dual_schur(const SaddleSystem& sys,
                                                   const Decomposition& dec,
                                                   const PrimalPrecond& MA,
                                                   const Tolerances& tol = {}, int nthreads = 1);

struct CoarseSpaceS1 {
    SparseMat Z;   // m × dim, columns supported in a single dual set
    Matrix gal;    // Zᵀ S₁ Z
    CholFactor gal_chol;
    Matrix S1Z;    // m × dim dense (projector applications)
    std::vector<std::vector<double>> eig_finite;  // per-subdomain pencil values
    std::vector<int> eig_infinite;                // per-subdomain kernel counts
    std::vector<int> selected;                    // per-subdomain selected counts
    int dropped = 0;                              // dependent candidates removed

    int dim() const { return Z.cols(); }
};

struct DualPrecondState {
    const SaddleSystem* sys = nullptr;
    const Decomposition* dec = nullptr;
    const PrimalPrecond* MA = nullptr;
    std::vector<LocalDualSchur> locals;
    CoarseSpaceS1 coarse;
    SparseMat BZ;        // B·Z_A = R̃₀ᵀ B̃₀  (m × dim V₀)
    double tau_S1 = 0.0;
    int nthreads = 1;
};

/// Per subdomain solve the pencil
///   D̃ᵢ (Σ_{j∈O(i)} R̃ᵢR̃ⱼᵀ T_j R̃ⱼR̃ᵢᵀ) D̃ᵢ p = λ T_i p,
/// keep λ > 1/tau_S1 plus the kernel directions of T_i, and lift the
/// selections as R̃ᵢᵀ D̃ᵢ p. tau_S1 <= 0 disables the coarse space.
CoarseSpaceS1 build_geneo_S1(const SaddleSystem& sys, const Decomposition& dec,
                             const std::vector<LocalDualSchur>& locals, double tau_S1,
                             const Tolerances& tol = {}, int nthreads = 1);

DualPrecondState build_dual_precond(const SaddleSystem& sys, const Decomposition& dec,
                                    const PrimalPrecond& MA, double tau_S1,
                                    const Tolerances& tol = {}, int nthreads = 1);

Vector apply_S1(const DualPrecondState& st, const Vector& p);
Vector apply_S0(const DualPrecondState& st, const Vector& p);
Vector apply_MS(const DualPrecondState& st, const Vector& p);           // S₀ + S₁
Vector apply_MS_direct(const DualPrecondState& st, const Vector& p);    // C p + B M_A⁻¹ Bᵀ p
Vector apply_MS1_inv(const DualPrecondState& st, const Vector& g);

/// S p = C p + B x, A x = Bᵀ p solved by PCG(M_A) to relative inner_tol.
/// `a_solves` (optional) is incremented once per inner solve.
Vector apply_S(const SaddleSystem& sys, const PrimalPrecond& MA, const Vector& p,
               double inner_tol, int maxit = 2000, std::atomic<int>* a_solves = nullptr,
               PcgReport* rep = nullptr);

/// Largest continuity Rayleigh quotient over subdomains; equals the
/// largest finite pencil eigenvalue. `has_infinite` reports subdomains
/// whose pencil had kernel directions (formally unbounded quotients).
double estimate_cR(const DualPrecondState& st, bool* has_infinite = nullptr);

/// Both sides of the one-level stable decomposition identity for the
/// canonical decomposition 𝒫ᵢ = R̃ᵢ p: (b-form, a-form).
std::pair<double, double> stable_decomposition_norms(const DualPrecondState& st, const Vector& p);

} // namespace sdd

#endif
