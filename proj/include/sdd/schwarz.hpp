/// @file schwarz.hpp
/// @brief Two-level preconditioners for the SPD block A: additive Schwarz
///        with an adaptive coarse space, and the SORAS variant.

#ifndef SDD_SCHWARZ_HPP
#define SDD_SCHWARZ_HPP

#include "sdd/decomposition.hpp"
#include "sdd/eig.hpp"
#include "sdd/oracle.hpp"

namespace sdd {

enum class PrimalMode { ASM2, SORAS };

PrimalMode primal_mode_from_string(const std::string& s);
std::string primal_mode_to_string(PrimalMode m);

/// Columns are extensions by zero of weighted local eigenvectors; the
/// Galerkin matrix ZᵀAZ is the coarse operator and its Cholesky factor
/// doubles as L₀ in the dual-space chain.
struct CoarseSpaceA {
    SparseMat Z;  // n × dim, one owning subdomain per column
    Matrix gal;
    CholFactor gal_chol;
    std::vector<std::vector<double>> eig_finite;  // per subdomain, ascending
    std::vector<int> eig_infinite;                // per subdomain counts
    int dropped = 0;                              // dependent candidates removed

    int dim() const { return Z.cols(); }
};

/// Per subdomain solve the pencil Dᵢ(RᵢARᵢᵀ)Dᵢ p = λ Aᵢ^neu p on the dofs
/// covered by contained elements; keep λ > 1/tau_A (plus the right-side
/// kernel directions). tau_A <= 0 disables the coarse space.
CoarseSpaceA build_geneo_A(const SaddleSystem& sys, const Decomposition& dec, double tau_A,
                           const Tolerances& tol = {}, int nthreads = 1);

struct PrimalPrecond {
    PrimalMode mode = PrimalMode::ASM2;
    const SaddleSystem* sys = nullptr;
    const Decomposition* dec = nullptr;
    CoarseSpaceA coarse;
    std::vector<CholFactor> robin;  // SORAS local factors
    double rho_robin = 1.0;
    int nthreads = 1;

    Vector apply(const Vector& r) const;  // M_A⁻¹ r

    /// The mode's local solve operator on subdomain i: Aᵢ⁻¹ (ASM2) or
    /// Dᵢ (Aᵢ^Rob)⁻¹ Dᵢ (SORAS). The dual-space chain is built against it.
    Vector local_solve(int i, const Vector& rhs) const;
    Matrix local_solve_mat(int i, const Matrix& rhs) const;
};

PrimalPrecond build_primal_precond(const SaddleSystem& sys, const Decomposition& dec,
                                   PrimalMode mode, double tau_A, double rho_robin = 1.0,
                                   const Tolerances& tol = {}, int nthreads = 1);

/// Extreme generalized eigenvalues of (A, M_A), i.e. of M_A⁻¹A, by dense
/// assembly. Oracle-only; throws ConfigError above the cap.
std::pair<double, double> spectrum_MA(const SaddleSystem& sys, const PrimalPrecond& P,
                                      int cap = 5000);

} // namespace sdd

#endif
