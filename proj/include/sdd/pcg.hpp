/// @file pcg.hpp
/// @brief Preconditioned conjugate gradients with a Lanczos condition
///        estimate, plus a flexible variant for mildly varying preconditioners.

#ifndef SDD_PCG_HPP
#define SDD_PCG_HPP

#include "sdd/oracle.hpp"
#include "sdd/types.hpp"

#include <vector>

namespace sdd {

struct PcgReport {
    int iterations = 0;
    double final_relres = 0.0;
    std::vector<double> residual_history;  // preconditioned norms, relative
    double lanczos_cond_estimate = 1.0;
    bool converged = true;
};

struct PcgOptions {
    double tol = 1e-8;
    int maxit = 1000;
    bool flexible = false;  // Polak–Ribière direction update
};

/// Minimise in the op-energy norm; stopping rule is the preconditioned
/// residual norm relative to the preconditioned right-hand side norm.
/// Throws NumericalError on an indefinite operator or preconditioner.
std::pair<Vector, PcgReport> pcg(const LinOp& op, const LinOp& prec, const Vector& b,
                                 const PcgOptions& opts = {});

} // namespace sdd

#endif
