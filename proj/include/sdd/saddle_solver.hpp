/// @file saddle_solver.hpp
/// @brief Block-factorized saddle point solve: two SPD solves with A around
///        one Schur-complement solve preconditioned by N_S⁻¹.

#ifndef SDD_SADDLE_SOLVER_HPP
#define SDD_SADDLE_SOLVER_HPP

#include "sdd/ns.hpp"

namespace sdd {

struct SaddleSolveOptions {
    double tol = 1e-8;              // target relative block residual
    double stage_a_factor = 0.01;   // A-solve tolerance = factor · tol
    double schur_factor = 0.2;      // Schur-stage tolerance = factor · tol
    double inner_factor = 1e-2;     // apply_S inner tolerance = factor · schur tol
    int maxit_outer = 400;
    int maxit_inner = 2000;
    bool flexible = true;           // flexible CG for the Schur stage
    int max_retries = 2;            // tighten stages when the block residual misses
};

struct SaddleSolution {
    Vector U, P;
    PcgReport stage1, stage3, stage5;
    int total_A_solves = 0;
    double block_relres = 0.0;
    int retries = 0;  // tightened re-solves needed to reach tol
};

/// Steps: (1) A G_U = F_U; (2) G_P = F_P − B G_U; (3) (C + BA⁻¹Bᵀ)P = −G_P
/// with N_S⁻¹; (4) G_U = F_U − BᵀP; (5) A U = G_U. Stage failures throw
/// NumericalError naming the stage.
SaddleSolution solve_saddle(const SaddleSystem& sys, const PrimalPrecond& MA,
                            const DualPrecondState& dual, const MA0System& ma0,
                            const Vector& F_U, const Vector& F_P,
                            const SaddleSolveOptions& opts = {});

} // namespace sdd

#endif
