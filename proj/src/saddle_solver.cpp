#include "sdd/saddle_solver.hpp"

#include <cmath>

namespace sdd {

namespace {

SaddleSolution solve_once(const SaddleSystem& sys, const PrimalPrecond& MA,
                          const DualPrecondState& dual, const MA0System& ma0,
                          const Vector& F_U, const Vector& F_P,
                          const SaddleSolveOptions& opts) {
    SaddleSolution sol;
    std::atomic<int> a_solves{0};

    const LinOp a_op = [&](const Vector& v) { return sys.A.apply(v); };
    const LinOp ma_op = [&](const Vector& v) { return MA.apply(v); };

    PcgOptions aopts;
    aopts.tol = opts.stage_a_factor * opts.tol;
    aopts.maxit = opts.maxit_inner;
    const double schur_tol = opts.schur_factor * opts.tol;

    auto stage_solve = [&](const Vector& rhs, const char* stage) {
        auto [x, rep] = pcg(a_op, ma_op, rhs, aopts);
        if (!rep.converged)
            throw NumericalError(std::string("solve_saddle ") + stage +
                                 ": PCG on A did not converge (relres " +
                                 std::to_string(rep.final_relres) + ")");
        ++a_solves;
        return std::pair{std::move(x), std::move(rep)};
    };

    // 1. A G_U = F_U
    auto [G_U, rep1] = stage_solve(F_U, "step 1");
    sol.stage1 = rep1;

    Vector P = Vector::Zero(sys.m());
    if (sys.m() > 0) {
        // 2. G_P = F_P − B G_U
        Vector G_P = F_P - sys.B.apply(G_U);
        // 3. (C + B A⁻¹ Bᵀ) P = −G_P, PCG with N_S⁻¹
        const double inner_tol = opts.inner_factor * schur_tol;
        const LinOp s_op = [&](const Vector& v) {
            return apply_S(sys, MA, v, inner_tol, opts.maxit_inner, &a_solves);
        };
        const LinOp ns_op = [&](const Vector& v) { return apply_NS_inv(dual, ma0, v); };
        PcgOptions sopts;
        sopts.tol = schur_tol;
        sopts.maxit = opts.maxit_outer;
        sopts.flexible = opts.flexible;
        auto [p, rep3] = pcg(s_op, ns_op, Vector(-G_P), sopts);
        if (!rep3.converged)
            throw NumericalError("solve_saddle step 3: Schur PCG did not converge (relres " +
                                 std::to_string(rep3.final_relres) + ")");
        P = std::move(p);
        sol.stage3 = rep3;
    }

    // 4. G_U = F_U − Bᵀ P; 5. A U = G_U
    Vector rhs5 = (sys.m() > 0) ? Vector(F_U - sys.B.apply_transpose(P)) : F_U;
    auto [U, rep5] = stage_solve(rhs5, "step 5");
    sol.stage5 = rep5;

    sol.U = std::move(U);
    sol.P = std::move(P);
    sol.total_A_solves = a_solves.load();

    Vector ru = F_U - sys.A.apply(sol.U);
    if (sys.m() > 0) ru -= sys.B.apply_transpose(sol.P);
    double r2 = ru.squaredNorm(), f2 = F_U.squaredNorm();
    if (sys.m() > 0) {
        Vector rp = F_P - sys.B.apply(sol.U) + sys.C.apply(sol.P);
        r2 += rp.squaredNorm();
        f2 += F_P.squaredNorm();
    }
    sol.block_relres = (f2 > 0.0) ? std::sqrt(r2 / f2) : std::sqrt(r2);
    return sol;
}

} // namespace

SaddleSolution solve_saddle(const SaddleSystem& sys, const PrimalPrecond& MA,
                            const DualPrecondState& dual, const MA0System& ma0,
                            const Vector& F_U, const Vector& F_P,
                            const SaddleSolveOptions& opts) {
    require(F_U.size() == sys.n() && F_P.size() == sys.m(), "solve_saddle: rhs dimensions");
    SaddleSolveOptions cur = opts;
    SaddleSolution sol = solve_once(sys, MA, dual, ma0, F_U, F_P, cur);
    int retries = 0;
    while (sol.block_relres > opts.tol && retries < opts.max_retries) {
        cur.stage_a_factor *= 0.05;
        cur.schur_factor *= 0.05;
        ++retries;
        sol = solve_once(sys, MA, dual, ma0, F_U, F_P, cur);
    }
    sol.retries = retries;
    if (sol.block_relres > opts.tol)
        throw NumericalError("solve_saddle: block residual " +
                             std::to_string(sol.block_relres) + " misses the target " +
                             std::to_string(opts.tol) + " after " + std::to_string(retries) +
                             " tightening retries");
    return sol;
}

} // namespace sdd
