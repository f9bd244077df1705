/// @file checks.hpp
/// @brief Invariant check suites shared by the verify command and the
///        acceptance tests. Each check returns pass/fail plus a measurement.

#ifndef SDD_CHECKS_HPP
#define SDD_CHECKS_HPP

#include "sdd/ns.hpp"
#include "sdd/saddle_solver.hpp"

#include <string>
#include <vector>

namespace sdd {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Owns the whole preconditioner chain. The inner states hold pointers
/// into the sibling members, so the pipeline is pinned in place.
struct Pipeline {
    Pipeline() = default;
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    SaddleSystem sys;
    Decomposition dec;
    PrimalPrecond MA;
    DualPrecondState dual;
    MA0System ma0;
    double tau_S1_resolved = 0.0;
};

namespace checks {

CheckResult pou_primal(const Decomposition& dec, double tol = 1e-15);
CheckResult pou_dual(const Decomposition& dec, double tol = 1e-15);
CheckResult support_identity(const SaddleSystem& sys, const Decomposition& dec);
CheckResult ct_reassembly(const SaddleSystem& sys, const Decomposition& dec,
                          double tol = 1e-12);
CheckResult neumann_split(const SaddleSystem& sys, const Decomposition& dec,
                          double tol = 1e-12);
CheckResult ms_rewrite(const DualPrecondState& dual, int probes = 100, double tol = 1e-10,
                       std::uint64_t seed = 101);
CheckResult stable_decomposition(const DualPrecondState& dual, int probes = 100,
                                 double tol = 1e-12, std::uint64_t seed = 102);
/// Dense pencil (S₁, M_{S₁}) against [1 − lower_slack, bound·(1 + upper_slack)];
/// bound = max(1, k₀/τ) with a coarse space, k₀ without one.
CheckResult alpha_bound(const Pipeline& pl, double lower_slack = 1e-8,
                        double upper_slack = 1e-6, int cap = 5000);
CheckResult sherman_morrison_roundtrip(const Pipeline& pl, int probes = 100, double tol = 1e-9,
                                       int cap = 5000, std::uint64_t seed = 103);
CheckResult ma0_dual_path(const DualPrecondState& dual, double tol = 1e-9);
CheckResult saddle_solve_vs_dense(const Pipeline& pl, double tol_block = 1e-8,
                                  double tol_dense = 1e-6, int cap = 5000,
                                  std::uint64_t seed = 104);

std::vector<CheckResult> run_all(const Pipeline& pl);

} // namespace checks

} // namespace sdd

#endif
