#include "sdd/system.hpp"

namespace sdd {

void SaddleSystem::validate(const Tolerances& tol) const {
    require(A.rows() == A.cols(), "A must be square");
    require(C.rows() == C.cols(), "C must be square");
    require(B.cols() == A.rows() && B.rows() == C.rows(), "block shapes inconsistent");
    if (m() > 0) require(m() < n(), "m < n required");
    if (!A.is_symmetric(tol.sym_check)) throw AssumptionViolation("A is not symmetric");
    if (!C.is_symmetric(tol.sym_check)) throw AssumptionViolation("C is not symmetric");
    for (int i = 0; i < B.rows(); ++i)
        if (B.row(i).first.empty())
            throw AssumptionViolation("B has a zero row (cannot be full rank): row " +
                                      std::to_string(i));
    if (!A_split.empty()) {
        A_split.check_psd(tol.psd_check);
        A_split.check_reassembles(A, tol.reassembly_check);
    }
    if (C_split) {
        C_split->check_psd(tol.psd_check);
        C_split->check_reassembles(C, tol.reassembly_check);
    }
    if (coords.size() > 0) require(coords.rows() == n(), "coords rows must match n");
}

} // namespace sdd
