#include "sdd/pcg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace sdd {

namespace {

double tridiag_cond(const std::vector<double>& diag, const std::vector<double>& off) {
    const int k = static_cast<int>(diag.size());
    if (k == 0) return 1.0;
    Matrix T = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        T(i, i) = diag[i];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = off[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    return (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
}

} // namespace

std::pair<Vector, PcgReport> pcg(const LinOp& op, const LinOp& prec, const Vector& b,
                                 const PcgOptions& opts) {
    PcgReport rep;
    Vector x = Vector::Zero(b.size());
    if (b.norm() == 0.0) {
        rep.residual_history.push_back(0.0);
        return {x, rep};
    }

    Vector r = b;
    Vector z = prec(r);
    double rz = r.dot(z);
    if (!(rz > 0.0))
        throw NumericalError("pcg: preconditioner is not positive definite (r'z <= 0)");
    const double denom = std::sqrt(rz);
    Vector p = z;
    rep.residual_history.push_back(1.0);

    // Lanczos tridiagonal recovered from the cg coefficients
    std::vector<double> ldiag, loff;
    double alpha_prev = 1.0, beta_prev = 0.0;

    for (int it = 0; it < opts.maxit; ++it) {
        Vector Ap = op(p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0))
            throw NumericalError("pcg: operator appears indefinite (p'Ap <= 0 at iteration " +
                                 std::to_string(it) + ")");
        const double alpha = rz / pAp;
        x += alpha * p;
        Vector r_next = r - alpha * Ap;

        if (it == 0)
            ldiag.push_back(1.0 / alpha);
        else
            ldiag.push_back(1.0 / alpha + beta_prev / alpha_prev);

        Vector z_next = prec(r_next);
        const double rz_next = r_next.dot(z_next);
        const double relres = std::sqrt(std::max(rz_next, 0.0)) / denom;
        rep.residual_history.push_back(relres);
        ++rep.iterations;
        if (relres <= opts.tol) {
            rep.final_relres = relres;
            rep.converged = true;
            rep.lanczos_cond_estimate = tridiag_cond(ldiag, loff);
            return {x, rep};
        }
        if (!(rz_next > 0.0))
            throw NumericalError("pcg: preconditioner lost positivity during iteration");

        // Polak–Ribière when flexible, Fletcher–Reeves otherwise
        const double beta =
            opts.flexible ? z_next.dot(r_next - r) / rz : rz_next / rz;
        p = z_next + beta * p;
        loff.push_back(std::sqrt(std::max(rz_next / rz, 0.0)) / alpha);
        alpha_prev = alpha;
        beta_prev = rz_next / rz;
        r = std::move(r_next);
        z = std::move(z_next);
        rz = rz_next;
    }
    rep.final_relres = rep.residual_history.back();
    rep.converged = false;
    rep.lanczos_cond_estimate = tridiag_cond(ldiag, loff);
    return {x, rep};
}

} // namespace sdd
