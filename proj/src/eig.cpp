#include "sdd/eig.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace sdd {

namespace {

void check_symmetric(const Matrix& M, double rel_tol, const char* who) {
    const double scale = M.cwiseAbs().maxCoeff();
    const double dev = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (scale > 0.0 && dev > rel_tol * scale)
        throw DimensionError(std::string(who) + ": matrix is not symmetric");
}

} // namespace

std::vector<EigPair> sym_eig(const Matrix& M, double sym_tol) {
    require(M.rows() == M.cols(), "sym_eig: square matrix required");
    if (M.rows() == 0) return {};
    check_symmetric(M, sym_tol, "sym_eig");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("sym_eig: solver failed");
    std::vector<EigPair> out(M.rows());
    for (int k = 0; k < M.rows(); ++k) out[k] = {es.eigenvalues()[k], es.eigenvectors().col(k)};
    return out;
}

double GenEigResult::max_finite() const {
    return finite.empty() ? -std::numeric_limits<double>::infinity() : finite.back().value;
}

GenEigResult gen_sym_eig(const Matrix& L, const Matrix& Rm, double drop_tol) {
    require(L.rows() == L.cols() && Rm.rows() == Rm.cols() && L.rows() == Rm.rows(),
            "gen_sym_eig: dimension mismatch");
    GenEigResult out;
    const int n = static_cast<int>(L.rows());
    if (n == 0) return out;
    check_symmetric(L, 1e-10, "gen_sym_eig(left)");
    check_symmetric(Rm, 1e-10, "gen_sym_eig(right)");

    Eigen::SelfAdjointEigenSolver<Matrix> er(0.5 * (Rm + Rm.transpose()));
    if (er.info() != Eigen::Success) throw NumericalError("gen_sym_eig: right side eig failed");
    const Vector w = er.eigenvalues();
    const double wmax = std::max(w.cwiseAbs().maxCoeff(), 0.0);
    const double cut = drop_tol * wmax;

    std::vector<int> range_idx, ker_idx;
    for (int k = 0; k < n; ++k) (w[k] > cut ? range_idx : ker_idx).push_back(k);

    if (!range_idx.empty()) {
        // whiten on range(Rm): W = Q_r Λ_r^{-1/2}, then a standard eigenproblem
        Matrix W(n, range_idx.size());
        for (std::size_t c = 0; c < range_idx.size(); ++c)
            W.col(c) = er.eigenvectors().col(range_idx[c]) / std::sqrt(w[range_idx[c]]);
        Matrix Mw = W.transpose() * L * W;
        Eigen::SelfAdjointEigenSolver<Matrix> em(0.5 * (Mw + Mw.transpose()));
        if (em.info() != Eigen::Success) throw NumericalError("gen_sym_eig: whitened eig failed");
        for (int k = 0; k < em.eigenvalues().size(); ++k)
            out.finite.push_back({em.eigenvalues()[k], W * em.eigenvectors().col(k)});
    }
    const double lscale = std::max(L.cwiseAbs().maxCoeff(), 0.0);
    for (int k : ker_idx) {
        Vector q = er.eigenvectors().col(k);
        const double act = (L * q).norm();
        if (lscale == 0.0 || act <= drop_tol * lscale * std::sqrt(double(n)))
            ++out.excluded;  // both sides vanish on this direction
        else
            out.infinite.push_back({std::numeric_limits<double>::infinity(), q});
    }
    return out;
}

PsdPinv::PsdPinv(const Matrix& M, double drop_tol) {
    require(M.rows() == M.cols(), "PsdPinv: square matrix required");
    if (M.rows() == 0) return;
    check_symmetric(M, 1e-10, "PsdPinv");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("PsdPinv: eig failed");
    Q_ = es.eigenvectors();
    evals_ = es.eigenvalues();
    lam_max_ = std::max(evals_.cwiseAbs().maxCoeff(), 0.0);
    const double cut = drop_tol * lam_max_;
    rank_ = 0;
    for (int k = static_cast<int>(evals_.size()) - 1; k >= 0 && evals_[k] > cut; --k) ++rank_;
}

Vector PsdPinv::apply(const Vector& g) const {
    require(g.size() == evals_.size(), "PsdPinv: dimension mismatch");
    if (rank_ == 0) return Vector::Zero(g.size());
    const auto tail = Eigen::seq(evals_.size() - rank_, evals_.size() - 1);
    Vector c = Q_(Eigen::all, tail).transpose() * g;
    c.array() /= evals_(tail).array();
    return Q_(Eigen::all, tail) * c;
}

Matrix PsdPinv::apply_mat(const Matrix& G) const {
    require(G.rows() == evals_.size(), "PsdPinv: dimension mismatch");
    if (rank_ == 0) return Matrix::Zero(G.rows(), G.cols());
    const auto tail = Eigen::seq(evals_.size() - rank_, evals_.size() - 1);
    Matrix C = Q_(Eigen::all, tail).transpose() * G;
    C.array().colwise() /= evals_(tail).array();
    return Q_(Eigen::all, tail) * C;
}

Matrix PsdPinv::to_dense() const {
    const int n = dim();
    if (rank_ == 0) return Matrix::Zero(n, n);
    const auto tail = Eigen::seq(evals_.size() - rank_, evals_.size() - 1);
    return Q_(Eigen::all, tail) * evals_(tail).cwiseInverse().asDiagonal() *
           Q_(Eigen::all, tail).transpose();
}

Vector pseudo_apply(const Matrix& M, double drop_tol, const Vector& g) {
    return PsdPinv(M, drop_tol).apply(g);
}

std::vector<int> pivoted_gram_keep(Matrix G, double drop_tol) {
    const int d = static_cast<int>(G.rows());
    if (d == 0) return {};
    const Vector orig = G.diagonal().cwiseMax(0.0);
    std::vector<char> used(d, 0);
    std::vector<int> keep;
    for (int step = 0; step < d; ++step) {
        int piv = -1;
        double best = 0.0;
        for (int j = 0; j < d; ++j) {
            if (used[j]) continue;
            const double rel = orig[j] > 0.0 ? G(j, j) / orig[j] : 0.0;
            if (rel > best) {
                best = rel;
                piv = j;
            }
        }
        if (piv < 0 || best <= drop_tol) break;
        used[piv] = 1;
        keep.push_back(piv);
        const double dp = G(piv, piv);
        Vector col = G.col(piv);
        G.noalias() -= (col / dp) * col.transpose();
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

} // namespace sdd
