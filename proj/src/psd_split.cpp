#include "sdd/psd_split.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>

namespace sdd {

SparseMat PsdSplit::assemble(int n) const {
    std::vector<Triplet> t;
    for (const auto& e : elems) {
        const int k = static_cast<int>(e.idx.size());
        require(e.mat.rows() == k && e.mat.cols() == k, "split element shape mismatch");
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                if (e.mat(a, b) != 0.0) t.push_back({e.idx[a], e.idx[b], e.mat(a, b)});
    }
    return SparseMat::from_triplets(n, n, std::move(t));
}

void PsdSplit::check_psd(double tol) const {
    for (std::size_t i = 0; i < elems.size(); ++i) {
        const Matrix& E = elems[i].mat;
        const double scale = E.cwiseAbs().maxCoeff();
        if (scale == 0.0) continue;
        if ((E - E.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw AssumptionViolation("split element " + std::to_string(i) + " is not symmetric");
        Eigen::SelfAdjointEigenSolver<Matrix> es(E, Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        if (es.eigenvalues().minCoeff() < -tol * std::max(lmax, 0.0))
            throw AssumptionViolation("split element " + std::to_string(i) + " is not PSD");
    }
}

void PsdSplit::check_reassembles(const SparseMat& target, double tol) const {
    const SparseMat S = assemble(target.rows());
    const double scale = target.max_norm();
    double dev = 0.0;
    // nonzeros of either matrix
    for (int i = 0; i < target.rows(); ++i) {
        auto [ct, vt_] = target.row(i);
        for (std::size_t k = 0; k < ct.size(); ++k)
            dev = std::max(dev, std::abs(vt_[k] - S.coeff(i, ct[k])));
        auto [cs, vs] = S.row(i);
        for (std::size_t k = 0; k < cs.size(); ++k)
            dev = std::max(dev, std::abs(vs[k] - target.coeff(i, cs[k])));
    }
    if (dev > tol * scale)
        throw AssumptionViolation("PSD split does not reassemble the target matrix (max dev " +
                                  std::to_string(dev) + ")");
}

PsdSplit read_split(std::istream& in) {
    std::size_t count = 0;
    if (!(in >> count)) throw IoError("split file: missing element count");
    PsdSplit s;
    s.elems.resize(count);
    for (auto& e : s.elems) {
        int k = 0;
        if (!(in >> k) || k <= 0) throw IoError("split file: bad element size");
        e.idx.resize(k);
        for (int& v : e.idx)
            if (!(in >> v)) throw IoError("split file: truncated index list");
        e.mat.resize(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                if (!(in >> e.mat(a, b))) throw IoError("split file: truncated entries");
    }
    return s;
}

PsdSplit read_split_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "'");
    return read_split(f);
}

void write_split(std::ostream& out, const PsdSplit& s) {
    out << s.elems.size() << '\n';
    char buf[40];
    for (const auto& e : s.elems) {
        out << e.idx.size() << '\n';
        for (std::size_t k = 0; k < e.idx.size(); ++k)
            out << e.idx[k] << (k + 1 < e.idx.size() ? ' ' : '\n');
        for (int a = 0; a < e.mat.rows(); ++a)
            for (int b = 0; b < e.mat.cols(); ++b) {
                std::snprintf(buf, sizeof(buf), "%.17g", e.mat(a, b));
                out << buf << (b + 1 < e.mat.cols() ? ' ' : '\n');
            }
    }
}

void write_split_file(const std::string& path, const PsdSplit& s) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_split(f, s);
}

} // namespace sdd
