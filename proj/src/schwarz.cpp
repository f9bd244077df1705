#include "sdd/schwarz.hpp"

#include "sdd/par.hpp"

#include <algorithm>
#include <cmath>

namespace sdd {

PrimalMode primal_mode_from_string(const std::string& s) {
    if (s == "asm2") return PrimalMode::ASM2;
    if (s == "soras") return PrimalMode::SORAS;
    throw ConfigError("unknown primal mode '" + s + "' (expected asm2 or soras)");
}

std::string primal_mode_to_string(PrimalMode m) {
    return m == PrimalMode::ASM2 ? "asm2" : "soras";
}

namespace {

struct Candidate {
    int sub;
    std::vector<int> idx;     // global dofs
    std::vector<double> val;
};

CoarseSpaceA assemble_coarse(const SaddleSystem& sys, std::vector<Candidate> cands,
                             const Tolerances& tol, CoarseSpaceA cs) {
    const int n = sys.n();
    auto build = [&](const std::vector<Candidate>& list) {
        std::vector<Triplet> zt;
        for (std::size_t c = 0; c < list.size(); ++c)
            for (std::size_t k = 0; k < list[c].idx.size(); ++k)
                zt.push_back({list[c].idx[k], static_cast<int>(c), list[c].val[k]});
        return SparseMat::from_triplets(n, static_cast<int>(list.size()), std::move(zt));
    };
    auto gram = [&](const SparseMat& Z) {
        const int d = Z.cols();
        Matrix AZ(n, d);
        Vector col = Vector::Zero(n);
        SparseMat Zt = Z.transpose();
        for (int c = 0; c < d; ++c) {
            auto [ci, cv] = Zt.row(c);
            col.setZero();
            for (std::size_t k = 0; k < ci.size(); ++k) col[ci[k]] = cv[k];
            AZ.col(c) = sys.A.apply(col);
        }
        Matrix G(d, d);
        for (int c = 0; c < d; ++c) {
            auto [ci, cv] = Zt.row(c);
            for (int e = 0; e < d; ++e) {
                double s = 0.0;
                for (std::size_t k = 0; k < ci.size(); ++k) s += cv[k] * AZ(ci[k], e);
                G(c, e) = s;
            }
        }
        return Matrix(0.5 * (G + G.transpose()));
    };

    if (cands.empty()) {
        cs.Z = SparseMat(n, 0);
        return cs;
    }
    // near-dependent candidates (overlapping subdomains select overlapping
    // directions) would leave ZᵀAZ ill conditioned; filter them up front
    {
        SparseMat Z = build(cands);
        Matrix G = gram(Z);
        std::vector<int> keep = pivoted_gram_keep(G, tol.coarse_drop_primal);
        cs.dropped = static_cast<int>(cands.size() - keep.size());
        if (cs.dropped > 0) {
            std::vector<Candidate> kept;
            kept.reserve(keep.size());
            for (int k : keep) kept.push_back(std::move(cands[k]));
            cands = std::move(kept);
            Z = build(cands);
            G = gram(Z);
        }
        cs.gal_chol = chol(G);
        cs.gal = std::move(G);
        cs.Z = std::move(Z);
    }
    return cs;
}

} // namespace

CoarseSpaceA build_geneo_A(const SaddleSystem& sys, const Decomposition& dec, double tau_A,
                           const Tolerances& tol, int nthreads) {
    CoarseSpaceA cs;
    cs.eig_finite.resize(dec.N);
    cs.eig_infinite.assign(dec.N, 0);
    std::vector<std::vector<Candidate>> per_sub(dec.N);
    if (tau_A > 0.0) {
        const double threshold = 1.0 / tau_A;
        parallel_for(dec.N, nthreads, [&](int i) {
            const auto& s = dec.subs[i];
            if (s.neu_map.empty()) return;
            if (s.np() > tol.dense_cutoff)
                throw ConfigError("subdomain " + std::to_string(i) +
                                  " too large for the dense eigensolver; raise N or the cutoff");
            Matrix Ad = s.A_loc.to_dense();
            Matrix DAD = s.D.asDiagonal() * Ad * s.D.asDiagonal();
            Matrix left(s.neu_map.size(), s.neu_map.size());
            for (std::size_t a = 0; a < s.neu_map.size(); ++a)
                for (std::size_t b = 0; b < s.neu_map.size(); ++b)
                    left(a, b) = DAD(s.neu_map[a], s.neu_map[b]);
            GenEigResult res = gen_sym_eig(left, s.A_neu, tol.eig_drop);
            for (const auto& p : res.finite) cs.eig_finite[i].push_back(p.value);
            cs.eig_infinite[i] = static_cast<int>(res.infinite.size());
            auto add = [&](const Vector& v) {
                Candidate c;
                c.sub = i;
                double nrm2 = 0.0;
                for (std::size_t k = 0; k < s.neu_map.size(); ++k) {
                    const int loc = s.neu_map[k];
                    const double x = s.D[loc] * v[static_cast<Eigen::Index>(k)];
                    if (x != 0.0) {
                        c.idx.push_back(s.primal[loc]);
                        c.val.push_back(x);
                        nrm2 += x * x;
                    }
                }
                if (c.idx.empty()) return;
                // unit columns keep the Galerkin matrix well scaled
                const double inv = 1.0 / std::sqrt(nrm2);
                for (double& x : c.val) x *= inv;
                per_sub[i].push_back(std::move(c));
            };
            for (const auto& p : res.finite)
                if (p.value > threshold) add(p.vector);
            for (const auto& p : res.infinite) add(p.vector);
        });
    }
    std::vector<Candidate> cands;
    for (auto& v : per_sub)
        for (auto& c : v) cands.push_back(std::move(c));
    return assemble_coarse(sys, std::move(cands), tol, std::move(cs));
}

PrimalPrecond build_primal_precond(const SaddleSystem& sys, const Decomposition& dec,
                                   PrimalMode mode, double tau_A, double rho_robin,
                                   const Tolerances& tol, int nthreads) {
    PrimalPrecond P;
    P.mode = mode;
    P.sys = &sys;
    P.dec = &dec;
    P.rho_robin = rho_robin;
    P.nthreads = nthreads;
    P.coarse = build_geneo_A(sys, dec, tau_A, tol, nthreads);
    if (mode == PrimalMode::SORAS) {
        P.robin.resize(dec.N);
        parallel_for(dec.N, nthreads, [&](int i) {
            const auto& s = dec.subs[i];
            Matrix Rob = Matrix::Zero(s.np(), s.np());
            for (std::size_t a = 0; a < s.neu_map.size(); ++a)
                for (std::size_t b = 0; b < s.neu_map.size(); ++b)
                    Rob(s.neu_map[a], s.neu_map[b]) = s.A_neu(a, b);
            // penalty on the overlap zone; uncovered dofs get it too so the
            // matrix stays invertible
            std::vector<char> covered(s.np(), 0);
            for (int k : s.neu_map) covered[k] = 1;
            for (int k = 0; k < s.np(); ++k)
                if (dec.primal_mult[s.primal[k]] >= 2 || !covered[k]) Rob(k, k) += rho_robin;
            try {
                P.robin[i] = chol(Rob);
            } catch (const NotSpdError& e) {
                throw NumericalError("SORAS: Robin matrix of subdomain " + std::to_string(i) +
                                     " is singular (pivot " + std::to_string(e.pivot) + ")");
            }
        });
    }
    return P;
}

Vector PrimalPrecond::apply(const Vector& r) const {
    require(r.size() == sys->n(), "M_A apply: dimension mismatch");
    const auto& dec = *this->dec;
    std::vector<Vector> loc(dec.N);
    parallel_for(dec.N, nthreads, [&](int i) {
        const auto& s = dec.subs[i];
        Vector ri = gather(r, s.primal);
        if (mode == PrimalMode::ASM2)
            loc[i] = s.A_chol.solve(ri);
        else
            loc[i] = s.D.asDiagonal() * robin[i].solve(Vector(s.D.asDiagonal() * ri));
    });
    Vector out = Vector::Zero(sys->n());
    for (int i = 0; i < dec.N; ++i) scatter_add(loc[i], dec.subs[i].primal, out);
    if (coarse.dim() > 0) {
        Vector c = coarse.Z.apply_transpose(r);
        out += coarse.Z.apply(coarse.gal_chol.solve(c));
    }
    return out;
}

Vector PrimalPrecond::local_solve(int i, const Vector& rhs) const {
    const auto& s = dec->subs[i];
    if (mode == PrimalMode::ASM2) return s.A_chol.solve(rhs);
    return s.D.asDiagonal() * robin[i].solve(Vector(s.D.asDiagonal() * rhs));
}

Matrix PrimalPrecond::local_solve_mat(int i, const Matrix& rhs) const {
    const auto& s = dec->subs[i];
    if (mode == PrimalMode::ASM2) return s.A_chol.solve_mat(rhs);
    return s.D.asDiagonal() * robin[i].solve_mat(Matrix(s.D.asDiagonal() * rhs));
}

std::pair<double, double> spectrum_MA(const SaddleSystem& sys, const PrimalPrecond& P, int cap) {
    const Matrix K = oracle::assemble([&](const Vector& v) { return P.apply(v); }, sys.n(), cap);
    return oracle::precond_spectrum(K, sys.A.to_dense());
}

} // namespace sdd
