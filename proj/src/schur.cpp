#include "sdd/schur.hpp"

#include "sdd/par.hpp"

#include <algorithm>
#include <cmath>

namespace sdd {

Vector LocalDualSchur::solve_aug(const Subdomain& s, const Vector& g) const {
    if (!aug_ok) throw NumericalError("augmented local solve unavailable for this subdomain");
    Vector rhs = Vector::Zero(s.np() + s.nd());
    rhs.tail(s.nd()) = -g;
    Vector sol = aug->solve(rhs);
    if (aug->info() != Eigen::Success) throw NumericalError("augmented local solve failed");
    return sol.tail(s.nd());
}

std::vector<LocalDualSchur> build_local_dual_schur(const SaddleSystem& sys,
                                                   const Decomposition& dec,
                                                   const PrimalPrecond& MA,
                                                   const Tolerances& tol, int nthreads) {
    require(sys.n() == dec.n && sys.m() == dec.m, "decomposition belongs to another system");
    std::vector<LocalDualSchur> locals(dec.N);
    parallel_for(dec.N, nthreads, [&](int i) {
        const auto& s = dec.subs[i];
        auto& L = locals[i];
        if (s.nd() == 0) {
            L.T.resize(0, 0);
            L.pinv = PsdPinv(L.T, tol.pinv_drop);
            return;
        }
        Matrix Bd = s.Bt.to_dense();
        Matrix X = MA.local_solve_mat(i, Matrix(Bd.transpose()));
        L.T = s.Ct + Bd * X;
        L.T = 0.5 * (L.T + L.T.transpose()).eval();
        L.pinv = PsdPinv(L.T, tol.pinv_drop);

        if (MA.mode == PrimalMode::ASM2) {
            // augmented path: [[Aᵢ, B̃ᵢᵀ], [B̃ᵢ, −C̃ᵢ]]
            std::vector<Eigen::Triplet<double>> trips;
            const int np = s.np(), nd = s.nd();
            for (int r = 0; r < np; ++r) {
                auto [cols, vals] = s.A_loc.row(r);
                for (std::size_t k = 0; k < cols.size(); ++k)
                    trips.emplace_back(r, cols[k], vals[k]);
            }
            for (int r = 0; r < nd; ++r) {
                auto [cols, vals] = s.Bt.row(r);
                for (std::size_t k = 0; k < cols.size(); ++k) {
                    trips.emplace_back(np + r, cols[k], vals[k]);
                    trips.emplace_back(cols[k], np + r, vals[k]);
                }
            }
            for (int r = 0; r < nd; ++r)
                for (int c = 0; c < nd; ++c)
                    if (s.Ct(r, c) != 0.0) trips.emplace_back(np + r, np + c, -s.Ct(r, c));
            Eigen::SparseMatrix<double> K(np + nd, np + nd);
            K.setFromTriplets(trips.begin(), trips.end());
            L.aug = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
            L.aug->compute(K);
            L.aug_ok = (L.aug->info() == Eigen::Success) &&
                       (L.pinv.rank() == s.nd());  // singular T_i has no augmented inverse
        }
    });
    return locals;
}

namespace {

struct DualCandidate {
    int sub;
    bool singleton = false;
    int dof = -1;          // singleton: global dual dof
    Vector dense;          // otherwise: dense m-vector (sparse support)
    std::vector<int> support;
};

// left pencil matrix D̃ᵢ (R̃ᵢ S₁ R̃ᵢᵀ) D̃ᵢ assembled from neighbour blocks
Matrix assemble_left(const Decomposition& dec, const std::vector<LocalDualSchur>& locals,
                     int i) {
    const auto& si = dec.subs[i];
    Matrix L = Matrix::Zero(si.nd(), si.nd());
    std::vector<int> glob2loc(dec.m, -1);
    for (int k = 0; k < si.nd(); ++k) glob2loc[si.dual[k]] = k;
    for (int j : dec.neighbors[i]) {
        const auto& sj = dec.subs[j];
        std::vector<int> jloc, iloc;
        for (int k = 0; k < sj.nd(); ++k)
            if (glob2loc[sj.dual[k]] >= 0) {
                jloc.push_back(k);
                iloc.push_back(glob2loc[sj.dual[k]]);
            }
        const Matrix& T = locals[j].T;
        for (std::size_t a = 0; a < jloc.size(); ++a)
            for (std::size_t b = 0; b < jloc.size(); ++b)
                L(iloc[a], iloc[b]) += T(jloc[a], jloc[b]);
    }
    return si.Dt.asDiagonal() * L * si.Dt.asDiagonal();
}

} // namespace

CoarseSpaceS1 build_geneo_S1(const SaddleSystem& sys, const Decomposition& dec,
                             const std::vector<LocalDualSchur>& locals, double tau_S1,
                             const Tolerances& tol, int nthreads) {
    const int m = sys.m();
    CoarseSpaceS1 cs;
    cs.eig_finite.resize(dec.N);
    cs.eig_infinite.assign(dec.N, 0);
    cs.selected.assign(dec.N, 0);

    std::vector<std::vector<DualCandidate>> per_sub(dec.N);
    if (tau_S1 > 0.0) {
        const double threshold = 1.0 / tau_S1;
        parallel_for(dec.N, nthreads, [&](int i) {
            const auto& s = dec.subs[i];
            if (s.nd() == 0) return;  // no constraints touch this subdomain
            Matrix left = assemble_left(dec, locals, i);
            GenEigResult res = gen_sym_eig(left, locals[i].T, tol.eig_drop);
            for (const auto& p : res.finite) cs.eig_finite[i].push_back(p.value);
            cs.eig_infinite[i] = static_cast<int>(res.infinite.size());

            std::vector<const Vector*> picks;
            for (const auto& p : res.finite)
                if (p.value > threshold) picks.push_back(&p.vector);
            for (const auto& p : res.infinite) picks.push_back(&p.vector);

            // near-complete selections are completed: enrichment can only
            // improve the bound, and the full local basis keeps the coarse
            // columns canonical
            if (static_cast<double>(picks.size()) >= 0.85 * s.nd()) {
                picks.clear();
                for (const auto& p : res.finite) picks.push_back(&p.vector);
                for (const auto& p : res.infinite) picks.push_back(&p.vector);
            }
            cs.selected[i] = static_cast<int>(picks.size());

            if (static_cast<int>(picks.size()) == s.nd()) {
                // everything selected: the lifted span is the whole dual block,
                // so canonical basis vectors are an equivalent (sparser) basis
                for (int k = 0; k < s.nd(); ++k) {
                    DualCandidate c;
                    c.sub = i;
                    c.singleton = true;
                    c.dof = s.dual[k];
                    per_sub[i].push_back(std::move(c));
                }
                return;
            }
            for (const Vector* v : picks) {
                DualCandidate c;
                c.sub = i;
                c.dense = Vector::Zero(m);
                for (int k = 0; k < s.nd(); ++k) {
                    const double x = s.Dt[k] * (*v)[k];
                    if (x != 0.0) {
                        c.dense[s.dual[k]] = x;
                        c.support.push_back(s.dual[k]);
                    }
                }
                if (c.support.empty()) continue;
                c.dense /= c.dense.norm();  // unit columns, well-scaled Galerkin
                per_sub[i].push_back(std::move(c));
            }
        });
    }

    // deduplicate singleton dofs; drop lifted candidates that live entirely
    // inside the singleton span; pivot the remaining Gram for independence
    std::vector<char> has_singleton(std::max(m, 1), 0);
    std::vector<DualCandidate> lifted;
    for (auto& v : per_sub)
        for (auto& c : v) {
            if (c.singleton)
                has_singleton[c.dof] = 1;
            else
                lifted.push_back(std::move(c));
        }
    std::vector<DualCandidate> kept_lifted;
    std::vector<Vector> reduced;
    for (auto& c : lifted) {
        Vector r = c.dense;
        for (int d : c.support)
            if (has_singleton[d]) r[d] = 0.0;
        if (r.squaredNorm() > tol.coarse_drop * c.dense.squaredNorm()) {
            kept_lifted.push_back(std::move(c));
            reduced.push_back(std::move(r));
        } else {
            ++cs.dropped;
        }
    }
    if (!reduced.empty()) {
        const int d = static_cast<int>(reduced.size());
        Matrix G(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) G(a, b) = G(b, a) = reduced[a].dot(reduced[b]);
        std::vector<int> keep = pivoted_gram_keep(G, tol.coarse_drop);
        cs.dropped += d - static_cast<int>(keep.size());
        std::vector<DualCandidate> out;
        out.reserve(keep.size());
        for (int k : keep) out.push_back(std::move(kept_lifted[k]));
        kept_lifted = std::move(out);
    }

    std::vector<Triplet> zt;
    int col = 0;
    for (int j = 0; j < m; ++j)
        if (has_singleton[j]) zt.push_back({j, col++, 1.0});
    for (const auto& c : kept_lifted) {
        for (int d : c.support) zt.push_back({d, col, c.dense[d]});
        ++col;
    }
    cs.Z = SparseMat::from_triplets(m, col, std::move(zt));
    const int dim = cs.Z.cols();
    if (dim == 0) return cs;

    // S₁Z column by column, touching only subdomains that see the support
    cs.S1Z = Matrix::Zero(m, dim);
    SparseMat Zt = cs.Z.transpose();
    std::vector<std::vector<int>> dual_loc(dec.N, std::vector<int>(m, -1));
    for (int i = 0; i < dec.N; ++i)
        for (int k = 0; k < dec.subs[i].nd(); ++k) dual_loc[i][dec.subs[i].dual[k]] = k;
    parallel_for(dim, nthreads, [&](int c) {
        auto [ci, cv] = Zt.row(c);
        for (int i = 0; i < dec.N; ++i) {
            const auto& s = dec.subs[i];
            Vector loc = Vector::Zero(s.nd());
            bool any = false;
            for (std::size_t k = 0; k < ci.size(); ++k) {
                const int l = dual_loc[i][ci[k]];
                if (l >= 0) {
                    loc[l] = cv[k];
                    any = true;
                }
            }
            if (!any) continue;
            Vector t = locals[i].T * loc;
            for (int k = 0; k < s.nd(); ++k) cs.S1Z(s.dual[k], c) += t[k];
        }
    });

    Matrix G(dim, dim);
    parallel_for(dim, nthreads, [&](int a) {
        auto [ci, cv] = Zt.row(a);
        for (int b = 0; b < dim; ++b) {
            double sum = 0.0;
            for (std::size_t k = 0; k < ci.size(); ++k) sum += cv[k] * cs.S1Z(ci[k], b);
            G(a, b) = sum;
        }
    });
    cs.gal = 0.5 * (G + G.transpose());
    try {
        cs.gal_chol = chol(cs.gal);
    } catch (const NotSpdError& e) {
        throw NumericalError(
            "coarse Galerkin factorization failed despite orthogonalization (pivot " +
            std::to_string(e.pivot) + ")");
    }
    return cs;
}

DualPrecondState build_dual_precond(const SaddleSystem& sys, const Decomposition& dec,
                                    const PrimalPrecond& MA, double tau_S1,
                                    const Tolerances& tol, int nthreads) {
    DualPrecondState st;
    st.sys = &sys;
    st.dec = &dec;
    st.MA = &MA;
    st.tau_S1 = tau_S1;
    st.nthreads = nthreads;
    st.locals = build_local_dual_schur(sys, dec, MA, tol, nthreads);
    st.coarse = build_geneo_S1(sys, dec, st.locals, tau_S1, tol, nthreads);
    // B·Z_A: sparse product through dense columns of Z_A
    const int d0 = MA.coarse.dim();
    std::vector<Triplet> bz;
    SparseMat ZAt = MA.coarse.Z.transpose();
    for (int c = 0; c < d0; ++c) {
        auto [ci, cv] = ZAt.row(c);
        Vector col = Vector::Zero(sys.n());
        for (std::size_t k = 0; k < ci.size(); ++k) col[ci[k]] = cv[k];
        Vector bcol = sys.B.apply(col);
        for (int j = 0; j < sys.m(); ++j)
            if (bcol[j] != 0.0) bz.push_back({j, c, bcol[j]});
    }
    st.BZ = SparseMat::from_triplets(sys.m(), d0, std::move(bz));
    return st;
}

Vector apply_S1(const DualPrecondState& st, const Vector& p) {
    const auto& dec = *st.dec;
    require(p.size() == st.sys->m(), "apply_S1: dimension mismatch");
    std::vector<Vector> loc(dec.N);
    parallel_for(dec.N, st.nthreads, [&](int i) {
        const auto& s = dec.subs[i];
        loc[i] = st.locals[i].T * gather(p, s.dual);
    });
    Vector out = Vector::Zero(st.sys->m());
    for (int i = 0; i < dec.N; ++i) scatter_add(loc[i], dec.subs[i].dual, out);
    return out;
}

Vector apply_S0(const DualPrecondState& st, const Vector& p) {
    if (st.BZ.cols() == 0) return Vector::Zero(st.sys->m());
    Vector u = st.BZ.apply_transpose(p);
    return st.BZ.apply(st.MA->coarse.gal_chol.solve(u));
}

Vector apply_MS(const DualPrecondState& st, const Vector& p) {
    return apply_S0(st, p) + apply_S1(st, p);
}

Vector apply_MS_direct(const DualPrecondState& st, const Vector& p) {
    return st.sys->C.apply(p) + st.sys->B.apply(st.MA->apply(st.sys->B.apply_transpose(p)));
}

Vector apply_MS1_inv(const DualPrecondState& st, const Vector& g) {
    const auto& dec = *st.dec;
    const auto& cs = st.coarse;
    require(g.size() == st.sys->m(), "apply_MS1_inv: dimension mismatch");
    Vector w = g, coarse_term = Vector::Zero(g.size());
    Vector u;
    if (cs.dim() > 0) {
        u = cs.gal_chol.solve(cs.Z.apply_transpose(g));
        coarse_term = cs.Z.apply(u);
        w.noalias() -= cs.S1Z * u;  // (I − P̃₀ᵀ) g
    }
    std::vector<Vector> loc(dec.N);
    parallel_for(dec.N, st.nthreads, [&](int i) {
        const auto& s = dec.subs[i];
        Vector wi = s.Dt.asDiagonal() * gather(w, s.dual);
        loc[i] = s.Dt.asDiagonal() * st.locals[i].pinv.apply(wi);
    });
    Vector v = Vector::Zero(g.size());
    for (int i = 0; i < dec.N; ++i) scatter_add(loc[i], dec.subs[i].dual, v);
    if (cs.dim() > 0) {
        Vector t = cs.gal_chol.solve(Vector(cs.S1Z.transpose() * v));
        v.noalias() -= cs.Z.apply(t);  // (I − P̃₀) v
    }
    return coarse_term + v;
}

Vector apply_S(const SaddleSystem& sys, const PrimalPrecond& MA, const Vector& p,
               double inner_tol, int maxit, std::atomic<int>* a_solves, PcgReport* rep) {
    Vector rhs = sys.B.apply_transpose(p);
    PcgOptions opts;
    opts.tol = inner_tol;
    opts.maxit = maxit;
    auto [x, r] = pcg([&](const Vector& v) { return sys.A.apply(v); },
                      [&](const Vector& v) { return MA.apply(v); }, rhs, opts);
    if (!r.converged)
        throw NumericalError("apply_S: inner A-solve did not converge within " +
                             std::to_string(maxit) + " iterations (relres " +
                             std::to_string(r.final_relres) + ")");
    if (a_solves) ++(*a_solves);
    if (rep) *rep = r;
    return sys.C.apply(p) + sys.B.apply(x);
}

double estimate_cR(const DualPrecondState& st, bool* has_infinite) {
    double cr = 0.0;
    bool inf = false;
    bool have_lists = false;
    for (int i = 0; i < st.dec->N; ++i) {
        if (!st.coarse.eig_finite[i].empty() || st.coarse.eig_infinite[i] > 0) have_lists = true;
    }
    if (have_lists) {
        for (int i = 0; i < st.dec->N; ++i) {
            if (!st.coarse.eig_finite[i].empty())
                cr = std::max(cr, st.coarse.eig_finite[i].back());
            if (st.coarse.eig_infinite[i] > 0) inf = true;
        }
    } else {
        for (int i = 0; i < st.dec->N; ++i) {
            if (st.dec->subs[i].nd() == 0) continue;
            Matrix left = assemble_left(*st.dec, st.locals, i);
            GenEigResult res = gen_sym_eig(left, st.locals[i].T, 1e-12);
            if (!res.finite.empty()) cr = std::max(cr, res.finite.back().value);
            if (!res.infinite.empty()) inf = true;
        }
    }
    if (has_infinite) *has_infinite = inf;
    return cr;
}

std::pair<double, double> stable_decomposition_norms(const DualPrecondState& st,
                                                     const Vector& p) {
    double b = 0.0;
    for (int i = 0; i < st.dec->N; ++i) {
        const auto& s = st.dec->subs[i];
        Vector pi = gather(p, s.dual);
        b += pi.dot(st.locals[i].T * pi);
    }
    const double a = p.dot(apply_S1(st, p));
    return {b, a};
}

} // namespace sdd
