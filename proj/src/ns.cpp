#include "sdd/ns.hpp"

#include "sdd/par.hpp"

namespace sdd {

SparsityReport check_sparsity_assumptions(const DualPrecondState& st) {
    const auto& dec = *st.dec;
    SparsityReport rep;
    rep.counts_bz.assign(dec.N, 0);
    rep.counts_s1z.assign(dec.N, 0);
    const int d0 = st.BZ.cols();
    const int d1 = st.coarse.dim();
    for (int i = 0; i < dec.N; ++i) {
        const auto& s = dec.subs[i];
        std::vector<char> nz0(std::max(d0, 1), 0), nz1(std::max(d1, 1), 0);
        for (int j : s.dual) {
            auto [cols, vals] = st.BZ.row(j);
            for (std::size_t k = 0; k < cols.size(); ++k) nz0[cols[k]] = 1;
            if (d1 > 0)
                for (int c = 0; c < d1; ++c)
                    if (st.coarse.S1Z(j, c) != 0.0) nz1[c] = 1;
        }
        if (d0 > 0) rep.counts_bz[i] = std::count(nz0.begin(), nz0.begin() + d0, 1);
        if (d1 > 0) rep.counts_s1z[i] = std::count(nz1.begin(), nz1.begin() + d1, 1);
        rep.max_bz = std::max(rep.max_bz, rep.counts_bz[i]);
        rep.max_s1z = std::max(rep.max_s1z, rep.counts_s1z[i]);
    }
    return rep;
}

namespace {

// local pseudo-solve sum v = Σᵢ R̃ᵢᵀ D̃ᵢ T_i† D̃ᵢ R̃ᵢ w, optionally skipping
// subdomains whose dual support misses `support` (exact: R̃ᵢ w = 0 there)
Vector one_level_apply(const DualPrecondState& st, const Vector& w,
                       const std::vector<int>* support) {
    const auto& dec = *st.dec;
    Vector v = Vector::Zero(w.size());
    for (int i = 0; i < dec.N; ++i) {
        const auto& s = dec.subs[i];
        if (s.nd() == 0) continue;
        if (support) {
            bool hit = false;
            std::size_t a = 0, b = 0;
            while (a < s.dual.size() && b < support->size()) {
                if (s.dual[a] == (*support)[b]) {
                    hit = true;
                    break;
                }
                (s.dual[a] < (*support)[b]) ? ++a : ++b;
            }
            if (!hit) continue;
        }
        Vector wi = s.Dt.asDiagonal() * gather(w, s.dual);
        Vector vi = s.Dt.asDiagonal() * st.locals[i].pinv.apply(wi);
        scatter_add(vi, s.dual, v);
    }
    return v;
}

} // namespace

MA0System assemble_MA0(const DualPrecondState& st, MA0Assembly mode) {
    const auto& dec = *st.dec;
    const int m = st.sys->m();
    const int d0 = st.BZ.cols();
    const int d1 = st.coarse.dim();
    MA0System out;
    out.mode = mode;

    // G = L₀⁻¹ (BZ)ᵀ
    out.G.resize(d0, m);
    if (d0 > 0) {
        Matrix BZt = st.BZ.to_dense().transpose();
        for (int c = 0; c < m; ++c) out.G.col(c) = st.MA->coarse.gal_chol.lower_solve(BZt.col(c));
    }

    Matrix Y(m, d0);
    if (d0 > 0) {
        if (mode == MA0Assembly::naive) {
            // apply the full operator to each column of Gᵀ
            Matrix GT = out.G.transpose();
            for (int c = 0; c < d0; ++c) Y.col(c) = apply_MS1_inv(st, GT.col(c));
        } else {
            // K2 = Σᵢ R̃ᵢᵀD̃ᵢT_i†D̃ᵢR̃ᵢ (S₁Z), computed on touched columns only
            Matrix K2;
            if (d1 > 0) {
                K2 = Matrix::Zero(m, d1);
                for (int i = 0; i < dec.N; ++i) {
                    const auto& s = dec.subs[i];
                    if (s.nd() == 0) continue;
                    std::vector<int> touched;
                    for (int c = 0; c < d1; ++c) {
                        for (int k = 0; k < s.nd(); ++k)
                            if (st.coarse.S1Z(s.dual[k], c) != 0.0) {
                                touched.push_back(c);
                                break;
                            }
                    }
                    if (touched.empty()) continue;
                    Matrix W(s.nd(), touched.size());
                    for (std::size_t t = 0; t < touched.size(); ++t)
                        for (int k = 0; k < s.nd(); ++k)
                            W(k, t) = s.Dt[k] * st.coarse.S1Z(s.dual[k], touched[t]);
                    Matrix V = st.locals[i].pinv.apply_mat(W);
                    for (std::size_t t = 0; t < touched.size(); ++t)
                        for (int k = 0; k < s.nd(); ++k)
                            K2(s.dual[k], touched[t]) += s.Dt[k] * V(k, t);
                }
            }
            // work on the columns of BZ, whose supports are genuinely local;
            // the L₀ mixing happens afterwards in the coarse dimension
            std::vector<std::vector<int>> col_support(d0);
            {
                SparseMat BZt_sp = st.BZ.transpose();
                for (int c = 0; c < d0; ++c) {
                    auto [ci, cv] = BZt_sp.row(c);
                    col_support[c].assign(ci.begin(), ci.end());
                }
            }
            Matrix BZd = st.BZ.to_dense();
            for (int c = 0; c < d0; ++c) {
                const Vector g = BZd.col(c);
                Vector coarse_term = Vector::Zero(m);
                Vector v;
                if (d1 > 0) {
                    Vector u = st.coarse.gal_chol.solve(st.coarse.Z.apply_transpose(g));
                    coarse_term = st.coarse.Z.apply(u);
                    // Y w with w = g − S₁Z u, split exactly into the local part
                    // of g (support-limited) minus K2·u
                    v = one_level_apply(st, g, &col_support[c]);
                    v.noalias() -= K2 * u;
                    Vector t = st.coarse.gal_chol.solve(Vector(st.coarse.S1Z.transpose() * v));
                    v.noalias() -= st.coarse.Z.apply(t);
                } else {
                    v = one_level_apply(st, g, &col_support[c]);
                }
                Y.col(c) = coarse_term + v;
            }
        }
    }
    if (mode == MA0Assembly::naive) {
        out.M = Matrix::Identity(d0, d0) + out.G * Y;
    } else {
        // M = I + L₀⁻¹ [(BZ)ᵀ M_{S1}⁻¹ (BZ)] L₀⁻ᵀ
        Matrix H(d0, d0);
        {
            SparseMat BZt_sp = st.BZ.transpose();
            for (int a = 0; a < d0; ++a) {
                auto [ci, cv] = BZt_sp.row(a);
                for (int b = 0; b < d0; ++b) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < ci.size(); ++k) s += cv[k] * Y(ci[k], b);
                    H(a, b) = s;
                }
            }
        }
        H = 0.5 * (H + H.transpose()).eval();
        Matrix W1(d0, d0);  // L₀⁻¹ H
        for (int c = 0; c < d0; ++c) W1.col(c) = st.MA->coarse.gal_chol.lower_solve(H.col(c));
        Matrix W2 = W1.transpose();  // (L₀⁻¹ H)ᵀ = H L₀⁻ᵀ
        for (int c = 0; c < d0; ++c) W2.col(c) = st.MA->coarse.gal_chol.lower_solve(W2.col(c));
        out.M = Matrix::Identity(d0, d0) + W2.transpose();
    }
    out.M = 0.5 * (out.M + out.M.transpose()).eval();
    try {
        out.chol_factor = chol(out.M);
    } catch (const NotSpdError& e) {
        throw NumericalError("M_A0 factorization failed (pivot " + std::to_string(e.pivot) +
                             "): upstream operator is not I + PSD");
    }
    return out;
}

Vector apply_NS_inv(const DualPrecondState& st, const MA0System& ma0, const Vector& g) {
    Vector gp = apply_MS1_inv(st, g);
    if (ma0.G.rows() == 0) return gp;
    Vector rhs = ma0.G * gp;
    Vector y = ma0.chol_factor.solve(rhs);
    return apply_MS1_inv(st, Vector(g - ma0.G.transpose() * y));
}

} // namespace sdd
