#include "sdd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdd {

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
}

int Rng::uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

ProblemKind ProblemSpec::kind_from_string(const std::string& s) {
    if (s == "poisson2d_constrained") return ProblemKind::poisson2d_constrained;
    if (s == "mixed_darcy_mac") return ProblemKind::mixed_darcy_mac;
    if (s == "random_spd_constrained") return ProblemKind::random_spd_constrained;
    throw ConfigError("unknown problem kind '" + s + "'");
}

std::string ProblemSpec::kind_to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::poisson2d_constrained: return "poisson2d_constrained";
        case ProblemKind::mixed_darcy_mac: return "mixed_darcy_mac";
        case ProblemKind::random_spd_constrained: return "random_spd_constrained";
    }
    return "?";
}

namespace {

SparseMat make_C(CMode mode, double eps, int m) {
    std::vector<Triplet> t;
    if (mode == CMode::diag_eps)
        for (int j = 0; j < m; ++j) t.push_back({j, j, eps});
    return SparseMat::from_triplets(m, m, std::move(t));
}

template <typename Fn>
void deterministic_shuffle(std::vector<int>& v, Rng& rng, Fn) {
    for (int k = static_cast<int>(v.size()) - 1; k > 0; --k)
        std::swap(v[k], v[rng.uniform_int(0, k)]);
}

SaddleSystem gen_poisson2d(const ProblemSpec& spec) {
    const int gx = spec.gx, gy = spec.gy;
    require(gx >= 2 && gy >= 2, "poisson2d: grid must be at least 2x2");
    const int n = gx * gy;
    auto nid = [gy](int i, int j) { return i * gy + j; };

    SaddleSystem sys;
    sys.coords.resize(n, 2);
    Rng rng(spec.seed);
    std::vector<Triplet> at;
    const Matrix edge = (Matrix(2, 2) << 1.0, -1.0, -1.0, 1.0).finished();
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < gx; ++i)
        for (int j = 0; j < gy; ++j) {
            const int p = nid(i, j);
            sys.coords(p, 0) = i;
            sys.coords(p, 1) = j;
            if (i + 1 < gx) edges.push_back({p, nid(i + 1, j)});
            if (j + 1 < gy) edges.push_back({p, nid(i, j + 1)});
        }
    for (auto [p, q] : edges) {
        const double w = std::exp(spec.kappa_sigma * rng.normal());
        Matrix E = w * edge;
        sys.A_split.elems.push_back({{p, q}, E});
        at.push_back({p, p, E(0, 0)});
        at.push_back({p, q, E(0, 1)});
        at.push_back({q, p, E(1, 0)});
        at.push_back({q, q, E(1, 1)});
    }
    // Dirichlet-eliminated exterior neighbours show up as boundary mass
    for (int i = 0; i < gx; ++i)
        for (int j = 0; j < gy; ++j) {
            const int nb = (i == 0) + (i + 1 == gx) + (j == 0) + (j + 1 == gy);
            if (nb == 0) continue;
            const int p = nid(i, j);
            Matrix E(1, 1);
            E(0, 0) = static_cast<double>(nb);
            sys.A_split.elems.push_back({{p}, E});
            at.push_back({p, p, E(0, 0)});
        }
    sys.A = SparseMat::from_triplets(n, n, std::move(at));

    // difference constraints on a deterministically shuffled spanning forest
    std::vector<int> tree;
    {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        std::vector<std::vector<std::pair<int, int>>> inc(n);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            inc[edges[e].first].push_back({edges[e].second, static_cast<int>(e)});
            inc[edges[e].second].push_back({edges[e].first, static_cast<int>(e)});
        }
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (auto [v, e] : inc[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    tree.push_back(e);
                    stack.push_back(v);
                }
        }
    }
    int m = std::max<int>(1, static_cast<int>(spec.constraint_frac * n));
    m = std::min<int>(m, static_cast<int>(tree.size()));
    deterministic_shuffle(tree, rng, 0);
    std::vector<Triplet> bt;
    for (int k = 0; k < m; ++k) {
        auto [p, q] = edges[tree[k]];
        bt.push_back({k, p, 1.0});
        bt.push_back({k, q, -1.0});
    }
    sys.B = SparseMat::from_triplets(m, n, std::move(bt));
    sys.C = make_C(spec.c_mode, spec.c_eps, m);
    return sys;
}

SaddleSystem gen_mac(const ProblemSpec& spec) {
    const int gx = spec.gx, gy = spec.gy;
    require(gx >= 2 && gy >= 2, "mac: grid must be at least 2x2");
    const bool wrap = spec.mac_y_periodic;
    const int nu = (gx + 1) * gy;
    const int nv = wrap ? gx * gy : gx * (gy + 1);
    const int n = nu + nv;
    // a fully periodic column of cells sums to a dependent row; drop one
    const int m = wrap ? gx * gy - 1 : gx * gy;
    const double h = 1.0 / gx;
    auto uid = [gy](int i, int j) { return i * gy + j; };            // i in 0..gx, j in 0..gy-1
    auto vid = [nu, gy, wrap](int i, int j) {                        // i in 0..gx-1
        if (wrap) return nu + i * gy + (j % gy);
        return nu + i * (gy + 1) + j;
    };

    SaddleSystem sys;
    sys.coords.resize(n, 2);
    for (int i = 0; i <= gx; ++i)
        for (int j = 0; j < gy; ++j) {
            sys.coords(uid(i, j), 0) = i;
            sys.coords(uid(i, j), 1) = j + 0.5;
        }
    for (int i = 0; i < gx; ++i)
        for (int j = 0; j <= (wrap ? gy - 1 : gy); ++j) {
            sys.coords(vid(i, j), 0) = i + 0.5;
            sys.coords(vid(i, j), 1) = j;
        }

    Rng rng(spec.seed);
    std::vector<Triplet> at, bt;
    Vector d(4);
    d << -1.0 / h, 1.0 / h, -1.0 / h, 1.0 / h;
    for (int ci = 0; ci < gx; ++ci)
        for (int cj = 0; cj < gy; ++cj) {
            const int c = ci * gy + cj;
            const std::vector<int> idx{uid(ci, cj), uid(ci + 1, cj), vid(ci, cj), vid(ci, cj + 1)};
            const double kap = std::exp(spec.kappa_sigma * rng.normal());
            Matrix E = kap * h * h * (d * d.transpose() + spec.mass_coeff * Matrix::Identity(4, 4));
            sys.A_split.elems.push_back({idx, E});
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    if (E(a, b) != 0.0) at.push_back({idx[a], idx[b], E(a, b)});
            if (c < m)
                for (int a = 0; a < 4; ++a) bt.push_back({c, idx[a], d[a] * h * h});
        }
    sys.A = SparseMat::from_triplets(n, n, std::move(at));
    sys.B = SparseMat::from_triplets(m, n, std::move(bt));
    sys.C = make_C(spec.c_mode, spec.c_eps, m);
    return sys;
}

SaddleSystem gen_random(const ProblemSpec& spec) {
    const int n = spec.n, m = spec.m;
    if (m >= n) throw ConfigError("random problem: m >= n");
    require(n >= 4, "random problem: n too small");
    Rng rng(spec.seed);
    SaddleSystem sys;
    std::vector<Triplet> at;
    // chain elements keep the graph connected
    for (int i = 0; i + 1 < n; ++i) {
        const double w = 0.2 + rng.uniform();
        Matrix E = w * (Matrix(2, 2) << 1.0, -1.0, -1.0, 1.0).finished();
        sys.A_split.elems.push_back({{i, i + 1}, E});
    }
    // random small cliques, PSD via GᵀG
    const int extra = 2 * n;
    for (int e = 0; e < extra; ++e) {
        const int k = rng.uniform_int(2, 4);
        std::vector<int> idx;
        while (static_cast<int>(idx.size()) < k) {
            int c = rng.uniform_int(0, n - 1);
            if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
        }
        std::sort(idx.begin(), idx.end());
        Matrix G(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) G(a, b) = rng.normal();
        Matrix E = 0.25 * G.transpose() * G;
        sys.A_split.elems.push_back({idx, E});
    }
    // per-dof ridge
    for (int i = 0; i < n; ++i) {
        Matrix E(1, 1);
        E(0, 0) = 0.1;
        sys.A_split.elems.push_back({{i}, E});
    }
    for (const auto& el : sys.A_split.elems)
        for (std::size_t a = 0; a < el.idx.size(); ++a)
            for (std::size_t b = 0; b < el.idx.size(); ++b)
                if (el.mat(a, b) != 0.0)
                    at.push_back({el.idx[a], el.idx[b], el.mat(a, b)});
    sys.A = SparseMat::from_triplets(n, n, std::move(at));

    // 2m distinct dofs paired: rows e_p − e_q are independent by construction
    require(2 * m <= n, "random problem: need 2m <= n for the pairing construction");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    deterministic_shuffle(perm, rng, 0);
    std::vector<Triplet> bt;
    for (int k = 0; k < m; ++k) {
        bt.push_back({k, perm[2 * k], 1.0});
        bt.push_back({k, perm[2 * k + 1], -1.0});
    }
    sys.B = SparseMat::from_triplets(m, n, std::move(bt));
    sys.C = make_C(spec.c_mode, spec.c_eps, m);
    return sys;
}

} // namespace

SaddleSystem generate(const ProblemSpec& spec) {
    switch (spec.kind) {
        case ProblemKind::poisson2d_constrained: return gen_poisson2d(spec);
        case ProblemKind::mixed_darcy_mac: return gen_mac(spec);
        case ProblemKind::random_spd_constrained: return gen_random(spec);
    }
    throw ConfigError("unknown problem kind");
}

} // namespace sdd
