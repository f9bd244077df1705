#include "sdd/decomposition.hpp"

#include "sdd/par.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace sdd {

namespace {

// symmetrized adjacency of the pattern of A, self-loops removed
std::vector<std::vector<int>> adjacency(const SparseMat& A) {
    const int n = A.rows();
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        auto [cols, vals] = A.row(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i) continue;
            adj[i].push_back(cols[k]);
            adj[cols[k]].push_back(i);
        }
    }
    for (auto& v : adj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return adj;
}

std::vector<std::vector<int>> components(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int c = static_cast<int>(out.size());
        out.emplace_back();
        std::deque<int> q{s};
        comp[s] = c;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            out[c].push_back(u);
            for (int v : adj[u])
                if (comp[v] < 0) {
                    comp[v] = c;
                    q.push_back(v);
                }
        }
        std::sort(out[c].begin(), out[c].end());
    }
    return out;
}

// recursive coordinate bisection of `dofs` into `parts` pieces
void rcb(const Matrix& coords, std::vector<int> dofs, int parts,
         std::vector<std::vector<int>>& out) {
    if (parts <= 1) {
        std::sort(dofs.begin(), dofs.end());
        out.push_back(std::move(dofs));
        return;
    }
    const int d = static_cast<int>(coords.cols());
    int axis = 0;
    double best = -1.0;
    for (int a = 0; a < d; ++a) {
        double lo = coords(dofs[0], a), hi = lo;
        for (int p : dofs) {
            lo = std::min(lo, coords(p, a));
            hi = std::max(hi, coords(p, a));
        }
        if (hi - lo > best) {
            best = hi - lo;
            axis = a;
        }
    }
    std::sort(dofs.begin(), dofs.end(), [&](int a, int b) {
        if (coords(a, axis) != coords(b, axis)) return coords(a, axis) < coords(b, axis);
        return a < b;
    });
    const int p1 = parts / 2, p2 = parts - p1;
    const std::size_t cut = dofs.size() * static_cast<std::size_t>(p1) / parts;
    std::vector<int> left(dofs.begin(), dofs.begin() + cut);
    std::vector<int> right(dofs.begin() + cut, dofs.end());
    rcb(coords, std::move(left), p1, out);
    rcb(coords, std::move(right), p2, out);
}

// greedy graph-growing from spread-out seeds
std::vector<std::vector<int>> bfs_partition(const std::vector<std::vector<int>>& adj,
                                            const std::vector<int>& dofs, int parts) {
    std::vector<int> label(adj.size(), -2);
    for (int p : dofs) label[p] = -1;
    std::vector<int> seeds{dofs[0]};
    // farthest-point seed picking by BFS levels
    while (static_cast<int>(seeds.size()) < parts) {
        std::vector<int> dist(adj.size(), -1);
        std::deque<int> q;
        for (int s : seeds) {
            dist[s] = 0;
            q.push_back(s);
        }
        int far = seeds[0];
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            far = u;
            for (int v : adj[u])
                if (label[v] == -1 && dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
        }
        seeds.push_back(far);
    }
    std::vector<std::deque<int>> fronts(parts);
    for (int k = 0; k < parts; ++k) {
        label[seeds[k]] = k;
        fronts[k].push_back(seeds[k]);
    }
    bool any = true;
    while (any) {
        any = false;
        for (int k = 0; k < parts; ++k) {
            if (fronts[k].empty()) continue;
            any = true;
            int u = fronts[k].front();
            fronts[k].pop_front();
            for (int v : adj[u])
                if (label[v] == -1) {
                    label[v] = k;
                    fronts[k].push_back(v);
                }
        }
    }
    std::vector<std::vector<int>> out(parts);
    for (int p : dofs) out[label[p]].push_back(p);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

std::vector<int> grow(const std::vector<std::vector<int>>& adj, std::vector<int> set,
                      int layers) {
    std::vector<char> in(adj.size(), 0);
    for (int p : set) in[p] = 1;
    std::vector<int> frontier = set;
    for (int l = 0; l < layers; ++l) {
        std::vector<int> next;
        for (int u : frontier)
            for (int v : adj[u])
                if (!in[v]) {
                    in[v] = 1;
                    next.push_back(v);
                }
        set.insert(set.end(), next.begin(), next.end());
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    std::sort(set.begin(), set.end());
    return set;
}

} // namespace

Decomposition build_partition(const SaddleSystem& sys, int N, int overlap) {
    const int n = sys.n();
    require(N >= 1, "N must be at least 1");
    if (N > n) throw ConfigError("more subdomains than primal dofs");

    const auto adj = adjacency(sys.A);
    const auto comps = components(adj);
    if (static_cast<int>(comps.size()) > N)
        throw ConfigError("graph of A has more connected components (" +
                          std::to_string(comps.size()) + ") than subdomains");

    // distribute N parts over components proportional to size, each >= 1
    const int nc = static_cast<int>(comps.size());
    std::vector<int> parts(nc, 1);
    int left = N - nc;
    std::vector<std::size_t> order(nc);
    std::iota(order.begin(), order.end(), 0);
    while (left > 0) {
        // largest remaining ratio first
        std::size_t best = 0;
        double best_ratio = -1.0;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            double ratio = double(comps[c].size()) / parts[c];
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best = c;
            }
        }
        ++parts[best];
        --left;
    }
    for (std::size_t c = 0; c < comps.size(); ++c)
        if (parts[c] > static_cast<int>(comps[c].size()))
            throw ConfigError("component too small for requested subdomain count");

    std::vector<std::vector<int>> seeds;
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (sys.coords.size() > 0)
            rcb(sys.coords, comps[c], parts[c], seeds);
        else {
            auto pieces = bfs_partition(adj, comps[c], parts[c]);
            for (auto& p : pieces) seeds.push_back(std::move(p));
        }
    }

    Decomposition dec;
    dec.n = n;
    dec.m = sys.m();
    dec.N = N;
    dec.subs.resize(N);
    for (int i = 0; i < N; ++i) {
        require(!seeds[i].empty(), "empty seed partition piece");
        dec.subs[i].id = i;
        dec.subs[i].primal = grow(adj, std::move(seeds[i]), overlap);
    }
    return dec;
}

void build_pou(Decomposition& dec) {
    dec.primal_mult.assign(dec.n, 0);
    for (const auto& s : dec.subs)
        for (int p : s.primal) ++dec.primal_mult[p];
    for (int k = 0; k < dec.n; ++k)
        if (dec.primal_mult[k] == 0)
            throw AssumptionViolation("primal dof " + std::to_string(k) + " is in no subdomain");
    for (auto& s : dec.subs) {
        s.D.resize(s.np());
        for (int k = 0; k < s.np(); ++k) s.D[k] = 1.0 / dec.primal_mult[s.primal[k]];
    }
    if (!dec.subs.empty() && !dec.subs[0].dual.empty()) {
        dec.dual_mult.assign(dec.m, 0);
        for (const auto& s : dec.subs)
            for (int j : s.dual) ++dec.dual_mult[j];
        for (auto& s : dec.subs) {
            s.Dt.resize(s.nd());
            for (int k = 0; k < s.nd(); ++k) s.Dt[k] = 1.0 / dec.dual_mult[s.dual[k]];
        }
    }
}

void build_dual_objects(const SaddleSystem& sys, Decomposition& dec) {
    std::vector<char> in_primal(dec.n, 0);
    for (auto& s : dec.subs) {
        std::fill(in_primal.begin(), in_primal.end(), 0);
        for (int p : s.primal) in_primal[p] = 1;
        s.dual.clear();
        for (int j = 0; j < sys.m(); ++j) {
            auto [cols, vals] = sys.B.row(j);
            for (std::size_t k = 0; k < cols.size(); ++k)
                if (in_primal[cols[k]]) {
                    s.dual.push_back(j);
                    break;
                }
        }
        s.Bt = sys.B.submatrix(s.dual, s.primal);
        s.A_loc = sys.A.submatrix(s.primal, s.primal);
    }
    if (dec.m > 0) {
        std::vector<int> covered(dec.m, 0);
        for (const auto& s : dec.subs)
            for (int j : s.dual) covered[j] = 1;
        for (int j = 0; j < dec.m; ++j)
            if (!covered[j])
                throw AssumptionViolation("constraint row " + std::to_string(j) +
                                          " touches no subdomain");
    }
    // dual weights need the dual multiplicities
    dec.dual_mult.assign(dec.m, 0);
    for (const auto& s : dec.subs)
        for (int j : s.dual) ++dec.dual_mult[j];
    for (auto& s : dec.subs) {
        s.Dt.resize(s.nd());
        for (int k = 0; k < s.nd(); ++k) s.Dt[k] = 1.0 / dec.dual_mult[s.dual[k]];
    }
}

void build_Ct(const SaddleSystem& sys, Decomposition& dec, const Tolerances& tol) {
    if (sys.C.nnz() == 0 && !sys.C_split) {
        for (auto& s : dec.subs) s.Ct = Matrix::Zero(s.nd(), s.nd());
        return;
    }
    if (sys.C_split) {
        std::vector<std::vector<char>> in_dual(dec.N, std::vector<char>(dec.m, 0));
        for (int i = 0; i < dec.N; ++i)
            for (int j : dec.subs[i].dual) in_dual[i][j] = 1;
        for (auto& s : dec.subs) s.Ct = Matrix::Zero(s.nd(), s.nd());
        for (std::size_t e = 0; e < sys.C_split->elems.size(); ++e) {
            const auto& el = sys.C_split->elems[e];
            int owner = -1;
            for (int i = 0; i < dec.N && owner < 0; ++i) {
                bool all = true;
                for (int j : el.idx)
                    if (!in_dual[i][j]) {
                        all = false;
                        break;
                    }
                if (all) owner = i;
            }
            if (owner < 0)
                throw AssumptionViolation("Assumption 2: C split element " + std::to_string(e) +
                                          " is contained in no subdomain's dual support");
            auto& s = dec.subs[owner];
            std::vector<int> loc(el.idx.size());
            for (std::size_t k = 0; k < el.idx.size(); ++k) {
                auto it = std::lower_bound(s.dual.begin(), s.dual.end(), el.idx[k]);
                loc[k] = static_cast<int>(it - s.dual.begin());
            }
            for (std::size_t a = 0; a < loc.size(); ++a)
                for (std::size_t b = 0; b < loc.size(); ++b)
                    s.Ct(loc[a], loc[b]) += el.mat(a, b);
        }
        return;
    }
    if (!sys.C.is_diagonal())
        throw AssumptionViolation(
            "Assumption 2: C is neither diagonal nor equipped with a PSD split");
    const Vector cd = sys.C.diagonal();
    for (int j = 0; j < cd.size(); ++j)
        if (cd[j] < -tol.psd_check * sys.C.max_norm())
            throw AssumptionViolation("diagonal C has a negative entry");
    for (auto& s : dec.subs) {
        s.Ct = Matrix::Zero(s.nd(), s.nd());
        for (int k = 0; k < s.nd(); ++k) s.Ct(k, k) = cd[s.dual[k]] * s.Dt[k];
    }
}

void compute_k0_and_neighbors(Decomposition& dec) {
    std::vector<std::vector<char>> in_dual(dec.N, std::vector<char>(std::max(dec.m, 1), 0));
    for (int i = 0; i < dec.N; ++i)
        for (int j : dec.subs[i].dual) in_dual[i][j] = 1;
    dec.neighbors.assign(dec.N, {});
    dec.k0 = 0;
    for (int i = 0; i < dec.N; ++i) {
        for (int j = 0; j < dec.N; ++j) {
            bool hit = false;
            for (int d : dec.subs[i].dual)
                if (in_dual[j][d]) {
                    hit = true;
                    break;
                }
            if (hit) dec.neighbors[i].push_back(j);
        }
        dec.k0 = std::max(dec.k0, static_cast<int>(dec.neighbors[i].size()));
    }
}

void factor_locals(const SaddleSystem& sys, Decomposition& dec, const Tolerances& tol,
                   int nthreads) {
    parallel_for(dec.N, nthreads, [&](int i) {
        auto& s = dec.subs[i];
        s.A_chol = chol(s.A_loc, tol);
        // Neumann matrix from fully contained elements, on covered dofs only
        std::vector<int> glob2loc(dec.n, -1);
        for (int k = 0; k < s.np(); ++k) glob2loc[s.primal[k]] = k;
        std::vector<char> covered(s.np(), 0);
        std::vector<const PsdElem*> mine;
        s.straddling_elems = 0;
        for (const auto& el : sys.A_split.elems) {
            bool all = true, any = false;
            for (int g : el.idx) {
                if (glob2loc[g] >= 0)
                    any = true;
                else
                    all = false;
            }
            if (all) {
                mine.push_back(&el);
                for (int g : el.idx) covered[glob2loc[g]] = 1;
            } else if (any) {
                ++s.straddling_elems;
            }
        }
        s.neu_map.clear();
        for (int k = 0; k < s.np(); ++k)
            if (covered[k]) s.neu_map.push_back(k);
        std::vector<int> loc2neu(s.np(), -1);
        for (std::size_t k = 0; k < s.neu_map.size(); ++k) loc2neu[s.neu_map[k]] = static_cast<int>(k);
        s.A_neu = Matrix::Zero(s.neu_map.size(), s.neu_map.size());
        for (const PsdElem* el : mine) {
            for (std::size_t a = 0; a < el->idx.size(); ++a)
                for (std::size_t b = 0; b < el->idx.size(); ++b)
                    s.A_neu(loc2neu[glob2loc[el->idx[a]]], loc2neu[glob2loc[el->idx[b]]]) +=
                        el->mat(a, b);
        }
    });
}

Decomposition build_decomposition(const SaddleSystem& sys, int N, int overlap,
                                  const Tolerances& tol, int nthreads) {
    Decomposition dec = build_partition(sys, N, overlap);
    build_dual_objects(sys, dec);
    build_pou(dec);
    build_Ct(sys, dec, tol);
    compute_k0_and_neighbors(dec);
    factor_locals(sys, dec, tol, nthreads);
    return dec;
}

} // namespace sdd
