// Acceptance suite: every shipped guarantee checked end to end, one
// pass/fail line per criterion. Exit code is nonzero when anything fails.

#include "sdd/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

using namespace sdd;

namespace {

int threads() { return 2; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

RunConfig mac_config(int g, int N, double tau_A, double tau_S1, CMode cm = CMode::zero) {
    RunConfig cfg;
    cfg.problem.kind = ProblemKind::mixed_darcy_mac;
    cfg.problem.gx = cfg.problem.gy = g;
    cfg.problem.c_mode = cm;
    cfg.N = N;
    cfg.overlap = 2;
    cfg.tau_A = tau_A;
    cfg.tau_S1 = tau_S1;
    cfg.threads = threads();
    return cfg;
}

struct ProblemSet {
    std::vector<std::pair<std::string, RunConfig>> items;
};

ProblemSet shipped_problems() {
    ProblemSet set;
    set.items.push_back({"mixed_darcy_mac 24x24 N=4", mac_config(24, 4, 0.3, -1.0)});
    RunConfig poisson;
    poisson.problem.kind = ProblemKind::poisson2d_constrained;
    poisson.problem.gx = poisson.problem.gy = 24;
    poisson.problem.kappa_sigma = 1.0;
    poisson.N = 4;
    poisson.overlap = 2;
    poisson.threads = threads();
    set.items.push_back({"poisson2d 24x24 N=4", poisson});
    RunConfig rnd;
    rnd.problem.kind = ProblemKind::random_spd_constrained;
    rnd.problem.n = 800;
    rnd.problem.m = 200;
    rnd.N = 4;
    rnd.overlap = 1;
    rnd.threads = threads();
    set.items.push_back({"random_spd n=800 m=200 N=4", rnd});
    return set;
}

CheckResult merge(const std::string& name, const std::vector<CheckResult>& parts) {
    bool pass = true;
    std::string detail;
    for (const auto& p : parts) {
        pass = pass && p.pass;
        if (!detail.empty()) detail += "; ";
        detail += p.detail;
    }
    return {name, pass, detail};
}

// --- criteria -------------------------------------------------------------

CheckResult c1_partition_of_unity() {
    std::vector<CheckResult> parts;
    for (auto& [name, cfg] : shipped_problems().items) {
        SaddleSystem sys = generate(cfg.problem);
        Decomposition dec = build_decomposition(sys, cfg.N, cfg.overlap, cfg.tols, threads());
        CheckResult a = checks::pou_primal(dec);
        CheckResult b = checks::pou_dual(dec);
        parts.push_back({name, a.pass && b.pass, name + ": " + a.detail + " / " + b.detail});
    }
    return merge("partition_of_unity", parts);
}

CheckResult c2_support_identity() {
    std::vector<CheckResult> parts;
    for (auto& [name, cfg] : shipped_problems().items) {
        SaddleSystem sys = generate(cfg.problem);
        Decomposition dec = build_decomposition(sys, cfg.N, cfg.overlap, cfg.tols, threads());
        CheckResult r = checks::support_identity(sys, dec);
        parts.push_back({name, r.pass, name + ": " + r.detail});
    }
    return merge("support_identity", parts);
}

CheckResult c3_ct_reassembly() {
    std::vector<CheckResult> parts;
    // C = 0 and C = eps I
    for (CMode cm : {CMode::zero, CMode::diag_eps}) {
        RunConfig cfg = mac_config(24, 4, 0.3, -1.0, cm);
        SaddleSystem sys = generate(cfg.problem);
        Decomposition dec = build_decomposition(sys, cfg.N, cfg.overlap, cfg.tols, threads());
        CheckResult r = checks::ct_reassembly(sys, dec);
        parts.push_back({r.name, r.pass,
                         std::string(cm == CMode::zero ? "C=0: " : "C=epsI: ") + r.detail});
    }
    // split-provided C: PSD elements placed inside single dual supports
    {
        RunConfig cfg = mac_config(16, 4, 0.3, -1.0);
        SaddleSystem probe_sys = generate(cfg.problem);
        Decomposition probe =
            build_decomposition(probe_sys, cfg.N, cfg.overlap, cfg.tols, threads());
        PsdSplit cs;
        Rng rng(21);
        for (const auto& s : probe.subs) {
            for (int rep = 0; rep + 1 < std::min(s.nd(), 8); rep += 2) {
                Matrix G(2, 2);
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) G(a, b) = rng.normal();
                Matrix E = G.transpose() * G + 0.1 * Matrix::Identity(2, 2);
                cs.elems.push_back({{s.dual[rep], s.dual[rep + 1]}, E});
            }
        }
        SaddleSystem sys = generate(cfg.problem);
        sys.C = cs.assemble(sys.m());
        sys.C_split = cs;
        Decomposition dec = build_decomposition(sys, cfg.N, cfg.overlap, cfg.tols, threads());
        CheckResult r = checks::ct_reassembly(sys, dec);
        parts.push_back({r.name, r.pass, "C split-provided: " + r.detail});
    }
    return merge("ct_reassembly", parts);
}

CheckResult c4_ms_rewrite() {
    RunConfig cfg = mac_config(24, 4, 0.3, -1.0, CMode::diag_eps);
    Pipeline pl;
    build_pipeline(cfg, pl);
    return checks::ms_rewrite(pl.dual, 100, 1e-10);
}

CheckResult c5_stable_decomposition() {
    RunConfig cfg = mac_config(24, 4, 0.3, -1.0, CMode::diag_eps);
    Pipeline pl;
    build_pipeline(cfg, pl);
    return checks::stable_decomposition(pl.dual, 100, 1e-12);
}

CheckResult c6_alpha_bound() {
    std::vector<CheckResult> parts;
    int k0 = 0;
    {
        RunConfig cfg = mac_config(24, 4, 0.3, 0.0);
        SaddleSystem sys = generate(cfg.problem);
        k0 = build_decomposition(sys, cfg.N, cfg.overlap, cfg.tols, threads()).k0;
    }
    for (double factor : {0.5, 1.0, 2.0}) {
        const double tau = factor * k0;
        Pipeline pl;
        build_pipeline(mac_config(24, 4, 0.3, tau), pl);
        CheckResult r = checks::alpha_bound(pl, 1e-8, 1e-6);
        std::ostringstream tag;
        tag << "tau=" << factor << "*k0 dimW0=" << pl.dual.coarse.dim() << ": " << r.detail;
        parts.push_back({r.name, r.pass, tag.str()});
    }
    return merge("alpha_bound", parts);
}

CheckResult c7_sherman_morrison() {
    Pipeline pl;
    build_pipeline(mac_config(24, 4, 0.3, 2.0, CMode::diag_eps), pl);
    return checks::sherman_morrison_roundtrip(pl, 100, 1e-9);
}

CheckResult c8_ma0_dual_path() {
    Pipeline pl;
    build_pipeline(mac_config(24, 4, 0.3, 2.0), pl);
    return checks::ma0_dual_path(pl.dual, 1e-9);
}

CheckResult c9_end_to_end() {
    std::vector<CheckResult> parts;
    {
        RunConfig cfg = mac_config(30, 4, 0.3, -1.0, CMode::diag_eps);
        Pipeline pl;
        build_pipeline(cfg, pl);
        CheckResult r = checks::saddle_solve_vs_dense(pl, 1e-8, 1e-6);
        parts.push_back({r.name, r.pass, "mac 30x30: " + r.detail});
    }
    {
        RunConfig cfg;
        cfg.problem.kind = ProblemKind::poisson2d_constrained;
        cfg.problem.gx = cfg.problem.gy = 40;
        cfg.problem.kappa_sigma = 1.0;
        cfg.N = 4;
        cfg.overlap = 2;
        cfg.tau_A = 0.3;
        cfg.threads = threads();
        Pipeline pl;
        build_pipeline(cfg, pl);
        CheckResult r = checks::saddle_solve_vs_dense(pl, 1e-8, 1e-6);
        parts.push_back({r.name, r.pass, "poisson 40x40: " + r.detail});
    }
    {
        RunConfig cfg;
        cfg.problem.kind = ProblemKind::random_spd_constrained;
        cfg.problem.n = 1500;
        cfg.problem.m = 500;
        cfg.N = 4;
        cfg.overlap = 1;
        cfg.tau_A = 0.3;
        cfg.threads = threads();
        Pipeline pl;
        build_pipeline(cfg, pl);
        CheckResult r = checks::saddle_solve_vs_dense(pl, 1e-8, 1e-6);
        parts.push_back({r.name, r.pass, "random n=1500: " + r.detail});
    }
    return merge("end_to_end_block_solve", parts);
}

nlohmann::json g_sweep_rows;  // shared between criteria 10 and 11

CheckResult c10_weak_scalability() {
    // periodic homogeneous strips: every subdomain translation-equivalent
    RunConfig cfg;
    cfg.problem.kind = ProblemKind::mixed_darcy_mac;
    cfg.problem.gx = 16;
    cfg.problem.kappa_sigma = 0.0;
    cfg.problem.mac_y_periodic = true;
    cfg.tau_A = 0.014;
    cfg.sweep_cells_per_sub = 256;  // 16x16 cells per strip: ~530 primal dofs
    cfg.sweep_N = {4, 9, 16};
    cfg.overlap = 2;
    cfg.threads = threads();
    cfg.solver.tol = 1e-8;
    RunSummary s = sweep(cfg);
    g_sweep_rows = s.j["rows"];
    int it_min = 1 << 30, it_max = 0;
    bool dims_ok = true;
    std::string detail = "step3 iters";
    for (const auto& row : g_sweep_rows) {
        const int it = row["step3_iterations"];
        it_min = std::min(it_min, it);
        it_max = std::max(it_max, it);
        const int dimv0 = row["dim_V0"], N = row["N"];
        dims_ok = dims_ok && (dimv0 <= 20 * N);
        detail += " N=" + std::to_string(N) + ":" + std::to_string(it) +
                  " (dimV0=" + std::to_string(dimv0) + ")";
    }
    const double var = it_max > 0 ? double(it_max - it_min) / double(it_max) : 0.0;
    detail += ", variation " + fmt(var);
    return {"weak_scalability", var <= 0.20 && dims_ok, detail};
}

CheckResult c11_sparsity_assumptions() {
    if (g_sweep_rows.empty()) return {"sparsity_assumptions", false, "sweep did not run"};
    int bz_min = 1 << 30, bz_max = 0, s1z_min = 1 << 30, s1z_max = 0;
    std::string detail;
    for (const auto& row : g_sweep_rows) {
        const int bz = row["max_nonzero_cols_bz"], s1z = row["max_nonzero_cols_s1z"];
        bz_min = std::min(bz_min, bz);
        bz_max = std::max(bz_max, bz);
        s1z_min = std::min(s1z_min, s1z);
        s1z_max = std::max(s1z_max, s1z);
        detail += " N=" + std::to_string(int(row["N"])) + ": bz=" + std::to_string(bz) +
                  " s1z=" + std::to_string(s1z);
    }
    const bool pass = (bz_max - bz_min <= 1) && (s1z_max - s1z_min <= 1);
    return {"sparsity_assumptions", pass, detail};
}

CheckResult c12_geneo_monotonicity() {
    RunConfig base;
    base.problem.kind = ProblemKind::poisson2d_constrained;
    base.problem.gx = base.problem.gy = 24;
    base.problem.kappa_sigma = 1.0;
    base.N = 4;
    base.overlap = 2;
    base.threads = threads();

    SaddleSystem sys = generate(base.problem);
    Decomposition dec = build_decomposition(sys, base.N, base.overlap, base.tols, threads());
    double prev = 0.0;
    bool mono = true;
    std::string detail = "lambda_min:";
    for (double tau : {0.0, 0.3, 0.6, 1.2}) {
        PrimalPrecond P = build_primal_precond(sys, dec, PrimalMode::ASM2, tau, 1.0, base.tols,
                                               threads());
        auto [lo, hi] = spectrum_MA(sys, P);
        mono = mono && (lo >= prev - 1e-9);
        prev = lo;
        detail += " " + fmt(lo);
    }

    // iteration comparison on the 32x32 Laplacian
    RunConfig lap = base;
    lap.problem.gx = lap.problem.gy = 32;
    SaddleSystem sys2 = generate(lap.problem);
    Decomposition dec2 = build_decomposition(sys2, 4, 2, lap.tols, threads());
    PrimalPrecond one = build_primal_precond(sys2, dec2, PrimalMode::ASM2, 0.0);
    PrimalPrecond two = build_primal_precond(sys2, dec2, PrimalMode::ASM2, 0.6);
    Rng rng(12);
    Vector b(sys2.n());
    for (int i = 0; i < sys2.n(); ++i) b[i] = rng.normal();
    PcgOptions opts;
    opts.tol = 1e-8;
    opts.maxit = 4000;
    auto [x1, r1] = pcg([&](const Vector& v) { return sys2.A.apply(v); },
                        [&](const Vector& v) { return one.apply(v); }, b, opts);
    auto [x2, r2] = pcg([&](const Vector& v) { return sys2.A.apply(v); },
                        [&](const Vector& v) { return two.apply(v); }, b, opts);
    detail += "; 32x32 iters one-level " + std::to_string(r1.iterations) + " vs two-level " +
              std::to_string(r2.iterations) + " (dimV0 " + std::to_string(two.coarse.dim()) +
              ")";
    const bool iter_ok = r1.converged && r2.converged && r2.iterations < r1.iterations;
    return {"geneo_A_monotonicity", mono && iter_ok, detail};
}

} // namespace

int main() {
    using Entry = std::pair<int, std::function<CheckResult()>>;
    std::vector<Entry> criteria{
        {1, c1_partition_of_unity}, {2, c2_support_identity}, {3, c3_ct_reassembly},
        {4, c4_ms_rewrite},         {5, c5_stable_decomposition}, {6, c6_alpha_bound},
        {7, c7_sherman_morrison},   {8, c8_ma0_dual_path},     {9, c9_end_to_end},
        {10, c10_weak_scalability}, {11, c11_sparsity_assumptions},
        {12, c12_geneo_monotonicity}};
    bool all = true;
    for (auto& [id, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {"criterion " + std::to_string(id), false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && r.pass;
        std::printf("[%s] %02d %-26s (%6.1f s) %s\n", r.pass ? "PASS" : "FAIL", id,
                    r.name.c_str(), secs, r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf(all ? "acceptance: all criteria passed\n"
                    : "acceptance: at least one criterion FAILED\n");
    return all ? 0 : 1;
}
