#include "sdd/run.hpp"

#include "sdd/mmio.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace sdd {

namespace {

using nlohmann::json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RhsKind rhs_from_string(const std::string& s) {
    if (s == "random") return RhsKind::random;
    if (s == "ones") return RhsKind::ones;
    if (s == "zero") return RhsKind::zero;
    throw ConfigError("unknown rhs kind '" + s + "'");
}

std::string rhs_to_string(RhsKind k) {
    switch (k) {
        case RhsKind::random: return "random";
        case RhsKind::ones: return "ones";
        case RhsKind::zero: return "zero";
    }
    return "?";
}

CMode cmode_from_string(const std::string& s) {
    if (s == "zero") return CMode::zero;
    if (s == "diag_eps") return CMode::diag_eps;
    throw ConfigError("unknown c_mode '" + s + "'");
}

Vector make_rhs(RhsKind kind, int n, Rng& rng) {
    switch (kind) {
        case RhsKind::zero: return Vector::Zero(n);
        case RhsKind::ones: return Vector::Ones(n);
        case RhsKind::random: {
            Vector v(n);
            for (int i = 0; i < n; ++i) v[i] = rng.normal();
            return v;
        }
    }
    return Vector::Zero(n);
}

json pcg_report_json(const PcgReport& r) {
    return json{{"iterations", r.iterations},
                {"final_relres", r.final_relres},
                {"converged", r.converged},
                {"lanczos_cond_estimate", r.lanczos_cond_estimate}};
}

} // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    if (j.contains("problem")) {
        const auto& p = j.at("problem");
        if (p.contains("kind")) cfg.problem.kind = ProblemSpec::kind_from_string(p.at("kind"));
        if (p.contains("gx")) cfg.problem.gx = p.at("gx");
        if (p.contains("gy")) cfg.problem.gy = p.at("gy");
        if (p.contains("n")) cfg.problem.n = p.at("n");
        if (p.contains("m")) cfg.problem.m = p.at("m");
        if (p.contains("seed")) cfg.problem.seed = p.at("seed");
        if (p.contains("c_mode")) cfg.problem.c_mode = cmode_from_string(p.at("c_mode"));
        if (p.contains("c_eps")) cfg.problem.c_eps = p.at("c_eps");
        if (p.contains("kappa_sigma")) cfg.problem.kappa_sigma = p.at("kappa_sigma");
        if (p.contains("mass_coeff")) cfg.problem.mass_coeff = p.at("mass_coeff");
        if (p.contains("constraint_frac")) cfg.problem.constraint_frac = p.at("constraint_frac");
        if (p.contains("mac_y_periodic")) cfg.problem.mac_y_periodic = p.at("mac_y_periodic");
    }
    if (j.contains("input")) {
        FileInput in;
        const auto& p = j.at("input");
        in.a = p.at("a");
        in.b = p.at("b");
        if (p.contains("c")) in.c = p.at("c");
        if (p.contains("a_split")) in.a_split = p.at("a_split");
        if (p.contains("c_split")) in.c_split = p.at("c_split");
        cfg.input = in;
    }
    if (j.contains("decomposition")) {
        cfg.N = j.at("decomposition").value("N", cfg.N);
        cfg.overlap = j.at("decomposition").value("overlap", cfg.overlap);
    }
    if (j.contains("preconditioner")) {
        const auto& p = j.at("preconditioner");
        if (p.contains("mode")) cfg.mode = primal_mode_from_string(p.at("mode"));
        if (p.contains("tau_A")) cfg.tau_A = p.at("tau_A");
        if (p.contains("tau_S1")) {
            if (p.at("tau_S1").is_string()) {
                if (p.at("tau_S1") != "k0")
                    throw ConfigError("tau_S1 must be a number or \"k0\"");
                cfg.tau_S1 = -1.0;
            } else {
                cfg.tau_S1 = p.at("tau_S1");
            }
        }
        if (p.contains("rho_robin")) cfg.rho_robin = p.at("rho_robin");
    }
    if (j.contains("solver")) {
        const auto& p = j.at("solver");
        cfg.solver.tol = p.value("tol", cfg.solver.tol);
        cfg.solver.inner_factor = p.value("inner_factor", cfg.solver.inner_factor);
        cfg.solver.stage_a_factor = p.value("stage_a_factor", cfg.solver.stage_a_factor);
        cfg.solver.maxit_outer = p.value("maxit_outer", cfg.solver.maxit_outer);
        cfg.solver.maxit_inner = p.value("maxit_inner", cfg.solver.maxit_inner);
        cfg.solver.flexible = p.value("flexible", cfg.solver.flexible);
    }
    if (j.contains("tolerances")) {
        const auto& p = j.at("tolerances");
        cfg.tols.eig_drop = p.value("eig_drop", cfg.tols.eig_drop);
        cfg.tols.pinv_drop = p.value("pinv_drop", cfg.tols.pinv_drop);
        cfg.tols.coarse_drop = p.value("coarse_drop", cfg.tols.coarse_drop);
        cfg.tols.dense_cutoff = p.value("dense_cutoff", cfg.tols.dense_cutoff);
        cfg.tols.oracle_cap = p.value("oracle_cap", cfg.tols.oracle_cap);
    }
    if (j.contains("rhs")) {
        cfg.rhs = rhs_from_string(j.at("rhs").value("kind", "random"));
        cfg.rhs_seed = j.at("rhs").value("seed", cfg.rhs_seed);
    }
    cfg.threads = j.value("threads", cfg.threads);
    cfg.verify_oracle = j.value("verify_oracle", cfg.verify_oracle);
    cfg.verbose = j.value("verbose", cfg.verbose);
    if (j.contains("output")) {
        cfg.summary_path = j.at("output").value("summary", std::string());
        cfg.residuals_csv = j.at("output").value("residuals_csv", std::string());
    }
    if (j.contains("sweep")) {
        const auto& p = j.at("sweep");
        if (p.contains("N")) cfg.sweep_N = p.at("N").get<std::vector<int>>();
        cfg.sweep_cells_per_sub = p.value("cells_per_sub", cfg.sweep_cells_per_sub);
        cfg.sweep_csv = p.value("csv", std::string());
    }
    return cfg;
}

json RunConfig::to_json() const {
    json j;
    j["problem"] = {{"kind", ProblemSpec::kind_to_string(problem.kind)},
                    {"gx", problem.gx},
                    {"gy", problem.gy},
                    {"n", problem.n},
                    {"m", problem.m},
                    {"seed", problem.seed},
                    {"c_mode", problem.c_mode == CMode::zero ? "zero" : "diag_eps"},
                    {"c_eps", problem.c_eps},
                    {"kappa_sigma", problem.kappa_sigma},
                    {"mass_coeff", problem.mass_coeff},
                    {"constraint_frac", problem.constraint_frac},
                    {"mac_y_periodic", problem.mac_y_periodic}};
    if (input)
        j["input"] = {{"a", input->a},
                      {"b", input->b},
                      {"c", input->c},
                      {"a_split", input->a_split},
                      {"c_split", input->c_split}};
    j["decomposition"] = {{"N", N}, {"overlap", overlap}};
    j["preconditioner"] = {{"mode", primal_mode_to_string(mode)},
                           {"tau_A", tau_A},
                           {"rho_robin", rho_robin}};
    if (tau_S1 < 0.0)
        j["preconditioner"]["tau_S1"] = "k0";
    else
        j["preconditioner"]["tau_S1"] = tau_S1;
    j["solver"] = {{"tol", solver.tol},
                   {"inner_factor", solver.inner_factor},
                   {"stage_a_factor", solver.stage_a_factor},
                   {"maxit_outer", solver.maxit_outer},
                   {"maxit_inner", solver.maxit_inner},
                   {"flexible", solver.flexible}};
    j["rhs"] = {{"kind", rhs_to_string(rhs)}, {"seed", rhs_seed}};
    j["threads"] = threads;
    j["verify_oracle"] = verify_oracle;
    j["verbose"] = verbose;
    return j;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return from_json(j);
}

namespace {

SaddleSystem load_or_generate(const RunConfig& cfg) {
    if (!cfg.input) return generate(cfg.problem);
    SaddleSystem sys;
    sys.A = read_matrix_market_file(cfg.input->a);
    sys.B = read_matrix_market_file(cfg.input->b);
    if (!cfg.input->c.empty())
        sys.C = read_matrix_market_file(cfg.input->c);
    else
        sys.C = SparseMat(sys.B.rows(), sys.B.rows());
    if (!cfg.input->a_split.empty()) sys.A_split = read_split_file(cfg.input->a_split);
    if (!cfg.input->c_split.empty()) sys.C_split = read_split_file(cfg.input->c_split);
    return sys;
}

} // namespace

void build_pipeline(const RunConfig& cfg, Pipeline& pl, PhaseTimes* times) {
    pl.sys = load_or_generate(cfg);
    pl.sys.validate(cfg.tols);
    auto t0 = std::chrono::steady_clock::now();
    pl.dec = build_decomposition(pl.sys, cfg.N, cfg.overlap, cfg.tols, cfg.threads);
    if (times) times->decompose_s = seconds_since(t0), t0 = std::chrono::steady_clock::now();
    if (cfg.corrupt_dual_pou >= 0 && !pl.dec.subs.empty()) {
        // test hook: damage one dual weight to make the PoU checks fail
        for (auto& s : pl.dec.subs)
            if (!s.dual.empty() && s.dual[0] <= cfg.corrupt_dual_pou &&
                cfg.corrupt_dual_pou <= s.dual.back()) {
                for (int k = 0; k < s.nd(); ++k)
                    if (s.dual[k] == cfg.corrupt_dual_pou) {
                        s.Dt[k] *= 0.5;
                        break;
                    }
                break;
            }
    }
    pl.MA = build_primal_precond(pl.sys, pl.dec, cfg.mode, cfg.tau_A, cfg.rho_robin, cfg.tols,
                                 cfg.threads);
    if (times) times->primal_s = seconds_since(t0), t0 = std::chrono::steady_clock::now();
    pl.tau_S1_resolved = cfg.tau_S1 < 0.0 ? double(std::max(pl.dec.k0, 1)) : cfg.tau_S1;
    pl.dual = build_dual_precond(pl.sys, pl.dec, pl.MA, pl.tau_S1_resolved, cfg.tols,
                                 cfg.threads);
    if (times) times->dual_s = seconds_since(t0), t0 = std::chrono::steady_clock::now();
    pl.ma0 = assemble_MA0(pl.dual);
    if (times) times->ma0_s = seconds_since(t0);
}

namespace {

json summary_core(const RunConfig& cfg, const Pipeline& pl) {
    json dims{{"n", pl.sys.n()},
              {"m", pl.sys.m()},
              {"N", pl.dec.N},
              {"k0", pl.dec.k0},
              {"dim_V0", pl.MA.coarse.dim()},
              {"dim_W0", pl.dual.coarse.dim()},
              {"tau_A", cfg.tau_A},
              {"tau_S1", pl.tau_S1_resolved},
              {"alpha", std::max(1.0, pl.dec.k0 / std::max(pl.tau_S1_resolved, 1e-300))}};
    SparsityReport rep = check_sparsity_assumptions(pl.dual);
    json assumptions{{"max_nonzero_cols_bz", rep.max_bz},
                     {"max_nonzero_cols_s1z", rep.max_s1z},
                     {"counts_bz", rep.counts_bz},
                     {"counts_s1z", rep.counts_s1z}};
    json out{{"config", cfg.to_json()}, {"dims", dims}, {"assumptions", assumptions}};
    if (cfg.verbose) {
        out["eigs_S1"] = pl.dual.coarse.eig_finite;
        out["eigs_S1_infinite"] = pl.dual.coarse.eig_infinite;
        out["eigs_A"] = pl.MA.coarse.eig_finite;
        out["coarse_dropped"] = {{"A", pl.MA.coarse.dropped}, {"S1", pl.dual.coarse.dropped}};
    }
    return out;
}

void write_residual_csv(const std::string& path, const SaddleSolution& sol) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "stage,iteration,relres\n";
    auto dump = [&](const char* name, const PcgReport& r) {
        for (std::size_t k = 0; k < r.residual_history.size(); ++k)
            f << name << ',' << k << ',' << std::scientific << r.residual_history[k] << '\n';
    };
    dump("stage1", sol.stage1);
    dump("stage3", sol.stage3);
    dump("stage5", sol.stage5);
}

} // namespace

RunSummary run(const RunConfig& cfg) {
    RunSummary out;
    auto t0 = std::chrono::steady_clock::now();
    Pipeline pl;
    PhaseTimes phases;
    build_pipeline(cfg, pl, &phases);
    const double t_setup = seconds_since(t0);

    Rng rng(cfg.rhs_seed);
    Vector fu = make_rhs(cfg.rhs, pl.sys.n(), rng);
    Vector fp = make_rhs(cfg.rhs, pl.sys.m(), rng);

    t0 = std::chrono::steady_clock::now();
    SaddleSolution sol = solve_saddle(pl.sys, pl.MA, pl.dual, pl.ma0, fu, fp, cfg.solver);
    const double t_solve = seconds_since(t0);

    out.j = summary_core(cfg, pl);
    out.j["stages"] = {{"stage1", pcg_report_json(sol.stage1)},
                       {"stage3", pcg_report_json(sol.stage3)},
                       {"stage5", pcg_report_json(sol.stage5)}};
    out.j["total_A_solves"] = sol.total_A_solves;
    out.j["block_relres"] = sol.block_relres;
    out.j["timings"] = {{"setup_s", t_setup},
                        {"decompose_s", phases.decompose_s},
                        {"primal_s", phases.primal_s},
                        {"dual_s", phases.dual_s},
                        {"ma0_s", phases.ma0_s},
                        {"solve_s", t_solve}};

    if (cfg.verify_oracle) {
        if (pl.sys.n() + pl.sys.m() > cfg.tols.oracle_cap)
            throw ConfigError("verify_oracle: problem exceeds the dense oracle cap");
        auto [lo_a, hi_a] = spectrum_MA(pl.sys, pl.MA, cfg.tols.oracle_cap);
        json spectra{{"MA_inv_A", {lo_a, hi_a}}};
        if (pl.sys.m() > 0) {
            Matrix S1 = oracle::assemble([&](const Vector& v) { return apply_S1(pl.dual, v); },
                                         pl.sys.m(), cfg.tols.oracle_cap);
            Matrix K = oracle::assemble(
                [&](const Vector& v) { return apply_MS1_inv(pl.dual, v); }, pl.sys.m(),
                cfg.tols.oracle_cap);
            auto [lo1, hi1] = oracle::precond_spectrum(K, S1);
            spectra["MS1_inv_S1"] = {lo1, hi1};
            DenseOracle o = DenseOracle::from(pl.sys, cfg.tols.oracle_cap);
            Matrix S = o.schur();
            Matrix MS = oracle::assemble([&](const Vector& v) { return apply_MS(pl.dual, v); },
                                         pl.sys.m(), cfg.tols.oracle_cap);
            auto [lo2, hi2] = oracle::gen_eig_extremes(S, MS);
            spectra["S_vs_MS"] = {lo2, hi2};
            auto [lo4, hi4] = oracle::gen_eig_extremes(S, K.inverse());
            spectra["S_vs_MS1"] = {lo4, hi4};
            Matrix NS = oracle::assemble(
                            [&](const Vector& v) { return apply_S0(pl.dual, v); }, pl.sys.m(),
                            cfg.tols.oracle_cap) +
                        K.inverse();
            auto [lo3, hi3] = oracle::gen_eig_extremes(MS, Matrix(0.5 * (NS + NS.transpose())));
            spectra["MS_vs_NS"] = {lo3, hi3};
        }
        out.j["spectra"] = spectra;
    }

    if (!cfg.residuals_csv.empty()) write_residual_csv(cfg.residuals_csv, sol);
    if (!cfg.summary_path.empty()) {
        std::ofstream f(cfg.summary_path);
        if (!f) throw IoError("cannot open '" + cfg.summary_path + "' for writing");
        f << out.str() << '\n';
    }
    return out;
}

int verify(const RunConfig& cfg) {
    Pipeline pl;
    build_pipeline(cfg, pl);
    std::vector<CheckResult> results = checks::run_all(pl);
    bool all = true;
    std::printf("%-32s %-6s %s\n", "check", "status", "detail");
    for (const auto& r : results) {
        all = all && r.pass;
        std::printf("%-32s %-6s %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.detail.c_str());
    }
    return all ? 0 : 1;
}

RunSummary sweep(const RunConfig& cfg) {
    if (cfg.problem.kind != ProblemKind::mixed_darcy_mac)
        throw ConfigError("sweep: only the mixed_darcy_mac generator supports fixed "
                          "subdomain-size scaling");
    RunSummary out;
    out.j["rows"] = json::array();
    std::string csv = "N,n,m,k0,dim_V0,dim_W0,step3_iters,step3_relres,max_cols_bz,max_cols_"
                      "s1z,block_relres,setup_s,solve_s\n";
    // strip-shaped domains: the subdomain chain keeps k0 (and the interior
    // subdomain geometry) identical for every N
    const int gx = cfg.problem.gx;
    if (cfg.sweep_cells_per_sub % gx != 0)
        throw ConfigError("sweep: cells_per_sub must be a multiple of the strip width gx");
    const int rows_per_sub = cfg.sweep_cells_per_sub / gx;
    for (int N : cfg.sweep_N) {
        RunConfig c = cfg;
        c.N = N;
        c.problem.gx = gx;
        c.problem.gy = rows_per_sub * N;
        c.sweep_csv.clear();
        RunSummary r = run(c);
        json row{{"N", N},
                 {"grid_x", gx},
                 {"grid_y", rows_per_sub * N},
                 {"n", r.j["dims"]["n"]},
                 {"m", r.j["dims"]["m"]},
                 {"k0", r.j["dims"]["k0"]},
                 {"dim_V0", r.j["dims"]["dim_V0"]},
                 {"dim_W0", r.j["dims"]["dim_W0"]},
                 {"step3_iterations", r.j["stages"]["stage3"]["iterations"]},
                 {"max_nonzero_cols_bz", r.j["assumptions"]["max_nonzero_cols_bz"]},
                 {"max_nonzero_cols_s1z", r.j["assumptions"]["max_nonzero_cols_s1z"]},
                 {"block_relres", r.j["block_relres"]},
                 {"timings", r.j["timings"]}};
        out.j["rows"].push_back(row);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%d,%d,%.3e,%d,%d,%.3e,%.2f,%.2f\n", N,
                      int(r.j["dims"]["n"]), int(r.j["dims"]["m"]), int(r.j["dims"]["k0"]),
                      int(r.j["dims"]["dim_V0"]), int(r.j["dims"]["dim_W0"]),
                      int(r.j["stages"]["stage3"]["iterations"]),
                      double(r.j["stages"]["stage3"]["final_relres"]),
                      int(r.j["assumptions"]["max_nonzero_cols_bz"]),
                      int(r.j["assumptions"]["max_nonzero_cols_s1z"]),
                      double(r.j["block_relres"]), double(r.j["timings"]["setup_s"]),
                      double(r.j["timings"]["solve_s"]));
        csv += buf;
    }
    if (!cfg.sweep_csv.empty()) {
        std::ofstream f(cfg.sweep_csv);
        if (!f) throw IoError("cannot open '" + cfg.sweep_csv + "' for writing");
        f << csv;
    }
    out.j["csv"] = csv;
    if (!cfg.summary_path.empty()) {
        std::ofstream f(cfg.summary_path);
        f << out.str() << '\n';
    }
    return out;
}

void generate_files(const RunConfig& cfg, const std::string& prefix) {
    SaddleSystem sys = generate(cfg.problem);
    sys.validate(cfg.tols);
    write_matrix_market_file(prefix + "_A.mtx", sys.A);
    write_matrix_market_file(prefix + "_B.mtx", sys.B);
    write_matrix_market_file(prefix + "_C.mtx", sys.C);
    write_split_file(prefix + "_A.split", sys.A_split);
    if (sys.C_split) write_split_file(prefix + "_C.split", *sys.C_split);
    std::ofstream f(prefix + "_spec.json");
    f << RunConfig(cfg).to_json()["problem"].dump(2) << '\n';
}

RunSummary spectrum(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.verify_oracle = true;
    c.rhs = RhsKind::zero;  // spectra only; the solve is trivial
    RunSummary r = run(c);
    RunSummary out;
    out.j = {{"dims", r.j["dims"]}, {"spectra", r.j["spectra"]}};
    if (!cfg.summary_path.empty()) {
        std::ofstream f(cfg.summary_path);
        f << out.str() << '\n';
    }
    return out;
}

} // namespace sdd
