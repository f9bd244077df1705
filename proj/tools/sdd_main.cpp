// Batch driver for the saddle point DD solver: load or generate a problem,
// build the preconditioner chain, run the block solve or the check suites,
// and emit machine-readable summaries.

#include "sdd/run.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// exit codes: 0 ok, 1 check failure, 2 config error, 3 numerical failure
constexpr int kOk = 0, kCheckFail = 1, kConfigErr = 2, kNumericalErr = 3;

struct Cli {
    std::string config_path;
    std::string kind, c_mode, mode, tau_s1;
    int gx = -1, gy = -1, n = -1, m = -1, N = -1, overlap = -1, threads = -1;
    long long seed = -1, rhs_seed = -1;
    double c_eps = -1, tau_a = std::numeric_limits<double>::quiet_NaN();
    double rho_robin = std::numeric_limits<double>::quiet_NaN();
    double tol = -1, kappa_sigma = std::numeric_limits<double>::quiet_NaN();
    std::string summary, residuals_csv, sweep_csv, prefix = "problem";
    std::vector<int> sweep_n;
    int cells_per_sub = -1;
    bool verify_oracle = false, verbose = false, mac_y_periodic = false;
    int corrupt_dual_pou = -1;
};

void add_common(CLI::App* cmd, Cli& o) {
    cmd->add_option("--config", o.config_path, "JSON config file")->envname("SDD_CONFIG");
    cmd->add_option("--kind", o.kind,
                    "problem kind (poisson2d_constrained|mixed_darcy_mac|random_spd_constrained)");
    cmd->add_option("--gx", o.gx, "grid size x");
    cmd->add_option("--gy", o.gy, "grid size y");
    cmd->add_option("--n", o.n, "primal size (random kind)");
    cmd->add_option("--m", o.m, "constraint count (random kind)");
    cmd->add_option("--seed", o.seed, "problem seed");
    cmd->add_option("--c-mode", o.c_mode, "C block mode (zero|diag_eps)");
    cmd->add_option("--c-eps", o.c_eps, "diagonal C value");
    cmd->add_option("--kappa-sigma", o.kappa_sigma, "heterogeneity strength");
    cmd->add_flag("--mac-y-periodic", o.mac_y_periodic, "wrap the MAC grid in y");
    cmd->add_option("--N", o.N, "subdomain count")->envname("SDD_N");
    cmd->add_option("--overlap", o.overlap, "overlap layers")->envname("SDD_OVERLAP");
    cmd->add_option("--mode", o.mode, "primal mode (asm2|soras)")->envname("SDD_MODE");
    cmd->add_option("--tau-a", o.tau_a, "primal coarse threshold parameter")
        ->envname("SDD_TAU_A");
    cmd->add_option("--tau-s1", o.tau_s1, "dual coarse threshold parameter (number, k0, or 0)")
        ->envname("SDD_TAU_S1");
    cmd->add_option("--rho-robin", o.rho_robin, "SORAS Robin penalty");
    cmd->add_option("--tol", o.tol, "target block residual")->envname("SDD_TOL");
    cmd->add_option("--threads", o.threads, "max concurrent subdomain work (1 = serial)")
        ->envname("SDD_THREADS");
    cmd->add_option("--rhs-seed", o.rhs_seed, "right-hand side seed");
    cmd->add_option("--out", o.summary, "write the JSON summary here");
    cmd->add_flag("--verbose", o.verbose, "include per-subdomain eigenvalue lists");
}

sdd::RunConfig make_config(const Cli& o) {
    sdd::RunConfig cfg;
    if (!o.config_path.empty()) cfg = sdd::RunConfig::load(o.config_path);
    if (!o.kind.empty()) cfg.problem.kind = sdd::ProblemSpec::kind_from_string(o.kind);
    if (o.gx > 0) cfg.problem.gx = o.gx;
    if (o.gy > 0) cfg.problem.gy = o.gy;
    if (o.n > 0) cfg.problem.n = o.n;
    if (o.m > 0) cfg.problem.m = o.m;
    if (o.seed >= 0) cfg.problem.seed = static_cast<std::uint64_t>(o.seed);
    if (!o.c_mode.empty())
        cfg.problem.c_mode = (o.c_mode == "zero") ? sdd::CMode::zero : sdd::CMode::diag_eps;
    if (o.c_eps >= 0) cfg.problem.c_eps = o.c_eps;
    if (!std::isnan(o.kappa_sigma)) cfg.problem.kappa_sigma = o.kappa_sigma;
    cfg.problem.mac_y_periodic = cfg.problem.mac_y_periodic || o.mac_y_periodic;
    if (o.N > 0) cfg.N = o.N;
    if (o.overlap >= 0) cfg.overlap = o.overlap;
    if (!o.mode.empty()) cfg.mode = sdd::primal_mode_from_string(o.mode);
    if (!std::isnan(o.tau_a)) cfg.tau_A = o.tau_a;
    if (!o.tau_s1.empty()) cfg.tau_S1 = (o.tau_s1 == "k0") ? -1.0 : std::stod(o.tau_s1);
    if (!std::isnan(o.rho_robin)) cfg.rho_robin = o.rho_robin;
    if (o.tol > 0) cfg.solver.tol = o.tol;
    if (o.threads > 0) cfg.threads = o.threads;
    if (o.rhs_seed >= 0) cfg.rhs_seed = static_cast<std::uint64_t>(o.rhs_seed);
    if (!o.summary.empty()) cfg.summary_path = o.summary;
    if (!o.residuals_csv.empty()) cfg.residuals_csv = o.residuals_csv;
    if (!o.sweep_n.empty()) cfg.sweep_N = o.sweep_n;
    if (o.cells_per_sub > 0) cfg.sweep_cells_per_sub = o.cells_per_sub;
    if (!o.sweep_csv.empty()) cfg.sweep_csv = o.sweep_csv;
    cfg.verify_oracle = cfg.verify_oracle || o.verify_oracle;
    cfg.verbose = cfg.verbose || o.verbose;
    cfg.corrupt_dual_pou = o.corrupt_dual_pou;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive domain decomposition solver for sparse saddle point systems"};
    app.require_subcommand(1);
    Cli o;

    CLI::App* c_run = app.add_subcommand("run", "build the preconditioners and solve");
    add_common(c_run, o);
    c_run->add_flag("--verify-oracle", o.verify_oracle,
                    "also compute dense spectral diagnostics");
    c_run->add_option("--residuals-csv", o.residuals_csv, "write residual histories as CSV");

    CLI::App* c_verify = app.add_subcommand("verify", "run every invariant check suite");
    add_common(c_verify, o);
    c_verify->add_option("--corrupt-dual-pou", o.corrupt_dual_pou,
                         "test hook: damage the dual weight of this dof");

    CLI::App* c_sweep = app.add_subcommand("sweep", "weak-scaling sweep at fixed subdomain size");
    add_common(c_sweep, o);
    c_sweep->add_option("--sweep-n", o.sweep_n, "subdomain counts");
    c_sweep->add_option("--cells-per-sub", o.cells_per_sub, "cells per subdomain");
    c_sweep->add_option("--sweep-csv", o.sweep_csv, "write one CSV row per N");

    CLI::App* c_gen = app.add_subcommand("gen", "export the configured problem to files");
    add_common(c_gen, o);
    c_gen->add_option("--prefix", o.prefix, "output path prefix");

    CLI::App* c_spec = app.add_subcommand("spectrum", "dense pencil extremes of the operators");
    add_common(c_spec, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const sdd::RunConfig cfg = make_config(o);
        if (c_run->parsed()) {
            sdd::RunSummary s = sdd::run(cfg);
            std::cout << s.str() << '\n';
            return kOk;
        }
        if (c_verify->parsed()) return sdd::verify(cfg) == 0 ? kOk : kCheckFail;
        if (c_sweep->parsed()) {
            sdd::RunSummary s = sdd::sweep(cfg);
            std::cout << s.str() << '\n';
            return kOk;
        }
        if (c_gen->parsed()) {
            sdd::generate_files(cfg, o.prefix);
            std::cout << "wrote " << o.prefix << "_{A,B,C}.mtx, " << o.prefix
                      << "_A.split and " << o.prefix << "_spec.json\n";
            return kOk;
        }
        if (c_spec->parsed()) {
            sdd::RunSummary s = sdd::spectrum(cfg);
            std::cout << s.str() << '\n';
            return kOk;
        }
    } catch (const sdd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigErr;
    } catch (const sdd::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kConfigErr;
    } catch (const sdd::DimensionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigErr;
    } catch (const sdd::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalErr;
    } catch (const sdd::NotSpdError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalErr;
    } catch (const sdd::AssumptionViolation& e) {
        std::cerr << "assumption violated: " << e.what() << '\n';
        return kNumericalErr;
    }
    return kConfigErr;
}
