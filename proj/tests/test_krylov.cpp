#include "sdd/saddle_solver.hpp"

#include "sdd/problems.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace sdd;
using namespace sdd::test;

namespace {

LinOp sparse_op(const SparseMat& M) {
    return [&M](const Vector& v) { return M.apply(v); };
}

LinOp ident() {
    return [](const Vector& v) { return v; };
}

struct Pipeline {
    SaddleSystem sys;
    Decomposition dec;
    PrimalPrecond MA;
    DualPrecondState dual;
    MA0System ma0;
};

void init(Pipeline& f, ProblemKind kind, int g, int N, double tau_A, double tau_S1,
          CMode cm = CMode::zero) {
    ProblemSpec spec;
    spec.kind = kind;
    spec.gx = spec.gy = g;
    spec.n = 150;
    spec.m = 50;
    spec.c_mode = cm;
    f.sys = generate(spec);
    f.dec = build_decomposition(f.sys, N, 2);
    f.MA = build_primal_precond(f.sys, f.dec, PrimalMode::ASM2, tau_A);
    f.dual = build_dual_precond(f.sys, f.dec, f.MA, tau_S1);
    f.ma0 = assemble_MA0(f.dual);
}

} // namespace

TEST_CASE("pcg trivial cases") {
    Vector b(3);
    b << 1, 2, 3;
    auto [x, rep] = pcg(ident(), ident(), b, {});
    CHECK(rep.iterations == 1);
    CHECK((x - b).norm() <= 1e-12);

    auto [x0, rep0] = pcg(ident(), ident(), Vector::Zero(4), {});
    CHECK(x0.norm() == 0.0);
    CHECK(rep0.iterations == 0);
    CHECK(rep0.converged);
}

TEST_CASE("pcg breakdown reports indefiniteness") {
    Vector b = Vector::Ones(3);
    CHECK_THROWS_AS(pcg([](const Vector& v) { return Vector(-v); }, ident(), b, {}),
                    NumericalError);
}

TEST_CASE("pcg solves and the Lanczos estimate tracks the true condition number") {
    Rng rng(2);
    Matrix S = random_spd(60, rng, 0.2);
    SparseMat A = SparseMat::from_dense(S);
    Vector b = random_vector(60, rng);
    PcgOptions opts;
    opts.tol = 1e-10;
    auto [x, rep] = pcg(sparse_op(A), ident(), b, opts);
    CHECK(rep.converged);
    CHECK((S * x - b).norm() <= 1e-8 * b.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    CHECK(rep.lanczos_cond_estimate <= cond * 1.05);
    CHECK(rep.lanczos_cond_estimate >= 1.0);
}

TEST_CASE("two-level beats one-level on the 32x32 Laplacian") {
    ProblemSpec spec;
    spec.kind = ProblemKind::poisson2d_constrained;
    spec.gx = spec.gy = 32;
    SaddleSystem sys = generate(spec);
    Decomposition dec = build_decomposition(sys, 4, 2);
    PrimalPrecond one = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.0);
    PrimalPrecond two = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.6);
    REQUIRE(two.coarse.dim() > 0);
    Rng rng(3);
    Vector b = random_vector(sys.n(), rng);
    PcgOptions opts;
    opts.tol = 1e-8;
    auto [x1, r1] = pcg(sparse_op(sys.A), [&](const Vector& v) { return one.apply(v); }, b, opts);
    auto [x2, r2] = pcg(sparse_op(sys.A), [&](const Vector& v) { return two.apply(v); }, b, opts);
    CHECK(r1.converged);
    CHECK(r2.converged);
    CHECK(r2.iterations < r1.iterations);
}

TEST_CASE("residual history and energy error behave on a preconditioned solve") {
    ProblemSpec spec;
    spec.kind = ProblemKind::poisson2d_constrained;
    spec.gx = spec.gy = 16;
    SaddleSystem sys = generate(spec);
    Decomposition dec = build_decomposition(sys, 4, 2);
    PrimalPrecond two = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.6);
    Rng rng(4);
    Vector b = random_vector(sys.n(), rng);
    Matrix Ad = sys.A.to_dense();
    Vector xstar = Ad.ldlt().solve(b);

    PcgOptions opts;
    opts.tol = 1e-10;
    double prev_energy = std::numeric_limits<double>::infinity();
    Vector x;
    // run with growing iteration caps: energy error must decrease monotonically
    for (int cap = 1; cap <= 12; ++cap) {
        PcgOptions o2 = opts;
        o2.maxit = cap;
        auto [xi, rep] = pcg(sparse_op(sys.A), [&](const Vector& v) { return two.apply(v); }, b, o2);
        Vector e = xi - xstar;
        const double energy = e.dot(Ad * e);
        CHECK(energy <= prev_energy * (1.0 + 1e-10));
        prev_energy = energy;
        x = xi;
    }
    auto [xf, rep] = pcg(sparse_op(sys.A), [&](const Vector& v) { return two.apply(v); }, b, opts);
    for (std::size_t k = 1; k < rep.residual_history.size(); ++k)
        CHECK(rep.residual_history[k] <= rep.residual_history[k - 1] * (1.0 + 1e-9));
    CHECK(rep.final_relres <= opts.tol);
}

TEST_CASE("flexible cg reduces to plain cg under an exact preconditioner") {
    Rng rng(5);
    Matrix S = random_spd(40, rng, 0.3);
    SparseMat A = SparseMat::from_dense(S);
    Matrix P = random_spd(40, rng, 0.5);
    Vector b = random_vector(40, rng);
    auto prec = [&](const Vector& v) { return Vector(P * v); };
    PcgOptions plain, flex;
    plain.tol = flex.tol = 1e-9;
    flex.flexible = true;
    auto [x1, r1] = pcg(sparse_op(A), prec, b, plain);
    auto [x2, r2] = pcg(sparse_op(A), prec, b, flex);
    CHECK(r1.iterations == r2.iterations);
    CHECK((x1 - x2).norm() <= 1e-10 * x1.norm());

    auto [xz, rz] = pcg(sparse_op(A), prec, Vector::Zero(40), flex);
    CHECK(xz.norm() == 0.0);
}

TEST_CASE("flexible cg tolerates inexact inner solves") {
    Pipeline f;
    init(f, ProblemKind::mixed_darcy_mac, 8, 4, 0.3, 2.0);
    Rng rng(6);
    Vector gp = random_vector(f.sys.m(), rng);
    auto run = [&](double inner_tol) {
        PcgOptions o;
        o.tol = 1e-8;
        o.flexible = true;
        o.maxit = 300;
        return pcg([&](const Vector& v) { return apply_S(f.sys, f.MA, v, inner_tol); },
                   [&](const Vector& v) { return apply_NS_inv(f.dual, f.ma0, v); }, gp, o);
    };
    auto [x_tight, r_tight] = run(1e-12);
    auto [x_loose, r_loose] = run(1e-6);
    CHECK(r_tight.converged);
    CHECK(r_loose.converged);
    CHECK(r_loose.iterations <= r_tight.iterations + 3);
}

TEST_CASE("solve_saddle: zero data, zero work") {
    Pipeline f;
    init(f, ProblemKind::mixed_darcy_mac, 8, 4, 0.3, 2.0);
    SaddleSolution sol = solve_saddle(f.sys, f.MA, f.dual, f.ma0, Vector::Zero(f.sys.n()),
                                      Vector::Zero(f.sys.m()));
    CHECK(sol.U.norm() == 0.0);
    CHECK(sol.P.norm() == 0.0);
    CHECK(sol.stage1.iterations == 0);
    CHECK(sol.stage3.iterations == 0);
    CHECK(sol.block_relres == 0.0);
}

TEST_CASE("solve_saddle without constraints is one SPD solve") {
    ProblemSpec spec;
    spec.kind = ProblemKind::poisson2d_constrained;
    spec.gx = spec.gy = 10;
    SaddleSystem sys = generate(spec);
    sys.B = SparseMat(0, sys.n());
    sys.C = SparseMat(0, 0);
    Decomposition dec = build_decomposition(sys, 2, 1);
    PrimalPrecond MA = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.5);
    MA.sys = &sys;
    MA.dec = &dec;
    DualPrecondState dual = build_dual_precond(sys, dec, MA, 0.0);
    MA0System ma0 = assemble_MA0(dual);
    Rng rng(7);
    Vector fu = random_vector(sys.n(), rng);
    SaddleSolution sol = solve_saddle(sys, MA, dual, ma0, fu, Vector(0));
    CHECK(sol.P.size() == 0);
    CHECK(sol.stage3.iterations == 0);
    CHECK((sys.A.apply(sol.U) - fu).norm() <= 1e-8 * fu.norm());
    CHECK(sol.total_A_solves == 2);
}

TEST_CASE("solve_saddle matches the dense direct solve") {
    for (ProblemKind kind : {ProblemKind::mixed_darcy_mac, ProblemKind::poisson2d_constrained,
                             ProblemKind::random_spd_constrained}) {
        Pipeline f;
    init(f, kind, 10, 4, 0.3, 2.0,
                          kind == ProblemKind::mixed_darcy_mac ? CMode::diag_eps : CMode::zero);
        DenseOracle o = DenseOracle::from(f.sys);
        Rng rng(8);
        Vector fu = random_vector(f.sys.n(), rng), fp = random_vector(f.sys.m(), rng);
        SaddleSolveOptions opts;
        opts.tol = 1e-9;
        SaddleSolution sol = solve_saddle(f.sys, f.MA, f.dual, f.ma0, fu, fp, opts);
        CHECK(sol.block_relres <= opts.tol);
        Vector z = o.solve_saddle(fu, fp);
        Vector zg(f.sys.n() + f.sys.m());
        zg.head(f.sys.n()) = sol.U;
        zg.tail(f.sys.m()) = sol.P;
        CAPTURE(static_cast<int>(kind));
        CHECK((zg - z).norm() <= 1e-6 * z.norm());
        CHECK(sol.total_A_solves >= 2 + sol.stage3.iterations);
    }
}

TEST_CASE("stage failures carry the stage name") {
    Pipeline f;
    init(f, ProblemKind::mixed_darcy_mac, 8, 4, 0.0, 0.0);
    SaddleSolveOptions opts;
    opts.maxit_outer = 1;
    opts.tol = 1e-12;
    Rng rng(9);
    Vector fu = random_vector(f.sys.n(), rng), fp = random_vector(f.sys.m(), rng);
    try {
        solve_saddle(f.sys, f.MA, f.dual, f.ma0, fu, fp, opts);
        FAIL("expected a staged NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("step 3") != std::string::npos);
    }
}

TEST_CASE("step-3 iterations are consistent with cg convergence theory") {
    Pipeline f;
    init(f, ProblemKind::mixed_darcy_mac, 10, 4, 0.3, 2.0, CMode::diag_eps);
    Rng rng(10);
    Vector fu = random_vector(f.sys.n(), rng), fp = random_vector(f.sys.m(), rng);
    SaddleSolveOptions opts;
    opts.tol = 1e-8;
    SaddleSolution sol = solve_saddle(f.sys, f.MA, f.dual, f.ma0, fu, fp, opts);
    const double kappa = sol.stage3.lanczos_cond_estimate;
    REQUIRE(kappa >= 1.0);
    const double schur_tol = opts.schur_factor * opts.tol;
    const double predicted = 0.5 * std::sqrt(kappa) * std::log(2.0 / schur_tol);
    // measured condition number explains the count within a factor of two
    CHECK(sol.stage3.iterations <= 2.0 * std::ceil(predicted) + 2.0);
}
