#include "sdd/schwarz.hpp"

#include "sdd/problems.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace sdd;
using namespace sdd::test;

namespace {

SaddleSystem poisson(int g, double sigma = 0.0, std::uint64_t seed = 1) {
    ProblemSpec spec;
    spec.kind = ProblemKind::poisson2d_constrained;
    spec.gx = spec.gy = g;
    spec.kappa_sigma = sigma;
    spec.seed = seed;
    return generate(spec);
}

int max_primal_neighbors(const Decomposition& dec) {
    int worst = 0;
    for (int i = 0; i < dec.N; ++i) {
        std::vector<char> in(dec.n, 0);
        for (int p : dec.subs[i].primal) in[p] = 1;
        int cnt = 0;
        for (int j = 0; j < dec.N; ++j) {
            bool hit = false;
            for (int p : dec.subs[j].primal)
                if (in[p]) {
                    hit = true;
                    break;
                }
            if (hit) ++cnt;
        }
        worst = std::max(worst, cnt);
    }
    return worst;
}

} // namespace

TEST_CASE("geneo_A selection limits") {
    SaddleSystem sys = poisson(10);
    SUBCASE("tau_A -> 0 disables the coarse space") {
        Decomposition dec = build_decomposition(sys, 4, 2);
        CoarseSpaceA cs = build_geneo_A(sys, dec, 0.0);
        CHECK(cs.dim() == 0);
    }
    SUBCASE("single domain: pencil (A, A), nothing above 1/tau for tau < 1") {
        Decomposition dec = build_decomposition(sys, 1, 1);
        CoarseSpaceA cs = build_geneo_A(sys, dec, 0.5);
        CHECK(cs.dim() == 0);
        REQUIRE_FALSE(cs.eig_finite[0].empty());
        for (double l : cs.eig_finite[0]) CHECK(l == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(cs.eig_infinite[0] == 0);
    }
}

TEST_CASE("geneo_A on a 24x24 Laplacian: dimension band and spectral gain") {
    SaddleSystem sys = poisson(24);
    Decomposition dec = build_decomposition(sys, 4, 2);
    PrimalPrecond one = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.0);
    PrimalPrecond two = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.6);
    CHECK(two.coarse.dim() >= dec.N);
    CHECK(two.coarse.dim() <= 20 * dec.N);
    auto [lo1, hi1] = spectrum_MA(sys, one);
    auto [lo2, hi2] = spectrum_MA(sys, two);
    CHECK(lo2 > lo1);
    // additive bound: local color count plus one for the coarse term
    const double bound = max_primal_neighbors(dec) + 1;
    CHECK(hi1 <= bound + 1e-8);
    CHECK(hi2 <= bound + 1e-8);
}

TEST_CASE("coarse columns are extensions by zero of subdomain-local vectors") {
    SaddleSystem sys = poisson(16, 1.0, 3);
    Decomposition dec = build_decomposition(sys, 4, 2);
    CoarseSpaceA cs = build_geneo_A(sys, dec, 2.0);
    REQUIRE(cs.dim() > 0);
    SparseMat Zt = cs.Z.transpose();
    for (int c = 0; c < cs.dim(); ++c) {
        auto [ci, cv] = Zt.row(c);
        bool contained = false;
        for (const auto& s : dec.subs) {
            std::vector<char> in(dec.n, 0);
            for (int p : s.primal) in[p] = 1;
            bool all = true;
            for (std::size_t k = 0; k < ci.size(); ++k)
                if (!in[ci[k]]) {
                    all = false;
                    break;
                }
            if (all) {
                contained = true;
                break;
            }
        }
        CHECK(contained);
    }
}

TEST_CASE("apply is the assembled two-level operator") {
    SaddleSystem sys = poisson(16);
    Decomposition dec = build_decomposition(sys, 4, 2);
    PrimalPrecond P = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.6);

    CHECK(P.apply(Vector::Zero(sys.n())).norm() == 0.0);

    // independent dense assembly of Eq.-style formula
    Matrix M = Matrix::Zero(sys.n(), sys.n());
    for (const auto& s : dec.subs) {
        Matrix Ai_inv = s.A_loc.to_dense().inverse();
        for (int a = 0; a < s.np(); ++a)
            for (int b = 0; b < s.np(); ++b) M(s.primal[a], s.primal[b]) += Ai_inv(a, b);
    }
    if (P.coarse.dim() > 0) {
        Matrix Z = P.coarse.Z.to_dense();
        M += Z * P.coarse.gal.inverse() * Z.transpose();
    }
    Matrix K = oracle::assemble([&](const Vector& v) { return P.apply(v); }, sys.n());
    CHECK((K - M).cwiseAbs().maxCoeff() <= 1e-10 * M.cwiseAbs().maxCoeff());
}

TEST_CASE("single-domain preconditioner is the exact inverse") {
    SaddleSystem sys = poisson(8);
    Decomposition dec = build_decomposition(sys, 1, 0);
    PrimalPrecond P = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.0);
    Rng rng(4);
    Vector r = random_vector(sys.n(), rng);
    Vector x = P.apply(r);
    CHECK((sys.A.apply(x) - r).norm() <= 1e-10 * r.norm());
    auto [lo, hi] = spectrum_MA(sys, P);
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("operator symmetry and linearity probes") {
    SaddleSystem sys = poisson(12, 0.8, 5);
    Decomposition dec = build_decomposition(sys, 3, 1);
    for (PrimalMode mode : {PrimalMode::ASM2, PrimalMode::SORAS}) {
        PrimalPrecond P = build_primal_precond(sys, dec, mode, 1.5, 1.0);
        Rng rng(6);
        for (int t = 0; t < 5; ++t) {
            Vector x = random_vector(sys.n(), rng), y = random_vector(sys.n(), rng);
            CHECK(std::abs(P.apply(x).dot(y) - x.dot(P.apply(y))) <=
                  1e-10 * x.norm() * y.norm() * P.apply(x).norm() / std::max(x.norm(), 1e-30));
            Vector lin = P.apply(x + 2.0 * y) - P.apply(x) - 2.0 * P.apply(y);
            CHECK(lin.norm() <= 1e-10 * (P.apply(x).norm() + P.apply(y).norm()));
            CHECK(x.dot(P.apply(x)) > 0.0);
        }
    }
}

TEST_CASE("geneo enrichment never hurts the smallest eigenvalue") {
    SaddleSystem sys = poisson(16, 1.2, 7);
    Decomposition dec = build_decomposition(sys, 4, 2);
    double prev = 0.0;
    for (double tau : {0.0, 0.5, 1.0, 4.0}) {
        PrimalPrecond P = build_primal_precond(sys, dec, PrimalMode::ASM2, tau);
        auto [lo, hi] = spectrum_MA(sys, P);
        CHECK(lo >= prev - 1e-9);
        prev = lo;
    }
}

TEST_CASE("soras variant solves and differs from asm2") {
    SaddleSystem sys = poisson(12);
    Decomposition dec = build_decomposition(sys, 3, 1);
    PrimalPrecond A2 = build_primal_precond(sys, dec, PrimalMode::ASM2, 0.0);
    PrimalPrecond SR = build_primal_precond(sys, dec, PrimalMode::SORAS, 0.0, 1.0);
    Rng rng(8);
    Vector r = random_vector(sys.n(), rng);
    CHECK((A2.apply(r) - SR.apply(r)).norm() > 1e-8 * r.norm());
    auto [lo, hi] = spectrum_MA(sys, SR);
    CHECK(lo > 0.0);
    CHECK(std::isfinite(hi));
    CHECK(primal_mode_from_string("soras") == PrimalMode::SORAS);
    CHECK(primal_mode_to_string(PrimalMode::ASM2) == "asm2");
    CHECK_THROWS_AS(primal_mode_from_string("bnn"), ConfigError);
}
