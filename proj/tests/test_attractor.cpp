#include <doctest.h>

#include <sstream>

#include "harmonics/attractor.hpp"
#include "harmonics/lp.hpp"
#include "harmonics/presets.hpp"

using namespace harmonics;

TEST_CASE("LP solver: hand-solvable problems") {
    // min -x s.t. x <= 3  -> x = 3
    Eigen::VectorXd c(1), b(1);
    Eigen::MatrixXd A(1, 1);
    c << -1.0;
    A << 1.0;
    b << 3.0;
    LpResult r = solve_lp(c, A, b);
    REQUIRE(r.feasible);
    REQUIRE(r.bounded);
    CHECK(r.x(0) == doctest::Approx(3.0));

    // infeasible: x <= -1 and -x <= -1
    Eigen::MatrixXd A2(2, 1);
    Eigen::VectorXd b2(2);
    A2 << 1.0, -1.0;
    b2 << -1.0, -1.0;
    CHECK_FALSE(solve_lp(c, A2, b2).feasible);

    // unbounded: min -x s.t. -x <= 0 (x can grow) -> pinned to the box
    Eigen::MatrixXd A3(1, 1);
    Eigen::VectorXd b3(1);
    A3 << -1.0;
    b3 << 0.0;
    LpResult r3 = solve_lp(c, A3, b3);
    CHECK(r3.feasible);
    CHECK_FALSE(r3.bounded);

    // 2D vertex: min -x-y s.t. x+y <= 2, x-y <= 0 -> (1,1)
    Eigen::VectorXd c4(2), b4(2);
    Eigen::MatrixXd A4(2, 2);
    c4 << -1.0, -1.0;
    A4 << 1.0, 1.0, 1.0, -1.0;
    b4 << 2.0, 0.0;
    LpResult r4 = solve_lp(c4, A4, b4);
    REQUIRE(r4.feasible);
    CHECK(r4.x(0) == doctest::Approx(1.0));
    CHECK(r4.x(1) == doctest::Approx(1.0));
    CHECK(r4.objective == doctest::Approx(-2.0));
}

TEST_CASE("closed-form designs") {
    const SpectralBasis basis = decompose(build_line_chain(20));

    // order 2: kappa_2 = -(beta+1)/Delta^2, f(Delta)=0 at beta=0, f(0)=1
    const PolynomialDesign d2 = design_closed_form(basis, 5, 2, 0.0);
    CHECK(d2.eval(0.0) == doctest::Approx(1.0));
    CHECK(d2.coeffs[0] == 0.0);
    CHECK(d2.coeffs[1] == doctest::Approx(-1.0 / (d2.delta_a * d2.delta_a)));
    CHECK(d2.eval(d2.delta_a) == doctest::Approx(0.0).epsilon(1e-12));

    // order 4: kappa_2 = -3(beta+1)/Delta^2, kappa_4 = 2(beta+1)/Delta^4
    const double beta = 0.7;
    const PolynomialDesign d4 = design_closed_form(basis, 5, 4, beta);
    const double D2 = d4.delta_a * d4.delta_a;
    CHECK(d4.coeffs[0] == 0.0);
    CHECK(d4.coeffs[2] == 0.0);
    CHECK(d4.coeffs[1] == doctest::Approx(-3.0 * (beta + 1.0) / D2));
    CHECK(d4.coeffs[3] == doctest::Approx(2.0 * (beta + 1.0) / (D2 * D2)));
    CHECK(d4.eval(0.0) == doctest::Approx(1.0));

    // beta = 0 keeps every mapped eigenvalue nonnegative for the
    // quadratic design (the quartic 1 - 3x^2 + 2x^4 dips to -1/8 on part
    // of [-1, 1], so the positivity guarantee is the quadratic's)
    const PolynomialDesign p2 = design_closed_form(basis, 5, 2, 0.0);
    for (int i = 1; i <= 20; ++i)
        if (i != 5)
            CHECK(p2.eval(basis.lambda(i) - basis.lambda(5)) >= -1e-9);

    CHECK_THROWS_AS(design_closed_form(basis, 5, 3, 0.0), ValidationError);
}

TEST_CASE("first-order design for the steady state") {
    const SpectralBasis basis = decompose(build_line_chain(5));
    const PolynomialDesign d = design_first_order_for_pi1(basis);
    CHECK(d.order == 1);
    CHECK(d.coeffs[0] == 1.0);
    CHECK(d.eval(basis.lambda(2) - 1.0) == doctest::Approx(basis.lambda(2)));
    const SpectralBasis b20 = decompose(build_line_chain(20));
    const PolynomialDesign d20 = design_first_order_for_pi1(b20);
    for (int i = 2; i <= 20; ++i)
        CHECK(std::abs(d20.eval(b20.lambda(i) - 1.0)) < 1.0);
}

TEST_CASE("optimized design: hand-solved 2-state program") {
    // Spectrum {1, -0.6}: minimize f(-1.6) = 1 - 1.6 k subject to
    // 0 <= f(-1.6) <= 0.99  ->  k = 0.625, objective 0.
    const SpectralBasis basis = decompose(build_line_chain(2));
    const PolynomialDesign d = design_optimized(basis, 1, 1, 0.0, 0.01);
    CHECK(d.coeffs[0] == doctest::Approx(0.625));
    CHECK(d.achieved_gap == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(d.eval(0.0) == doctest::Approx(1.0));
}

TEST_CASE("optimized design dominates the closed form and honors constraints") {
    const SpectralBasis basis = decompose(build_line_chain(20));
    const PolynomialDesign opt = design_optimized(basis, 5, 4, 0.0, 0.01);
    const PolynomialDesign cf = design_closed_form(basis, 5, 4, 0.0);
    double cf_gap = -1.0;
    for (int i = 1; i <= 20; ++i)
        if (i != 5)
            cf_gap = std::max(cf_gap, cf.eval(basis.lambda(i) - basis.lambda(5)));
    CHECK(opt.achieved_gap <= cf_gap + 1e-9);
    for (int i = 1; i <= 20; ++i) {
        if (i == 5)
            continue;
        const double f = opt.eval(basis.lambda(i) - basis.lambda(5));
        CHECK(f >= -1e-6);
        CHECK(f <= 0.99 + 1e-6);
    }
}

TEST_CASE("optimized design: infeasibility is reported, never relaxed") {
    // Forcing epsilon ~ 1 makes f <= 1 - epsilon unattainable near u = 0
    // for a low order on a tight spectrum.
    const SpectralBasis basis = decompose(build_line_chain(20));
    CHECK_THROWS_AS(design_optimized(basis, 2, 1, 0.0, 0.9), InfeasibleDesignError);
}

TEST_CASE("assemble_matrix: first-order a=1 design returns P itself") {
    const TransitionMatrix tm = build_line_chain(20);
    const SpectralBasis basis = decompose(tm);
    const AttractorMatrix m1 = assemble_matrix(tm, basis, design_first_order_for_pi1(basis), 1);
    CHECK((Eigen::MatrixXd(m1.M) - Eigen::MatrixXd(tm.P)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m1.radius == 1);
}

TEST_CASE("assemble_matrix: spectral mapping, bandwidth, unit eigenvalue") {
    const TransitionMatrix tm = build_line_chain(20);
    const SpectralBasis basis = decompose(tm);
    const PolynomialDesign d = design_closed_form(basis, 5, 4, 0.7);
    const AttractorMatrix am = assemble_matrix(tm, basis, d, 5);
    const Eigen::MatrixXd M(am.M);

    CHECK(am.radius == 4);
    CHECK((M * basis.pi(5) - basis.pi(5)).lpNorm<Eigen::Infinity>() < 1e-8);
    for (int i = 1; i <= 20; ++i) {
        const double want = d.eval(basis.lambda(i) - basis.lambda(5));
        CHECK((M * basis.pi(i) - want * basis.pi(i)).lpNorm<Eigen::Infinity>() < 1e-8);
    }
    // radius-4 banded pattern
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            if (M(i, j) != 0.0)
                CHECK(std::abs(i - j) <= 4);
}

TEST_CASE("kernel extraction on the line: published 1-hop kernel") {
    const TransitionMatrix tm = build_line_chain(20);
    const SpectralBasis basis = decompose(tm);
    const AttractorMatrix m1 = assemble_matrix(tm, basis, design_first_order_for_pi1(basis), 1);
    const Environment env = Environment::line(20);
    const KernelTable table = extract_kernels(env, m1);

    CHECK(table.radius == 1);
    CHECK(KernelTable::entry(table.generic, {0, -1}) == doctest::Approx(0.4));
    CHECK(KernelTable::entry(table.generic, {0, 0}) == doctest::Approx(0.2));
    CHECK(KernelTable::entry(table.generic, {0, 1}) == doctest::Approx(0.4));
    REQUIRE(table.is_boundary(0));
    CHECK(KernelTable::entry(table.kernel_for(0), {0, 0}) == doctest::Approx(0.2));
    CHECK(KernelTable::entry(table.kernel_for(0), {0, 1}) == doctest::Approx(0.8));
    CHECK_FALSE(table.is_boundary(10));
}

TEST_CASE("kernel extraction: 1x1 environment is all boundary") {
    const Environment env = Environment::grid(1, 1, {0});
    const TransitionMatrix tm = build_grid_chain(env);
    const SpectralBasis basis = decompose(tm);
    const PolynomialDesign d = design_first_order_for_pi1(basis);
    const AttractorMatrix am = assemble_matrix(tm, basis, d, 1);
    const KernelTable table = extract_kernels(env, am);
    CHECK(table.generic.empty());
    REQUIRE(table.is_boundary(0));
    CHECK(KernelTable::entry(table.kernel_for(0), {0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("kernel round trip reproduces the matrix exactly") {
    std::istringstream ein(presets::kArrowEnv);
    const Environment env = parse_environment(ein);
    const TransitionMatrix tm = build_grid_chain(env);
    const SpectralBasis basis = decompose(tm);
    const PolynomialDesign d = design_closed_form(basis, 3, 4, 0.0);
    const AttractorMatrix am = assemble_matrix(tm, basis, d, 3);
    const KernelTable table = extract_kernels(env, am);

    const Eigen::MatrixXd back(reconstruct_matrix(env, table));
    CHECK((back - Eigen::MatrixXd(am.M)).cwiseAbs().maxCoeff() < 1e-12);

    // every free cell within 4 hops of a border/obstacle is boundary-classified
    const std::vector<int> bd = boundary_distances(env);
    for (int i = 0; i < env.size(); ++i)
        CHECK(table.is_boundary(i) == (bd[static_cast<size_t>(i)] <= table.radius));

    // text serialization round trip
    const std::string text = to_text(env, table);
    std::istringstream tin(text);
    const KernelTable parsed = kernel_table_from_text(env, tin);
    const Eigen::MatrixXd back2(reconstruct_matrix(env, parsed));
    CHECK((back2 - Eigen::MatrixXd(am.M)).cwiseAbs().maxCoeff() < 1e-12);
}
