#include <catch2/catch_amalgamated.hpp>

#include "maslov/index_theorem.hpp"

using namespace maslov;

namespace {

Vec vec1(double a) {
    Vec v(1);
    v << a;
    return v;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// Random electromagnetic instance with position-dependent kinetic matrix,
// linear magnetic potential and a mildly anharmonic scalar potential.
ElectromagneticLagrangian random_lagrangian(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Vec u(n), w(n);
    for (int i = 0; i < n; ++i) {
        u(i) = U(rng);
        w(i) = U(rng);
    }
    Mat M(n, n), G0(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            M(i, j) = 0.5 * U(rng);
            G0(i, j) = 3.0 * U(rng);
        }
    G0 = 0.5 * (G0 + G0.transpose()).eval();
    return ElectromagneticLagrangian(
        n, BaseSpace::line,
        [n, u](double, const Vec& q) {
            return Mat((1.0 + 0.3 * std::sin(u.dot(q))) * Mat::Identity(n, n));
        },
        [M](double, const Vec& q) { return Vec(M * q); },
        [G0, w](double, const Vec& q) {
            return 0.5 * q.dot(G0 * q) + 0.2 * std::cos(w.dot(q));
        });
}

// Boundary manufactured around a given flow: the tangent space W is a random
// subspace orthogonal to (p0, -p1), so the orbit satisfies the conormal
// condition exactly and the instance has a guaranteed solution.
NonlocalBoundary boundary_through(std::mt19937_64& rng, const FlowResult& flow) {
    const int n = flow.system().dim();
    std::normal_distribution<double> N01(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 2 * n - 1);

    const Vec x0 = flow.states().front();
    const Vec x1 = flow.states().back();
    Vec w(2 * n);
    w << x0.tail(n), -x1.tail(n);

    const int k = pick(rng);  // dim W; codim stays >= 1
    Mat R(2 * n, k);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < k; ++j) R(i, j) = N01(rng);
    if (w.norm() > 1e-12) R -= w * (w.transpose() * R) / w.squaredNorm();

    Mat basis(2 * n, k);
    if (k > 0) {
        Eigen::HouseholderQR<Mat> qr(R);
        basis = Mat(qr.householderQ()).leftCols(k);
    }
    Mat full(2 * n, 2 * n);
    full.leftCols(k) = basis;
    full.rightCols(2 * n - k) = Subspace(2 * n, basis).orthogonal_complement().basis();
    const Mat A = full.rightCols(2 * n - k).transpose();

    Vec qq(2 * n);
    qq << x0.head(n), x1.head(n);
    return NonlocalBoundary(n, A, Vec(A * qq));
}

}  // namespace

TEST_CASE("oscillator rest orbit verifies with the pinned indices", "[index-theorem]") {
    const ElectromagneticLagrangian L = harmonic_lagrangian(1, 4.0);
    const HamiltonianSystem H = fenchel_dual(L);
    const FlowResult flow = integrate_flow(H, Vec::Zero(2), 0.0, 1.0, {});
    const IndexReport rep =
        verify_index_theorem(L, dirichlet_boundary(vec1(0.0), vec1(0.0)), flow);

    CHECK(rep.index_eigen == 1);
    CHECK(rep.index_crossing == 1);
    CHECK(rep.nullity_eigen == 0);
    CHECK(rep.nullity_crossing == 0);
    CHECK(rep.nullity_ham == 0);
    CHECK(rep.shift == HalfInteger::from_twice(0 - 1));  // dim Q = 0, n = 1
    CHECK(rep.mu_shifted == HalfInteger::whole(1));
    CHECK(rep.delta_forward == HalfInteger());
    CHECK(rep.delta_backward == HalfInteger());
    CHECK(rep.delta_nullity == 0);
    CHECK(rep.delta_algorithms == 0);
    CHECK(rep.legendre_residual <= 1e-10);
    CHECK(rep.boundary_residual <= 1e-10);
    CHECK(rep.pass);
    CHECK_FALSE(rep.refined);
}

TEST_CASE("oscillator sweep jumps at the conjugate thresholds", "[index-theorem]") {
    const std::vector<double> omegas = {1.0, 2.0, 4.0, 7.0};

    SECTION("dirichlet") {
        const auto rows = sweep_report(oscillator_family(omegas));
        REQUIRE(rows.size() == 4);
        const int expected[4] = {0, 0, 1, 2};
        for (int i = 0; i < 4; ++i) {
            CAPTURE(i, rows[i].parameter);
            CHECK(rows[i].label == "dirichlet");
            CHECK(rows[i].parameter == omegas[i]);
            CHECK(rows[i].report.index_eigen == expected[i]);
            CHECK(rows[i].report.index_crossing == expected[i]);
            CHECK(rows[i].report.mu_shifted == HalfInteger::whole(expected[i]));
            CHECK(rows[i].report.nullity_ham == 0);
            CHECK(rows[i].report.pass);
        }
    }

    SECTION("neumann") {
        const auto rows = sweep_report(oscillator_family(omegas, true));
        REQUIRE(rows.size() == 4);
        const int expected[4] = {1, 1, 2, 3};
        for (int i = 0; i < 4; ++i) {
            CAPTURE(i, rows[i].parameter);
            CHECK(rows[i].label == "neumann");
            CHECK(rows[i].report.index_eigen == expected[i]);
            CHECK(rows[i].report.index_crossing == expected[i]);
            CHECK(rows[i].report.mu_shifted == HalfInteger::whole(expected[i]));
            CHECK(rows[i].report.pass);
        }
    }
}

TEST_CASE("free particle winding orbit passes in the half-integer case", "[index-theorem]") {
    const ElectromagneticLagrangian L = free_lagrangian(1, BaseSpace::torus);
    const HamiltonianSystem H = fenchel_dual(L);
    const FlowResult flow = integrate_flow(H, vec2(0.0, 1.0), 0.0, 1.0, {});
    const IndexReport rep = verify_index_theorem(L, diagonal_boundary(1, vec1(1.0)), flow);

    CHECK(rep.index_eigen == 0);
    CHECK(rep.index_crossing == 0);
    CHECK(rep.nullity_eigen == 1);
    CHECK(rep.nullity_crossing == 1);
    CHECK(rep.nullity_ham == 1);
    CHECK(rep.shift == HalfInteger());  // dim Q = n = 1
    CHECK(rep.mu_shifted == HalfInteger::half());
    CHECK_FALSE(rep.mu_shifted.is_integer());
    CHECK(rep.delta_forward == HalfInteger());
    CHECK(rep.delta_backward == HalfInteger());
    CHECK(rep.pass);
}

TEST_CASE("solver orbits of the standing pendulum verify end to end", "[index-theorem]") {
    const ElectromagneticLagrangian L = pendulum_lagrangian(1, 0.3);
    const HamiltonianSystem H = fenchel_dual(L);
    const NonlocalBoundary per = diagonal_boundary(1);

    ShootingOptions opt;
    opt.seeds_per_dim = 16;
    opt.compute_index = false;  // the verification recomputes both sides
    const SolveReport sol = solve_nonlocal_bvp(H, per, {}, opt);
    REQUIRE(sol.orbits.size() == 2);

    // sorted by action: the unstable equilibrium q = 0 sits at the potential
    // maximum (action -0.3, index 0); the stable one at q = 1/2 carries the
    // constant negative mode (action +0.3, index 1).
    const int expected[2] = {0, 1};
    for (int i = 0; i < 2; ++i) {
        CAPTURE(i, sol.orbits[i].action);
        const IndexReport rep = verify_index_theorem(L, per, sol.orbits[i]);
        CHECK(rep.index_eigen == expected[i]);
        CHECK(rep.delta_algorithms == 0);
        CHECK(rep.nullity_eigen == 0);
        CHECK(rep.mu_shifted == HalfInteger::whole(expected[i]));
        CHECK(rep.pass);
    }
}

TEST_CASE("manufactured conormal instances verify end to end", "[index-theorem]") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    int passed = 0;
    for (int rep = 0; rep < 12; ++rep) {
        const int n = rep < 8 ? 1 : 2;
        const ElectromagneticLagrangian L = random_lagrangian(rng, n);
        const HamiltonianSystem H = fenchel_dual(L);
        Vec x0(2 * n);
        for (int i = 0; i < 2 * n; ++i) x0(i) = U(rng);

        const FlowResult flow = integrate_flow(H, x0, 0.0, 1.0, {});
        const NonlocalBoundary bnd = boundary_through(rng, flow);
        CAPTURE(rep, n, bnd.codim());

        const IndexReport report = verify_index_theorem(L, bnd, flow);
        CAPTURE(report.index_eigen, report.index_crossing, report.nullity_eigen,
                report.nullity_ham, report.mu_shifted.twice_value(),
                report.legendre_residual, report.boundary_residual);
        CHECK(report.legendre_residual <= 1e-8);
        CHECK(report.boundary_residual <= 1e-9);
        CHECK(report.pass);
        if (report.pass) ++passed;
    }
    CHECK(passed == 12);
}

TEST_CASE("verification rejects mismatched dimensions", "[index-theorem]") {
    const ElectromagneticLagrangian L = harmonic_lagrangian(2, 1.0);
    const HamiltonianSystem H = fenchel_dual(L);
    const FlowResult flow = integrate_flow(H, Vec::Zero(4), 0.0, 1.0, {});
    CHECK_THROWS_AS(verify_index_theorem(L, neumann_boundary(1), flow),
                    std::invalid_argument);
}
