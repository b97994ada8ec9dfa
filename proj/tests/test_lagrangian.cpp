#include <catch2/catch_amalgamated.hpp>

#include "maslov/lagrangian.hpp"

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

// Position-dependent kinetic matrix with mixed couplings, no analytic D_q hook:
// exercises the finite-difference coefficient path.
ElectromagneticLagrangian wiggly_lagrangian() {
    return ElectromagneticLagrangian(
        2, BaseSpace::line,
        [](double, const Vec& q) {
            Mat A(2, 2);
            A << 1.0 + 0.3 * std::sin(q(0)), 0.1, 0.1, 1.2 + 0.3 * std::cos(q(1));
            return A;
        },
        [](double, const Vec& q) { return Vec(vec2(0.2 * q(1), -0.1 * q(0))); },
        [](double t, const Vec& q) {
            return 0.4 * q(0) * q(0) * q(1) + 0.5 * q.squaredNorm() + 0.1 * t * q(0);
        });
}

}  // namespace

TEST_CASE("fenchel dual reproduces closed-form kinetic duals", "[lagrangian]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    SECTION("A = I, alpha = 0, V = 0  =>  H = |p|^2/2") {
        const HamiltonianSystem H = fenchel_dual(free_lagrangian(2));
        for (int s = 0; s < 10; ++s) {
            const Vec q = vec2(U(rng), U(rng)), p = vec2(U(rng), U(rng));
            Vec z(4);
            z << q, p;
            CHECK(H.value(0.3, z) == Catch::Approx(0.5 * p.squaredNorm()).margin(1e-14));
        }
    }

    SECTION("A = 2I  =>  H = |p|^2/4 + V") {
        const ElectromagneticLagrangian L(
            1, BaseSpace::line, [](double, const Vec&) { return Mat(2.0 * Mat::Identity(1, 1)); },
            [](double, const Vec&) { return Vec(Vec::Zero(1)); },
            [](double, const Vec& q) { return 0.7 * q(0) * q(0); });
        const HamiltonianSystem H = fenchel_dual(L);
        for (int s = 0; s < 10; ++s) {
            const Vec q = vec1(U(rng)), p = vec1(U(rng));
            Vec z(2);
            z << q, p;
            CHECK(H.value(0.0, z) ==
                  Catch::Approx(0.25 * p(0) * p(0) + 0.7 * q(0) * q(0)).margin(1e-14));
        }
        CHECK(legendre_map(L, 0.0, vec1(0.2), vec1(0.3))(0) == Catch::Approx(0.6));
    }

    SECTION("constant alpha  =>  H = |p - alpha|^2/2 + V") {
        const Vec a0 = vec2(0.4, -0.9);
        const ElectromagneticLagrangian L(
            2, BaseSpace::line, [](double, const Vec&) { return Mat(Mat::Identity(2, 2)); },
            [a0](double, const Vec&) { return a0; },
            [](double, const Vec& q) { return 0.25 * q.squaredNorm(); });
        const HamiltonianSystem H = fenchel_dual(L);
        for (int s = 0; s < 10; ++s) {
            const Vec q = vec2(U(rng), U(rng)), p = vec2(U(rng), U(rng));
            Vec z(4);
            z << q, p;
            CHECK(H.value(0.1, z) == Catch::Approx(0.5 * (p - a0).squaredNorm() +
                                                   0.25 * q.squaredNorm())
                                         .margin(1e-14));
        }
    }
}

TEST_CASE("legendre map inverts and closes the duality identity", "[lagrangian]") {
    const ElectromagneticLagrangian L = wiggly_lagrangian();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int s = 0; s < 50; ++s) {
        const double t = U(rng);
        const Vec q = vec2(U(rng), U(rng)), v = vec2(U(rng), U(rng));
        const Vec p = legendre_map(L, t, q, v);
        CHECK((legendre_inverse(L, t, q, p) - v).norm() < 1e-12);
    }
    CHECK(fenchel_roundtrip_error(L, 200, 77) < 1e-10);
}

TEST_CASE("fenchel round trip is exact across the presets", "[lagrangian]") {
    CHECK(fenchel_roundtrip_error(free_lagrangian(2)) < 1e-10);
    CHECK(fenchel_roundtrip_error(harmonic_lagrangian(2, 2.0)) < 1e-10);
    CHECK(fenchel_roundtrip_error(pendulum_lagrangian(1, 0.3)) < 1e-10);
    CHECK(fenchel_roundtrip_error(magnetic_lagrangian(1.5, 0.7)) < 1e-10);
}

TEST_CASE("envelope gradient of the dual agrees with finite differences", "[lagrangian]") {
    for (const auto& L : {harmonic_lagrangian(1, 2.0), pendulum_lagrangian(1, 0.4, 0.3),
                          magnetic_lagrangian(1.5, 0.7), wiggly_lagrangian()}) {
        const auto rep = check_gradient(fenchel_dual(L), 40, 5);
        CHECK(rep.max_gradient_error < 1e-6);
    }
}

TEST_CASE("dual of the harmonic lagrangian matches the oscillator preset", "[lagrangian]") {
    const HamiltonianSystem Hd = fenchel_dual(harmonic_lagrangian(2, 3.0));
    const HamiltonianSystem Ho = harmonic_oscillator(2, 3.0);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int s = 0; s < 25; ++s) {
        Vec z(4);
        for (int i = 0; i < 4; ++i) z(i) = U(rng);
        const double t = U(rng);
        CHECK(std::abs(Hd.value(t, z) - Ho.value(t, z)) < 1e-12);
        CHECK((Hd.gradient(t, z) - Ho.gradient(t, z)).norm() < 1e-12);
        CHECK((Hd.hessian(t, z) - Ho.hessian(t, z)).norm() < 1e-5);
    }
}

TEST_CASE("euler-lagrange residual vanishes exactly on solutions", "[lagrangian]") {
    SECTION("free particle along a straight line") {
        const Vec a = vec2(0.3, -1.0), b = vec2(1.1, 0.4);
        const GridPath line = grid_path_from_function(
            [&](double t) { return Vec(a + t * (b - a)); }, 0.0, 1.0, 32);
        CHECK(euler_lagrange_residual(free_lagrangian(2), line) < 1e-12);
    }

    SECTION("harmonic solution converges at second order") {
        const double w = 2.0;
        const ElectromagneticLagrangian L = harmonic_lagrangian(1, w);
        const auto sol = [w](double t) { return Vec(vec1(std::sin(w * t))); };
        const double r200 = euler_lagrange_residual(L, grid_path_from_function(sol, 0, 1, 200));
        const double r400 = euler_lagrange_residual(L, grid_path_from_function(sol, 0, 1, 400));
        CHECK(r200 < 1e-4);
        CHECK(r400 < r200 / 3.0);
    }

    SECTION("non-solutions are flagged") {
        const GridPath line =
            grid_path_from_function([](double t) { return Vec(vec1(t)); }, 0.0, 1.0, 64);
        CHECK(euler_lagrange_residual(harmonic_lagrangian(1, 2.0), line) > 0.1);
    }
}

TEST_CASE("natural boundary residual follows the constraint tangent", "[lagrangian]") {
    const ElectromagneticLagrangian L = free_lagrangian(1);

    SECTION("dirichlet leaves nothing to check") {
        const GridPath path =
            grid_path_from_function([](double t) { return Vec(vec1(t)); }, 0.0, 1.0, 16);
        CHECK(natural_bc_residual(L, path, dirichlet_boundary(vec1(0.0), vec1(1.0))) == 0.0);
        CHECK_THROWS_AS(natural_bc_residual(L, path, dirichlet_boundary(vec1(0.5), vec1(1.0))),
                        std::invalid_argument);
    }

    SECTION("neumann wants vanishing endpoint momenta") {
        const GridPath rest = grid_path_from_function(
            [](double) { return Vec(vec1(0.7)); }, 0.0, 1.0, 16);
        CHECK(natural_bc_residual(L, rest, neumann_boundary(1)) < 1e-14);
        const GridPath slide =
            grid_path_from_function([](double t) { return Vec(vec1(t)); }, 0.0, 1.0, 16);
        CHECK(natural_bc_residual(L, slide, neumann_boundary(1)) == Catch::Approx(1.0));
    }

    SECTION("periodic momenta match across a torus winding") {
        const ElectromagneticLagrangian Lt = free_lagrangian(1, BaseSpace::torus);
        const GridPath wind =
            grid_path_from_function([](double t) { return Vec(vec1(t)); }, 0.0, 1.0, 16);
        CHECK(natural_bc_residual(Lt, wind, diagonal_boundary(1, vec1(1.0))) < 1e-13);
    }
}

TEST_CASE("action values on closed-form paths", "[lagrangian]") {
    SECTION("free straight line") {
        const Vec b = vec2(1.0, -2.0);
        const GridPath line = grid_path_from_function(
            [&](double t) { return Vec(t * b); }, 0.0, 1.0, 20);
        CHECK(action_lagrangian(free_lagrangian(2), line) ==
              Catch::Approx(0.5 * b.squaredNorm()).margin(1e-13));
    }

    SECTION("resting path pays minus the potential") {
        const double w = 3.0, c = 0.4;
        const GridPath rest = grid_path_from_function(
            [c](double) { return Vec(vec1(c)); }, 0.0, 1.0, 20);
        CHECK(action_lagrangian(harmonic_lagrangian(1, w), rest) ==
              Catch::Approx(-0.5 * w * w * c * c).margin(1e-13));
    }

    SECTION("hamiltonian action of the harmonic orbit") {
        const double w = 2.0;
        const HamiltonianSystem H = harmonic_oscillator(1, w);
        const GridPath phase = grid_path_from_function(
            [w](double t) { return Vec(vec2(std::sin(w * t), w * std::cos(w * t))); }, 0.0,
            1.0, 1024);
        // integral of p qdot - H = (w^2/2) cos(2wt) over [0,1]
        CHECK(action_hamiltonian_grid(H, phase) ==
              Catch::Approx(0.25 * w * std::sin(2.0 * w)).margin(1e-4));
    }
}

TEST_CASE("fenchel inequality margin is a pointwise-nonnegative quadrature", "[lagrangian]") {
    const ElectromagneticLagrangian L = free_lagrangian(1);

    SECTION("legendre-related pair has exactly zero margin") {
        const GridPath phase = grid_path_from_function(
            [](double t) { return Vec(vec2(0.2 + 0.5 * t, 0.5)); }, 0.0, 1.0, 64);
        const auto m = fenchel_inequality_check(L, phase);
        CHECK(std::abs(m.margin) < 1e-15);
        CHECK(m.legendre_related);
    }

    SECTION("p = 0 along a unit-speed line costs exactly 1/2") {
        const GridPath phase = grid_path_from_function(
            [](double t) { return Vec(vec2(t, 0.0)); }, 0.0, 1.0, 64);
        const auto m = fenchel_inequality_check(L, phase);
        CHECK(m.margin == Catch::Approx(0.5).margin(1e-13));
        CHECK(m.max_pointwise == Catch::Approx(0.5).margin(1e-13));
        CHECK_FALSE(m.legendre_related);
    }

    SECTION("random phase paths never drop below zero") {
        std::mt19937_64 rng(14);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const ElectromagneticLagrangian Lm = magnetic_lagrangian(1.2, 0.5);
        for (int rep = 0; rep < 10; ++rep) {
            Mat nodes(4, 33);
            for (int k = 0; k < 33; ++k)
                nodes.col(k) = Vec::NullaryExpr(4, [&](Eigen::Index) { return U(rng); });
            const auto m = fenchel_inequality_check(Lm, GridPath(0.0, 1.0, nodes));
            CHECK(m.margin >= -1e-10);
            CHECK(m.max_pointwise >= 0.0);
        }
    }

    SECTION("interpolated lift of a harmonic orbit is nearly exact") {
        const double w = 2.0;
        const ElectromagneticLagrangian Lh = harmonic_lagrangian(1, w);
        const GridPath phase = grid_path_from_function(
            [w](double t) { return Vec(vec2(std::sin(w * t), w * std::cos(w * t))); }, 0.0,
            1.0, 512);
        const auto m = fenchel_inequality_check(Lh, phase);
        CHECK(m.margin >= -1e-10);
        CHECK(m.margin < 1e-3);
    }
}

TEST_CASE("growth fit bounds the sampled gradients", "[lagrangian]") {
    const HamiltonianSystem H = fenchel_dual(harmonic_lagrangian(1, 2.0));
    const auto fit = fit_growth_constants(H, 200, 2024, 8.0);
    CHECK(fit.c0 > 0.0);
    CHECK(fit.c1 >= 0.0);
    CHECK(fit.samples == 200);
    // the bound must hold on a fresh cloud inside the fitted radius
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int s = 0; s < 100; ++s) {
        Vec z = vec2(U(rng), U(rng));
        z *= 0.5 * fit.max_radius;
        CHECK(H.gradient(0.0, z).norm() <= fit.c0 + fit.c1 * z.norm() + 1e-9);
    }
}

TEST_CASE("kinetic floor certifies positivity", "[lagrangian]") {
    CHECK(harmonic_lagrangian(2, 5.0).kinetic_floor() == Catch::Approx(1.0));
    CHECK(wiggly_lagrangian().kinetic_floor() > 0.5);
    CHECK(wiggly_lagrangian().kinetic_floor() > ElectromagneticLagrangian::positivity_floor);
}
