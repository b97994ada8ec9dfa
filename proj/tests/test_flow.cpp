#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "maslov/flow.hpp"

using namespace maslov;

namespace {
Vec state(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    int i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}
}  // namespace

TEST_CASE("hamiltonian presets expose consistent derivatives", "[flow]") {
    for (const auto& H : {free_particle(2), harmonic_oscillator(2, 3.0),
                          pendulum_traveling(1, 0.03, 0.345)}) {
        const auto rep = check_gradient(H, 40);
        CHECK(rep.max_gradient_error < 1e-8);
        CHECK(rep.max_hessian_asymmetry == 0.0);
    }
    // numeric-only system: gradient and hessian from values alone
    HamiltonianSystem numeric(1, BaseSpace::line, [](double, const Vec& q, const Vec& p) {
        return 0.5 * p.squaredNorm() + std::cos(q(0));
    });
    const Vec z = state({0.3, -0.7});
    CHECK(std::abs(numeric.gradient(0.0, z)(0) + std::sin(0.3)) < 1e-8);
    CHECK(std::abs(numeric.hessian(0.0, z)(0, 0) + std::cos(0.3)) < 1e-6);
    CHECK(std::abs(numeric.hessian(0.0, z)(1, 1) - 1.0) < 1e-6);
}

TEST_CASE("free particle integrates exactly", "[flow]") {
    const auto H = free_particle(2);
    const Vec z0 = state({0.1, -0.4, 1.5, 0.25});
    const auto flow = integrate_flow(H, z0, 0.0, 1.0);

    Vec zT(4);
    zT << 0.1 + 1.5, -0.4 + 0.25, 1.5, 0.25;
    CHECK((flow.state_at(1.0) - zT).norm() < 1e-12);

    Mat MT = Mat::Identity(4, 4);
    MT.topRightCorner(2, 2) = Mat::Identity(2, 2);
    CHECK((flow.monodromy_at(1.0) - MT).cwiseAbs().maxCoeff() < 1e-12);

    // off-grid query agrees with the exact flow as well
    Mat Mt = Mat::Identity(4, 4);
    Mt.topRightCorner(2, 2) = 0.62300041 * Mat::Identity(2, 2);
    CHECK((flow.monodromy_at(0.62300041) - Mt).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(flow.state_at(0.377)(0) - (0.1 + 0.377 * 1.5)) < 1e-12);
}

TEST_CASE("harmonic oscillator matches the rotation flow", "[flow]") {
    const double w = 2.0;
    const auto H = harmonic_oscillator(1, w);
    const Vec z0 = state({0.7, -0.3});
    const auto flow = integrate_flow(H, z0, 0.0, 1.0);

    auto exact = [&](double t) {
        Mat M(2, 2);
        M << std::cos(w * t), std::sin(w * t) / w, -w * std::sin(w * t), std::cos(w * t);
        return M;
    };
    for (double t : {0.25, 0.5, 0.77, 1.0}) {
        CHECK((flow.monodromy_at(t) - exact(t)).cwiseAbs().maxCoeff() < 1e-5);
        CHECK((flow.state_at(t) - exact(t) * z0).norm() < 1e-5);
    }
    // quadratic invariants are conserved exactly by the midpoint rule
    const double E0 = H.value(0.0, z0);
    CHECK(std::abs(H.value(0.0, flow.state_at(1.0)) - E0) < 1e-12);
}

TEST_CASE("monodromy is symplectic to machine precision", "[flow]") {
    // nonlinear, time-dependent torus system
    const auto H = pendulum_traveling(1, 0.03, 0.345);
    const auto flow = integrate_flow(H, state({0.2, 0.9}), 0.0, 1.0);
    CHECK(flow.symplectic_defect() < 1e-8);
    CHECK(is_symplectic(flow.monodromy_at(0.531), 1e-10));

    // near-conservation of a non-quadratic energy (autonomous version)
    HamiltonianSystem pend(1, BaseSpace::torus, [](double, const Vec& q, const Vec& p) {
        return 0.5 * p.squaredNorm() + 0.03 * std::cos(2.0 * M_PI * q(0));
    });
    const auto f2 = integrate_flow(pend, state({0.1, 0.4}), 0.0, 2.0);
    CHECK(std::abs(pend.value(0.0, f2.state_at(2.0)) - pend.value(0.0, state({0.1, 0.4}))) < 1e-7);
}

TEST_CASE("driven particle with a known closed form", "[flow]") {
    // H = p^2/2 + sin(2 pi t) q: p(t) = p0 + (cos(2 pi t) - 1)/(2 pi)
    HamiltonianSystem H(
        1, BaseSpace::line,
        [](double t, const Vec& q, const Vec& p) {
            return 0.5 * p.squaredNorm() + std::sin(2.0 * M_PI * t) * q(0);
        },
        [](double t, const Vec&, const Vec& p) {
            Vec g(2);
            g << std::sin(2.0 * M_PI * t), p(0);
            return g;
        });
    const auto flow = integrate_flow(H, state({0.3, 0.8}), 0.0, 1.0);
    const Vec zT = flow.state_at(1.0);
    CHECK(std::abs(zT(1) - 0.8) < 1e-6);
    CHECK(std::abs(zT(0) - (0.3 + 0.8 - 1.0 / (2.0 * M_PI))) < 1e-6);
    // H_qq = 0: the monodromy is the free-particle shear
    CHECK(std::abs(flow.monodromy_at(1.0)(0, 1) - 1.0) < 1e-10);
    CHECK(std::abs(flow.monodromy_at(1.0)(1, 0)) < 1e-10);
}

TEST_CASE("off-grid queries are continuous across nodes", "[flow]") {
    const auto H = harmonic_oscillator(1, 1.7);
    const auto flow = integrate_flow(H, state({1.0, 0.0}), 0.0, 1.0);
    const double h = flow.step();
    for (double tn : {100.0 * h, 517.0 * h}) {
        CHECK((flow.state_at(tn) - flow.states()[static_cast<int>(std::round(tn / h))]).norm() <
              1e-12);
        CHECK((flow.state_at(tn - 1e-9) - flow.state_at(tn)).norm() < 1e-6);
        CHECK((flow.monodromy_at(tn - 1e-9) - flow.monodromy_at(tn)).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("discrete action of the free particle", "[flow]") {
    // S = |p|^2 T / 2 along straight lines
    const auto H = free_particle(1);
    const auto flow = integrate_flow(H, state({0.0, 1.3}), 0.0, 2.0);
    CHECK(std::abs(flow.action() - 0.5 * 1.3 * 1.3 * 2.0) < 1e-10);
}
