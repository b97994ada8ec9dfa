#include <catch2/catch_amalgamated.hpp>

#include "maslov/generators.hpp"
#include "maslov/ham_index.hpp"

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

FlowResult unit_flow(const HamiltonianSystem& H, const Vec& z0) {
    return integrate_flow(H, z0, 0.0, 1.0);
}

// Index of the gauged graph path t |-> graf(B(t) M(t) B(0)^{-1} C) against
// N*W, plus the usual dimension shift.
HalfInteger gauged_nonlocal_index(const HamiltonianSystem& H, const FlowResult& flow,
                                  const NonlocalBoundary& bnd,
                                  const std::function<Mat(double)>& B) {
    const int n = H.dim();
    const Mat B0inv = B(0.0).inverse();
    auto raw = [&flow, &B, B0inv, n](double t) {
        const Mat M = B(t) * flow.monodromy_at(t) * B0inv * c_matrix(n);
        Mat F(4 * n, 2 * n);
        for (int i = 0; i < 2 * n; ++i) {
            const Vec e = Vec::Unit(2 * n, i);
            F.col(i) = pair_to_double(e, Vec(M * e));
        }
        return F;
    };
    const LagrangianPath path(flow.t_begin(), flow.t_end(), raw);
    const MaslovResult r = maslov_index(path, bnd.conormal());
    return r.index + HalfInteger::from_twice(bnd.dim_Q() - n);
}

}  // namespace

TEST_CASE("periodic oscillator index equals its Conley-Zehnder index", "[ham-index]") {
    // omega below 2*pi: only the initial crossing contributes, index 1.
    const HamiltonianSystem H1 = harmonic_oscillator(1, 1.0);
    const FlowResult f1 = unit_flow(H1, vec2(0.3, -0.2));
    const auto r1 = maslov_index_nonlocal(H1, f1, diagonal_boundary(1));
    CHECK(r1.index == HalfInteger::whole(1));
    CHECK(r1.nullity == 0);
    CHECK(r1.index.is_integer());

    const auto cz1 = conley_zehnder([&f1](double t) { return f1.monodromy_at(t); }, 0.0, 1.0);
    CHECK(cz1.index.twice_value() == r1.index.twice_value());

    // omega = 7 passes one full turn: index 3.
    const HamiltonianSystem H7 = harmonic_oscillator(1, 7.0);
    const FlowResult f7 = unit_flow(H7, vec2(0.1, 0.4));
    const auto r7 = maslov_index_nonlocal(H7, f7, diagonal_boundary(1));
    CHECK(r7.index == HalfInteger::whole(3));
    CHECK(r7.nullity == 0);
    const auto cz7 = conley_zehnder([&f7](double t) { return f7.monodromy_at(t); }, 0.0, 1.0);
    CHECK(cz7.index.twice_value() == 6);
}

TEST_CASE("oscillator indices for separated boundary conditions", "[ham-index]") {
    const HamiltonianSystem H = harmonic_oscillator(1, 4.0);
    const FlowResult flow = unit_flow(H, vec2(0.2, 0.1));

    const auto dir = maslov_index_nonlocal(H, flow, dirichlet_boundary(vec1(0.0), vec1(0.0)));
    CHECK(dir.index == HalfInteger::whole(1));
    CHECK(dir.nullity == 0);

    const auto neu = maslov_index_nonlocal(H, flow, neumann_boundary(1));
    CHECK(neu.index == HalfInteger::whole(2));
    CHECK(neu.nullity == 0);

    // Local two-endpoint variant reproduces the classical index tables
    // floor(omega/pi) and floor(omega/pi) + 1.
    const double omegas[] = {1.0, 2.0, 4.0, 7.0};
    const int dir_table[] = {0, 0, 1, 2};
    for (int i = 0; i < 4; ++i) {
        const HamiltonianSystem Hw = harmonic_oscillator(1, omegas[i]);
        const FlowResult fw = unit_flow(Hw, vec2(0.3, 0.0));
        const auto loc_dir =
            maslov_index_local(Hw, fw, Subspace::zero(1), Subspace::zero(1));
        CHECK(loc_dir.index == HalfInteger::whole(dir_table[i]));
        CHECK(loc_dir.nullity == 0);
        const auto loc_neu = maslov_index_local(Hw, fw, Subspace::full(1), Subspace::full(1));
        CHECK(loc_neu.index == HalfInteger::whole(dir_table[i] + 1));
        CHECK(loc_neu.nullity == 0);
    }
}

TEST_CASE("free motion with small potential under Neumann conditions", "[ham-index]") {
    // H = p^2/2 - eps q^2/2 comes from L = v^2/2 + eps q^2/2, whose second
    // variation is positive definite on free endpoints: index 0.
    Mat S = Mat::Zero(2, 2);
    S(0, 0) = -0.04;
    S(1, 1) = 1.0;
    const HamiltonianSystem Hreg = quadratic_hamiltonian(S);
    const auto reg = maslov_index_nonlocal(Hreg, unit_flow(Hreg, vec2(0.0, 0.0)),
                                           neumann_boundary(1));
    CHECK(reg.index == HalfInteger::whole(0));
    CHECK(reg.nullity == 0);

    // Opposite sign is a weak oscillator: index 1.
    S(0, 0) = 0.04;
    const HamiltonianSystem Hosc = quadratic_hamiltonian(S);
    const auto osc = maslov_index_nonlocal(Hosc, unit_flow(Hosc, vec2(0.0, 0.0)),
                                           neumann_boundary(1));
    CHECK(osc.index == HalfInteger::whole(1));
    CHECK(osc.nullity == 0);
}

TEST_CASE("degenerate boundary data produce the expected nullities", "[ham-index]") {
    // Unit-speed winding orbit of the free particle on the circle: the
    // periodic problem keeps one flat direction, and the index is the
    // half-integer 1/2.
    const HamiltonianSystem Hfree = free_particle(1, BaseSpace::torus);
    const FlowResult flow = unit_flow(Hfree, vec2(0.1, 1.0));
    REQUIRE(flow.states().back()(0) == Catch::Approx(1.1));
    const NonlocalBoundary per = diagonal_boundary(1, vec1(1.0));
    CHECK(per.constraint(vec1(0.1), vec1(1.1)).norm() < 1e-12);

    const auto r = maslov_index_nonlocal(Hfree, flow, per);
    CHECK(r.nullity == 1);
    CHECK(r.index == HalfInteger::half(1));
    CHECK(r.used_fallback);
    CHECK_FALSE(r.index.is_integer());

    // Zero Hamiltonian: the monodromy is the identity and the periodic
    // problem is fully degenerate, nullity 2n.
    for (int n = 1; n <= 2; ++n) {
        const HamiltonianSystem H0 = quadratic_hamiltonian(Mat::Zero(2 * n, 2 * n));
        const FlowResult f0 = unit_flow(H0, Vec::Zero(2 * n));
        CHECK(nullity_nonlocal(f0, diagonal_boundary(n)) == 2 * n);
    }

    // Nondegenerate comparison point.
    const HamiltonianSystem H4 = harmonic_oscillator(1, 4.0);
    CHECK(nullity_nonlocal(unit_flow(H4, vec2(0.0, 0.0)),
                           dirichlet_boundary(vec1(0.0), vec1(0.0))) == 0);
}

TEST_CASE("product boundary agrees with the local two-endpoint index", "[ham-index]") {
    // Fixed case: point-pair condition is the product of two points.
    const HamiltonianSystem H4 = harmonic_oscillator(1, 4.0);
    const FlowResult f4 = unit_flow(H4, vec2(0.15, -0.3));
    const auto nl = maslov_index_nonlocal(
        H4, f4, product_boundary(Subspace::zero(1), vec1(0.0), Subspace::zero(1), vec1(0.0)));
    const auto loc = maslov_index_local(H4, f4, Subspace::zero(1), Subspace::zero(1));
    CHECK(nl.index == loc.index);
    CHECK(nl.nullity == loc.nullity);

    // Randomized quadratic systems and random affine endpoint conditions.
    gen::Rng rng(601);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 1 + static_cast<int>(rep % 2);
        const HamiltonianSystem H =
            quadratic_hamiltonian(gen::random_symmetric(rng, 2 * n, 1.2));
        const FlowResult flow = unit_flow(H, gen::gaussian_vec(rng, 2 * n));
        const Subspace V0 = gen::random_subspace(rng, n, static_cast<int>(rng() % (n + 1)));
        const Subspace V1 = gen::random_subspace(rng, n, static_cast<int>(rng() % (n + 1)));
        const NonlocalBoundary bnd = product_boundary(V0, gen::gaussian_vec(rng, n), V1,
                                                      gen::gaussian_vec(rng, n));
        const auto a = maslov_index_nonlocal(H, flow, bnd);
        const auto b = maslov_index_local(H, flow, V0, V1);
        CHECK(a.index == b.index);
        CHECK(a.nullity == b.nullity);
        if (a.nullity == 0) CHECK(a.index.is_integer());
    }
}

TEST_CASE("nonlocal index is invariant under admissible gauges", "[ham-index]") {
    gen::Rng rng(602);

    // Dirichlet data admit arbitrary vertical-preserving gauges.
    {
        const HamiltonianSystem H = harmonic_oscillator(1, 4.0);
        const FlowResult flow = unit_flow(H, vec2(0.0, 0.0));
        const NonlocalBoundary bnd = dirichlet_boundary(vec1(0.0), vec1(0.0));
        const auto base = maslov_index_nonlocal(H, flow, bnd);
        for (int rep = 0; rep < 3; ++rep) {
            const auto B = gen::random_sp_v_path(rng, 1);
            CHECK(gauged_nonlocal_index(H, flow, bnd, B) == base.index);
        }
    }

    // Periodic data need a loop.
    {
        const HamiltonianSystem H = harmonic_oscillator(1, 1.0);
        const FlowResult flow = unit_flow(H, vec2(0.3, -0.2));
        const NonlocalBoundary bnd = diagonal_boundary(1);
        const auto base = maslov_index_nonlocal(H, flow, bnd);
        for (int rep = 0; rep < 3; ++rep) {
            const auto B = gen::random_sp_v_loop(rng, 1);
            CHECK(gauged_nonlocal_index(H, flow, bnd, B) == base.index);
        }
    }

    // Neumann data need gauges that fix the zero section at the endpoints.
    {
        const HamiltonianSystem H = harmonic_oscillator(1, 4.0);
        const FlowResult flow = unit_flow(H, vec2(0.1, 0.2));
        const NonlocalBoundary bnd = neumann_boundary(1);
        const auto base = maslov_index_nonlocal(H, flow, bnd);
        const Subspace full = Subspace::full(1);
        for (int rep = 0; rep < 3; ++rep) {
            const auto B = gen::random_sp_v_path(rng, 1, &full, &full);
            CHECK(gauged_nonlocal_index(H, flow, bnd, B) == base.index);
        }
    }

    // Product data in two degrees of freedom, endpoint-adapted gauges.
    {
        const int n = 2;
        const HamiltonianSystem H =
            quadratic_hamiltonian(gen::random_symmetric(rng, 2 * n, 1.0));
        const FlowResult flow = unit_flow(H, gen::gaussian_vec(rng, 2 * n));
        const Subspace V0 = gen::random_subspace(rng, n, 1);
        const Subspace V1 = gen::random_subspace(rng, n, 2);
        const NonlocalBoundary bnd = product_boundary(V0, gen::gaussian_vec(rng, n), V1,
                                                      gen::gaussian_vec(rng, n));
        const auto base = maslov_index_nonlocal(H, flow, bnd);
        for (int rep = 0; rep < 3; ++rep) {
            const auto B = gen::random_sp_v_path(rng, n, &V0, &V1);
            CHECK(gauged_nonlocal_index(H, flow, bnd, B) == base.index);
        }
    }
}

TEST_CASE("period halving reduces nonlocal to local data", "[ham-index]") {
    // Orbit correspondence y(t) = (x(t/2), C x(1 - t/2)).
    const HamiltonianSystem H = harmonic_oscillator(1, 2.0);
    const FlowResult xf = unit_flow(H, vec2(0.4, 0.1));
    const ReducedProblem red = reduce_to_local(H, diagonal_boundary(1));
    CHECK(red.K.dim() == 2);
    CHECK(red.V1.dim() == 1);

    const Vec y0 = reduced_initial_state(xf.states().front(), xf.states().back());
    const FlowResult yf = unit_flow(red.K, y0);
    for (double t : {0.5, 1.0}) {
        const Vec y = yf.state_at(t);
        const Vec xa = xf.state_at(0.5 * t);
        const Vec xb = xf.state_at(1.0 - 0.5 * t);
        CHECK(std::abs(y(0) - xa(0)) < 1e-6);
        CHECK(std::abs(y(2) - xa(1)) < 1e-6);
        CHECK(std::abs(y(1) - xb(0)) < 1e-6);
        CHECK(std::abs(y(3) + xb(1)) < 1e-6);
    }

    // The analytic derivatives of K agree with finite differences of its value.
    const auto gc = check_gradient(red.K, 25, 7);
    CHECK(gc.max_gradient_error < 1e-6);
    CHECK(gc.max_hessian_asymmetry == 0.0);
}

TEST_CASE("reduced index and nullity match the nonlocal ones", "[ham-index]") {
    struct Case {
        HamiltonianSystem H;
        NonlocalBoundary bnd;
        Vec z0;
    };

    gen::Rng rng(603);
    std::vector<Case> cases;
    cases.push_back({harmonic_oscillator(1, 1.0), diagonal_boundary(1), vec2(0.3, -0.2)});
    cases.push_back({harmonic_oscillator(1, 7.0), diagonal_boundary(1), vec2(0.1, 0.4)});
    cases.push_back({harmonic_oscillator(1, 4.0), dirichlet_boundary(vec1(0.0), vec1(0.0)),
                     vec2(0.0, 0.0)});
    cases.push_back({harmonic_oscillator(1, 4.0), neumann_boundary(1), vec2(0.2, 0.1)});
    cases.push_back({free_particle(1, BaseSpace::torus), diagonal_boundary(1, vec1(1.0)),
                     vec2(0.1, 1.0)});
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 1 + (rep % 2);
        HamiltonianSystem H = quadratic_hamiltonian(gen::random_symmetric(rng, 2 * n, 1.1));
        NonlocalBoundary bnd = (rep % 3 == 0)
                                   ? diagonal_boundary(n)
                                   : product_boundary(
                                         gen::random_subspace(rng, n,
                                                              static_cast<int>(rng() % (n + 1))),
                                         gen::gaussian_vec(rng, n),
                                         gen::random_subspace(rng, n,
                                                              static_cast<int>(rng() % (n + 1))),
                                         gen::gaussian_vec(rng, n));
        cases.push_back({std::move(H), std::move(bnd), gen::gaussian_vec(rng, 2 * n)});
    }

    for (const auto& c : cases) {
        const FlowResult xf = unit_flow(c.H, c.z0);
        const auto direct = maslov_index_nonlocal(c.H, xf, c.bnd);

        const ReducedProblem red = reduce_to_local(c.H, c.bnd);
        const Vec y0 = reduced_initial_state(xf.states().front(), xf.states().back());
        const FlowResult yf = unit_flow(red.K, y0);
        const auto reduced = maslov_index_local(red.K, yf, red.V0, red.V1);

        CHECK(reduced.index == direct.index);
        CHECK(reduced.nullity == direct.nullity);
    }

    // Periodic data: both routes coincide with the Conley-Zehnder index.
    const HamiltonianSystem H7 = harmonic_oscillator(1, 7.0);
    const FlowResult f7 = unit_flow(H7, vec2(0.1, 0.4));
    const ReducedProblem red7 = reduce_to_local(H7, diagonal_boundary(1));
    const FlowResult y7 =
        unit_flow(red7.K, reduced_initial_state(f7.states().front(), f7.states().back()));
    const auto cz = conley_zehnder([&f7](double t) { return f7.monodromy_at(t); }, 0.0, 1.0);
    CHECK(maslov_index_local(red7.K, y7, red7.V0, red7.V1).index == cz.index);
}
