#pragma once

#include <memory>

#include "maslov/boundary.hpp"
#include "maslov/flow.hpp"
#include "maslov/maslov_index.hpp"

namespace maslov {

// Dimension of graf(M C) \cap N*W for the time-one linearization M: the
// nullity of the orbit under the boundary condition.  Both the graph and the
// conormal are exchanged consistently by C x C, so the side convention drops
// out of the dimension.
inline int nullity_nonlocal(const Mat& monodromy, const NonlocalBoundary& bnd) {
    const LagrangianFrame graph = graph_frame(monodromy, GraphSide::right);
    return intersection_dim(graph.columns(), bnd.conormal().columns());
}

inline int nullity_nonlocal(const FlowResult& flow, const NonlocalBoundary& bnd) {
    return nullity_nonlocal(flow.monodromies().back(), bnd);
}

struct OrbitIndexResult {
    HalfInteger index;
    int nullity = 0;
    bool used_fallback = false;
};

namespace detail {

// Lagrangian path t |-> graf(M(t) C) over the flow interval, with analytic
// derivative hook d/dt graf = pair(0, A(t) M(t) C e_i).
inline LagrangianPath graph_path(const HamiltonianSystem& H, const FlowResult& flow) {
    const int n = H.dim();
    auto raw = [&H, &flow, n](double t) {
        const Mat MC = flow.monodromy_at(t) * c_matrix(n);
        Mat F(4 * n, 2 * n);
        for (int i = 0; i < 2 * n; ++i) {
            const Vec e = Vec::Unit(2 * n, i);
            F.col(i) = pair_to_double(e, Vec(MC * e));
        }
        return F;
    };
    auto raw_dot = [&H, &flow, n](double t) {
        const Mat A = H.linearization(t, flow.state_at(t));
        const Mat AMC = A * flow.monodromy_at(t) * c_matrix(n);
        Mat F(4 * n, 2 * n);
        for (int i = 0; i < 2 * n; ++i) {
            const Vec e = Vec::Unit(2 * n, i);
            F.col(i) = pair_to_double(Vec(Vec::Zero(2 * n)), Vec(AMC * e));
        }
        return F;
    };
    return LagrangianPath(flow.t_begin(), flow.t_end(), raw, raw_dot);
}

}  // namespace detail

// Relative index of an orbit under a non-local boundary condition:
//   mu(t |-> graf(Dphi_t C), N*W) + (dim Q - n)/2.
// Integer whenever the nullity vanishes.
inline OrbitIndexResult maslov_index_nonlocal(const HamiltonianSystem& H, const FlowResult& flow,
                                              const NonlocalBoundary& bnd,
                                              const MaslovOptions& opt = {}) {
    if (bnd.base_dim() != H.dim())
        throw std::invalid_argument("maslov_index_nonlocal: boundary/base dimension mismatch");
    const LagrangianPath path = detail::graph_path(H, flow);
    const MaslovResult r = maslov_index(path, bnd.conormal(), opt);
    OrbitIndexResult out;
    out.index = r.index + HalfInteger::from_twice(bnd.dim_Q() - H.dim());
    out.nullity = nullity_nonlocal(flow, bnd);
    out.used_fallback = r.used_fallback;
    return out;
}

// Local (two-endpoint) variant: separated conditions x(0) in N*Q0, x(1) in
// N*Q1 with tangent spaces V0, V1 of the affine submanifolds Q0, Q1 of R^n:
//   mu(t |-> Dphi_t N*V0, N*V1) + (dim Q0 + dim Q1 - n)/2.
inline OrbitIndexResult maslov_index_local(const HamiltonianSystem& H, const FlowResult& flow,
                                           const Subspace& V0, const Subspace& V1,
                                           const MaslovOptions& opt = {}) {
    const int n = H.dim();
    if (V0.ambient_dim() != n || V1.ambient_dim() != n)
        throw std::invalid_argument("maslov_index_local: endpoint condition dimension mismatch");
    const Mat F0 = conormal_frame(V0).columns();
    auto raw = [&flow, F0](double t) { return Mat(flow.monodromy_at(t) * F0); };
    auto raw_dot = [&H, &flow, F0](double t) {
        const Mat A = H.linearization(t, flow.state_at(t));
        return Mat(A * flow.monodromy_at(t) * F0);
    };
    const LagrangianPath path(flow.t_begin(), flow.t_end(), raw, raw_dot);
    const MaslovResult r = maslov_index(path, conormal_frame(V1), opt);
    OrbitIndexResult out;
    out.index = r.index + HalfInteger::from_twice(V0.dim() + V1.dim() - n);
    out.nullity = intersection_dim(Mat(flow.monodromies().back() * F0),
                                   conormal_frame(V1).columns());
    out.used_fallback = r.used_fallback;
    return out;
}

// Period-halving reduction: the non-local problem for H on T*R^n with
// boundary Q becomes a local problem on T*R^{2n} for
//   K(t, y1, y2) = H(t/2, y1)/2 + H(1 - t/2, C y2)/2
// with x |-> y(t) = (x(t/2), C x(1 - t/2)); the negation is fiberwise, so the
// terminal condition lands on the conormal of the diagonal.  Endpoint
// conditions: y(0) in N*Q, y(1) in N*Delta.
struct ReducedProblem {
    HamiltonianSystem K;
    Subspace V0;  // tangent of Q inside R^{2n}
    Subspace V1;  // diagonal of R^{2n}
};

inline ReducedProblem reduce_to_local(const HamiltonianSystem& H, const NonlocalBoundary& bnd) {
    const int n = H.dim();
    if (bnd.base_dim() != n)
        throw std::invalid_argument("reduce_to_local: boundary/base dimension mismatch");

    // y = (q1, q2, p1, p2) stacked; the two halves see (t/2, q1, p1) and
    // (1 - t/2, q2, -p2).
    auto split1 = [n](const Vec& q, const Vec& p) {
        Vec z(2 * n);
        z << q.head(n), p.head(n);
        return z;
    };
    auto split2 = [n](const Vec& q, const Vec& p) {
        Vec z(2 * n);
        z << q.tail(n), -p.tail(n);
        return z;
    };

    const auto Hc = std::make_shared<HamiltonianSystem>(H);
    auto value = [Hc, split1, split2](double t, const Vec& q, const Vec& p) {
        return 0.5 * Hc->value(0.5 * t, split1(q, p)) + 0.5 * Hc->value(1.0 - 0.5 * t, split2(q, p));
    };
    auto grad = [Hc, n, split1, split2](double t, const Vec& q, const Vec& p) {
        const Vec g1 = Hc->gradient(0.5 * t, split1(q, p));
        const Vec g2 = Hc->gradient(1.0 - 0.5 * t, split2(q, p));
        Vec g(4 * n);
        g.segment(0, n) = 0.5 * g1.head(n);
        g.segment(n, n) = 0.5 * g2.head(n);
        g.segment(2 * n, n) = 0.5 * g1.tail(n);
        g.segment(3 * n, n) = -0.5 * g2.tail(n);
        return g;
    };
    auto hess = [Hc, n, split1, split2](double t, const Vec& q, const Vec& p) {
        const Mat S1 = Hc->hessian(0.5 * t, split1(q, p));
        const Mat S2 = Hc->hessian(1.0 - 0.5 * t, split2(q, p));
        Mat S = Mat::Zero(4 * n, 4 * n);
        S.block(0, 0, n, n) = 0.5 * S1.topLeftCorner(n, n);
        S.block(0, 2 * n, n, n) = 0.5 * S1.topRightCorner(n, n);
        S.block(2 * n, 0, n, n) = 0.5 * S1.bottomLeftCorner(n, n);
        S.block(2 * n, 2 * n, n, n) = 0.5 * S1.bottomRightCorner(n, n);
        S.block(n, n, n, n) = 0.5 * S2.topLeftCorner(n, n);
        S.block(n, 3 * n, n, n) = -0.5 * S2.topRightCorner(n, n);
        S.block(3 * n, n, n, n) = -0.5 * S2.bottomLeftCorner(n, n);
        S.block(3 * n, 3 * n, n, n) = 0.5 * S2.bottomRightCorner(n, n);
        return S;
    };

    HamiltonianSystem K(2 * n, H.base(), value, grad, hess, H.name() + "_halved");

    Mat diag_basis(2 * n, n);
    diag_basis << Mat::Identity(n, n), Mat::Identity(n, n);
    return ReducedProblem{std::move(K), bnd.tangent(), Subspace(2 * n, diag_basis)};
}

// Initial state of the reduced orbit from the endpoints of the original one.
inline Vec reduced_initial_state(const Vec& x0, const Vec& x1) {
    const int n = static_cast<int>(x0.size()) / 2;
    Vec y0(4 * n);
    y0 << x0.head(n), x1.head(n), x0.tail(n), -x1.tail(n);
    return y0;
}

}  // namespace maslov
