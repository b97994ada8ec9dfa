#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "maslov/flow.hpp"
#include "maslov/lagrangian_path.hpp"
#include "maslov/second_variation.hpp"

namespace maslov {

namespace detail {

// Hessian of the Legendre dual at (t, q, v): with A = D_vv L, B = D_qv L,
// G = D_qq L the dual Hessian blocks are
//   H_qq = -G + B^T A^{-1} B,  H_qp = -B^T A^{-1},  H_pp = A^{-1}.
inline Mat dual_hessian(const ElectromagneticLagrangian& L, double t, const Vec& q,
                        const Vec& v) {
    const int n = L.dim();
    const Mat A = L.kinetic_matrix(t, q);
    const Mat B = L.dqv_value(t, q, v);
    const Mat G = L.dqq_value(t, q, v);
    const Mat Ai = A.partialPivLu().solve(Mat::Identity(n, n));
    Mat S(2 * n, 2 * n);
    S.topLeftCorner(n, n) = -G + B.transpose() * Ai * B;
    S.topRightCorner(n, n) = -B.transpose() * Ai;
    S.bottomLeftCorner(n, n) = -Ai * B;
    S.bottomRightCorner(n, n) = Ai;
    return 0.5 * (S + S.transpose());
}

}  // namespace detail

struct CrossingCountResult {
    int index = 0;
    int nullity = 0;
    double shift_c = 0.0;
    std::vector<double> crossings;  // parameter values in (-1, 0)
};

struct CrossingCountOptions {
    double shift_c = 0.0;  // 0: select automatically from the eigencount
    int time_steps = 512;
    int mu_grid = 512;
};

// Morse index by the shifted-family crossing count: for mu in [-1, 0] the
// linearized flow of the Hamiltonian with Hessian S(t) + mu*c*diag(I, 0) is
// integrated, and the index is the total dimension of the intersections of
// graf(Phi(mu,1) C) with N*W over -1 < mu < 0.  The shift c makes the
// mu = -1 problem definite, each crossing form is positive definite, and the
// mu = 0 intersection dimension is the nullity.
inline CrossingCountResult morse_index_crossing(const ElectromagneticLagrangian& L,
                                                const GridPath& path,
                                                const NonlocalBoundary& bnd,
                                                const CrossingCountOptions& opt = {}) {
    const int n = L.dim();
    if (path.dim() != n || bnd.base_dim() != n)
        throw std::invalid_argument("morse_index_crossing: dimension mismatch");
    const double c = opt.shift_c > 0.0 ? opt.shift_c : select_shift_constant(L, path, bnd);

    const int steps = opt.time_steps;
    const double h = (path.t1 - path.t0) / steps;
    std::vector<Mat> A0(steps);  // frozen midpoint coefficients, -J S(t)
    const Mat J = j_matrix(n);
    for (int k = 0; k < steps; ++k) {
        const double t = path.t0 + (k + 0.5) * h;
        A0[k] = -J * detail::dual_hessian(L, t, path.value(t), path.velocity(t));
    }
    Mat E = Mat::Zero(2 * n, 2 * n);  // -J d/dmu S_mu = c * [[0,0],[-I,0]]
    E.bottomLeftCorner(n, n) = -c * Mat::Identity(n, n);

    const auto propagate = [&](double mu) {
        Mat Phi = Mat::Identity(2 * n, 2 * n);
        for (int k = 0; k < steps; ++k) Phi = detail::cayley_update(A0[k] + mu * E, h, Phi);
        return Phi;
    };
    const auto cache = std::make_shared<std::pair<double, Mat>>(
        2.0, Mat());  // mu outside [-1,0] marks empty
    const auto raw = [propagate, cache](double mu) {
        if (cache->first != mu) *cache = {mu, propagate(mu)};
        return graph_frame(cache->second, GraphSide::right).columns();
    };
    const LagrangianPath family(-1.0, 0.0, raw);

    MaslovOptions mopt;
    mopt.grid = opt.mu_grid;
    const auto cs = detect_crossings(family, bnd.conormal(), mopt);

    CrossingCountResult out;
    out.shift_c = c;
    out.nullity = intersection_dim(raw(0.0), bnd.conormal().columns());
    for (const auto& cr : cs) {
        if (cr.endpoint && cr.t < -0.5)
            throw std::runtime_error(
                "morse_index_crossing: shifted form is not definite at mu = -1 (c = " +
                std::to_string(c) + ")");
        if (cr.endpoint) continue;  // mu = 0 intersection is the nullity
        const int k = static_cast<int>(cr.intersection.cols());
        Eigen::SelfAdjointEigenSolver<Mat> es(cr.form, Eigen::EigenvaluesOnly);
        if (!cr.regular || es.eigenvalues().minCoeff() <= 0.0)
            throw std::runtime_error(
                "morse_index_crossing: crossing form not positive definite at mu = " +
                std::to_string(cr.t));
        out.index += k;
        out.crossings.push_back(cr.t);
    }
    return out;
}

}  // namespace maslov
