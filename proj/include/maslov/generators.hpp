#pragma once

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "maslov/lagrangian_path.hpp"
#include "maslov/symplectic.hpp"

// Seeded random instances shared by the property tests and the CLI selftest.

namespace maslov::gen {

using Rng = std::mt19937_64;

inline Mat gaussian(Rng& rng, int r, int c, double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale);
    Mat M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = N(rng);
    return M;
}

inline Vec gaussian_vec(Rng& rng, int n, double scale = 1.0) {
    return gaussian(rng, n, 1, scale).col(0);
}

inline Mat random_symmetric(Rng& rng, int n, double scale = 1.0) {
    Mat S = gaussian(rng, n, n, scale);
    return 0.5 * (S + S.transpose());
}

inline Mat random_orthogonal(Rng& rng, int n) {
    Eigen::HouseholderQR<Mat> qr(gaussian(rng, n, n));
    Mat Q = qr.householderQ();
    Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i)
        if (R(i, i) < 0) Q.col(i) = -Q.col(i);
    return Q;
}

// exp(J S) with S symmetric is symplectic.
inline Mat random_symplectic(Rng& rng, int n, double scale = 0.7) {
    const Mat X = j_matrix(n) * random_symmetric(rng, 2 * n, scale);
    return X.exp();
}

inline Subspace random_subspace(Rng& rng, int ambient, int dim) {
    if (dim == 0) return Subspace::zero(ambient);
    return Subspace::span(gaussian(rng, ambient, dim));
}

inline LagrangianFrame random_lagrangian_frame(Rng& rng, int n) {
    return apply_symplectic(random_symplectic(rng, n), vertical_frame(n));
}

// Path exp(t X) lambda0 with a Hamiltonian generator X; carries the analytic
// derivative hook.
inline LagrangianPath random_lagrangian_path(Rng& rng, int n, double a = 0.0, double b = 1.0,
                                             double speed = 2.0) {
    const Mat X = j_matrix(n) * random_symmetric(rng, 2 * n, speed);
    const Mat F0 = random_lagrangian_frame(rng, n).columns();
    auto raw = [X, F0, a](double t) { return Mat((Mat((t - a) * X)).exp() * F0); };
    auto dot = [X, raw](double t) { return Mat(X * raw(t)); };
    return LagrangianPath(a, b, raw, dot);
}

// Path with a non-autonomous generator (no derivative hook; exercises the
// finite-difference branch of the crossing form).
inline LagrangianPath random_lagrangian_path2(Rng& rng, int n, double a = 0.0, double b = 1.0,
                                              double speed = 2.0) {
    const Mat X1 = j_matrix(n) * random_symmetric(rng, 2 * n, speed);
    const Mat X2 = j_matrix(n) * random_symmetric(rng, 2 * n, speed);
    const Mat F0 = random_lagrangian_frame(rng, n).columns();
    auto raw = [X1, X2, F0, a](double t) {
        const double s = t - a;
        return Mat((Mat(s * X1 + s * s * X2)).exp() * F0);
    };
    return LagrangianPath(a, b, raw);
}

// Symplectic-matrix path G(t) = exp(t X), G(a) = I.
inline std::function<Mat(double)> random_symplectic_path(Rng& rng, int n, double a = 0.0,
                                                         double speed = 2.0) {
    const Mat X = j_matrix(n) * random_symmetric(rng, 2 * n, speed);
    return [X, a](double t) { return Mat((Mat((t - a) * X)).exp()); };
}

// Vertical-preserving symplectic path B(t); optional endpoint constraints make
// B(0) preserve N*V0 and B(1) preserve N*V1 (alpha(t_i) maps V_i to itself and
// sigma(t_i) vanishes on V_i x V_i).
inline std::function<Mat(double)> random_sp_v_path(Rng& rng, int n, const Subspace* V0 = nullptr,
                                                   const Subspace* V1 = nullptr,
                                                   double scale = 0.6) {
    const Mat K0 = gaussian(rng, n, n, scale);
    const Mat K1 = gaussian(rng, n, n, scale);
    Mat S0 = random_symmetric(rng, n, scale);
    Mat S1 = random_symmetric(rng, n, scale);
    // generator of alpha(t): block-triangular at the endpoints so that
    // alpha = exp(k) preserves the required subspace there
    auto fix_generator = [](Mat K, const Subspace* V) {
        if (!V) return K;
        const Mat P = V->basis() * V->basis().transpose();
        const Mat I = Mat::Identity(K.rows(), K.cols());
        return Mat(K - (I - P) * K * P);
    };
    const Mat K0f = fix_generator(K0, V0);
    const Mat K1f = fix_generator(K1, V1);
    auto fix_sigma = [](Mat S, const Subspace* V) {
        if (!V) return S;
        const Mat P = V->basis() * V->basis().transpose();
        return Mat(S - P * S * P);
    };
    const Mat S0f = fix_sigma(S0, V0);
    const Mat S1f = fix_sigma(S1, V1);
    return [K0f, K1f, S0f, S1f](double t) {
        const Mat K = (1.0 - t) * K0f + t * K1f;
        const Mat alpha = K.exp();
        const Mat sigma = (1.0 - t) * S0f + t * S1f;
        return make_sp_v(alpha, sigma);
    };
}

// Loop in Sp_v with B(0) = B(1); any such gauge preserves the diagonal
// conormal in the doubled construction.
inline std::function<Mat(double)> random_sp_v_loop(Rng& rng, int n, double scale = 0.6) {
    const Mat K0 = gaussian(rng, n, n, scale);
    const Mat K1 = gaussian(rng, n, n, scale);
    Mat S0 = random_symmetric(rng, n, scale);
    Mat S1 = random_symmetric(rng, n, scale);
    return [K0, K1, S0, S1](double t) {
        const double w = std::sin(M_PI * t);
        const Mat K = K0 + w * K1;
        const Mat sigma = S0 + w * S1;
        return make_sp_v(Mat(K.exp()), sigma);
    };
}

}  // namespace maslov::gen
