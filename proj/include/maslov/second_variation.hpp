#pragma once

#include <vector>

#include "maslov/lagrangian.hpp"

namespace maslov {

// Assembled second variation of the action along a path, restricted to the
// W-constrained piecewise-linear space: form[u,v] = integral of
//   <A u', v'> + <B u, v'> + <B v, u'> + <G u, v>
// with A = D_vv L, B = D_qv L, G = D_qq L evaluated along the path.
struct SecondVariation {
    Mat form;              // constrained stiffness-type array
    Mat mass;              // constrained L2 Gram
    Mat constraint_basis;  // nodal-space columns spanning {(u(0),u(1)) in W}
    int elements = 0;
};

inline SecondVariation assemble_second_variation(const ElectromagneticLagrangian& L,
                                                 const GridPath& path,
                                                 const NonlocalBoundary& bnd, int elements) {
    const int n = L.dim();
    if (path.dim() != n || bnd.base_dim() != n)
        throw std::invalid_argument("assemble_second_variation: dimension mismatch");
    const int N = elements;
    const int D = n * (N + 1);
    const double h = (path.t1 - path.t0) / N;

    Mat K = Mat::Zero(D, D);
    Mat M = Mat::Zero(D, D);
    for (int k = 0; k < N; ++k) {
        const double tmid = path.t0 + (k + 0.5) * h;
        for (const double s : {-detail::gauss2_offset, detail::gauss2_offset}) {
            const double t = tmid + s * h;
            const Vec q = path.value(t);
            const Vec v = path.velocity(t);
            const Mat A = L.kinetic_matrix(t, q);
            const Mat B = L.dqv_value(t, q, v);
            const Mat G = L.dqq_value(t, q, v);
            const double w = 0.5 * h;
            const double phi[2] = {0.5 - s, 0.5 + s};  // hat values at the Gauss point
            const double dphi[2] = {-1.0 / h, 1.0 / h};
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    const Mat block = w * (dphi[a] * dphi[b] * A + phi[a] * dphi[b] * B +
                                           dphi[a] * phi[b] * B.transpose() +
                                           phi[a] * phi[b] * G);
                    K.block(n * (k + b), n * (k + a), n, n) += block;
                    M.block(n * (k + b), n * (k + a), n, n) +=
                        w * phi[a] * phi[b] * Mat::Identity(n, n);
                }
            }
        }
    }

    // Constrained basis: interior nodes freely, endpoint pair restricted to W.
    const Mat W = bnd.tangent().basis();  // 2n x dim W, orthonormal
    const int dimW = static_cast<int>(W.cols());
    Mat Z = Mat::Zero(D, n * (N - 1) + dimW);
    for (int m = 1; m < N; ++m)
        for (int i = 0; i < n; ++i) Z(n * m + i, n * (m - 1) + i) = 1.0;
    for (int j = 0; j < dimW; ++j) {
        Z.block(0, n * (N - 1) + j, n, 1) = W.col(j).head(n);
        Z.block(n * N, n * (N - 1) + j, n, 1) = W.col(j).tail(n);
    }

    SecondVariation out;
    out.form = Z.transpose() * K * Z;
    out.form = 0.5 * (out.form + out.form.transpose()).eval();
    out.mass = Z.transpose() * M * Z;
    out.mass = 0.5 * (out.mass + out.mass.transpose()).eval();
    out.constraint_basis = std::move(Z);
    out.elements = N;
    return out;
}

struct MorseIndexResult {
    int index = 0;
    int nullity = 0;
    int elements = 0;
};

struct MeshInstabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EigencountOptions {
    int start_elements = 64;
    int max_elements = 1024;
    double zero_band_rel = 1e-7;
};

namespace detail {

inline std::pair<int, int> count_signature(const Mat& form, double band_rel) {
    Eigen::SelfAdjointEigenSolver<Mat> es(form, Eigen::EigenvaluesOnly);
    const Vec ev = es.eigenvalues();
    const double band = band_rel * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    int neg = 0, zero = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -band)
            ++neg;
        else if (ev(i) <= band)
            ++zero;
    }
    return {neg, zero};
}

}  // namespace detail

// Morse index and nullity by eigenvalue count of the constrained second
// variation; the mesh is doubled until the counts are stable across two
// successive refinements.
inline MorseIndexResult morse_index_eigen(const ElectromagneticLagrangian& L,
                                          const GridPath& path, const NonlocalBoundary& bnd,
                                          const EigencountOptions& opt = {}) {
    std::vector<std::pair<int, int>> history;
    std::vector<int> meshes;
    for (int N = opt.start_elements; N <= opt.max_elements; N *= 2) {
        const SecondVariation sv = assemble_second_variation(L, path, bnd, N);
        history.push_back(detail::count_signature(sv.form, opt.zero_band_rel));
        meshes.push_back(N);
        const std::size_t m = history.size();
        if (m >= 3 && history[m - 1] == history[m - 2] && history[m - 2] == history[m - 3])
            return {history[m - 1].first, history[m - 1].second, N};
    }
    std::string msg = "morse_index_eigen: counts did not stabilize:";
    for (std::size_t i = 0; i < history.size(); ++i)
        msg += " N=" + std::to_string(meshes[i]) + ":(" + std::to_string(history[i].first) +
               "," + std::to_string(history[i].second) + ")";
    throw MeshInstabilityError(msg);
}

// Smallest c = 2^k such that form + c * mass is positive definite on the
// constrained space (the shifted second variation used by the crossing-count
// algorithm).
inline double select_shift_constant(const ElectromagneticLagrangian& L, const GridPath& path,
                                    const NonlocalBoundary& bnd, int elements = 128) {
    const SecondVariation sv = assemble_second_variation(L, path, bnd, elements);
    double c = 1.0;
    for (int iter = 0; iter < 60; ++iter) {
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat(sv.form + c * sv.mass),
                                              Eigen::EigenvaluesOnly);
        const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        if (es.eigenvalues().minCoeff() > 1e-7 * scale) return c;
        c *= 2.0;
    }
    throw std::runtime_error("select_shift_constant: no positive shift found");
}

}  // namespace maslov
