#pragma once

#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "maslov/boundary.hpp"
#include "maslov/hamiltonian.hpp"

namespace maslov {

// Electromagnetic Lagrangian L(t,q,v) = <A(t,q)v,v>/2 + <alpha(t,q),v> - V(t,q)
// with A symmetric positive definite.  An optional analytic hook for D_q L
// sharpens the finite-difference coefficient derivatives.
class ElectromagneticLagrangian {
public:
    using MatFn = std::function<Mat(double, const Vec&)>;
    using VecFn = std::function<Vec(double, const Vec&)>;
    using ScalFn = std::function<double(double, const Vec&)>;
    using DqFn = std::function<Vec(double, const Vec&, const Vec&)>;

    static constexpr double fd_step = 1e-6;
    static constexpr double coeff_fd_step = 1e-5;
    static constexpr double positivity_floor = 1e-8;

    ElectromagneticLagrangian(int n, BaseSpace base, MatFn A, VecFn alpha, ScalFn V,
                              DqFn dq_value = nullptr, std::string name = "custom")
        : n_(n), base_(base), A_(std::move(A)), alpha_(std::move(alpha)), V_(std::move(V)),
          dq_(std::move(dq_value)), name_(std::move(name)) {
        if (n_ <= 0 || !A_ || !alpha_ || !V_)
            throw std::invalid_argument("ElectromagneticLagrangian: need n>0 and A, alpha, V");
    }

    int dim() const { return n_; }
    BaseSpace base() const { return base_; }
    const std::string& name() const { return name_; }

    Mat kinetic_matrix(double t, const Vec& q) const {
        Mat A = A_(t, q);
        if (A.rows() != n_ || A.cols() != n_)
            throw std::invalid_argument("ElectromagneticLagrangian: A has wrong shape");
        return 0.5 * (A + A.transpose());
    }
    Vec magnetic_potential(double t, const Vec& q) const { return alpha_(t, q); }
    double scalar_potential(double t, const Vec& q) const { return V_(t, q); }

    double value(double t, const Vec& q, const Vec& v) const {
        const Mat A = kinetic_matrix(t, q);
        return 0.5 * v.dot(A * v) + alpha_(t, q).dot(v) - V_(t, q);
    }

    // D_v L = A v + alpha, exact.
    Vec dv_value(double t, const Vec& q, const Vec& v) const {
        return kinetic_matrix(t, q) * v + alpha_(t, q);
    }

    Vec dq_value(double t, const Vec& q, const Vec& v) const {
        if (dq_) return dq_(t, q, v);
        Vec g(n_);
        for (int j = 0; j < n_; ++j) {
            Vec qp = q, qm = q;
            qp(j) += fd_step;
            qm(j) -= fd_step;
            g(j) = (value(t, qp, v) - value(t, qm, v)) / (2.0 * fd_step);
        }
        return g;
    }

    // B = d/dq (A v + alpha), the mixed second derivative D_qv L.
    Mat dqv_value(double t, const Vec& q, const Vec& v) const {
        Mat B(n_, n_);
        for (int j = 0; j < n_; ++j) {
            Vec qp = q, qm = q;
            qp(j) += coeff_fd_step;
            qm(j) -= coeff_fd_step;
            B.col(j) = (dv_value(t, qp, v) - dv_value(t, qm, v)) / (2.0 * coeff_fd_step);
        }
        return B;
    }

    // G = D_qq L, symmetrized.
    Mat dqq_value(double t, const Vec& q, const Vec& v) const {
        Mat G(n_, n_);
        for (int j = 0; j < n_; ++j) {
            Vec qp = q, qm = q;
            qp(j) += coeff_fd_step;
            qm(j) -= coeff_fd_step;
            G.col(j) = (dq_value(t, qp, v) - dq_value(t, qm, v)) / (2.0 * coeff_fd_step);
        }
        return 0.5 * (G + G.transpose());
    }

    // Smallest eigenvalue of A over random samples; the electromagnetic form
    // requires it strictly positive.
    double kinetic_floor(int samples = 32, std::uint64_t seed = 2024, double box = 1.0) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(-box, box);
        double floor_val = std::numeric_limits<double>::infinity();
        for (int s = 0; s < samples; ++s) {
            Vec q(n_);
            for (int i = 0; i < n_; ++i) q(i) = U(rng);
            const double t = 0.5 * (U(rng) + 1.0);
            Eigen::SelfAdjointEigenSolver<Mat> es(kinetic_matrix(t, q),
                                                  Eigen::EigenvaluesOnly);
            floor_val = std::min(floor_val, es.eigenvalues().minCoeff());
        }
        return floor_val;
    }

private:
    int n_;
    BaseSpace base_;
    MatFn A_;
    VecFn alpha_;
    ScalFn V_;
    DqFn dq_;
    std::string name_;
};

// Legendre map (t,q,v) -> p = D_v L and its inverse v = A^{-1}(p - alpha).
inline Vec legendre_map(const ElectromagneticLagrangian& L, double t, const Vec& q,
                        const Vec& v) {
    return L.dv_value(t, q, v);
}

inline Vec legendre_inverse(const ElectromagneticLagrangian& L, double t, const Vec& q,
                            const Vec& p) {
    const Mat A = L.kinetic_matrix(t, q);
    Eigen::PartialPivLU<Mat> lu(A);
    const Vec v = lu.solve(p - L.magnetic_potential(t, q));
    if ((A * v - (p - L.magnetic_potential(t, q))).norm() >
        1e-8 * std::max(1.0, p.norm()))
        throw std::runtime_error("legendre_inverse: kinetic matrix is singular");
    return v;
}

// Closed-form Fenchel dual H(t,q,p) = <A^{-1}(p-alpha), p-alpha>/2 + V.  The
// gradient uses the envelope identity H_q = -D_q L(t,q,v(t,q,p)).
inline HamiltonianSystem fenchel_dual(const ElectromagneticLagrangian& L) {
    const auto Lc = std::make_shared<ElectromagneticLagrangian>(L);
    const int n = L.dim();
    auto value = [Lc](double t, const Vec& q, const Vec& p) {
        const Vec v = legendre_inverse(*Lc, t, q, p);
        return 0.5 * v.dot(p - Lc->magnetic_potential(t, q)) + Lc->scalar_potential(t, q);
    };
    auto grad = [Lc, n](double t, const Vec& q, const Vec& p) {
        const Vec v = legendre_inverse(*Lc, t, q, p);
        Vec g(2 * n);
        g.head(n) = -Lc->dq_value(t, q, v);
        g.tail(n) = v;
        return g;
    };
    return HamiltonianSystem(n, L.base(), value, grad, nullptr, L.name() + "_dual");
}

// Uniform-grid path in configuration space, piecewise linear between nodes.
struct GridPath {
    double t0 = 0.0;
    double t1 = 1.0;
    Mat nodes;  // n x (N+1)

    GridPath() = default;
    GridPath(double a, double b, Mat pts) : t0(a), t1(b), nodes(std::move(pts)) {
        if (!(t0 < t1) || nodes.cols() < 2)
            throw std::invalid_argument("GridPath: need t0 < t1 and at least two nodes");
    }

    int dim() const { return static_cast<int>(nodes.rows()); }
    int segments() const { return static_cast<int>(nodes.cols()) - 1; }
    double step() const { return (t1 - t0) / segments(); }
    double time(int k) const { return t0 + k * step(); }
    Vec node(int k) const { return nodes.col(k); }
    Vec slope(int k) const { return (nodes.col(k + 1) - nodes.col(k)) / step(); }

    Vec value(double t) const {
        const int k = locate(t);
        const double s = (t - time(k)) / step();
        return (1.0 - s) * nodes.col(k) + s * nodes.col(k + 1);
    }
    Vec velocity(double t) const { return slope(locate(t)); }

    // Second-order one-sided endpoint velocities.
    Vec velocity_start() const {
        if (segments() == 1) return slope(0);
        return (-3.0 * nodes.col(0) + 4.0 * nodes.col(1) - nodes.col(2)) / (2.0 * step());
    }
    Vec velocity_end() const {
        const int N = segments();
        if (N == 1) return slope(0);
        return (3.0 * nodes.col(N) - 4.0 * nodes.col(N - 1) + nodes.col(N - 2)) /
               (2.0 * step());
    }

    int locate(double t) const {
        int k = static_cast<int>(std::floor((t - t0) / step()));
        return std::min(std::max(k, 0), segments() - 1);
    }
};

inline GridPath grid_path_from_function(const std::function<Vec(double)>& f, double t0,
                                        double t1, int segments) {
    const Vec probe = f(t0);
    Mat nodes(probe.size(), segments + 1);
    for (int k = 0; k <= segments; ++k)
        nodes.col(k) = f(t0 + (t1 - t0) * k / static_cast<double>(segments));
    return GridPath(t0, t1, std::move(nodes));
}

// Max-norm of the discrete Euler-Lagrange residual
//   (D_vL at the two adjacent half-nodes differenced) - D_qL at the node.
inline double euler_lagrange_residual(const ElectromagneticLagrangian& L,
                                      const GridPath& path) {
    if (path.dim() != L.dim())
        throw std::invalid_argument("euler_lagrange_residual: dimension mismatch");
    const double h = path.step();
    double worst = 0.0;
    for (int k = 1; k < path.segments(); ++k) {
        const Vec qk = path.node(k);
        const Vec pm = L.dv_value(path.time(k) - 0.5 * h,
                                  0.5 * (path.node(k - 1) + qk), path.slope(k - 1));
        const Vec pp = L.dv_value(path.time(k) + 0.5 * h,
                                  0.5 * (qk + path.node(k + 1)), path.slope(k));
        const Vec vbar = (path.node(k + 1) - path.node(k - 1)) / (2.0 * h);
        const Vec r = (pp - pm) / h - L.dq_value(path.time(k), qk, vbar);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

// Natural boundary residual max over a basis (xi0, xi1) of W of
// |<p(0), xi0> - <p(1), xi1>| with p = D_v L at the endpoints.
inline double natural_bc_residual(const ElectromagneticLagrangian& L, double t0, const Vec& q0,
                                  const Vec& v0, double t1, const Vec& q1, const Vec& v1,
                                  const NonlocalBoundary& bnd,
                                  double constraint_tol = 1e-6) {
    const Vec c = bnd.constraint(q0, q1);
    if (c.size() > 0 && c.cwiseAbs().maxCoeff() > constraint_tol)
        throw std::invalid_argument("natural_bc_residual: endpoints violate the constraint");
    const Vec p0 = L.dv_value(t0, q0, v0);
    const Vec p1 = L.dv_value(t1, q1, v1);
    const Mat W = bnd.tangent().basis();  // 2n x dim W
    double worst = 0.0;
    for (int j = 0; j < W.cols(); ++j) {
        const Vec xi0 = W.col(j).head(L.dim());
        const Vec xi1 = W.col(j).tail(L.dim());
        worst = std::max(worst, std::abs(p0.dot(xi0) - p1.dot(xi1)));
    }
    return worst;
}

inline double natural_bc_residual(const ElectromagneticLagrangian& L, const GridPath& path,
                                  const NonlocalBoundary& bnd, double constraint_tol = 1e-6) {
    return natural_bc_residual(L, path.t0, path.node(0), path.velocity_start(), path.t1,
                               path.node(path.segments()), path.velocity_end(), bnd,
                               constraint_tol);
}

namespace detail {
constexpr double gauss2_offset = 0.28867513459481288225;  // 1/(2 sqrt 3)
}

// Action of a piecewise-linear path, 2-point Gauss per element.
inline double action_lagrangian(const ElectromagneticLagrangian& L, const GridPath& path) {
    const double h = path.step();
    double total = 0.0;
    for (int k = 0; k < path.segments(); ++k) {
        const Vec v = path.slope(k);
        const double tm = path.time(k) + 0.5 * h;
        for (const double s : {-detail::gauss2_offset, detail::gauss2_offset}) {
            const double t = tm + s * h;
            total += 0.5 * h * L.value(t, path.value(t), v);
        }
    }
    return total;
}

// Hamiltonian action of a phase path sampled on a uniform grid (rows (q, p)),
// same quadrature: integral of <p, qdot> - H.
inline double action_hamiltonian_grid(const HamiltonianSystem& H, const GridPath& phase) {
    const int n = H.dim();
    if (phase.dim() != 2 * n)
        throw std::invalid_argument("action_hamiltonian_grid: phase path must have 2n rows");
    const double h = phase.step();
    double total = 0.0;
    for (int k = 0; k < phase.segments(); ++k) {
        const Vec vel = phase.slope(k);
        const double tm = phase.time(k) + 0.5 * h;
        for (const double s : {-detail::gauss2_offset, detail::gauss2_offset}) {
            const double t = tm + s * h;
            const Vec z = phase.value(t);
            total += 0.5 * h * (z.tail(n).dot(vel.head(n)) - H.value(t, z));
        }
    }
    return total;
}

struct FenchelMargin {
    double margin = 0.0;        // S_L(q) - A_H(x), quadrature of a pointwise-nonnegative gap
    double max_pointwise = 0.0; // largest gap seen at a quadrature node
    bool legendre_related = false;
};

// Lemma-style comparison of the two actions.  The integrand
//   L(t,q,qdot) - <p,qdot> + H(t,q,p)
// is the Fenchel-Young gap, nonnegative pointwise and zero exactly on
// Legendre-related pairs, so the margin is computed as a single quadrature of
// the gap rather than a difference of separately accumulated integrals.
inline FenchelMargin fenchel_inequality_check(const ElectromagneticLagrangian& L,
                                              const GridPath& phase,
                                              double equality_tol = 1e-8) {
    const int n = L.dim();
    if (phase.dim() != 2 * n)
        throw std::invalid_argument("fenchel_inequality_check: phase path must have 2n rows");
    const HamiltonianSystem H = fenchel_dual(L);
    const double h = phase.step();
    FenchelMargin out;
    for (int k = 0; k < phase.segments(); ++k) {
        const Vec vel = phase.slope(k).head(n);
        const double tm = phase.time(k) + 0.5 * h;
        for (const double s : {-detail::gauss2_offset, detail::gauss2_offset}) {
            const double t = tm + s * h;
            const Vec z = phase.value(t);
            const double gap = L.value(t, z.head(n), vel) - z.tail(n).dot(vel) +
                               H.value(t, z);
            out.margin += 0.5 * h * gap;
            out.max_pointwise = std::max(out.max_pointwise, gap);
        }
    }
    out.legendre_related = std::abs(out.margin) <= equality_tol;
    return out;
}

// Fitted constants for the linear-growth bound |grad H| <= c0 + c1 |z| over a
// deterministic sample cloud; by construction the bound holds on the samples.
struct GrowthFit {
    double c0 = 0.0;
    double c1 = 0.0;
    double max_radius = 0.0;
    int samples = 0;
};

inline GrowthFit fit_growth_constants(const HamiltonianSystem& H, int samples = 200,
                                      std::uint64_t seed = 2024, double max_radius = 8.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    GrowthFit fit;
    fit.max_radius = max_radius;
    std::vector<std::pair<double, double>> cloud;  // (|z|, |grad H|)
    for (int s = 0; s < samples; ++s) {
        Vec z(2 * H.dim());
        for (int i = 0; i < z.size(); ++i) z(i) = U(rng);
        if (z.norm() > 0) z *= (max_radius * std::pow((s + 1.0) / samples, 1.5)) / z.norm();
        const double t = 0.5 * (U(rng) + 1.0);
        cloud.emplace_back(z.norm(), H.gradient(t, z).norm());
    }
    for (const auto& [r, g] : cloud)
        if (r <= 1.0) fit.c0 = std::max(fit.c0, g);
    for (const auto& [r, g] : cloud)
        if (r > 1.0) fit.c1 = std::max(fit.c1, (g - fit.c0) / r);
    fit.c1 = std::max(fit.c1, 0.0);
    fit.samples = samples;
    return fit;
}

// Round-trip discrepancy |L(t,q,v) - (<p,v> - H(t,q,p))| at the Legendre image
// of random samples.
inline double fenchel_roundtrip_error(const ElectromagneticLagrangian& L, int samples = 200,
                                      std::uint64_t seed = 2024, double box = 1.0) {
    const HamiltonianSystem H = fenchel_dual(L);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-box, box);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        Vec q(L.dim()), v(L.dim());
        for (int i = 0; i < L.dim(); ++i) {
            q(i) = U(rng);
            v(i) = U(rng);
        }
        const double t = 0.5 * (U(rng) + 1.0);
        const Vec p = legendre_map(L, t, q, v);
        Vec z(2 * L.dim());
        z << q, p;
        worst = std::max(worst,
                         std::abs(L.value(t, q, v) - (p.dot(v) - H.value(t, z))));
    }
    return worst;
}

// Presets.

inline ElectromagneticLagrangian free_lagrangian(int n, BaseSpace base = BaseSpace::line) {
    return ElectromagneticLagrangian(
        n, base, [n](double, const Vec&) { return Mat(Mat::Identity(n, n)); },
        [n](double, const Vec&) { return Vec(Vec::Zero(n)); },
        [](double, const Vec&) { return 0.0; },
        [n](double, const Vec&, const Vec&) { return Vec(Vec::Zero(n)); }, "free");
}

// L = |v|^2/2 - sum omega_i^2 q_i^2 / 2, dual to the harmonic oscillator.
inline ElectromagneticLagrangian harmonic_lagrangian(const Vec& omega) {
    const int n = static_cast<int>(omega.size());
    const Vec w2 = omega.array().square();
    return ElectromagneticLagrangian(
        n, BaseSpace::line, [n](double, const Vec&) { return Mat(Mat::Identity(n, n)); },
        [n](double, const Vec&) { return Vec(Vec::Zero(n)); },
        [w2](double, const Vec& q) { return 0.5 * q.dot(w2.asDiagonal() * q); },
        [w2](double, const Vec& q, const Vec&) { return Vec(-(w2.asDiagonal() * q)); },
        "harmonic");
}

inline ElectromagneticLagrangian harmonic_lagrangian(int n, double omega) {
    return harmonic_lagrangian(Vec(Vec::Constant(n, omega)));
}

// L = |v|^2/2 - eps sum cos(2 pi (q_i - a t)) on the torus, dual to the
// traveling pendulum Hamiltonian.
inline ElectromagneticLagrangian pendulum_lagrangian(int n, double eps, double a = 0.0) {
    const double tp = 2.0 * M_PI;
    return ElectromagneticLagrangian(
        n, BaseSpace::torus, [n](double, const Vec&) { return Mat(Mat::Identity(n, n)); },
        [n](double, const Vec&) { return Vec(Vec::Zero(n)); },
        [eps, a, tp](double t, const Vec& q) {
            double V = 0.0;
            for (int i = 0; i < q.size(); ++i) V += eps * std::cos(tp * (q(i) - a * t));
            return V;
        },
        [eps, a, tp](double t, const Vec& q, const Vec&) {
            Vec g(q.size());
            for (int i = 0; i < q.size(); ++i) g(i) = eps * tp * std::sin(tp * (q(i) - a * t));
            return g;
        },
        "pendulum");
}

// Pendulum on the circle with amplitude-modulated potential
//   V(t, q) = eps (1 + sigma sin(2 pi t)) cos(2 pi q).
// The modulation breaks the time-shift symmetry, so winding-class problems
// become Morse: each class of the periodic problem carries two nondegenerate
// critical points once sigma > 0.
inline ElectromagneticLagrangian modulated_pendulum_lagrangian(double eps, double sigma) {
    const double tp = 2.0 * M_PI;
    return ElectromagneticLagrangian(
        1, BaseSpace::torus, [](double, const Vec&) { return Mat(Mat::Identity(1, 1)); },
        [](double, const Vec&) { return Vec(Vec::Zero(1)); },
        [eps, sigma, tp](double t, const Vec& q) {
            return eps * (1.0 + sigma * std::sin(tp * t)) * std::cos(tp * q(0));
        },
        [eps, sigma, tp](double t, const Vec& q, const Vec&) {
            Vec g(1);
            g(0) = eps * (1.0 + sigma * std::sin(tp * t)) * tp * std::sin(tp * q(0));
            return g;
        },
        "modulated_pendulum");
}

// Double well on the line: the action density is |v|^2/2 + W(q) with
//   W(q) = kappa (q^2 - a^2)^2 + tilt q,
// so V = -W.  A small tilt separates the two well minima by action.
inline ElectromagneticLagrangian double_well_lagrangian(double kappa, double a,
                                                        double tilt = 0.0) {
    return ElectromagneticLagrangian(
        1, BaseSpace::line, [](double, const Vec&) { return Mat(Mat::Identity(1, 1)); },
        [](double, const Vec&) { return Vec(Vec::Zero(1)); },
        [kappa, a, tilt](double, const Vec& q) {
            const double r = q(0) * q(0) - a * a;
            return -(kappa * r * r + tilt * q(0));
        },
        [kappa, a, tilt](double, const Vec& q, const Vec&) {
            Vec g(1);
            g(0) = 4.0 * kappa * q(0) * (q(0) * q(0) - a * a) + tilt;
            return g;
        },
        "double_well");
}

// Separable polynomial potential: V(q) = sum_i p(q_i) with
// p(x) = sum_k coeffs[k] x^k.  Covers anharmonic wells and custom fixtures
// configured from coefficient lists.
inline ElectromagneticLagrangian polynomial_lagrangian(const Vec& coeffs, int n = 1,
                                                       BaseSpace base = BaseSpace::line) {
    if (coeffs.size() == 0)
        throw std::invalid_argument("polynomial_lagrangian: empty coefficient list");
    return ElectromagneticLagrangian(
        n, base, [n](double, const Vec&) { return Mat(Mat::Identity(n, n)); },
        [n](double, const Vec&) { return Vec(Vec::Zero(n)); },
        [coeffs](double, const Vec& q) {
            double V = 0.0;
            for (int i = 0; i < q.size(); ++i) {
                double xk = 1.0;
                for (int k = 0; k < coeffs.size(); ++k, xk *= q(i)) V += coeffs(k) * xk;
            }
            return V;
        },
        [coeffs](double, const Vec& q, const Vec&) {
            Vec g = Vec::Zero(q.size());
            for (int i = 0; i < q.size(); ++i) {
                double xk = 1.0;
                for (int k = 1; k < coeffs.size(); ++k, xk *= q(i)) g(i) -= k * coeffs(k) * xk;
            }
            return g;
        },
        "polynomial");
}

// Planar charge in a uniform magnetic field b with an isotropic quadratic
// potential: A = I, alpha = b/2 (-q2, q1), V = omega^2 |q|^2 / 2.
inline ElectromagneticLagrangian magnetic_lagrangian(double b, double omega = 0.0) {
    return ElectromagneticLagrangian(
        2, BaseSpace::line, [](double, const Vec&) { return Mat(Mat::Identity(2, 2)); },
        [b](double, const Vec& q) {
            Vec a(2);
            a << -0.5 * b * q(1), 0.5 * b * q(0);
            return a;
        },
        [omega](double, const Vec& q) { return 0.5 * omega * omega * q.squaredNorm(); },
        [b, omega](double, const Vec& q, const Vec& v) {
            Vec g(2);
            g << 0.5 * b * v(1) - omega * omega * q(0),
                -0.5 * b * v(0) - omega * omega * q(1);
            return g;
        },
        "magnetic");
}

}  // namespace maslov
