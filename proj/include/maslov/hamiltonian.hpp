#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "maslov/symplectic.hpp"

namespace maslov {

// Configuration space of the q variable.  Torus means R^n / Z^n: the dynamics
// is integrated on the universal cover, periodicity only matters to boundary
// conditions and loop-space topology.
enum class BaseSpace { line, torus };

// Time-dependent Hamiltonian on T*R^n (or T*T^n on the cover).  Analytic
// gradient and Hessian hooks are optional; central finite differences fill in
// for whatever is missing.  The Hessian is symmetrized, so the linearization
// A = -J hess is infinitesimally symplectic to machine precision either way.
class HamiltonianSystem {
public:
    using ValueFn = std::function<double(double, const Vec&, const Vec&)>;
    using GradFn = std::function<Vec(double, const Vec&, const Vec&)>;  // stacked (H_q, H_p)
    using HessFn = std::function<Mat(double, const Vec&, const Vec&)>;  // 2n x 2n

    HamiltonianSystem(int n, BaseSpace base, ValueFn value, GradFn grad = nullptr,
                      HessFn hess = nullptr, std::string name = "custom")
        : n_(n), base_(base), value_(std::move(value)), grad_(std::move(grad)),
          hess_(std::move(hess)), name_(std::move(name)) {
        if (n_ <= 0 || !value_) throw std::invalid_argument("HamiltonianSystem: need n>0 and a value");
    }

    int dim() const { return n_; }
    BaseSpace base() const { return base_; }
    const std::string& name() const { return name_; }
    bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

    double value(double t, const Vec& z) const { return value_(t, z.head(n_), z.tail(n_)); }

    Vec gradient(double t, const Vec& z) const {
        if (grad_) return grad_(t, z.head(n_), z.tail(n_));
        Vec g(2 * n_);
        for (int i = 0; i < 2 * n_; ++i) {
            Vec zp = z, zm = z;
            zp(i) += grad_step;
            zm(i) -= grad_step;
            g(i) = (value(t, zp) - value(t, zm)) / (2.0 * grad_step);
        }
        return g;
    }

    // q' = H_p, p' = -H_q
    Vec vector_field(double t, const Vec& z) const {
        const Vec g = gradient(t, z);
        Vec f(2 * n_);
        f.head(n_) = g.tail(n_);
        f.tail(n_) = -g.head(n_);
        return f;
    }

    Mat hessian(double t, const Vec& z) const {
        Mat S(2 * n_, 2 * n_);
        if (hess_) {
            S = hess_(t, z.head(n_), z.tail(n_));
        } else if (grad_) {
            for (int i = 0; i < 2 * n_; ++i) {
                Vec zp = z, zm = z;
                zp(i) += hess_step;
                zm(i) -= hess_step;
                S.col(i) = (gradient(t, zp) - gradient(t, zm)) / (2.0 * hess_step);
            }
        } else {
            const double h = value_hess_step;
            const double f0 = value(t, z);
            for (int i = 0; i < 2 * n_; ++i) {
                for (int j = i; j < 2 * n_; ++j) {
                    Vec za = z, zb = z, zc = z, zd = z;
                    if (i == j) {
                        za(i) += h;
                        zb(i) -= h;
                        S(i, i) = (value(t, za) - 2.0 * f0 + value(t, zb)) / (h * h);
                    } else {
                        za(i) += h; za(j) += h;
                        zb(i) += h; zb(j) -= h;
                        zc(i) -= h; zc(j) += h;
                        zd(i) -= h; zd(j) -= h;
                        S(i, j) = S(j, i) =
                            (value(t, za) - value(t, zb) - value(t, zc) + value(t, zd)) /
                            (4.0 * h * h);
                    }
                }
            }
        }
        return 0.5 * (S + S.transpose());
    }

    // A(t,z) = -J hess: the generator of the variational flow M' = A M.
    Mat linearization(double t, const Vec& z) const {
        const Mat S = hessian(t, z);
        Mat A(2 * n_, 2 * n_);
        A.topRows(n_) = S.bottomRows(n_);
        A.bottomRows(n_) = -S.topRows(n_);
        return A;
    }

    struct HessianBlocks {
        Mat qq, qp, pp;  // qp = d^2 H / dq dp, an n x n block
    };
    HessianBlocks hessian_blocks(double t, const Vec& z) const {
        const Mat S = hessian(t, z);
        return {S.topLeftCorner(n_, n_), S.topRightCorner(n_, n_),
                S.bottomRightCorner(n_, n_)};
    }

    static constexpr double grad_step = 1e-6;
    static constexpr double hess_step = 1e-5;
    static constexpr double value_hess_step = 1e-4;

private:
    int n_;
    BaseSpace base_;
    ValueFn value_;
    GradFn grad_;
    HessFn hess_;
    std::string name_;
};

struct GradientCheckReport {
    double max_gradient_error = 0.0;
    double max_hessian_asymmetry = 0.0;
    int samples = 0;
};

// Compares analytic gradients against central differences of the value on
// random phase points (no-op bounds when the gradient is itself numerical).
inline GradientCheckReport check_gradient(const HamiltonianSystem& H, int samples = 50,
                                          std::uint64_t seed = 2024, double box = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-box, box);
    GradientCheckReport rep;
    const int n = H.dim();
    for (int s = 0; s < samples; ++s) {
        Vec z(2 * n);
        for (int i = 0; i < 2 * n; ++i) z(i) = U(rng);
        const double t = U(rng);
        const Vec g = H.gradient(t, z);
        for (int i = 0; i < 2 * n; ++i) {
            Vec zp = z, zm = z;
            zp(i) += HamiltonianSystem::grad_step;
            zm(i) -= HamiltonianSystem::grad_step;
            const double fd = (H.value(t, zp) - H.value(t, zm)) / (2.0 * HamiltonianSystem::grad_step);
            rep.max_gradient_error = std::max(rep.max_gradient_error, std::abs(g(i) - fd));
        }
        const Mat S = H.hessian(t, z);
        rep.max_hessian_asymmetry =
            std::max(rep.max_hessian_asymmetry, (S - S.transpose()).cwiseAbs().maxCoeff());
        ++rep.samples;
    }
    return rep;
}

// ----- presets -----

// H = |p|^2 / 2
inline HamiltonianSystem free_particle(int n, BaseSpace base = BaseSpace::line) {
    return HamiltonianSystem(
        n, base, [](double, const Vec&, const Vec& p) { return 0.5 * p.squaredNorm(); },
        [n](double, const Vec&, const Vec& p) {
            Vec g = Vec::Zero(2 * n);
            g.tail(n) = p;
            return g;
        },
        [n](double, const Vec&, const Vec&) {
            Mat S = Mat::Zero(2 * n, 2 * n);
            S.bottomRightCorner(n, n) = Mat::Identity(n, n);
            return S;
        },
        "free");
}

// H = |p|^2 / 2 + sum_i omega_i^2 q_i^2 / 2
inline HamiltonianSystem harmonic_oscillator(const Vec& omega) {
    const int n = static_cast<int>(omega.size());
    const Vec w2 = omega.array().square();
    return HamiltonianSystem(
        n, BaseSpace::line,
        [w2](double, const Vec& q, const Vec& p) {
            return 0.5 * p.squaredNorm() + 0.5 * q.dot(w2.asDiagonal() * q);
        },
        [n, w2](double, const Vec& q, const Vec& p) {
            Vec g(2 * n);
            g.head(n) = w2.asDiagonal() * q;
            g.tail(n) = p;
            return g;
        },
        [n, w2](double, const Vec&, const Vec&) {
            Mat S = Mat::Zero(2 * n, 2 * n);
            S.topLeftCorner(n, n) = w2.asDiagonal();
            S.bottomRightCorner(n, n) = Mat::Identity(n, n);
            return S;
        },
        "harmonic");
}

inline HamiltonianSystem harmonic_oscillator(int n, double omega) {
    return harmonic_oscillator(Vec::Constant(n, omega));
}

// H = |p|^2 / 2 + eps * sum_i cos(2 pi (q_i - a t)) on the unit torus; the
// potential well travels at speed a.
inline HamiltonianSystem pendulum_traveling(int n, double eps, double a) {
    const double tp = 2.0 * M_PI;
    return HamiltonianSystem(
        n, BaseSpace::torus,
        [eps, a, tp](double t, const Vec& q, const Vec& p) {
            double V = 0.0;
            for (int i = 0; i < q.size(); ++i) V += std::cos(tp * (q(i) - a * t));
            return 0.5 * p.squaredNorm() + eps * V;
        },
        [n, eps, a, tp](double t, const Vec& q, const Vec& p) {
            Vec g(2 * n);
            for (int i = 0; i < n; ++i) g(i) = -eps * tp * std::sin(tp * (q(i) - a * t));
            g.tail(n) = p;
            return g;
        },
        [n, eps, a, tp](double t, const Vec& q, const Vec&) {
            Mat S = Mat::Zero(2 * n, 2 * n);
            for (int i = 0; i < n; ++i) S(i, i) = -eps * tp * tp * std::cos(tp * (q(i) - a * t));
            S.bottomRightCorner(n, n) = Mat::Identity(n, n);
            return S;
        },
        "pendulum");
}

// Autonomous quadratic H = z^T S z / 2 for a fixed symmetric S.
inline HamiltonianSystem quadratic_hamiltonian(const Mat& S, BaseSpace base = BaseSpace::line) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0)
        throw std::invalid_argument("quadratic_hamiltonian: even symmetric matrix required");
    const int n = static_cast<int>(S.rows()) / 2;
    const Mat Ssym = 0.5 * (S + S.transpose());
    return HamiltonianSystem(
        n, base,
        [Ssym, n](double, const Vec& q, const Vec& p) {
            Vec z(2 * n);
            z << q, p;
            return 0.5 * z.dot(Ssym * z);
        },
        [Ssym, n](double, const Vec& q, const Vec& p) {
            Vec z(2 * n);
            z << q, p;
            return Vec(Ssym * z);
        },
        [Ssym](double, const Vec&, const Vec&) { return Ssym; }, "quadratic");
}

}  // namespace maslov
