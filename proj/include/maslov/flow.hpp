#pragma once

#include <cmath>
#include <vector>

#include "maslov/hamiltonian.hpp"

namespace maslov {

struct FlowOptions {
    double step = 1e-3;        // nominal step; shrunk so the interval divides evenly
    int max_newton = 30;       // inner iterations per implicit-midpoint step
    double newton_tol = 1e-13; // relative tolerance on the stage residual
};

struct FlowStepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// One implicit-midpoint step from (t, z) of size h.
inline Vec midpoint_step(const HamiltonianSystem& H, double t, const Vec& z, double h,
                         const FlowOptions& opt) {
    const double tm = t + 0.5 * h;
    Vec w = z + h * H.vector_field(tm, z);  // Euler predictor
    const double scale = std::max(1.0, z.norm());
    for (int it = 0; it < opt.max_newton; ++it) {
        const Vec mid = 0.5 * (z + w);
        const Vec r = w - z - h * H.vector_field(tm, mid);
        if (r.norm() <= opt.newton_tol * scale) return w;
        const Mat Jac =
            Mat::Identity(z.size(), z.size()) - 0.5 * h * H.linearization(tm, mid);
        w -= Jac.partialPivLu().solve(r);
    }
    const Vec mid = 0.5 * (z + w);
    if ((w - z - h * H.vector_field(tm, mid)).norm() <= 1e3 * opt.newton_tol * scale) return w;
    throw FlowStepError("implicit midpoint step did not converge at t = " + std::to_string(t));
}

// Cayley transport of the monodromy through the same step: the implicit
// midpoint discretization of M' = A M, exactly symplectic because J A is
// symmetric.
inline Mat cayley_update(const Mat& A, double h, const Mat& M) {
    const int m = static_cast<int>(A.rows());
    const Mat I = Mat::Identity(m, m);
    return (I - 0.5 * h * A).partialPivLu().solve((I + 0.5 * h * A) * M);
}

}  // namespace detail

// Trajectory of the Hamiltonian flow together with the linearized flow along
// it, on a fixed uniform grid.  Off-grid queries take a single deterministic
// substep from the grid node on the left, so they agree with the stored values
// at the nodes and vary continuously in between.
class FlowResult {
public:
    FlowResult(const HamiltonianSystem* H, FlowOptions opt, double t0, std::vector<Vec> states,
               std::vector<Mat> monodromies, double h)
        : H_(H), opt_(opt), t0_(t0), h_(h), states_(std::move(states)),
          monodromies_(std::move(monodromies)) {}

    double t_begin() const { return t0_; }
    double t_end() const { return t0_ + h_ * (static_cast<double>(states_.size()) - 1.0); }
    double step() const { return h_; }
    int grid_size() const { return static_cast<int>(states_.size()); }
    const HamiltonianSystem& system() const { return *H_; }

    const std::vector<Vec>& states() const { return states_; }
    const std::vector<Mat>& monodromies() const { return monodromies_; }

    Vec state_at(double t) const {
        const auto [k, dt] = locate(t);
        if (dt == 0.0) return states_[k];
        return detail::midpoint_step(*H_, t0_ + k * h_, states_[k], dt, opt_);
    }

    Mat monodromy_at(double t) const {
        const auto [k, dt] = locate(t);
        if (dt == 0.0) return monodromies_[k];
        const double tk = t0_ + k * h_;
        const Vec z1 = detail::midpoint_step(*H_, tk, states_[k], dt, opt_);
        const Mat A = H_->linearization(tk + 0.5 * dt, Vec(0.5 * (states_[k] + z1)));
        return detail::cayley_update(A, dt, monodromies_[k]);
    }

    // max over grid nodes of |M^T J M - J|
    double symplectic_defect() const {
        const int n = H_->dim();
        const Mat J = j_matrix(n);
        double d = 0.0;
        for (const auto& M : monodromies_)
            d = std::max(d, (M.transpose() * J * M - J).cwiseAbs().maxCoeff());
        return d;
    }

    // discrete action integral int p dq - H dt along the trajectory
    double action() const {
        double S = 0.0;
        const int n = H_->dim();
        for (std::size_t k = 0; k + 1 < states_.size(); ++k) {
            const Vec mid = 0.5 * (states_[k] + states_[k + 1]);
            const Vec dq = states_[k + 1].head(n) - states_[k].head(n);
            S += mid.tail(n).dot(dq) - h_ * H_->value(t0_ + (k + 0.5) * h_, mid);
        }
        return S;
    }

private:
    std::pair<int, double> locate(double t) const {
        if (t < t0_ - 1e-12 || t > t_end() + 1e-12)
            throw std::invalid_argument("FlowResult: query time outside the integration interval");
        t = std::min(std::max(t, t0_), t_end());
        int k = static_cast<int>(std::floor((t - t0_) / h_));
        k = std::min(k, grid_size() - 1);
        double dt = t - (t0_ + k * h_);
        if (dt < 1e-14 * std::max(1.0, std::abs(t))) dt = 0.0;
        return {k, dt};
    }

    const HamiltonianSystem* H_;
    FlowOptions opt_;
    double t0_, h_;
    std::vector<Vec> states_;
    std::vector<Mat> monodromies_;
};

// Integrates z' = X_H(t, z), M' = A(t, z) M with M(t0) = I over [t0, t1].
// The caller keeps the HamiltonianSystem alive while the result is in use.
inline FlowResult integrate_flow(const HamiltonianSystem& H, const Vec& z0, double t0, double t1,
                                 const FlowOptions& opt = {}) {
    if (!(t1 > t0)) throw std::invalid_argument("integrate_flow: need t1 > t0");
    if (z0.size() != 2 * H.dim())
        throw std::invalid_argument("integrate_flow: initial state has wrong dimension");
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / opt.step - 1e-9)));
    const double h = (t1 - t0) / steps;

    std::vector<Vec> zs;
    std::vector<Mat> Ms;
    zs.reserve(steps + 1);
    Ms.reserve(steps + 1);
    zs.push_back(z0);
    Ms.push_back(Mat::Identity(2 * H.dim(), 2 * H.dim()));
    for (int k = 0; k < steps; ++k) {
        const double tk = t0 + k * h;
        const Vec z1 = detail::midpoint_step(H, tk, zs.back(), h, opt);
        const Mat A = H.linearization(tk + 0.5 * h, Vec(0.5 * (zs.back() + z1)));
        Ms.push_back(detail::cayley_update(A, h, Ms.back()));
        zs.push_back(z1);
    }
    return FlowResult(&H, opt, t0, std::move(zs), std::move(Ms), h);
}

}  // namespace maslov
