#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "maslov/symplectic.hpp"

namespace maslov {

// Nearest Lagrangian subspace to the span of a full-rank 2n x n matrix, via
// the unitary polar factor in the identification T*R^n ~ C^n, q + ip.
// Returns an orthonormal frame that is exactly isotropic.
inline Mat nearest_lagrangian(const Mat& F) {
    const int n = static_cast<int>(F.rows()) / 2;
    Eigen::MatrixXcd Z(n, n);
    Z.real() = F.topRows(n);
    Z.imag() = F.bottomRows(n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXcd U = svd.matrixU() * svd.matrixV().adjoint();
    Mat out(2 * n, n);
    out.topRows(n) = U.real();
    out.bottomRows(n) = U.imag();
    return out;
}

// Continuous path of Lagrangian subspaces of T*R^n over [a,b].  The evaluator
// returns a full-rank (not necessarily orthonormal) generator matrix varying
// continuously in t; an optional derivative hook provides d/dt of the same
// generator matrix for analytic paths.
class LagrangianPath {
public:
    using FrameFn = std::function<Mat(double)>;

    LagrangianPath(double a, double b, FrameFn raw, FrameFn raw_derivative = nullptr)
        : a_(a), b_(b), raw_(std::move(raw)), raw_dot_(std::move(raw_derivative)) {
        if (!(a_ < b_)) throw std::invalid_argument("LagrangianPath: empty time interval");
        const Mat F0 = raw_(a_);
        if (F0.rows() % 2 != 0 || F0.cols() != F0.rows() / 2)
            throw std::invalid_argument("LagrangianPath: evaluator must return 2n x n frames");
        n_ = static_cast<int>(F0.rows()) / 2;
    }

    double t_begin() const { return a_; }
    double t_end() const { return b_; }
    int ambient_half_dim() const { return n_; }
    bool has_derivative() const { return static_cast<bool>(raw_dot_); }

    Mat raw(double t) const { return raw_(t); }
    Mat raw_derivative(double t) const { return raw_dot_(t); }

    LagrangianFrame frame(double t) const { return LagrangianFrame(raw_(t)); }

    // Orthonormal frame without the isotropy assertion (used on perturbed or
    // interpolated evaluations where isotropy holds only to interpolation order).
    Mat orthonormal(double t) const {
        return Subspace::span(raw_(t), tol::rank_cutoff).basis();
    }

    LagrangianPath restrict(double a, double b) const {
        if (a < a_ - 1e-12 || b > b_ + 1e-12 || !(a < b))
            throw std::invalid_argument("LagrangianPath::restrict: bad subinterval");
        return LagrangianPath(a, b, raw_, raw_dot_);
    }

    static LagrangianPath constant(double a, double b, const LagrangianFrame& f) {
        const Mat F = f.columns();
        const int n = f.ambient_half_dim();
        return LagrangianPath(a, b, [F](double) { return F; },
                              [n, F](double) { return Mat(Mat::Zero(2 * n, n)); });
    }

    // Piecewise path through sampled frames; consecutive samples must stay
    // within the continuity bound (sin of largest principal angle), and
    // interpolated frames are projected back onto the Lagrangian Grassmannian.
    static LagrangianPath from_samples(std::vector<double> times, std::vector<Mat> frames,
                                       double continuity_bound = 0.2) {
        if (times.size() != frames.size() || times.size() < 2)
            throw std::invalid_argument("LagrangianPath::from_samples: need >= 2 samples");
        auto samples = std::make_shared<std::vector<std::pair<double, Mat>>>();
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (i > 0 && !(times[i] > times[i - 1]))
                throw std::invalid_argument("LagrangianPath::from_samples: times must increase");
            samples->emplace_back(times[i], nearest_lagrangian(frames[i]));
        }
        for (std::size_t i = 1; i < samples->size(); ++i) {
            const double d = subspace_distance(
                Subspace((*samples)[i].second.rows(), (*samples)[i].second),
                Subspace((*samples)[i - 1].second.rows(), (*samples)[i - 1].second));
            if (d > continuity_bound)
                throw std::invalid_argument(
                    "LagrangianPath::from_samples: consecutive samples too far apart (" +
                    std::to_string(d) + ")");
        }
        auto eval = [samples](double t) -> Mat {
            const auto& s = *samples;
            if (t <= s.front().first) return s.front().second;
            if (t >= s.back().first) return s.back().second;
            std::size_t lo = 0, hi = s.size() - 1;
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                (t < s[mid].first ? hi : lo) = mid;
            }
            const double w = (t - s[lo].first) / (s[hi].first - s[lo].first);
            return nearest_lagrangian((1.0 - w) * s[lo].second + w * s[hi].second);
        };
        return LagrangianPath(times.front(), times.back(), eval);
    }

private:
    double a_, b_;
    FrameFn raw_;
    FrameFn raw_dot_;
    int n_ = 0;
};

inline LagrangianPath apply_symplectic(const Mat& M, const LagrangianPath& path) {
    auto raw = [M, path](double t) { return Mat(M * path.raw(t)); };
    if (path.has_derivative()) {
        auto dot = [M, path](double t) { return Mat(M * path.raw_derivative(t)); };
        return LagrangianPath(path.t_begin(), path.t_end(), raw, dot);
    }
    return LagrangianPath(path.t_begin(), path.t_end(), raw);
}

struct Crossing {
    double t = 0.0;
    bool endpoint = false;
    Mat intersection;  // 2n x k orthonormal basis of lambda(t) /\ nu(t)
    Mat form;          // k x k symmetric crossing form (relative form for moving pairs)
    int signature = 0;
    bool regular = true;
};

struct MaslovOptions {
    int grid = 1024;               // initial sweep resolution
    int max_grid_doublings = 3;    // stability refinements
    double candidate_gate = 0.1;   // local-minimum gate on the transversality gap
    double crossing_gap = 1e-8;    // gap threshold accepting a crossing
    double time_tol = 1e-10;       // crossing time refinement accuracy
    double isect_cutoff = 1e-6;    // singular-value cutoff for intersection dimension
    double fd_step = 1e-5;         // finite-difference step for crossing forms
    double zero_band = 1e-8;       // relative eigenvalue zero band for signatures
    bool allow_fallback = true;    // endpoint-fixed perturbation for degenerate paths
    double fallback_eps = 1e-6;
};

namespace detail {

inline double pair_gap(const LagrangianPath& lam, const LagrangianPath& nu, double t) {
    return transversality_gap(lam.orthonormal(t), nu.orthonormal(t));
}

// Golden-section refinement of a local minimum of the gap on [lo, hi].
inline double refine_minimum(const LagrangianPath& lam, const LagrangianPath& nu, double lo,
                             double hi, double tol_t) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = pair_gap(lam, nu, c);
    double fd = pair_gap(lam, nu, d);
    while (hi - lo > tol_t) {
        if (fc < fd) {
            hi = d; d = c; fd = fc;
            c = hi - gr * (hi - lo);
            fc = pair_gap(lam, nu, c);
        } else {
            lo = c; c = d; fc = fd;
            d = lo + gr * (hi - lo);
            fd = pair_gap(lam, nu, d);
        }
    }
    return 0.5 * (lo + hi);
}

// d/ds at s=t of omega(xi_i, eta_j(s)) where eta_j(s) lies in the fixed
// Lagrangian complement `compl` of path(t) and xi_j + eta_j(s) in path(s).
// One quadratic-form factor of the crossing form; the pair form subtracts the
// same construction for the second path.
inline Mat one_sided_form(const LagrangianPath& path, const Mat& isect, const Mat& compl_frame,
                          double t, const MaslovOptions& opt) {
    const int k = static_cast<int>(isect.cols());
    const int n2 = static_cast<int>(isect.rows());
    const Mat J = j_matrix(n2 / 2);

    if (path.has_derivative()) {
        // Gamma_ij = omega(xi_i, F'(t) c_j) with F(t) c_j = xi_j.
        const Mat F = path.raw(t);
        const Mat Fdot = path.raw_derivative(t);
        Mat G(k, k);
        for (int j = 0; j < k; ++j) {
            const Vec c = F.colPivHouseholderQr().solve(isect.col(j));
            const Vec v = Fdot * c;
            for (int i = 0; i < k; ++i) G(i, j) = isect.col(i).dot(J * v);
        }
        return 0.5 * (G + G.transpose());
    }

    auto omega_at = [&](double s) -> Mat {
        const Mat F = path.orthonormal(s);
        Mat M(n2, n2);
        M << F, -compl_frame;
        const auto lu = M.partialPivLu();
        Mat W(k, k);
        for (int j = 0; j < k; ++j) {
            const Vec ab = lu.solve(isect.col(j));
            const Vec eta = compl_frame * ab.tail(compl_frame.cols());
            for (int i = 0; i < k; ++i) W(i, j) = isect.col(i).dot(J * eta);
        }
        return W;
    };

    double h = opt.fd_step;
    const double a = path.t_begin(), b = path.t_end();
    Mat D1, D2;
    if (t - a < 1e-12) {              // forward one-sided
        h = std::min(h, (b - a) / 4.0);
        auto D = [&](double hh) {
            return Mat((-3.0 * omega_at(t) + 4.0 * omega_at(t + hh) - omega_at(t + 2.0 * hh)) /
                       (2.0 * hh));
        };
        D1 = D(h); D2 = D(0.5 * h);
    } else if (b - t < 1e-12) {       // backward one-sided
        h = std::min(h, (b - a) / 4.0);
        auto D = [&](double hh) {
            return Mat((3.0 * omega_at(t) - 4.0 * omega_at(t - hh) + omega_at(t - 2.0 * hh)) /
                       (2.0 * hh));
        };
        D1 = D(h); D2 = D(0.5 * h);
    } else {                          // central
        h = std::min({h, (t - a) / 2.0, (b - t) / 2.0});
        auto D = [&](double hh) {
            return Mat((omega_at(t + hh) - omega_at(t - hh)) / (2.0 * hh));
        };
        D1 = D(h); D2 = D(0.5 * h);
    }
    Mat G = (4.0 * D2 - D1) / 3.0;
    return 0.5 * (G + G.transpose());
}

inline std::pair<int, bool> form_signature(const Mat& G, double zero_band) {
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    const double band = zero_band * std::max(scale, 1e-300);
    int sig = 0;
    bool regular = scale > 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double e = es.eigenvalues()(i);
        if (e > band) ++sig;
        else if (e < -band) --sig;
        else regular = false;
    }
    return {sig, regular};
}

}  // namespace detail

// Crossing form of the pair (lambda, nu) at time t, restricted to the
// intersection lambda(t) /\ nu(t): the relative velocity of lambda against nu,
// each side measured in a fixed Lagrangian complement.  Endpoint crossings use
// one-sided differences.
inline Crossing crossing_form(const LagrangianPath& lam, const LagrangianPath& nu, double t,
                              const MaslovOptions& opt = {}) {
    Crossing c;
    c.t = t;
    c.endpoint = (t - lam.t_begin() < 1e-12) || (lam.t_end() - t < 1e-12);
    const Mat Fl = lam.orthonormal(t);
    const Mat Fn = nu.orthonormal(t);
    c.intersection = intersection_basis(Fl, Fn, opt.isect_cutoff);
    if (c.intersection.cols() == 0)
        throw std::invalid_argument("crossing_form: paths are transversal at t");
    const Mat Gl = detail::one_sided_form(lam, c.intersection,
                                          Mat(j_matrix(lam.ambient_half_dim()) * Fl), t, opt);
    const Mat Gn = detail::one_sided_form(nu, c.intersection,
                                          Mat(j_matrix(nu.ambient_half_dim()) * Fn), t, opt);
    c.form = Gl - Gn;
    auto [sig, regular] = detail::form_signature(c.form, opt.zero_band);
    c.signature = sig;
    c.regular = regular;
    return c;
}

inline Crossing crossing_form(const LagrangianPath& lam, const LagrangianFrame& target, double t,
                              const MaslovOptions& opt = {}) {
    return crossing_form(lam, LagrangianPath::constant(lam.t_begin(), lam.t_end(), target), t, opt);
}

// All crossings of the pair on [a,b]: grid sweep of the transversality gap,
// golden-section refinement of interior local minima, explicit endpoint checks.
inline std::vector<Crossing> detect_crossings(const LagrangianPath& lam, const LagrangianPath& nu,
                                              const MaslovOptions& opt = {}) {
    const double a = lam.t_begin(), b = lam.t_end();
    const int N = std::max(opt.grid, 16);
    std::vector<double> gap(N + 1);
    for (int i = 0; i <= N; ++i) gap[i] = detail::pair_gap(lam, nu, a + (b - a) * i / N);

    std::vector<double> times;
    if (gap[0] <= opt.crossing_gap) times.push_back(a);
    for (int i = 1; i < N; ++i) {
        if (gap[i] > opt.candidate_gate) continue;
        if (gap[i] <= gap[i - 1] && gap[i] <= gap[i + 1]) {
            const double lo = a + (b - a) * (i - 1) / N;
            const double hi = a + (b - a) * (i + 1) / N;
            const double t = detail::refine_minimum(lam, nu, lo, hi, opt.time_tol);
            if (detail::pair_gap(lam, nu, t) <= opt.crossing_gap) times.push_back(t);
        }
    }
    if (gap[N] <= opt.crossing_gap) times.push_back(b);

    // merge duplicates and crossings refined into the endpoints
    std::vector<double> merged;
    const double dt_min = std::max(opt.time_tol * 10.0, 1e-12 * (b - a));
    for (double t : times) {
        if (t - a < dt_min) t = a;
        if (b - t < dt_min) t = b;
        if (merged.empty() || t - merged.back() > dt_min) merged.push_back(t);
    }

    std::vector<Crossing> out;
    for (double t : merged) out.push_back(crossing_form(lam, nu, t, opt));
    return out;
}

inline std::vector<Crossing> detect_crossings(const LagrangianPath& lam,
                                              const LagrangianFrame& target,
                                              const MaslovOptions& opt = {}) {
    return detect_crossings(lam, LagrangianPath::constant(lam.t_begin(), lam.t_end(), target),
                            opt);
}

}  // namespace maslov
