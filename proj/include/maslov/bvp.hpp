#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "maslov/ham_index.hpp"

namespace maslov {

struct ShootingOptions {
    FlowOptions search_flow{1e-2};  // coarse integrator for the Newton search
    FlowOptions polish_flow{1e-3};  // fine integrator for accepted orbits
    int max_newton = 60;
    int max_backtracks = 25;
    double residual_tol = 1e-9;     // on both the constraint and the momentum residual
    double merge_distance = 1e-6;   // endpoint distance identifying duplicates
    double degenerate_cutoff = 1e-7;  // smallest-singular-value cutoff at a root
    int seeds_per_dim = 64;         // multistart size is seeds_per_dim * 2n
    double seed_box = 2.0;          // half-width of the seed box around the origin
    bool compute_index = true;
    MaslovOptions maslov;
};

// One solution of the non-local boundary value problem.  The flow holds a
// pointer into the HamiltonianSystem it was integrated with, so the system
// must outlive the orbit.
struct Orbit {
    FlowResult flow;
    Vec multiplier;                   // covector of the conormal condition
    double residual_constraint = 0.0; // |c(q0, q1)|_inf
    double residual_momentum = 0.0;   // |(p0, -p1) - Dc^T multiplier|_inf
    double action = 0.0;
    HalfInteger index;
    int nullity = 0;
    bool degenerate = false;
    bool index_used_fallback = false;

    const Vec& initial_state() const { return flow.states().front(); }
    const Vec& final_state() const { return flow.states().back(); }
};

struct SolveReport {
    std::vector<Orbit> orbits;
    int seeds_tried = 0;
    int newton_failures = 0;  // diverged or stalled seeds, dropped
    double seed_box = 0.0;    // multistart density context for completeness heuristics
};

namespace detail {

// Halton low-discrepancy point in [0,1)^d.
inline Vec halton_point(int index, int d) {
    static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                     31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    Vec x(d);
    for (int j = 0; j < d; ++j) {
        const int base = primes[j % 20];
        double f = 1.0, r = 0.0;
        for (int i = index + 1; i > 0; i /= base) {
            f /= base;
            r += f * (i % base);
        }
        x(j) = r;
    }
    return x;
}

// Residual F(u) and Jacobian of the square shooting system in the unknowns
// u = (z0, multiplier):  c(q0, q1) = 0,  (p0, -p1) - Dc^T m = 0.
struct ShootingSystem {
    const HamiltonianSystem* H;
    const NonlocalBoundary* bnd;
    const FlowOptions* flow_opt;

    int n() const { return H->dim(); }
    int codim() const { return bnd->codim(); }
    int unknowns() const { return 2 * n() + codim(); }

    Vec residual(const Vec& u, const FlowResult& flow) const {
        const Vec z0 = u.head(2 * n());
        const Vec m = u.tail(codim());
        const Vec z1 = flow.states().back();
        Vec F(unknowns());
        F.head(codim()) = bnd->constraint(z0.head(n()), z1.head(n()));
        Vec pm(2 * n());
        pm << z0.tail(n()), -z1.tail(n());
        F.tail(2 * n()) = pm - bnd->jacobian().transpose() * m;
        return F;
    }

    FlowResult integrate(const Vec& u) const {
        return integrate_flow(*H, Vec(u.head(2 * n())), 0.0, 1.0, *flow_opt);
    }

    Mat jacobian(const Vec& u, const FlowResult& flow) const {
        const int N = n(), k = codim();
        const Mat& M = flow.monodromies().back();
        Mat Jq(2 * N, 2 * N);  // d(q0, q1)/dz0
        Jq.topRows(N) = Mat::Identity(2 * N, 2 * N).topRows(N);
        Jq.bottomRows(N) = M.topRows(N);
        Mat Jp(2 * N, 2 * N);  // d(p0, -p1)/dz0
        Jp.topRows(N) = Mat::Identity(2 * N, 2 * N).bottomRows(N);
        Jp.bottomRows(N) = -M.bottomRows(N);
        Mat Jac = Mat::Zero(unknowns(), unknowns());
        Jac.block(0, 0, k, 2 * N) = bnd->jacobian() * Jq;
        Jac.block(k, 0, 2 * N, 2 * N) = Jp;
        Jac.block(k, 2 * N, 2 * N, k) = -bnd->jacobian().transpose();
        return Jac;
    }
};

// Damped Newton from one seed.  Returns the root in the unknown vector, or
// nothing when the iteration stalls or leaves the basin.
inline std::optional<Vec> newton_from_seed(const ShootingSystem& sys, Vec u,
                                           const ShootingOptions& opt) {
    FlowResult flow = sys.integrate(u);
    Vec F = sys.residual(u, flow);
    double fn = F.norm();
    for (int it = 0; it < opt.max_newton; ++it) {
        if (fn <= 0.3 * opt.residual_tol) return u;
        const Mat Jac = sys.jacobian(u, flow);
        const Eigen::ColPivHouseholderQR<Mat> qr(Jac);
        const Vec step = qr.solve(-F);
        if (!step.allFinite()) return std::nullopt;
        // Armijo backtracking on |F|
        double alpha = 1.0;
        bool moved = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt, alpha *= 0.5) {
            const Vec u_try = u + alpha * step;
            try {
                FlowResult flow_try = sys.integrate(u_try);
                const Vec F_try = sys.residual(u_try, flow_try);
                if (F_try.norm() <= (1.0 - 1e-4 * alpha) * fn) {
                    u = u_try;
                    F = F_try;
                    flow = std::move(flow_try);
                    fn = F.norm();
                    moved = true;
                    break;
                }
            } catch (const FlowStepError&) {
                continue;  // blow-up region; shorten the step
            }
        }
        if (!moved) return std::nullopt;
    }
    return fn <= opt.residual_tol ? std::optional<Vec>(u) : std::nullopt;
}

// Endpoint distance between candidate roots; torus bases compare q modulo Z^n.
inline double root_distance(const Vec& a, const Vec& b, int n, BaseSpace base) {
    Vec d = a.head(2 * n) - b.head(2 * n);
    if (base == BaseSpace::torus)
        for (int i = 0; i < n; ++i) d(i) -= std::round(d(i));
    return d.cwiseAbs().maxCoeff();
}

}  // namespace detail

// Multistart damped-Newton shooting for orbits with (x(0), C x(1)) in N*Q.
// Roots found on the coarse grid are polished at the fine step, deduplicated
// by endpoint distance, equipped with action/index/nullity and sorted by
// action.  Degenerate roots (singular shooting Jacobian) are kept and flagged.
inline SolveReport solve_nonlocal_bvp(const HamiltonianSystem& H, const NonlocalBoundary& bnd,
                                      const std::vector<Vec>& seeds = {},
                                      const ShootingOptions& opt = {}) {
    if (bnd.base_dim() != H.dim())
        throw std::invalid_argument("solve_nonlocal_bvp: boundary/base dimension mismatch");
    const int n = H.dim(), k = bnd.codim();

    detail::ShootingSystem search{&H, &bnd, &opt.search_flow};
    detail::ShootingSystem polish{&H, &bnd, &opt.polish_flow};

    std::vector<Vec> starts = seeds;
    if (starts.empty()) {
        const int count = opt.seeds_per_dim * 2 * n;
        for (int s = 0; s < count; ++s) {
            const Vec h = detail::halton_point(s, 2 * n);
            Vec z0(2 * n);
            for (int i = 0; i < n; ++i)
                z0(i) = (H.base() == BaseSpace::torus)
                            ? h(i)                                   // one fundamental domain
                            : opt.seed_box * (2.0 * h(i) - 1.0);
            for (int i = 0; i < n; ++i) z0(n + i) = opt.seed_box * (2.0 * h(n + i) - 1.0);
            starts.push_back(z0);
        }
    }

    SolveReport rep;
    rep.seed_box = opt.seed_box;
    std::vector<Vec> roots;  // unknown vectors (z0, m) after polish
    for (const Vec& z0 : starts) {
        if (z0.size() != 2 * n)
            throw std::invalid_argument("solve_nonlocal_bvp: seeds must be phase points (q0, p0)");
        ++rep.seeds_tried;
        Vec u = Vec::Zero(2 * n + k);
        u.head(2 * n) = z0;
        auto coarse = detail::newton_from_seed(search, u, opt);
        if (!coarse) {
            ++rep.newton_failures;
            continue;
        }
        auto fine = detail::newton_from_seed(polish, *coarse, opt);
        if (!fine) {
            ++rep.newton_failures;
            continue;
        }
        bool duplicate = false;
        for (const Vec& r : roots)
            if (detail::root_distance(r, *fine, n, H.base()) < opt.merge_distance) {
                duplicate = true;
                break;
            }
        if (!duplicate) roots.push_back(*fine);
    }

    for (const Vec& u : roots) {
        Orbit orb{polish.integrate(u), Vec(u.tail(k))};
        const Vec F = polish.residual(u, orb.flow);
        orb.residual_constraint = k > 0 ? F.head(k).cwiseAbs().maxCoeff() : 0.0;
        orb.residual_momentum = F.tail(2 * n).cwiseAbs().maxCoeff();
        orb.action = orb.flow.action();
        Eigen::JacobiSVD<Mat> svd(polish.jacobian(u, orb.flow));
        orb.degenerate = svd.singularValues().minCoeff() <=
                         opt.degenerate_cutoff * std::max(1.0, svd.singularValues().maxCoeff());
        orb.nullity = nullity_nonlocal(orb.flow, bnd);
        if (opt.compute_index) {
            const OrbitIndexResult r = maslov_index_nonlocal(H, orb.flow, bnd, opt.maslov);
            orb.index = r.index;
            orb.index_used_fallback = r.used_fallback;
        }
        rep.orbits.push_back(std::move(orb));
    }
    std::sort(rep.orbits.begin(), rep.orbits.end(),
              [](const Orbit& a, const Orbit& b) { return a.action < b.action; });
    return rep;
}

// All found orbits with action below the cap.  Completeness is a multistart
// heuristic; the report carries the seed counts so callers can judge density.
inline SolveReport enumerate_below_action(const HamiltonianSystem& H,
                                          const NonlocalBoundary& bnd, double action_cap,
                                          const ShootingOptions& opt = {}) {
    SolveReport rep = solve_nonlocal_bvp(H, bnd, {}, opt);
    std::erase_if(rep.orbits, [&](const Orbit& o) { return !(o.action < action_cap); });
    return rep;
}

}  // namespace maslov
