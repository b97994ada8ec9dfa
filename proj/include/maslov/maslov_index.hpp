#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "maslov/half_integer.hpp"
#include "maslov/lagrangian_path.hpp"

namespace maslov {

// Raised when a path has a crossing whose form is degenerate and the
// perturbation fallback is disabled or failed to stabilize.
struct NonRegularCrossingError : std::runtime_error {
    explicit NonRegularCrossingError(const std::string& m) : std::runtime_error(m) {}
};

// Raised by conley_zehnder when the final endpoint is degenerate.
struct DegenerateEndpointError : std::runtime_error {
    DegenerateEndpointError(const std::string& m, int nullity_)
        : std::runtime_error(m), nullity(nullity_) {}
    int nullity;
};

struct MaslovResult {
    HalfInteger index;
    std::vector<Crossing> crossings;  // of the path actually summed (perturbed if fallback used)
    bool used_fallback = false;
    int grid_used = 0;
};

namespace detail {

// Endpoint crossings count with weight 1/2, interior crossings with weight 1
// (Robbin-Salamon convention).  Twice-value arithmetic keeps this exact.
inline HalfInteger sum_crossings(const std::vector<Crossing>& cs) {
    std::int64_t twice = 0;
    for (const auto& c : cs) twice += (c.endpoint ? 1 : 2) * c.signature;
    return HalfInteger::from_twice(twice);
}

inline bool all_regular(const std::vector<Crossing>& cs) {
    for (const auto& c : cs)
        if (!c.regular) return false;
    return true;
}

// mu + (dim(a-intersection) + dim(b-intersection))/2 must be an integer.
inline bool parity_ok(const LagrangianPath& lam, const LagrangianPath& nu, HalfInteger mu,
                      const MaslovOptions& opt) {
    const int da = intersection_dim(lam.orthonormal(lam.t_begin()), nu.orthonormal(nu.t_begin()),
                                    opt.isect_cutoff);
    const int db = intersection_dim(lam.orthonormal(lam.t_end()), nu.orthonormal(nu.t_end()),
                                    opt.isect_cutoff);
    return (mu.twice_value() + da + db) % 2 == 0;
}

// Endpoint-fixed perturbation exp(-g(t) J) lambda(t) with a small bump g.
// Homotopy invariance with fixed endpoints makes the index of the perturbed
// path equal to that of the original whenever all its crossings are regular.
inline LagrangianPath perturb_path(const LagrangianPath& lam, double eps, double skew) {
    const double a = lam.t_begin(), b = lam.t_end();
    const int n = lam.ambient_half_dim();
    const Mat J = j_matrix(n);
    const Mat I = Mat::Identity(2 * n, 2 * n);
    auto raw = [lam, a, b, eps, skew, J, I](double t) -> Mat {
        const double u = (t - a) / (b - a);
        const double g = eps * u * (1.0 - u) * (1.0 + skew * u);
        // exp(-g J) = cos(g) I - sin(g) J since J^2 = -I
        return Mat((std::cos(g) * I - std::sin(g) * J) * lam.raw(t));
    };
    return LagrangianPath(a, b, raw);
}

inline MaslovResult index_once(const LagrangianPath& lam, const LagrangianPath& nu,
                               MaslovOptions opt) {
    MaslovResult r;
    for (int pass = 0; pass <= opt.max_grid_doublings; ++pass, opt.grid *= 2) {
        auto cs = detect_crossings(lam, nu, opt);
        if (!all_regular(cs)) {
            r.crossings = std::move(cs);
            r.grid_used = opt.grid;
            throw NonRegularCrossingError("maslov_index: non-regular crossing encountered");
        }
        const HalfInteger mu = sum_crossings(cs);
        if (pass > 0 && mu == r.index && parity_ok(lam, nu, mu, opt)) {
            r.index = mu;
            r.crossings = std::move(cs);
            r.grid_used = opt.grid;
            return r;
        }
        r.index = mu;
        r.crossings = std::move(cs);
        r.grid_used = opt.grid;
    }
    throw NonRegularCrossingError("maslov_index: crossing count did not stabilize under grid refinement");
}

}  // namespace detail

// Relative Maslov index of a pair of Lagrangian paths over a common interval:
// the half-integer sum of crossing-form signatures, endpoints weighted 1/2.
// Degenerate (non-regular) crossings are resolved by an endpoint-fixed
// perturbation, validated by recomputing at half the perturbation size.
inline MaslovResult maslov_index_pair(const LagrangianPath& lam, const LagrangianPath& nu,
                                      const MaslovOptions& opt = {}) {
    if (std::abs(lam.t_begin() - nu.t_begin()) > 1e-12 ||
        std::abs(lam.t_end() - nu.t_end()) > 1e-12)
        throw std::invalid_argument("maslov_index_pair: paths must share the time interval");
    try {
        return detail::index_once(lam, nu, opt);
    } catch (const NonRegularCrossingError&) {
        if (!opt.allow_fallback) throw;
    }

    const double skews[] = {0.0, 0.5, -0.5};
    for (double eps : {opt.fallback_eps, 0.25 * opt.fallback_eps}) {
        for (double skew : skews) {
            try {
                auto r1 = detail::index_once(detail::perturb_path(lam, eps, skew), nu, opt);
                auto r2 = detail::index_once(detail::perturb_path(lam, 0.5 * eps, skew), nu, opt);
                if (r1.index == r2.index) {
                    r1.used_fallback = true;
                    return r1;
                }
            } catch (const NonRegularCrossingError&) {
                continue;  // try the next bump shape / size
            }
        }
    }
    throw NonRegularCrossingError(
        "maslov_index: degenerate crossings did not stabilize under endpoint-fixed perturbation");
}

inline MaslovResult maslov_index(const LagrangianPath& lam, const LagrangianFrame& target,
                                 const MaslovOptions& opt = {}) {
    return maslov_index_pair(lam, LagrangianPath::constant(lam.t_begin(), lam.t_end(), target),
                             opt);
}

// Conley-Zehnder index of a path of symplectic matrices G(t), G(0) = I: the
// Maslov index of t -> graph(G(t) C) against the conormal of the diagonal.
// A degenerate final endpoint (1 in the spectrum of G(1)) is an error carrying
// the nullity dimension.
inline MaslovResult conley_zehnder(const std::function<Mat(double)>& G, double a, double b,
                                   const MaslovOptions& opt = {}) {
    const int n = static_cast<int>(G(a).rows()) / 2;
    auto raw = [G](double t) { return graph_frame(G(t), GraphSide::right).columns(); };
    LagrangianPath path(a, b, raw);
    const LagrangianFrame target = conormal_frame(Subspace::span([n] {
        Mat D(2 * n, n);
        D << Mat::Identity(n, n), Mat::Identity(n, n);
        return D;
    }()));
    const int end_nullity =
        intersection_dim(path.orthonormal(b), target.columns(), opt.isect_cutoff);
    if (end_nullity > 0)
        throw DegenerateEndpointError(
            "conley_zehnder: degenerate endpoint, graph of G(b)C meets the diagonal conormal",
            end_nullity);
    return maslov_index(path, target, opt);
}

}  // namespace maslov
