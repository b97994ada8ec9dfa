#pragma once

#include <string>
#include <utility>
#include <vector>

#include "maslov/bvp.hpp"
#include "maslov/duistermaat.hpp"
#include "maslov/ham_index.hpp"
#include "maslov/second_variation.hpp"

namespace maslov {

// Controls for the two-sided index verification.  The defaults match the
// component algorithms; `allow_refinement` grants one automatic retry with a
// halved flow step and doubled mesh/grid resolutions before a failed report
// is returned.
struct VerifyOptions {
    int path_segments = 256;     // sampling of the configuration extremal
    double legendre_tol = 1e-8;  // orbit <-> extremal correspondence defect
    double boundary_tol = 1e-6;  // constraint + tangential momentum defect
    bool allow_refinement = true;
    EigencountOptions eigen = {};
    CrossingCountOptions crossing = {};
    MaslovOptions maslov = {};
};

// Both sides of the Morse index theorem for one orbit, together with the
// exact residuals of the identities that relate them.  All deltas vanish on
// a passing report:
//   delta_forward  = i(gamma) - (mu^Q(x) - nu(gamma)/2)
//   delta_backward = mu^Q(x) - (i(gamma) + nu(x)/2)
//   delta_nullity  = nu(x) - nu(gamma)
// and the two variational algorithms must agree with each other.
struct IndexReport {
    // Variational side: eigenvalue count and crossing count.
    int index_eigen = 0;
    int nullity_eigen = 0;
    int index_crossing = 0;
    int nullity_crossing = 0;

    // Hamiltonian side: relative index of the orbit.
    HalfInteger mu_relative;  // mu(t |-> graf(Dphi_t C), N*W)
    HalfInteger shift;        // (dim Q - n)/2
    HalfInteger mu_shifted;   // mu_relative + shift
    int nullity_ham = 0;

    HalfInteger delta_forward;
    HalfInteger delta_backward;
    int delta_nullity = 0;
    int delta_algorithms = 0;

    double legendre_residual = 0.0;
    double boundary_residual = 0.0;
    bool used_fallback = false;
    bool refined = false;
    bool pass = false;
};

namespace detail {

// Configuration extremal of the orbit: the base projection of the flow,
// sampled on a uniform grid.
inline GridPath extremal_from_flow(const FlowResult& flow, int segments) {
    const int n = flow.system().dim();
    auto q_of = [&flow, n](double t) { return Vec(flow.state_at(t).head(n)); };
    return grid_path_from_function(q_of, flow.t_begin(), flow.t_end(), segments);
}

// Correspondence defect between the orbit and its Legendre image: along the
// flow the velocity is D_p H, so p - D_v L(t, q, D_p H) measures how far the
// pair (L, orbit) is from an actual extremal/solution pair.
inline double legendre_defect(const ElectromagneticLagrangian& L, const FlowResult& flow,
                              int samples) {
    const int n = L.dim();
    const HamiltonianSystem& H = flow.system();
    double worst = 0.0;
    for (int j = 0; j <= samples; ++j) {
        const double t =
            flow.t_begin() + (flow.t_end() - flow.t_begin()) * j / static_cast<double>(samples);
        const Vec x = flow.state_at(t);
        const Vec v = H.gradient(t, x).tail(n);
        const Vec defect = legendre_map(L, t, Vec(x.head(n)), v) - x.tail(n);
        worst = std::max(worst, defect.cwiseAbs().maxCoeff());
    }
    return worst;
}

// Boundary defect of the orbit: the constraint value at the endpoints plus
// the component of (p0, -p1) along the tangent space of Q (the conormal
// condition demands that component to vanish).
inline double boundary_defect(const NonlocalBoundary& bnd, const FlowResult& flow) {
    const int n = bnd.base_dim();
    const Vec x0 = flow.states().front();
    const Vec x1 = flow.states().back();
    const Vec c = bnd.constraint(Vec(x0.head(n)), Vec(x1.head(n)));
    double worst = c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
    const Mat W = bnd.tangent().basis();
    if (W.cols() > 0) {
        Vec pc(2 * n);
        pc << x0.tail(n), -x1.tail(n);
        const Vec tangential = W.transpose() * pc;
        if (tangential.size() > 0)
            worst = std::max(worst, tangential.cwiseAbs().maxCoeff());
    }
    return worst;
}

inline IndexReport verify_once(const ElectromagneticLagrangian& L, const NonlocalBoundary& bnd,
                               const FlowResult& flow, const VerifyOptions& opt) {
    IndexReport rep;
    rep.legendre_residual = legendre_defect(L, flow, opt.path_segments);
    rep.boundary_residual = boundary_defect(bnd, flow);

    const GridPath gamma = extremal_from_flow(flow, opt.path_segments);
    const MorseIndexResult eig = morse_index_eigen(L, gamma, bnd, opt.eigen);
    const CrossingCountResult cross = morse_index_crossing(L, gamma, bnd, opt.crossing);
    const OrbitIndexResult ham = maslov_index_nonlocal(flow.system(), flow, bnd, opt.maslov);

    rep.index_eigen = eig.index;
    rep.nullity_eigen = eig.nullity;
    rep.index_crossing = cross.index;
    rep.nullity_crossing = cross.nullity;
    rep.shift = HalfInteger::from_twice(bnd.dim_Q() - bnd.base_dim());
    rep.mu_shifted = ham.index;
    rep.mu_relative = ham.index - rep.shift;
    rep.nullity_ham = ham.nullity;
    rep.used_fallback = ham.used_fallback;

    const HalfInteger i = HalfInteger::whole(eig.index);
    rep.delta_forward = i - (rep.mu_shifted - HalfInteger::from_twice(eig.nullity));
    rep.delta_backward = rep.mu_shifted - (i + HalfInteger::from_twice(ham.nullity));
    rep.delta_nullity = ham.nullity - eig.nullity;
    rep.delta_algorithms = cross.index - eig.index;

    rep.pass = rep.delta_forward == HalfInteger() && rep.delta_backward == HalfInteger() &&
               rep.delta_nullity == 0 && rep.delta_algorithms == 0 &&
               cross.nullity == eig.nullity && rep.legendre_residual <= opt.legendre_tol &&
               rep.boundary_residual <= opt.boundary_tol;
    return rep;
}

inline VerifyOptions refined_options(const VerifyOptions& opt) {
    VerifyOptions fine = opt;
    fine.path_segments *= 2;
    fine.eigen.start_elements *= 2;
    fine.eigen.max_elements *= 2;
    fine.crossing.time_steps *= 2;
    fine.crossing.mu_grid *= 2;
    fine.maslov.grid *= 2;
    fine.allow_refinement = false;
    return fine;
}

}  // namespace detail

// Checks the Morse index theorem on one orbit: the variational index and
// nullity of the configuration extremal (computed by two independent
// algorithms) against the relative index and nullity of the orbit.  The flow
// must come from the Legendre dual of L; the correspondence is verified, not
// assumed.  A failed report triggers one automatic refinement of every
// resolution before it is returned.
inline IndexReport verify_index_theorem(const ElectromagneticLagrangian& L,
                                        const NonlocalBoundary& bnd, const FlowResult& flow,
                                        const VerifyOptions& opt = {}) {
    if (L.dim() != bnd.base_dim() || L.dim() != flow.system().dim())
        throw std::invalid_argument("verify_index_theorem: dimension mismatch");
    IndexReport rep = detail::verify_once(L, bnd, flow, opt);
    if (rep.pass || !opt.allow_refinement) return rep;

    FlowOptions fopt;
    fopt.step = 0.5 * flow.step();
    const FlowResult fine = integrate_flow(flow.system(), flow.states().front(), flow.t_begin(),
                                           flow.t_end(), fopt);
    rep = detail::verify_once(L, bnd, fine, detail::refined_options(opt));
    rep.refined = true;
    return rep;
}

inline IndexReport verify_index_theorem(const ElectromagneticLagrangian& L,
                                        const NonlocalBoundary& bnd, const Orbit& orbit,
                                        const VerifyOptions& opt = {}) {
    return verify_index_theorem(L, bnd, orbit.flow, opt);
}

// One instance of the verification problem: a Lagrangian, a boundary
// condition and the initial state of the orbit to verify.
struct SweepInstance {
    std::string label;
    double parameter = 0.0;
    ElectromagneticLagrangian L;
    NonlocalBoundary bnd;
    Vec x0;
};

struct SweepRow {
    std::string label;
    double parameter = 0.0;
    IndexReport report;
};

// Integrates the instance's orbit under the Legendre dual and verifies the
// index theorem along it.
inline IndexReport verify_instance(const SweepInstance& inst, const VerifyOptions& opt = {},
                                   const FlowOptions& fopt = {}) {
    const HamiltonianSystem H = fenchel_dual(inst.L);
    const FlowResult flow = integrate_flow(H, inst.x0, 0.0, 1.0, fopt);
    return verify_index_theorem(inst.L, inst.bnd, flow, opt);
}

inline std::vector<SweepRow> sweep_report(const std::vector<SweepInstance>& family,
                                          const VerifyOptions& opt = {},
                                          const FlowOptions& fopt = {}) {
    std::vector<SweepRow> rows;
    rows.reserve(family.size());
    for (const SweepInstance& inst : family)
        rows.push_back({inst.label, inst.parameter, verify_instance(inst, opt, fopt)});
    return rows;
}

// Harmonic oscillator sweep family: the rest orbit q = 0 under pinned or
// free endpoints.  The verified index jumps at the conjugate thresholds
// omega = k pi.
inline std::vector<SweepInstance> oscillator_family(const std::vector<double>& omegas,
                                                    bool neumann = false) {
    std::vector<SweepInstance> family;
    family.reserve(omegas.size());
    for (const double w : omegas) {
        NonlocalBoundary bnd =
            neumann ? neumann_boundary(1) : dirichlet_boundary(Vec::Zero(1), Vec::Zero(1));
        family.push_back({neumann ? "neumann" : "dirichlet", w, harmonic_lagrangian(1, w),
                          std::move(bnd), Vec::Zero(2)});
    }
    return family;
}

}  // namespace maslov
