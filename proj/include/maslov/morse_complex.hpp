#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maslov/second_variation.hpp"

namespace maslov {

// Z/2 matrices of the boundary operator.
using BitMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// A discretized extremal of the action: nodal path, homotopy class, action
// value, variational index/nullity and the discrete first-variation residual.
struct CriticalPath {
    GridPath path;
    int winding = 0;
    double action = 0.0;
    int index = 0;
    int nullity = 0;
    double residual = 0.0;
};

// The instance violates the nondegeneracy hypothesis: some critical point has
// a nonzero nullity, so no Morse complex can be built from it.
struct DegenerateInstanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MorseComplexOptions {
    int nodes = 64;              // path discretization (piecewise linear)
    double seed_amplitude = 1.5;  // half-width of the multistart bump sweep
    int amplitude_seeds = 7;
    int shift_seeds = 8;         // per free endpoint direction
    int max_newton = 80;
    double newton_tol = 1e-10;   // discrete first-variation sup-norm target
    double merge_distance = 1e-6;
    double flow_tol = 1e-7;      // gradient-flow convergence residual
    int max_flow_steps = 20000;
    double shoot_delta = 1e-4;   // offset along the unstable direction
    double classify_tol = 1e-5;  // nearest-generator matching radius
    EigencountOptions eigen = {};
};

// Negative-gradient trajectory in the discretized path space; the action
// history is strictly decreasing.
struct GradientFlowResult {
    GridPath limit;
    std::vector<double> actions;
    double residual = 0.0;
    bool converged = false;
    int steps = 0;
};

// One homotopy-class component of the Morse complex: generators sorted by
// (index, action), Z/2 boundary matrices per degree and Betti numbers.
struct ComplexInstance {
    int winding = 0;
    std::vector<CriticalPath> generators;
    std::vector<int> degree_counts;  // C_0 .. C_max
    std::vector<BitMat> boundary;    // boundary[k] : C_k -> C_{k-1}; boundary[0] is 0 x C_0
    std::vector<int> betti;
};

namespace detail {

// Nodal gradient of the discrete action (2-point Gauss per element, the same
// rule as action_lagrangian, so this is its exact derivative).
inline Vec discrete_action_gradient(const ElectromagneticLagrangian& L, const GridPath& path) {
    const int n = path.dim();
    const int N = path.segments();
    const double h = path.step();
    Vec g = Vec::Zero(n * (N + 1));
    for (int k = 0; k < N; ++k) {
        const Vec v = path.slope(k);
        const double tm = path.time(k) + 0.5 * h;
        for (const double s : {-gauss2_offset, gauss2_offset}) {
            const double t = tm + s * h;
            const Vec q = path.value(t);
            const Vec Lq = L.dq_value(t, q, v);
            const Vec Lv = L.dv_value(t, q, v);
            const double w = 0.5 * h;
            g.segment(n * k, n) += w * ((0.5 - s) * Lq - Lv / h);
            g.segment(n * (k + 1), n) += w * ((0.5 + s) * Lq + Lv / h);
        }
    }
    return g;
}

// W^{1,2} Gram matrix (stiffness + mass) on the constrained nodal space.
inline Mat metric_gram(double t0, double t1, int n, int N, const Mat& Z) {
    const double h = (t1 - t0) / N;
    const int D = n * (N + 1);
    Mat G = Mat::Zero(D, D);
    for (int k = 0; k < N; ++k) {
        const double self = h / 3.0, cross = h / 6.0;
        for (int i = 0; i < n; ++i) {
            const int a = n * k + i, b = n * (k + 1) + i;
            G(a, a) += 1.0 / h + self;
            G(b, b) += 1.0 / h + self;
            G(a, b) += -1.0 / h + cross;
            G(b, a) += -1.0 / h + cross;
        }
    }
    return Z.transpose() * G * Z;
}

// Minimal correction moving the endpoint pair onto the affine constraint.
inline void project_endpoints(const NonlocalBoundary& bnd, Mat& nodes) {
    const Mat& A = bnd.jacobian();
    if (A.rows() == 0) return;
    const int n = static_cast<int>(nodes.rows());
    const int N = static_cast<int>(nodes.cols()) - 1;
    Vec e(2 * n);
    e << nodes.col(0), nodes.col(N);
    const Vec corr = A.transpose() * (A * A.transpose()).ldlt().solve(bnd.offset() - A * e);
    nodes.col(0) += corr.head(n);
    nodes.col(N) += corr.tail(n);
}

// Uniform integer shifts of a path are deck transformations of the instance
// exactly when the base is a torus and the constraint cannot see them.
inline bool deck_shifts_allowed(const ElectromagneticLagrangian& L, const NonlocalBoundary& bnd) {
    if (L.base() != BaseSpace::torus) return false;
    const Mat& A = bnd.jacobian();
    if (A.rows() == 0) return true;
    Vec ones(A.cols());
    ones.setOnes();
    return (A * ones).cwiseAbs().maxCoeff() <= tol::rank_cutoff;
}

inline double path_distance(const Vec& x, const Vec& y, bool deck) {
    if (!deck) return (x - y).cwiseAbs().maxCoeff();
    const double s0 = std::round((x - y).mean());
    double best = std::numeric_limits<double>::infinity();
    for (const double s : {s0 - 1.0, s0, s0 + 1.0})
        best = std::min(best, (x - y - Vec::Constant(x.size(), s)).cwiseAbs().maxCoeff());
    return best;
}

// Shift a nodal path so that its first node lies in [0, 1); representative
// normalization for deck-invariant instances.
inline void normalize_deck(Mat& nodes) {
    const double s = std::floor(nodes(0, 0));
    if (s != 0.0) nodes.array() -= s;
}

// Damped Newton on the constrained discrete first variation.  Returns the
// converged nodal array and its residual, or nothing if the seed fails.
inline std::optional<std::pair<Mat, double>> newton_root(const ElectromagneticLagrangian& L,
                                                         const NonlocalBoundary& bnd, Mat nodes,
                                                         double t0, double t1,
                                                         const MorseComplexOptions& opt) {
    const int N = static_cast<int>(nodes.cols()) - 1;
    project_endpoints(bnd, nodes);
    double res = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opt.max_newton; ++iter) {
        const GridPath cur(t0, t1, nodes);
        const SecondVariation sv = assemble_second_variation(L, cur, bnd, N);
        const Vec R = sv.constraint_basis.transpose() * discrete_action_gradient(L, cur);
        res = R.size() > 0 ? R.cwiseAbs().maxCoeff() : 0.0;
        if (res <= opt.newton_tol) return std::make_pair(nodes, res);

        const Vec d = sv.form.partialPivLu().solve(Vec(-R));
        if (!d.allFinite() || d.norm() > 1e8) return std::nullopt;

        double tau = 1.0;
        bool accepted = false;
        const int n = static_cast<int>(nodes.rows());
        for (int bt = 0; bt < 40; ++bt) {
            Mat trial = nodes;
            const Vec full = sv.constraint_basis * (tau * d);
            for (int k = 0; k <= N; ++k) trial.col(k) += full.segment(n * k, n);
            const GridPath tp(t0, t1, trial);
            const SecondVariation tsv = assemble_second_variation(L, tp, bnd, N);
            const Vec tR = tsv.constraint_basis.transpose() * discrete_action_gradient(L, tp);
            if (tR.allFinite() &&
                (tR.size() == 0 || tR.cwiseAbs().maxCoeff() <= (1.0 - 1e-4 * tau) * res)) {
                nodes = std::move(trial);
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) return std::nullopt;
    }
    return std::nullopt;
}

// Seed paths: affine interpolation of the constrained endpoints (swept along
// the free endpoint directions) plus a half-wave bump sweep.
inline std::vector<Mat> build_seeds(const NonlocalBoundary& bnd, BaseSpace base, int N,
                                    const MorseComplexOptions& opt) {
    const int n = bnd.base_dim();
    Vec e = Vec::Zero(2 * n);
    if (bnd.jacobian().rows() > 0)
        e = bnd.jacobian().completeOrthogonalDecomposition().solve(bnd.offset());

    const Mat W = bnd.tangent().basis();
    const int dw = static_cast<int>(W.cols());
    std::vector<Vec> offsets;
    if (dw == 0) {
        offsets.push_back(Vec::Zero(2 * n));
    } else {
        // per-direction grids, combined as a product
        const int J = std::max(1, opt.shift_seeds);
        std::vector<double> grid;
        for (int j = 0; j < J; ++j) {
            if (base == BaseSpace::torus)
                grid.push_back(std::sqrt(2.0) * j / J);  // endpoint shifts cover one period
            else
                grid.push_back(std::sqrt(2.0) * opt.seed_amplitude *
                               (J == 1 ? 0.0 : -1.0 + 2.0 * j / (J - 1.0)));
        }
        std::vector<Vec> coords(1, Vec::Zero(dw));
        for (int d = 0; d < dw; ++d) {
            std::vector<Vec> next;
            for (const Vec& c : coords)
                for (const double s : grid) {
                    Vec cc = c;
                    cc(d) = s;
                    next.push_back(cc);
                }
            coords = std::move(next);
        }
        for (const Vec& c : coords) offsets.push_back(Vec(W * c));
    }

    std::vector<Mat> seeds;
    for (const Vec& o : offsets) {
        const Vec a = e.head(n) + o.head(n);
        const Vec b = e.tail(n) + o.tail(n);
        for (int m = 0; m < opt.amplitude_seeds; ++m) {
            const double amp =
                opt.amplitude_seeds == 1
                    ? 0.0
                    : opt.seed_amplitude * (-1.0 + 2.0 * m / (opt.amplitude_seeds - 1.0));
            Mat nodes(n, N + 1);
            for (int k = 0; k <= N; ++k) {
                const double s = static_cast<double>(k) / N;
                nodes.col(k) = (1.0 - s) * a + s * b +
                               amp * std::sin(M_PI * s) * Vec::Ones(n);
            }
            seeds.push_back(std::move(nodes));
        }
    }
    return seeds;
}

inline int gf2_rank(BitMat m) {
    int rank = 0;
    for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
        int pivot = -1;
        for (int r = rank; r < m.rows(); ++r)
            if (m(r, col) % 2 != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        m.row(pivot).swap(m.row(rank));
        for (int r = 0; r < m.rows(); ++r)
            if (r != rank && m(r, col) % 2 != 0) m.row(r) = (m.row(r) + m.row(rank));
        ++rank;
    }
    return rank;
}

}  // namespace detail

// Winding shift: class w lifts q(1) by w per component, realized on the
// constraint offset as b + A (0; w * ones).
inline NonlocalBoundary shifted_by_winding(const NonlocalBoundary& bnd, int winding) {
    if (winding == 0) return bnd;
    const int n = bnd.base_dim();
    Vec lift(2 * n);
    lift << Vec::Zero(n), Vec::Constant(n, static_cast<double>(winding));
    return bnd.shifted(Vec(bnd.jacobian() * lift));
}

// Critical points of the discretized action in one homotopy class, found by
// multistart Newton on the first variation.  Every root is tagged with the
// mesh-stabilized index and nullity; a nonzero nullity rejects the instance.
inline std::vector<CriticalPath> find_critical_points(const ElectromagneticLagrangian& L,
                                                      const NonlocalBoundary& bnd0, int winding,
                                                      const MorseComplexOptions& opt = {}) {
    if (L.dim() != 1 || bnd0.base_dim() != 1)
        throw std::invalid_argument("find_critical_points: only one-dimensional bases");
    if (winding != 0 && L.base() != BaseSpace::torus)
        throw std::invalid_argument("find_critical_points: winding classes need a torus base");
    const NonlocalBoundary bnd = shifted_by_winding(bnd0, winding);
    const bool deck = detail::deck_shifts_allowed(L, bnd);

    std::vector<Mat> roots;
    std::vector<double> residuals;
    for (Mat& seed : detail::build_seeds(bnd, L.base(), opt.nodes, opt)) {
        auto hit = detail::newton_root(L, bnd, std::move(seed), 0.0, 1.0, opt);
        if (!hit) continue;
        Mat nodes = std::move(hit->first);
        if (deck) detail::normalize_deck(nodes);
        bool fresh = true;
        for (const Mat& r : roots)
            if (detail::path_distance(Vec(Eigen::Map<const Vec>(r.data(), r.size())),
                                      Vec(Eigen::Map<const Vec>(nodes.data(), nodes.size())),
                                      deck) <= opt.merge_distance) {
                fresh = false;
                break;
            }
        if (fresh) {
            roots.push_back(std::move(nodes));
            residuals.push_back(hit->second);
        }
    }

    std::vector<CriticalPath> out;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        CriticalPath cp;
        cp.path = GridPath(0.0, 1.0, roots[i]);
        cp.winding = winding;
        cp.action = action_lagrangian(L, cp.path);
        cp.residual = residuals[i];
        const MorseIndexResult mi = morse_index_eigen(L, cp.path, bnd, opt.eigen);
        cp.index = mi.index;
        cp.nullity = mi.nullity;
        if (cp.nullity > 0)
            throw DegenerateInstanceError(
                "find_critical_points: degenerate critical point (nullity " +
                std::to_string(cp.nullity) + ") at action " + std::to_string(cp.action));
        out.push_back(std::move(cp));
    }
    std::sort(out.begin(), out.end(), [](const CriticalPath& a, const CriticalPath& b) {
        return a.index != b.index ? a.index < b.index : a.action < b.action;
    });
    return out;
}

// Negative W^{1,2}-gradient flow of the discretized action from a start path,
// with backtracking steps that keep the action strictly decreasing.  The
// boundary passed here must already carry the winding shift.
inline GradientFlowResult gradient_flow(const ElectromagneticLagrangian& L,
                                        const NonlocalBoundary& bnd, const GridPath& start,
                                        const MorseComplexOptions& opt = {}) {
    if (L.dim() != 1 || start.dim() != 1)
        throw std::invalid_argument("gradient_flow: only one-dimensional bases");
    const int N = start.segments();
    Mat nodes = start.nodes;
    detail::project_endpoints(bnd, nodes);

    const SecondVariation sv0 = assemble_second_variation(L, GridPath(start.t0, start.t1, nodes),
                                                          bnd, N);
    const Mat& Z = sv0.constraint_basis;
    const Eigen::LLT<Mat> metric(detail::metric_gram(start.t0, start.t1, 1, N, Z));

    GradientFlowResult out;
    out.actions.push_back(action_lagrangian(L, GridPath(start.t0, start.t1, nodes)));
    double tau = 1.0;
    for (int step = 0; step < opt.max_flow_steps; ++step) {
        const GridPath cur(start.t0, start.t1, nodes);
        const Vec R = Z.transpose() * detail::discrete_action_gradient(L, cur);
        out.residual = R.size() > 0 ? R.cwiseAbs().maxCoeff() : 0.0;
        if (out.residual <= opt.flow_tol) {
            out.converged = true;
            break;
        }
        const Vec d = metric.solve(Vec(-R));
        const double slope = R.dot(d);  // negative for a descent direction

        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            Mat trial = nodes;
            const Vec full = Z * (tau * d);
            for (int k = 0; k <= N; ++k) trial(0, k) += full(k);
            const double S = action_lagrangian(L, GridPath(start.t0, start.t1, trial));
            if (S <= out.actions.back() + 1e-4 * tau * slope) {
                nodes = std::move(trial);
                out.actions.push_back(S);
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted)
            throw std::runtime_error("gradient_flow: step collapse before convergence");
        tau = std::min(2.0 * tau, 1.0);
        out.steps = step + 1;
    }
    out.limit = GridPath(start.t0, start.t1, nodes);
    return out;
}

namespace detail {

// Most unstable direction of a generator in the flow metric: eigenvector of
// the smallest generalized eigenvalue of (second variation, metric Gram).
inline Vec unstable_direction(const ElectromagneticLagrangian& L, const NonlocalBoundary& bnd,
                              const CriticalPath& gen) {
    const int N = gen.path.segments();
    const SecondVariation sv = assemble_second_variation(L, gen.path, bnd, N);
    const Mat G = metric_gram(gen.path.t0, gen.path.t1, 1, N, sv.constraint_basis);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(sv.form, G);
    if (es.eigenvalues()(0) >= 0.0)
        throw std::runtime_error("unstable_direction: generator has no negative mode");
    Vec w = es.eigenvectors().col(0);
    w /= std::sqrt(w.dot(G * w));
    return sv.constraint_basis * w;
}

// Flow from a perturbed generator and classify the limit among the index-0
// generators; one refinement with a smaller offset before giving up.
inline int classify_limit(const ElectromagneticLagrangian& L, const NonlocalBoundary& bnd,
                          const std::vector<CriticalPath>& gens,
                          const std::vector<int>& targets, const CriticalPath& source,
                          const Vec& direction, double sign, bool deck,
                          const MorseComplexOptions& opt) {
    double delta = opt.shoot_delta;
    MorseComplexOptions fopt = opt;
    for (int attempt = 0; attempt < 2; ++attempt) {
        Mat nodes = source.path.nodes;
        for (int k = 0; k < nodes.cols(); ++k) nodes(0, k) += sign * delta * direction(k);
        const GradientFlowResult run =
            gradient_flow(L, bnd, GridPath(source.path.t0, source.path.t1, nodes), fopt);
        if (run.converged) {
            const Vec limit = Eigen::Map<const Vec>(run.limit.nodes.data(), run.limit.nodes.size());
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (const int j : targets) {
                const Vec g =
                    Eigen::Map<const Vec>(gens[j].path.nodes.data(), gens[j].path.nodes.size());
                const double d = path_distance(limit, g, deck);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            if (best >= 0 && best_d <= opt.classify_tol) return best;
        }
        delta *= 0.1;  // refine and retry once
        fopt.flow_tol *= 1e-2;
    }
    throw std::runtime_error("boundary_operator: ambiguous flow limit from action " +
                             std::to_string(source.action));
}

}  // namespace detail

// Z/2 boundary matrices from connecting-trajectory parities: for each
// index-1 generator, shoot along both unstable directions and record the
// limiting index-0 generators mod 2.  Degrees with an index gap other than
// one are rejected at this scale.
inline std::vector<BitMat> boundary_operator(const ElectromagneticLagrangian& L,
                                             const NonlocalBoundary& bnd,
                                             const std::vector<CriticalPath>& gens,
                                             const MorseComplexOptions& opt = {}) {
    int max_index = 0;
    for (const CriticalPath& g : gens) max_index = std::max(max_index, g.index);
    std::vector<std::vector<int>> by_degree(max_index + 1);
    for (int i = 0; i < static_cast<int>(gens.size()); ++i)
        by_degree[gens[i].index].push_back(i);

    const bool deck = detail::deck_shifts_allowed(L, bnd);
    std::vector<BitMat> boundary(max_index + 1);
    boundary[0] = BitMat::Zero(0, static_cast<int>(by_degree[0].size()));
    for (int k = 1; k <= max_index; ++k) {
        const auto& src = by_degree[k];
        const auto& dst = by_degree[k - 1];
        boundary[k] = BitMat::Zero(static_cast<int>(dst.size()), static_cast<int>(src.size()));
        if (src.empty() || dst.empty()) continue;
        if (k > 1)
            throw std::runtime_error(
                "boundary_operator: index gaps above one are not supported at this scale");
        for (int col = 0; col < static_cast<int>(src.size()); ++col) {
            const CriticalPath& saddle = gens[src[col]];
            const Vec u = detail::unstable_direction(L, bnd, saddle);
            for (const double sign : {+1.0, -1.0}) {
                const int hit = detail::classify_limit(L, bnd, gens, dst, saddle, u, sign, deck,
                                                       opt);
                const int row = static_cast<int>(std::find(dst.begin(), dst.end(), hit) -
                                                 dst.begin());
                boundary[k](row, col) ^= 1;
            }
        }
    }
    return boundary;
}

// Betti numbers over Z/2 by Gaussian elimination of the boundary matrices.
inline std::vector<int> homology(const std::vector<int>& degree_counts,
                                 const std::vector<BitMat>& boundary) {
    const int top = static_cast<int>(degree_counts.size()) - 1;
    std::vector<int> betti(top + 1, 0);
    for (int k = 0; k <= top; ++k) {
        const int rank_k = k >= 1 ? detail::gf2_rank(boundary[k]) : 0;
        const int rank_up = k + 1 <= top ? detail::gf2_rank(boundary[k + 1]) : 0;
        betti[k] = degree_counts[k] - rank_k - rank_up;
    }
    return betti;
}

// Full Morse complex of one homotopy class: critical points, boundary
// operator with its square checked, action filtration, homology.
inline ComplexInstance build_complex(const ElectromagneticLagrangian& L,
                                     const NonlocalBoundary& bnd0, int winding,
                                     const MorseComplexOptions& opt = {}) {
    ComplexInstance inst;
    inst.winding = winding;
    inst.generators = find_critical_points(L, bnd0, winding, opt);
    const NonlocalBoundary bnd = shifted_by_winding(bnd0, winding);

    int max_index = 0;
    for (const CriticalPath& g : inst.generators) max_index = std::max(max_index, g.index);
    inst.degree_counts.assign(max_index + 1, 0);
    for (const CriticalPath& g : inst.generators) ++inst.degree_counts[g.index];

    inst.boundary = boundary_operator(L, bnd, inst.generators, opt);

    // d^2 = 0 over Z/2 and strict action decrease across every nonzero entry.
    for (int k = 2; k <= max_index; ++k) {
        const BitMat square = inst.boundary[k - 1] * inst.boundary[k];
        for (int i = 0; i < square.rows(); ++i)
            for (int j = 0; j < square.cols(); ++j)
                if (square(i, j) % 2 != 0)
                    throw std::runtime_error("build_complex: boundary square is nonzero");
    }
    std::vector<std::vector<int>> by_degree(max_index + 1);
    for (int i = 0; i < static_cast<int>(inst.generators.size()); ++i)
        by_degree[inst.generators[i].index].push_back(i);
    for (int k = 1; k <= max_index; ++k)
        for (int c = 0; c < inst.boundary[k].cols(); ++c)
            for (int r = 0; r < inst.boundary[k].rows(); ++r)
                if (inst.boundary[k](r, c) != 0 &&
                    !(inst.generators[by_degree[k - 1][r]].action <
                      inst.generators[by_degree[k][c]].action))
                    throw std::runtime_error("build_complex: boundary does not lower the action");

    inst.betti = homology(inst.degree_counts, inst.boundary);
    return inst;
}

}  // namespace maslov
