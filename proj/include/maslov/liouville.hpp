#pragma once

#include <functional>
#include <random>
#include <vector>

#include "maslov/symplectic.hpp"

namespace maslov {

// Chart of a Lagrangian graph over the first k base coordinates and the last
// n-k fibre coordinates: the submanifold
//   { (q, Q(q,p), P(q,p), p) : q in R^k, p in (R^{n-k})* }
// of T*R^n.  On a conormal-type Lagrangian the Liouville form vanishes, which
// in this chart reads
//   P_j(q,p) + sum_h p_h dQ_h/dq_j (q,p) = 0,   j = 1..k.
struct ConormalChart {
    int n = 0;  // ambient base dimension
    int k = 0;  // chart base coordinates
    std::function<Vec(const Vec&, const Vec&)> Q;  // R^k x R^{n-k} -> R^{n-k}
    std::function<Vec(const Vec&, const Vec&)> P;  // R^k x R^{n-k} -> R^k
    // Optional analytic Jacobian dQ/dq ((n-k) x k); finite differences otherwise.
    std::function<Mat(const Vec&, const Vec&)> dQ_dq;
};

struct ConormalIdentityReport {
    double max_residual = 0.0;
    int samples = 0;
};

// Max over samples and j of |P_j + sum_h p_h dQ_h/dq_j|.
inline ConormalIdentityReport verify_conormal_identity(
    const ConormalChart& chart, const std::vector<std::pair<Vec, Vec>>& samples,
    double fd_step = 1e-6) {
    if (!chart.Q || !chart.P) throw std::invalid_argument("verify_conormal_identity: Q and P required");
    ConormalIdentityReport rep;
    for (const auto& [q, p] : samples) {
        if (q.size() != chart.k || p.size() != chart.n - chart.k)
            throw std::invalid_argument("verify_conormal_identity: sample dimension mismatch");
        Mat dQ(chart.n - chart.k, chart.k);
        if (chart.dQ_dq) {
            dQ = chart.dQ_dq(q, p);
        } else {
            for (int j = 0; j < chart.k; ++j) {
                Vec qp = q, qm = q;
                qp(j) += fd_step;
                qm(j) -= fd_step;
                dQ.col(j) = (chart.Q(qp, p) - chart.Q(qm, p)) / (2.0 * fd_step);
            }
        }
        const Vec Pv = chart.P(q, p);
        for (int j = 0; j < chart.k; ++j) {
            const double r = std::abs(Pv(j) + p.dot(dQ.col(j)));
            rep.max_residual = std::max(rep.max_residual, r);
        }
        ++rep.samples;
    }
    return rep;
}

// Same check on uniformly sampled chart points in [-box, box]^n.
inline ConormalIdentityReport verify_conormal_identity(const ConormalChart& chart, int samples,
                                                       std::uint64_t seed = 2024,
                                                       double box = 1.0,
                                                       double fd_step = 1e-6) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-box, box);
    std::vector<std::pair<Vec, Vec>> pts;
    pts.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        Vec q(chart.k), p(chart.n - chart.k);
        for (int i = 0; i < q.size(); ++i) q(i) = U(rng);
        for (int i = 0; i < p.size(); ++i) p(i) = U(rng);
        pts.emplace_back(std::move(q), std::move(p));
    }
    return verify_conormal_identity(chart, pts, fd_step);
}

// Chart of N*R for the graph submanifold R = {(q, Q0(q))}:  Q(q,p) = Q0(q),
// P(q,p) = -dQ0(q)^T p.  Satisfies the identity exactly.
inline ConormalChart conormal_graph_chart(int n, int k,
                                          std::function<Vec(const Vec&)> Q0,
                                          std::function<Mat(const Vec&)> dQ0) {
    ConormalChart c;
    c.n = n;
    c.k = k;
    c.Q = [Q0](const Vec& q, const Vec&) { return Q0(q); };
    c.P = [dQ0](const Vec& q, const Vec& p) { return Vec(-dQ0(q).transpose() * p); };
    c.dQ_dq = [dQ0](const Vec& q, const Vec&) { return dQ0(q); };
    return c;
}

}  // namespace maslov
