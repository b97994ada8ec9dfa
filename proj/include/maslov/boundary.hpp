#pragma once

#include <string>

#include "maslov/symplectic.hpp"

namespace maslov {

// Affine boundary submanifold Q = {(q0,q1) in R^n x R^n : A (q0;q1) = b} for a
// full-rank k x 2n matrix A, together with its tangent space W = ker A.  The
// orbit boundary condition is (x(0), C x(1)) in N*Q, equivalently
//   c(q(0), q(1)) = 0   and   (p(0), -p(1)) = A^T m  for some multiplier m.
// On torus bases the constraint acts on lifts; winding classes are handled by
// shifting b.
class NonlocalBoundary {
public:
    NonlocalBoundary(int n, Mat A, Vec b, std::string preset = "custom")
        : n_(n), A_(std::move(A)), b_(std::move(b)), preset_(std::move(preset)) {
        if (A_.cols() != 2 * n_ || A_.rows() != b_.size())
            throw std::invalid_argument("NonlocalBoundary: constraint shape mismatch");
        if (A_.rows() > 0) {
            Eigen::JacobiSVD<Mat> svd(A_);
            if (svd.singularValues().minCoeff() <=
                tol::rank_cutoff * std::max(1.0, svd.singularValues().maxCoeff()))
                throw std::invalid_argument("NonlocalBoundary: constraint Jacobian is rank deficient");
        }
    }

    int base_dim() const { return n_; }
    int codim() const { return static_cast<int>(A_.rows()); }
    int dim_Q() const { return 2 * n_ - codim(); }
    const std::string& preset() const { return preset_; }
    const Mat& jacobian() const { return A_; }
    const Vec& offset() const { return b_; }

    Vec constraint(const Vec& q0, const Vec& q1) const {
        if (q0.size() != n_ || q1.size() != n_)
            throw std::invalid_argument("NonlocalBoundary: endpoint dimension mismatch");
        Vec qq(2 * n_);
        qq << q0, q1;
        return A_ * qq - b_;
    }

    // W = ker Dc, the tangent space of Q inside R^{2n}.
    Subspace tangent() const {
        if (codim() == 0) return Subspace::full(2 * n_);
        Eigen::JacobiSVD<Mat> svd(A_, Eigen::ComputeFullV);
        return Subspace(2 * n_, Mat(svd.matrixV().rightCols(dim_Q())));
    }

    // N*W in T*R^{2n}, the reference Lagrangian of the index theory.
    LagrangianFrame conormal() const { return conormal_frame(tangent()); }

    // Same constraint shape with b replaced by b + delta (torus winding lifts).
    NonlocalBoundary shifted(const Vec& delta) const {
        if (delta.size() != b_.size())
            throw std::invalid_argument("NonlocalBoundary::shifted: offset dimension mismatch");
        return NonlocalBoundary(n_, A_, b_ + delta, preset_);
    }

private:
    int n_;
    Mat A_;
    Vec b_;
    std::string preset_;
};

// Dirichlet: Q = {(q0*, q1*)} a point pair, W = 0.
inline NonlocalBoundary dirichlet_boundary(const Vec& q0, const Vec& q1) {
    const int n = static_cast<int>(q0.size());
    if (q1.size() != n) throw std::invalid_argument("dirichlet_boundary: endpoint sizes differ");
    Vec b(2 * n);
    b << q0, q1;
    return NonlocalBoundary(n, Mat::Identity(2 * n, 2 * n), b, "dirichlet");
}

// Neumann: Q = R^n x R^n, no constraint, W = R^{2n}.
inline NonlocalBoundary neumann_boundary(int n) {
    return NonlocalBoundary(n, Mat::Zero(0, 2 * n), Vec::Zero(0), "neumann");
}

// Periodic: Q = diagonal, c = q1 - q0 - winding.
inline NonlocalBoundary diagonal_boundary(int n, const Vec& winding) {
    Mat A(n, 2 * n);
    A << -Mat::Identity(n, n), Mat::Identity(n, n);
    return NonlocalBoundary(n, A, winding, "diagonal");
}
inline NonlocalBoundary diagonal_boundary(int n) {
    return diagonal_boundary(n, Vec::Zero(n));
}

// Figure eight: the base is a product O x O (n = 2m even) and Q is the total
// diagonal {(o,o,o,o)}; the constraint chains the four copies together, with
// one winding offset per link.
inline NonlocalBoundary figure_eight_boundary(int n, const Vec& winding) {
    if (n % 2 != 0) throw std::invalid_argument("figure_eight_boundary: base dimension must be even");
    const int m = n / 2;
    if (winding.size() != 3 * m)
        throw std::invalid_argument("figure_eight_boundary: winding must have 3(n/2) entries");
    const Mat I = Mat::Identity(m, m);
    Mat A = Mat::Zero(3 * m, 2 * n);  // columns: (q0_a, q0_b, q1_a, q1_b)
    A.block(0, 0, m, m) = -I;
    A.block(0, m, m, m) = I;
    A.block(m, m, m, m) = -I;
    A.block(m, 2 * m, m, m) = I;
    A.block(2 * m, 2 * m, m, m) = -I;
    A.block(2 * m, 3 * m, m, m) = I;
    return NonlocalBoundary(n, A, winding, "figure8");
}
inline NonlocalBoundary figure_eight_boundary(int n) {
    return figure_eight_boundary(n, Vec::Zero(3 * (n / 2)));
}

// Product Q0 x Q1 of affine constraints on the two endpoints separately:
// Q_i = {q : Ai q = bi}, so W = ker A0 x ker A1.
inline NonlocalBoundary product_boundary(int n, const Mat& A0, const Vec& b0, const Mat& A1,
                                         const Vec& b1) {
    if (A0.cols() != n || A1.cols() != n)
        throw std::invalid_argument("product_boundary: endpoint constraints must act on R^n");
    Mat A = Mat::Zero(A0.rows() + A1.rows(), 2 * n);
    A.topLeftCorner(A0.rows(), n) = A0;
    A.bottomRightCorner(A1.rows(), n) = A1;
    Vec b(b0.size() + b1.size());
    b << b0, b1;
    return NonlocalBoundary(n, A, b, "product");
}

// Product of linear subspaces V0, V1 through given base points.
inline NonlocalBoundary product_boundary(const Subspace& V0, const Vec& q0, const Subspace& V1,
                                         const Vec& q1) {
    const int n = V0.ambient_dim();
    if (V1.ambient_dim() != n)
        throw std::invalid_argument("product_boundary: ambient dimensions differ");
    const Mat A0 = V0.orthogonal_complement().basis().transpose();
    const Mat A1 = V1.orthogonal_complement().basis().transpose();
    return product_boundary(n, A0, Vec(A0 * q0), A1, Vec(A1 * q1));
}

}  // namespace maslov
