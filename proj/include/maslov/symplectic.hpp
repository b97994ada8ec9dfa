#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>

namespace maslov {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Default numerical policy, overridable per call.
namespace tol {
inline constexpr double rank_cutoff = 1e-8;       // relative singular-value cutoff
inline constexpr double isotropy = 1e-10;         // |F^T J F| bound for Lagrangian frames
inline constexpr double subspace_equality = 1e-8; // largest principal angle
inline constexpr double symplectic_check = 1e-10; // |M^T J M - J| bound
}  // namespace tol

// Point of T*R^n in coordinates (q, p).  The symplectic form is
//   omega((q1,p1),(q2,p2)) = <p1,q2> - <p2,q1>,
// i.e. omega(xi,eta) = xi^T J eta with J = [[0,-I],[I,0]] in stacked (q,p) order.
struct PhaseVector {
    Vec q;
    Vec p;

    PhaseVector() = default;
    PhaseVector(Vec q_, Vec p_) : q(std::move(q_)), p(std::move(p_)) {
        if (q.size() != p.size())
            throw std::invalid_argument("PhaseVector: q and p must have equal dimension");
    }

    int dim() const { return static_cast<int>(q.size()); }

    Vec stacked() const {
        Vec z(2 * q.size());
        z << q, p;
        return z;
    }
    static PhaseVector from_stacked(const Vec& z) {
        const auto n = z.size() / 2;
        if (z.size() != 2 * n || n == 0)
            throw std::invalid_argument("PhaseVector: stacked vector must have even positive size");
        return PhaseVector(z.head(n), z.tail(n));
    }
};

inline Mat j_matrix(int n) {
    Mat J = Mat::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = -Mat::Identity(n, n);
    J.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return J;
}

// omega(x, y) = <p_x, q_y> - <p_y, q_x> on stacked (q,p) vectors.
inline double symplectic_product(const Vec& x, const Vec& y) {
    if (x.size() != y.size() || x.size() % 2 != 0)
        throw std::invalid_argument("symplectic_product: stacked vectors of equal even size required");
    const auto n = x.size() / 2;
    return x.tail(n).dot(y.head(n)) - y.tail(n).dot(x.head(n));
}

inline double symplectic_product(const PhaseVector& x, const PhaseVector& y) {
    return x.p.dot(y.q) - y.p.dot(x.q);
}

// x -> (q, -p), the anti-symplectic involution fixing conormal subspaces.
inline Vec apply_C(const Vec& z) {
    const auto n = z.size() / 2;
    Vec w = z;
    w.tail(n) = -w.tail(n);
    return w;
}
inline PhaseVector apply_C(const PhaseVector& x) { return PhaseVector(x.q, -x.p); }
inline Mat c_matrix(int n) {
    Mat C = Mat::Identity(2 * n, 2 * n);
    C.bottomRightCorner(n, n) = -Mat::Identity(n, n);
    return C;
}

inline bool is_symplectic(const Mat& M, double eps = tol::symplectic_check) {
    if (M.rows() != M.cols() || M.rows() % 2 != 0) return false;
    const int n = static_cast<int>(M.rows()) / 2;
    const Mat J = j_matrix(n);
    return (M.transpose() * J * M - J).cwiseAbs().maxCoeff() <= eps;
}

// Linear subspace of R^m kept as an orthonormal basis (m x k, k may be 0).
class Subspace {
public:
    Subspace(int ambient, Mat orthonormal_basis)
        : ambient_(ambient), basis_(std::move(orthonormal_basis)) {
        if (basis_.rows() != ambient_)
            throw std::invalid_argument("Subspace: basis row count != ambient dimension");
    }

    // Span of arbitrary generators; rank determined by singular-value cutoff.
    static Subspace span(const Mat& generators, double cutoff = tol::rank_cutoff) {
        const int m = static_cast<int>(generators.rows());
        if (generators.cols() == 0) return Subspace(m, Mat::Zero(m, 0));
        Eigen::JacobiSVD<Mat> svd(generators, Eigen::ComputeThinU);
        const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        int r = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > cutoff * std::max(smax, 1.0)) ++r;
        return Subspace(m, Mat(svd.matrixU().leftCols(r)));
    }

    static Subspace zero(int ambient) { return Subspace(ambient, Mat::Zero(ambient, 0)); }
    static Subspace full(int ambient) { return Subspace(ambient, Mat::Identity(ambient, ambient)); }

    int ambient_dim() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Mat& basis() const { return basis_; }

    Subspace orthogonal_complement() const {
        if (dim() == 0) return full(ambient_);
        if (dim() == ambient_) return zero(ambient_);
        Eigen::JacobiSVD<Mat> svd(basis_, Eigen::ComputeFullU);
        return Subspace(ambient_, Mat(svd.matrixU().rightCols(ambient_ - dim())));
    }

    bool contains(const Vec& v, double eps = tol::subspace_equality) const {
        if (v.size() != ambient_) return false;
        const double scale = std::max(v.norm(), 1.0);
        return (v - basis_ * (basis_.transpose() * v)).norm() <= eps * scale;
    }

    // sin of the largest principal angle between equal-dimension subspaces;
    // returns 1 for a dimension mismatch.
    friend double subspace_distance(const Subspace& a, const Subspace& b) {
        if (a.ambient_ != b.ambient_) throw std::invalid_argument("subspace_distance: ambient mismatch");
        if (a.dim() != b.dim()) return 1.0;
        if (a.dim() == 0) return 0.0;
        const Mat P = a.basis_ * a.basis_.transpose() - b.basis_ * b.basis_.transpose();
        Eigen::JacobiSVD<Mat> svd(P);
        return svd.singularValues()(0);
    }

    friend bool subspace_equal(const Subspace& a, const Subspace& b,
                               double eps = tol::subspace_equality) {
        return a.dim() == b.dim() && subspace_distance(a, b) <= eps;
    }

private:
    int ambient_;
    Mat basis_;
};

// Lagrangian subspace of T*R^n as a 2n x n orthonormal frame.
class LagrangianFrame {
public:
    LagrangianFrame(Mat generators, double rank_cutoff = tol::rank_cutoff,
                    double isotropy_eps = tol::isotropy) {
        if (generators.rows() % 2 != 0)
            throw std::invalid_argument("LagrangianFrame: ambient dimension must be even");
        n_ = static_cast<int>(generators.rows()) / 2;
        Subspace s = Subspace::span(generators, rank_cutoff);
        if (s.dim() != n_)
            throw std::invalid_argument("LagrangianFrame: generators span dimension " +
                                        std::to_string(s.dim()) + ", expected " + std::to_string(n_));
        frame_ = s.basis();
        const double iso = (frame_.transpose() * j_matrix(n_) * frame_).cwiseAbs().maxCoeff();
        if (iso > isotropy_eps)
            throw std::invalid_argument("LagrangianFrame: subspace is not isotropic, |F^T J F| = " +
                                        std::to_string(iso));
    }

    int ambient_half_dim() const { return n_; }  // n for a Lagrangian in T*R^n
    const Mat& columns() const { return frame_; }

    Subspace as_subspace() const { return Subspace(2 * n_, frame_); }

    friend double frame_distance(const LagrangianFrame& a, const LagrangianFrame& b) {
        return subspace_distance(a.as_subspace(), b.as_subspace());
    }
    friend bool frame_equal(const LagrangianFrame& a, const LagrangianFrame& b,
                            double eps = tol::subspace_equality) {
        return a.n_ == b.n_ && frame_distance(a, b) <= eps;
    }

private:
    int n_;
    Mat frame_;
};

// N*V = V x V^perp, the conormal Lagrangian of a subspace V of the base R^n.
inline LagrangianFrame conormal_frame(const Subspace& V) {
    const int n = V.ambient_dim();
    const Subspace Vp = V.orthogonal_complement();
    Mat F = Mat::Zero(2 * n, n);
    F.block(0, 0, n, V.dim()) = V.basis();
    F.block(n, V.dim(), n, Vp.dim()) = Vp.basis();
    return LagrangianFrame(F);
}

inline LagrangianFrame vertical_frame(int n) { return conormal_frame(Subspace::zero(n)); }
inline LagrangianFrame zero_section_frame(int n) { return conormal_frame(Subspace::full(n)); }

inline LagrangianFrame apply_C(const LagrangianFrame& f) {
    const int n = f.ambient_half_dim();
    Mat F = f.columns();
    F.bottomRows(n) = -F.bottomRows(n);
    return LagrangianFrame(F);
}

inline LagrangianFrame apply_symplectic(const Mat& M, const LagrangianFrame& f) {
    if (M.cols() != f.columns().rows())
        throw std::invalid_argument("apply_symplectic: dimension mismatch");
    return LagrangianFrame(M * f.columns());
}

// J*lambda is always a Lagrangian complement of lambda.
inline LagrangianFrame lagrangian_complement(const LagrangianFrame& f) {
    return LagrangianFrame(j_matrix(f.ambient_half_dim()) * f.columns());
}

// Orthonormal basis of the intersection of two subspaces given by orthonormal
// frames, via the null space of the stacked matrix [A B].
inline Mat intersection_basis(const Mat& A, const Mat& B, double cutoff = 1e-6) {
    if (A.rows() != B.rows()) throw std::invalid_argument("intersection_basis: ambient mismatch");
    if (A.cols() == 0 || B.cols() == 0) return Mat::Zero(A.rows(), 0);
    Mat S(A.rows(), A.cols() + B.cols());
    S << A, B;
    Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int k = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) <= cutoff) ++k;
    const int null_dim = std::max<int>(0, static_cast<int>(S.cols()) - S.rows());
    k = std::max(k, null_dim);
    if (k == 0) return Mat::Zero(A.rows(), 0);
    Mat gens(A.rows(), k);
    for (int i = 0; i < k; ++i) {
        const Vec v = svd.matrixV().col(svd.matrixV().cols() - 1 - i);
        gens.col(i) = A * v.head(A.cols());
    }
    return Subspace::span(gens, tol::rank_cutoff).basis();
}

inline int intersection_dim(const Mat& A, const Mat& B, double cutoff = 1e-6) {
    return static_cast<int>(intersection_basis(A, B, cutoff).cols());
}

// Smallest singular value of [A B]; zero exactly at a nontrivial intersection.
inline double transversality_gap(const Mat& A, const Mat& B) {
    Mat S(A.rows(), A.cols() + B.cols());
    S << A, B;
    Eigen::JacobiSVD<Mat> svd(S);
    return svd.singularValues().minCoeff();
}

// Vertical-preserving symplectic factorization
//   B = [[I,0],[sigma,I]] * [[alpha^-1, 0],[0, alpha^T]],   sigma = beta * alpha symmetric,
// for B = [[alpha^-1, 0],[beta, alpha^T]].
struct SpVDecomposition {
    Mat shear;  // [[I,0],[sigma,I]]
    Mat block;  // [[alpha^-1,0],[0,alpha^T]]
    Mat alpha;
    Mat sigma;
};

inline Mat make_sp_v(const Mat& alpha, const Mat& sigma) {
    const int n = static_cast<int>(alpha.rows());
    if (alpha.cols() != n || sigma.rows() != n || sigma.cols() != n)
        throw std::invalid_argument("make_sp_v: square n x n blocks required");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("make_sp_v: sigma must be symmetric");
    Mat B = Mat::Zero(2 * n, 2 * n);
    const Mat ainv = alpha.fullPivLu().inverse();
    B.topLeftCorner(n, n) = ainv;
    B.bottomLeftCorner(n, n) = sigma * ainv;
    B.bottomRightCorner(n, n) = alpha.transpose();
    return B;
}

inline SpVDecomposition decompose_sp_v(const Mat& B, double eps = 1e-9) {
    if (B.rows() != B.cols() || B.rows() % 2 != 0)
        throw std::invalid_argument("decompose_sp_v: even square matrix required");
    const int n = static_cast<int>(B.rows()) / 2;
    const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    if (B.topRightCorner(n, n).cwiseAbs().maxCoeff() > eps * scale)
        throw std::invalid_argument("decompose_sp_v: map does not preserve the vertical subspace");
    if (!is_symplectic(B, 1e-8 * scale))
        throw std::invalid_argument("decompose_sp_v: matrix is not symplectic");
    SpVDecomposition d;
    d.alpha = B.topLeftCorner(n, n).fullPivLu().inverse();
    d.sigma = B.bottomLeftCorner(n, n) * d.alpha;  // beta * alpha
    if ((d.sigma - d.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument("decompose_sp_v: beta*alpha is not symmetric");
    d.sigma = 0.5 * (d.sigma + d.sigma.transpose());
    d.shear = Mat::Identity(2 * n, 2 * n);
    d.shear.bottomLeftCorner(n, n) = d.sigma;
    d.block = Mat::Zero(2 * n, 2 * n);
    d.block.topLeftCorner(n, n) = B.topLeftCorner(n, n);
    d.block.bottomRightCorner(n, n) = d.alpha.transpose();
    return d;
}

// diag(alpha^-1, alpha^T) N*V = N*(alpha^-1 V).
inline Subspace conormal_transport(const Mat& alpha, const Subspace& V) {
    if (alpha.rows() != V.ambient_dim())
        throw std::invalid_argument("conormal_transport: dimension mismatch");
    if (V.dim() == 0) return Subspace::zero(V.ambient_dim());
    return Subspace::span(alpha.fullPivLu().solve(V.basis()));
}

// ----- T*R^2n with coordinates ((q1,q2),(p1,p2)) -----

// (x, y) in T*R^n x T*R^n  ->  T*R^2n reordered coordinates.
inline Vec pair_to_double(const Vec& x, const Vec& y) {
    const auto n = x.size() / 2;
    const auto m = y.size() / 2;
    Vec z(x.size() + y.size());
    z.head(n) = x.head(n);
    z.segment(n, m) = y.head(m);
    z.segment(n + m, n) = x.tail(n);
    z.tail(m) = y.tail(m);
    return z;
}

enum class GraphSide { right, left };  // right: graph of G o C, left: graph of C o G

// Lagrangian frame of {(xi, (G C) xi)} (right) or {(xi, (C G) xi)} (left)
// inside T*R^2n, for a symplectic G on T*R^n.
inline LagrangianFrame graph_frame(const Mat& G, GraphSide side) {
    if (G.rows() != G.cols() || G.rows() % 2 != 0)
        throw std::invalid_argument("graph_frame: even square matrix required");
    const int n = static_cast<int>(G.rows()) / 2;
    if (!is_symplectic(G, 1e-7 * std::max(1.0, G.cwiseAbs().maxCoeff() *
                                                    G.cwiseAbs().maxCoeff())))
        throw std::invalid_argument("graph_frame: matrix is not symplectic");
    const Mat C = c_matrix(n);
    const Mat M = (side == GraphSide::right) ? Mat(G * C) : Mat(C * G);
    Mat F(4 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        Vec e = Vec::Zero(2 * n);
        e(i) = 1.0;
        F.col(i) = pair_to_double(e, M * e);
    }
    return LagrangianFrame(F);
}

// lambda x nu in T*R^2n for Lagrangians lambda, nu in T*R^n (reordered coordinates).
inline LagrangianFrame product_frame(const LagrangianFrame& lambda, const LagrangianFrame& nu) {
    const int n = lambda.ambient_half_dim();
    const int m = nu.ambient_half_dim();
    Mat F = Mat::Zero(2 * (n + m), n + m);
    const Vec zy = Vec::Zero(2 * m), zx = Vec::Zero(2 * n);
    for (int i = 0; i < n; ++i) F.col(i) = pair_to_double(lambda.columns().col(i), zy);
    for (int j = 0; j < m; ++j) F.col(n + j) = pair_to_double(zx, nu.columns().col(j));
    return LagrangianFrame(F);
}

}  // namespace maslov
