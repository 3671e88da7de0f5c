#ifndef STATGEO_CURVATURE_HPP
#define STATGEO_CURVATURE_HPP

#include <span>
#include <vector>

#include "statgeo/report.hpp"
#include "statgeo/structure.hpp"

namespace statgeo {

using PointSet = std::span<const std::vector<double>>;

/// Symbolic-field cache for one structure: curvature tensors and their
/// derived objects are assembled once and reused across suites.
class Geometry {
public:
    explicit Geometry(const StatStructure& s) : s_(s) {}
    const StatStructure& structure() const { return s_; }

    /// Curvature (1,3) field; slot order (l; i, j, k) = (R(d_i, d_j) d_k)^l.
    const TensorField& riemann(ConnectionKind kind);
    /// Ricci (0,2): Ric(Y,Z) = tr { X -> R(X,Y)Z }.
    const TensorField& ricci(ConnectionKind kind);
    /// Scalar curvature tr_g Ric.
    const Expr& scalar_curvature(ConnectionKind kind);
    /// (nabla-hat K) as a (1,3) field; slots (l; d, i, j) = ((nabla-hat_d K)(i,j))^l.
    const TensorField& nabla_hat_k();

private:
    const StatStructure& s_;
    std::optional<TensorField> riem_[3], ric_[3], nhk_;
    std::optional<Expr> scal_[3];
};

/// All curvature data of a structure evaluated at one point.
struct CurvatureBundle {
    PointTensor r, r_bar, r_hat;        // (1,3)
    PointTensor ric, ric_bar, ric_hat;  // (0,2)
    double rho = 0, rho_bar = 0, rho_hat = 0;
    PointTensor lowered;  // (0,4) R(U,Z,X,Y) = (1/2)(g(R(X,Y)Z,U) - g(R(X,Y)U,Z))
};

CurvatureBundle curvature_bundle(Geometry& geom, std::span<const double> point);

/// Lowered curvature-like tensor of any (1,3) curvature at a point; slot
/// order (U, Z, X, Y) with value g(T(X,Y)Z, U).
PointTensor lower_curvature(const Matrix& g, const PointTensor& t);

/// Sectional curvature of the plane span(X, Y) for the Riemann-curvature-like
/// tensor (1/2)(R + R-bar). Throws std::invalid_argument on degenerate planes.
double sectional_nabla(Geometry& geom, std::span<const double> point, std::span<const double> x,
                       std::span<const double> y);

/// Symmetric curvature operator on Lambda^2 induced by T = R + R-bar
/// (unhalved), expressed in the orthonormal basis f_a ^ f_b (a < b) of the
/// gram_schmidt frame. theta_endos holds each eigenvector as a g-skew
/// endomorphism in coordinate components.
struct CurvatureOperator {
    Frame frame;
    std::vector<std::pair<int, int>> pairs;
    Matrix op;
    EigenDecomposition eig;
    std::vector<Matrix> theta_endos;
    bool nonnegative = false;
    bool positive = false;
};

CurvatureOperator curvature_operator(Geometry& geom, std::span<const double> point);

/// Weitzenboeck curvature action of a (1,3) curvature-like tensor on s:
/// (W^T s)(X_1..X_k) = sum_{i,j} (T(e_j, X_i) s)(X_1, .., e_j at i, .., X_k).
/// Returns the zero tensor for rank-0 s.
PointTensor weitzenbock_apply(const PointTensor& t, const PointTensor& s, const Frame& frame);

/// <W^T s, s> = sum_a lambda_a |Theta_a s|^2 for T = R + R-bar, checked on
/// the supplied sample tensors.
CheckResult weitzenbock_spectral_identity(Geometry& geom, std::span<const double> point,
                                          std::span<const PointTensor> samples, double tol = 1e-8);

// Verification suites. Tolerances follow the residual convention
// r = |L - R| / (1 + max(|L|, |R|)).
SuiteReport identity_suite_connection(Geometry& geom, PointSet points, double tol = 1e-8);
SuiteReport ricci_suite(Geometry& geom, PointSet points, double tol = 1e-8);
SuiteReport second_bianchi_check(Geometry& geom, PointSet points, double tol = 1e-7);
SuiteReport metric_weitzenbock_check(Geometry& geom, PointSet points, double tol = 1e-7);

/// Structure with the cubic form scaled by a smooth factor: K -> factor * K.
/// (factor = 1 + t gives the connection family hat + (1+t) K.)
StatStructure scaled_structure(const StatStructure& s, const Expr& factor);

/// Relative residual of two tensors: max|L-R| / (1 + max(max|L|, max|R|)).
double relative_residual(const PointTensor& lhs, const PointTensor& rhs);
double relative_residual(double lhs, double rhs);

}  // namespace statgeo

#endif
