#pragma once
#include <Eigen/Dense>
#include <stdexcept>

namespace imco {

// Default tolerances for the exact small-dimension routines (n <= 8).
inline constexpr double kTolOrtho = 1e-10;
inline constexpr double kTolGeom = 1e-9;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Projects an arbitrary square matrix onto the nearest rotation in SO(n)
// (polar factor, with the determinant sign fixed on the smallest singular
// direction).
Mat nearest_rotation(const Mat& M);

// Rigid motion of R^n, x -> R x + T with R in SO(n).
struct EuclideanIsometry {
    Mat rotation;
    Vec translation;

    EuclideanIsometry() = default;
    EuclideanIsometry(Mat R, Vec T);

    static EuclideanIsometry identity(int n);

    int dim() const { return static_cast<int>(translation.size()); }

    Vec apply(const Vec& x) const { return rotation * x + translation; }
    Vec apply_inverse(const Vec& x) const {
        return rotation.transpose() * (x - translation);
    }

    bool is_valid(double tol = kTolOrtho) const;
};

EuclideanIsometry compose(const EuclideanIsometry& a, const EuclideanIsometry& b);
EuclideanIsometry invert(const EuclideanIsometry& a);

// Operator norm (largest singular value) of R - Rt.
double rotation_distance(const Mat& R, const Mat& Rt);

double operator_norm(const Mat& M);

// d orthonormal vectors spanning a d-dimensional subspace of R^n,
// stored as columns.
struct SubspaceBasis {
    Mat basis;  // n x d

    SubspaceBasis() = default;
    explicit SubspaceBasis(Mat b);

    int n() const { return static_cast<int>(basis.rows()); }
    int d() const { return static_cast<int>(basis.cols()); }
    bool is_orthonormal(double tol = kTolOrtho) const;
};

// Orthonormalizes arbitrary spanning vectors (columns); throws on a
// below-tolerance Gram determinant.
SubspaceBasis orthonormalize(const Mat& vectors, double tol = kTolOrtho);

// Symmetric idempotent matrix projecting onto span(b).
Mat subspace_projector(const SubspaceBasis& b);

// 2D rotation helper, used all over the tests and scenario generators.
Mat rotation2(double theta);

}  // namespace imco
