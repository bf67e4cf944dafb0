#include "imco/ambient.hpp"

#include <cmath>

namespace imco {

Mat nearest_rotation(const Mat& M) {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat U = svd.matrixU();
    Mat V = svd.matrixV();
    Mat R = U * V.transpose();
    if (R.determinant() < 0) {
        // flip the smallest singular direction
        U.col(U.cols() - 1) *= -1.0;
        R = U * V.transpose();
    }
    return R;
}

EuclideanIsometry::EuclideanIsometry(Mat R, Vec T)
    : rotation(std::move(R)), translation(std::move(T)) {
    if (rotation.rows() != rotation.cols() ||
        rotation.rows() != translation.size())
        throw std::invalid_argument("EuclideanIsometry: shape mismatch");
}

EuclideanIsometry EuclideanIsometry::identity(int n) {
    return EuclideanIsometry(Mat::Identity(n, n), Vec::Zero(n));
}

bool EuclideanIsometry::is_valid(double tol) const {
    int n = dim();
    if ((rotation.transpose() * rotation - Mat::Identity(n, n))
            .cwiseAbs()
            .maxCoeff() > tol)
        return false;
    return std::abs(rotation.determinant() - 1.0) < std::sqrt(tol);
}

EuclideanIsometry compose(const EuclideanIsometry& a, const EuclideanIsometry& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("compose: dimension mismatch");
    // a(b(x)) = Ra Rb x + Ra Tb + Ta; re-orthonormalize to prevent drift.
    Mat R = nearest_rotation(a.rotation * b.rotation);
    Vec T = a.rotation * b.translation + a.translation;
    return EuclideanIsometry(std::move(R), std::move(T));
}

EuclideanIsometry invert(const EuclideanIsometry& a) {
    Mat R = a.rotation.transpose();
    Vec T = -(R * a.translation);
    return EuclideanIsometry(std::move(R), std::move(T));
}

double operator_norm(const Mat& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()(0);
}

double rotation_distance(const Mat& R, const Mat& Rt) {
    if (R.rows() != Rt.rows() || R.cols() != Rt.cols())
        throw std::invalid_argument("rotation_distance: shape mismatch");
    return operator_norm(R - Rt);
}

SubspaceBasis::SubspaceBasis(Mat b) : basis(std::move(b)) {
    if (basis.cols() > basis.rows())
        throw std::invalid_argument("SubspaceBasis: d > n");
}

bool SubspaceBasis::is_orthonormal(double tol) const {
    Mat G = basis.transpose() * basis;
    return (G - Mat::Identity(d(), d())).cwiseAbs().maxCoeff() <= tol;
}

SubspaceBasis orthonormalize(const Mat& vectors, double tol) {
    Mat G = vectors.transpose() * vectors;
    if (std::abs(G.determinant()) < tol)
        throw std::invalid_argument("orthonormalize: degenerate basis");
    Eigen::HouseholderQR<Mat> qr(vectors);
    Mat Q = qr.householderQ() * Mat::Identity(vectors.rows(), vectors.cols());
    // keep orientation consistent with the input columns
    Mat Rfac = Q.transpose() * vectors;
    for (int j = 0; j < Q.cols(); ++j)
        if (Rfac(j, j) < 0) Q.col(j) *= -1.0;
    return SubspaceBasis(std::move(Q));
}

Mat subspace_projector(const SubspaceBasis& b) {
    if (!b.is_orthonormal(1e-8))
        throw std::invalid_argument("subspace_projector: basis not orthonormal");
    return b.basis * b.basis.transpose();
}

Mat rotation2(double theta) {
    Mat R(2, 2);
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return R;
}

}  // namespace imco
