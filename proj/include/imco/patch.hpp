#pragma once
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "imco/ambient.hpp"

namespace imco {

// Regular lattice covering the open ball B_r in R^m, spacing h.
// Node coordinates are integer multiples of h with |x| < r; the origin is
// always a node.
struct GridBall {
    int m = 0;
    double r = 0.0;
    double h = 0.0;
    std::vector<std::vector<int>> nodes;  // multi-indices

    GridBall() = default;
    GridBall(int m, double r, double h);

    int size() const { return static_cast<int>(nodes.size()); }
    int origin() const { return origin_; }
    Vec coord(int node) const;
    // node id of multi-index, or -1
    int find(const std::vector<int>& idx) const;
    int neighbor(int node, int axis, int step) const;
    // integration weight: h^m times the fraction of the node-centered cell
    // inside B_r, estimated by 4^m subsamples
    double cell_weight(int node) const;

  private:
    std::unordered_map<int64_t, int> index_;
    int origin_ = -1;
    int64_t pack(const std::vector<int>& idx) const;
};

// Sampled graph function u : B_r -> R^k. The local representation of an
// immersion over a tangent-plane chart.
struct GraphPatch {
    GridBall domain;
    int k = 0;
    Mat values;  // size() x k
    bool centered = false;

    GraphPatch() = default;
    GraphPatch(GridBall d, int k);

    Vec u(int node) const { return values.row(node).transpose(); }
    // multilinear interpolation; clamps to the nearest node where the
    // interpolation cell is not fully inside the lattice
    Vec interpolate(const Vec& x) const;
    bool check_centered(double tol_center) const;
};

// Finite-difference derivative fields. Du stored as the k x m Jacobian,
// D2u as m*m vectors in R^k per node (symmetrized).
struct PatchDerivs {
    std::vector<Mat> Du;                // per node, k x m
    std::vector<std::vector<Vec>> D2u;  // per node, [a*m+b] in R^k

    const Vec& d2(int node, int a, int b, int m) const {
        return D2u[node][a * m + b];
    }
};

PatchDerivs differentiate(const GraphPatch& p);

// Pointwise first/second fundamental form data of the embedded graph
// f(x) = (x, u(x)).
struct PatchGeometry {
    int m = 0, k = 0, n = 0;
    std::vector<Mat> Df;         // n x m
    std::vector<Mat> G;          // m x m
    std::vector<Mat> Ginv;       // m x m
    std::vector<Mat> pperp;      // n x n normal projector
    std::vector<Mat> ptan;       // n x n tangent projector
    std::vector<std::vector<Vec>> A;  // per node, m*m vectors in R^n
    std::vector<double> normA;        // tensor norm ||A||
    std::vector<double> sqrtDetG;
    std::vector<Mat> normal_basis;    // n x k orthonormal
    PatchDerivs derivs;

    const Vec& a(int node, int i, int j) const { return A[node][i * m + j]; }
};

PatchGeometry fundamental_forms(const GraphPatch& p);

// Alternative route for ||A||: contraction in a G^{-1/2}-orthonormalized
// tangent frame. Used as a cross-check against the quadruple-sum formula.
double norm_A_orthoframe(const PatchGeometry& g, int node);

struct LpResult {
    double A_lp = 0.0;   // (integral of ||A||^p against sqrt(det G) dx)^(1/p)
    double volume = 0.0; // integral of sqrt(det G) dx
    double A_sup = 0.0;
};

LpResult lp_norms(const GraphPatch& p, const PatchGeometry& geom, double p_exp);

// Frobenius C0 norm of Du (fixed column-Euclidean matrix norm).
double du_c0_norm(const PatchGeometry& geom);

struct EstimateReport {
    // (i)  ||D^2u||_{L^p(B_r)} <= (1+||Du||^2)^{3/2} ||A||_{L^p}
    double d2u_lp = 0.0;
    double rhs_lp = 0.0;
    bool lp_ok = false;
    // (ii) |u(x)| <= ||Du||_C0 |x|
    double max_height_ratio = 0.0;  // sup |u(x)| / (||Du|| |x|)
    bool height_ok = false;
    // (iii) tangent / normal projection lower bounds
    double min_tan_ratio = 0.0;   // min |pi_tan(y,0)| / ((1+||Du||^2)^{-1/2}|y|)
    double min_norm_ratio = 0.0;
    bool projection_ok = false;
    // (iv) measured Morrey ratio sup|Du(x)-Du(0)| / (r^{1-m/p} ||D^2u||_Lp)
    double morrey_ratio = 0.0;

    double du_c0 = 0.0;
    bool all_ok() const { return lp_ok && height_ok && projection_ok; }
};

// p_exp > m required (the construction degenerates at p = m).
EstimateReport estimate_report(const GraphPatch& p, const PatchGeometry& geom,
                               double p_exp);

// Serialization: plain text, hexfloat node values, bit-exact round trip.
void write_patch(std::ostream& os, const GraphPatch& p);
GraphPatch read_patch(std::istream& is);
double read_hexdouble(std::istream& is);

}  // namespace imco
