#pragma once
#include <string>
#include <vector>

#include "imco/limit.hpp"

namespace imco {

// Per chart, per node: the linear map N_x : R^k -> R^m whose graph
// {(N_x z, z)} is the transversal fiber through the point.
struct NormalField {
    std::vector<std::vector<Mat>> N;  // [chart][node], m x k
    double max_op = 0.0;              // sup ||N_x||_op
    double max_cond = 0.0;            // (tangent, fiber) basis conditioning
    double radius_used = 0.0;         // smoothing radius after retries
};

// Graph normals smoothed by chart-space Gaussian averaging. Halves the
// radius up to three times if the 2 alpha operator-norm ceiling fails;
// throws when the slope is too close to the ceiling even unsmoothed.
NormalField smooth_normal_field(const LimitManifold& lim,
                                double smoothing_radius, double alpha,
                                double cond_max = 100.0);

// Fiber frame e^nu = (N z_nu, z_nu), columns of an n x k matrix. The
// vertical projection of sum t_nu e^nu recovers t exactly.
Mat frame_matrix(const Mat& N);

struct ProjectResult {
    Vec T;  // projection coefficients, R^k
    Vec X;  // foot point in chart coordinates, R^m
    double residual = 0.0;
    double contraction = 0.0;  // worst measured step ratio
    int steps = 0;
    bool ok = false;
    std::string error;
};

// Fixed-point solve of X = x + N(target(X) - u(x)), seeded at x. Fails when
// the iterate leaves the target patch ball or the step ratio reaches 1.
// The target patch may live on a larger ball than the chart, so foot
// points of displaced targets stay representable.
ProjectResult project_point(const GraphPatch& u, const GraphPatch& target,
                            const Mat& N, const Vec& x,
                            double tol_fix = 1e-10, int max_steps = 200);

// The target immersion written as a graph over one limit chart. Every
// covering sheet is found by scanning the target simplices; the sheet
// nearest to the reference graph wins at each node.
struct TargetPatch {
    GraphPatch patch;
    std::vector<char> covered;  // per node
    bool complete = false;
    int max_sheets = 0;
    double max_slope = 0.0;  // sup ||Du|| of the extracted graph
};

// core_r <= 0 demands coverage of the whole grid ball; otherwise only
// nodes within core_r count towards completeness (the margin absorbs
// fixed-point iterates that drift past the chart core).
TargetPatch extract_target_patch(const SampledImmersion& target,
                                 const EuclideanIsometry& frame,
                                 const GridBall& grid, const GraphPatch& u_ref,
                                 double core_r = -1.0);

struct ReparamParams {
    double tol_fix = 1e-10;
    int max_steps = 200;
    double tol_wd = 0.0;       // well-definedness; 0 = 3 * tol_glue
    double sep_factor = 0.3;   // injectivity separation, in grid units
    double surj_factor = 2.0;  // surjectivity radius, in target edge units
    double imm_min = 0.2;      // least singular value of the composed map
};

struct ChartReparam {
    std::vector<Vec> T;
    std::vector<Vec> X;
    std::vector<Vec> image;  // ambient image A_j(X, target(X))
    std::vector<double> residual;
    std::vector<double> contraction;
    std::vector<int> phi_vertex;  // nearest target vertex
    std::vector<char> valid;
};

struct ReparamResult {
    std::vector<ChartReparam> charts;
    double sup_T = 0.0;
    double max_residual = 0.0;
    double max_contraction = 0.0;
    double min_jacobian_sv = 0.0;
    double max_A_op = 0.0;  // sup_x ||A^i_x||_op, A^i = (Dt(X) N)^T

    bool well_defined = true;
    bool injective = true;
    bool surjective = true;
    bool immersion_ok = true;
    bool projection_ok = true;  // every node projected without error
    std::vector<std::string> witnesses;

    bool bijective() const {
        return well_defined && injective && surjective && projection_ok;
    }
};

// phi^i over the whole limit manifold, with the cross-chart
// well-definedness, injectivity, surjectivity, and immersion audits.
ReparamResult reparametrize(const LimitManifold& lim, const NormalField& nu,
                            const SampledImmersion& target, double alpha,
                            const ReparamParams& params = {},
                            const Exhaustion* exhaustion = nullptr,
                            int level = -1);

struct ConvergenceRow {
    int index = 0;
    double sup_T = 0.0;
    double c0 = 0.0;  // sup |f_target o phi - f|
    double c1 = 0.0;  // sup of the chart-coordinate first-derivative gap
    std::vector<double> dT_sup;  // sup |d^gamma T|, order 1 .. K-1
    double max_A_op = 0.0;
    double max_contraction = 0.0;
    bool ok = false;
    std::string note;
};

std::vector<ConvergenceRow> convergence_report(
    const LimitManifold& lim, const NormalField& nu,
    const std::vector<SampledImmersion>& targets, int max_order, double alpha,
    const ReparamParams& params = {});

}  // namespace imco
