#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "imco/mesh.hpp"
#include "imco/patch.hpp"

namespace imco {

enum class GraphStatus { ok, fold, slope, incomplete };

const char* to_string(GraphStatus s);

struct LocalGraphResult {
    GraphStatus status = GraphStatus::incomplete;
    GraphPatch patch;        // valid iff status == ok
    std::vector<int> U;      // q-component vertex set over B_r (valid iff ok)
    double max_slope = 0.0;  // measured sup ||Du|| on the grown region
};

struct AtlasParams {
    double h_grid = 0.0;      // grid spacing; 0 = local edge length / 2
    double fold_factor = 5.0; // fold threshold in units of (edge + h)
    double h_bisect = 0.005;  // radius bisection resolution
    double grid_cap = 400.0;  // at most this many nodes per axis
};

// Tangent frame A_q: maps 0 to f(q) and R^m x {0} onto f(q) + tau_f(q).
// Weighted least-squares plane fit over the 1-ring, 2-ring fallback.
EuclideanIsometry tangent_frame_at(const SampledImmersion& imm, int q);

// Local graph representation over the tangent chart at q: breadth-first
// region growth, vertical-line (fold) test, slope certification, and
// resampling of the graph function onto a GridBall.
LocalGraphResult local_graph(const SampledImmersion& imm, int q, double r,
                             double alpha, const AtlasParams& params = {},
                             const EuclideanIsometry* frame = nullptr);

// The q-component vertex set of (pi o A_q^{-1} o f)^{-1}(B_rho): a mesh BFS
// from q keeping vertices whose chart projection lies in B_rho.
std::vector<int> chart_component(const SampledImmersion& imm, int q, double rho,
                                 const EuclideanIsometry* frame = nullptr);

// Largest certified graph radius at q, by bisection to params.h_bisect.
double max_graph_radius(const SampledImmersion& imm, int q, double alpha,
                        const AtlasParams& params = {});

// r = (c alpha / A_lp)^(p/(p-m)). Rejects p_exp <= m; +inf for A_lp = 0.
double radius_bound(double p_exp, int m, double alpha, double A_lp, double c);

struct RadiusSequence {
    std::vector<double> values;  // r_j, decreasing
    double alpha = 0.0;

    void validate(bool noncompact, bool projection_enabled, int codim) const;
};

struct NetResult {
    std::vector<int> points;              // net vertex indices q_1, q_2, ...
    std::vector<double> delta;            // per net point
    std::vector<std::vector<int>> U;      // per net point vertex set (sorted)
    std::vector<std::vector<int>> Z;      // intersection index sets (0-based)
    std::vector<int> nu;                  // cumulative counts per annulus
    std::vector<int> nu_ceiling;          // a-priori recursion bound
    bool subdivided = false;
};

// Greedy delta-net: repeatedly pick the lowest-index uncovered vertex.
// Requires alpha^2 < 1/3 and 0 < delta < r; each chosen point must certify
// at (r, alpha).
NetResult delta_net(const SampledImmersion& imm, double delta, double r,
                    double alpha, const AtlasParams& params = {},
                    const std::vector<int>* restrict_to = nullptr);

// Exhaustion by ambient regions: level j covers contains(x, j),
// j = 1..levels. Balls B_j of radius j*ball_step by default; an optional
// boundary distance function switches to Omega-type regions
// (|x| < j and dist(x, boundary) > 1/j).
struct Exhaustion {
    int levels = 1;
    double ball_step = 1.0;
    std::function<double(const Vec&)> omega_boundary_dist;  // optional

    bool contains(const Vec& x, int level) const;
};

// Per-annulus greedy nets with the subdivision bookkeeping; profile_mass
// gives the a-priori annulus mass bound C(R).
NetResult delta_net_subdivided(const SampledImmersion& imm,
                               const std::vector<double>& delta_seq,
                               const RadiusSequence& rseq,
                               const Exhaustion& exhaustion,
                               const std::function<double(double)>& profile_mass,
                               const AtlasParams& params = {});

// Fill Z from the stored U sets (exact vertex-set intersection, symmetric).
void intersection_sets(NetResult& net);

}  // namespace imco
