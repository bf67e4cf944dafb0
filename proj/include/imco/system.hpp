#pragma once
#include <iosfwd>
#include <vector>

#include "imco/atlas.hpp"

namespace imco {

struct SystemEntry {
    EuclideanIsometry A;
    GraphPatch patch;
};

// Ordered list of (isometry, graph function) pairs encoding an immersion
// over a net.
struct GraphSystem {
    std::vector<SystemEntry> entries;
    std::vector<double> radius_seq;  // optional, per entry
    std::vector<int> nu;             // optional subdivision (cumulative)

    int size() const { return static_cast<int>(entries.size()); }
    int m() const { return entries.empty() ? 0 : entries[0].patch.domain.m; }
    int k() const { return entries.empty() ? 0 : entries[0].patch.k; }
    int n() const { return m() + k(); }
    // number of entries participating at a truncation level
    int entries_at_level(int level) const;
    void check_consistent() const;
};

// Extraction of the graph system of an immersion over a net. Entry j is the
// tangent chart at net point q_j with a centered patch of radius rho_j.
// rho_per_level: one radius per annulus for subdivided nets, or a single
// value.
GraphSystem extract_system(const SampledImmersion& imm, const NetResult& net,
                           const std::vector<double>& rho_per_level,
                           double alpha, const AtlasParams& params = {},
                           double tol_center = 1e-8);

// C1 distance of two patches over the same chart radius: both are resampled
// to the finer of the two grids, then sup|u-ut| + sup||Du-Dut|| with the
// column-Euclidean matrix norm.
double patch_c1_distance(const GraphPatch& a, const GraphPatch& b);

// The metric: sum over the first entries_at_level(level) entries of
// ||R-Rt||_op + |T-Tt| + ||u-ut||_C1. level < 0 sums all entries.
double system_distance(const GraphSystem& g, const GraphSystem& gt,
                       int level = -1);

struct ConvergenceLevel {
    int level = -1;
    Mat dist;                    // pairwise distance table
    std::vector<int> selected;   // greedy cluster around the medoid
    int cauchy_from = -1;        // first index with tail diameter <= tol, -1 if none
    bool cauchy = false;
};

struct ConvergenceReport {
    std::vector<ConvergenceLevel> levels;
    std::vector<int> diagonal;  // systems selected at every level
};

ConvergenceReport detect_convergence(const std::vector<GraphSystem>& seq,
                                     double tol,
                                     const std::vector<int>& levels = {});

// Round-trip-exact serialization.
void write_system(std::ostream& os, const GraphSystem& g);
GraphSystem read_system(std::istream& is);

}  // namespace imco
