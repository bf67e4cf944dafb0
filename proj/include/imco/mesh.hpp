#pragma once
#include <iosfwd>
#include <vector>

#include "imco/ambient.hpp"

namespace imco {

// Simplicial m-mesh with vertex positions in R^n: the sampled form of an
// immersion f : M -> R^n.
struct SampledImmersion {
    int m = 0, n = 0;
    Mat vertices;                              // V x n
    std::vector<std::vector<int>> simplices;   // each m+1 vertex indices
    std::vector<std::vector<int>> vert_simplices;
    std::vector<std::vector<int>> vert_neighbors;

    int num_vertices() const { return static_cast<int>(vertices.rows()); }
    int num_simplices() const { return static_cast<int>(simplices.size()); }
    Vec vertex(int v) const { return vertices.row(v).transpose(); }

    void build_adjacency();
    // m-volume of a simplex under the metric induced from R^n
    double simplex_volume(int s) const;
    double total_volume() const;
    // mean incident edge length
    double local_edge_length(int v) const;
    double min_edge_length() const;

    // positive simplex volumes and a manifold complex: each (m-1)-face in
    // at most two simplices
    void validate(double vol_min = 1e-12) const;
};

// File format: "mesh m n V S" header, V vertex lines (n floats), S simplex
// lines (m+1 indices). Strict parse, NaN rejected.
void save_mesh(std::ostream& os, const SampledImmersion& mesh);
SampledImmersion load_mesh(std::istream& is);

}  // namespace imco
