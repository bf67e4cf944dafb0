#include "imco/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace imco {

void SampledImmersion::build_adjacency() {
    int V = num_vertices();
    vert_simplices.assign(V, {});
    std::vector<std::set<int>> nb(V);
    for (int s = 0; s < num_simplices(); ++s) {
        for (int a : simplices[s]) {
            vert_simplices[a].push_back(s);
            for (int b : simplices[s])
                if (a != b) nb[a].insert(b);
        }
    }
    vert_neighbors.assign(V, {});
    for (int v = 0; v < V; ++v)
        vert_neighbors[v].assign(nb[v].begin(), nb[v].end());
}

double SampledImmersion::simplex_volume(int s) const {
    const auto& sx = simplices[s];
    Mat E(n, m);
    for (int a = 0; a < m; ++a)
        E.col(a) = vertex(sx[a + 1]) - vertex(sx[0]);
    Mat G = E.transpose() * E;
    double det = G.determinant();
    if (det <= 0) return 0.0;
    double fact = 1.0;
    for (int a = 2; a <= m; ++a) fact *= a;
    return std::sqrt(det) / fact;
}

double SampledImmersion::total_volume() const {
    double v = 0;
    for (int s = 0; s < num_simplices(); ++s) v += simplex_volume(s);
    return v;
}

double SampledImmersion::local_edge_length(int v) const {
    if (vert_neighbors.empty() || vert_neighbors[v].empty()) return 0.0;
    double acc = 0;
    for (int w : vert_neighbors[v]) acc += (vertex(w) - vertex(v)).norm();
    return acc / double(vert_neighbors[v].size());
}

double SampledImmersion::min_edge_length() const {
    double best = 1e300;
    for (int s = 0; s < num_simplices(); ++s)
        for (size_t a = 0; a < simplices[s].size(); ++a)
            for (size_t b = a + 1; b < simplices[s].size(); ++b)
                best = std::min(best, (vertex(simplices[s][a]) -
                                       vertex(simplices[s][b]))
                                          .norm());
    return best;
}

void SampledImmersion::validate(double vol_min) const {
    if (m < 1 || n <= m) throw std::invalid_argument("mesh: bad dimensions");
    for (int s = 0; s < num_simplices(); ++s) {
        if (static_cast<int>(simplices[s].size()) != m + 1)
            throw std::invalid_argument("mesh: simplex arity mismatch");
        for (int v : simplices[s])
            if (v < 0 || v >= num_vertices())
                throw std::invalid_argument("mesh: vertex index out of range");
        if (simplex_volume(s) < vol_min)
            throw std::invalid_argument("mesh: degenerate simplex");
    }
    // each (m-1)-face in at most 2 simplices
    std::map<std::vector<int>, int> face_count;
    for (int s = 0; s < num_simplices(); ++s) {
        for (int drop = 0; drop <= m; ++drop) {
            std::vector<int> face;
            for (int a = 0; a <= m; ++a)
                if (a != drop) face.push_back(simplices[s][a]);
            std::sort(face.begin(), face.end());
            if (++face_count[face] > 2)
                throw std::invalid_argument("mesh: non-manifold face");
        }
    }
}

void save_mesh(std::ostream& os, const SampledImmersion& mesh) {
    os << "mesh " << mesh.m << " " << mesh.n << " " << mesh.num_vertices()
       << " " << mesh.num_simplices() << "\n";
    os.precision(17);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        for (int c = 0; c < mesh.n; ++c) os << mesh.vertices(v, c) << " ";
        os << "\n";
    }
    for (const auto& s : mesh.simplices) {
        for (int v : s) os << v << " ";
        os << "\n";
    }
}

SampledImmersion load_mesh(std::istream& is) {
    std::string tag;
    is >> tag;
    if (tag != "mesh") throw std::runtime_error("load_mesh: bad header");
    SampledImmersion mesh;
    int V, S;
    is >> mesh.m >> mesh.n >> V >> S;
    if (!is || V <= 0 || S < 0) throw std::runtime_error("load_mesh: bad counts");
    mesh.vertices.resize(V, mesh.n);
    for (int v = 0; v < V; ++v)
        for (int c = 0; c < mesh.n; ++c) {
            double val;
            is >> val;
            if (!is) throw std::runtime_error("load_mesh: truncated vertices");
            if (!std::isfinite(val))
                throw std::runtime_error("load_mesh: non-finite coordinate");
            mesh.vertices(v, c) = val;
        }
    mesh.simplices.resize(S);
    for (int s = 0; s < S; ++s) {
        mesh.simplices[s].resize(mesh.m + 1);
        for (int a = 0; a <= mesh.m; ++a) {
            is >> mesh.simplices[s][a];
            if (!is) throw std::runtime_error("load_mesh: truncated simplices");
        }
    }
    mesh.build_adjacency();
    mesh.validate();
    return mesh;
}

}  // namespace imco
