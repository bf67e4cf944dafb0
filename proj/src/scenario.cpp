#include "imco/scenario.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>

namespace imco {

namespace {
constexpr double kPi = std::numbers::pi;

double param(const std::map<std::string, double>& p, const std::string& key,
             double dflt) {
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}
}  // namespace

SampledImmersion make_circle(double R, int segments, double cx, double cy) {
    SampledImmersion mesh;
    mesh.m = 1;
    mesh.n = 2;
    mesh.vertices.resize(segments, 2);
    for (int i = 0; i < segments; ++i) {
        double t = 2 * kPi * i / segments;
        mesh.vertices(i, 0) = cx + R * std::cos(t);
        mesh.vertices(i, 1) = cy + R * std::sin(t);
    }
    for (int i = 0; i < segments; ++i)
        mesh.simplices.push_back({i, (i + 1) % segments});
    mesh.build_adjacency();
    return mesh;
}

SampledImmersion make_segment(double x0, double x1, double y, int samples) {
    return make_graph_curve(x0, x1, samples, [y](double) { return y; });
}

SampledImmersion make_graph_curve(double x0, double x1, int samples,
                                  const std::function<double(double)>& f) {
    SampledImmersion mesh;
    mesh.m = 1;
    mesh.n = 2;
    mesh.vertices.resize(samples, 2);
    for (int i = 0; i < samples; ++i) {
        double x = x0 + (x1 - x0) * i / (samples - 1);
        mesh.vertices(i, 0) = x;
        mesh.vertices(i, 1) = f(x);
    }
    for (int i = 0; i + 1 < samples; ++i) mesh.simplices.push_back({i, i + 1});
    mesh.build_adjacency();
    return mesh;
}

SampledImmersion make_spiral(double pitch, double turns, int segments_per_turn) {
    SampledImmersion mesh;
    mesh.m = 1;
    mesh.n = 2;
    int total = static_cast<int>(turns * segments_per_turn);
    double theta_max = turns * 2 * kPi;
    mesh.vertices.resize(total + 1, 2);
    for (int i = 0; i <= total; ++i) {
        double t = theta_max * i / total;
        double r = 1.0 + pitch * (t - theta_max / 2) / (2 * kPi);
        mesh.vertices(i, 0) = r * std::cos(t);
        mesh.vertices(i, 1) = r * std::sin(t);
    }
    for (int i = 0; i < total; ++i) mesh.simplices.push_back({i, i + 1});
    mesh.build_adjacency();
    return mesh;
}

SampledImmersion make_dumbbell(double L, double gap, double cap,
                               int samples_per_side) {
    // closed curve: top line, right cap (half circle of radius gap/2 around
    // x = L, widened by `cap` horizontally), bottom line, left cap
    SampledImmersion mesh;
    mesh.m = 1;
    mesh.n = 2;
    std::vector<std::pair<double, double>> pts;
    int ns = samples_per_side;
    double R = gap / 2;
    for (int i = 0; i < ns; ++i) {  // top, left to right
        double x = -L + 2 * L * i / ns;
        pts.push_back({x, R});
    }
    int nc = std::max(8, ns / 4);
    for (int i = 0; i < nc; ++i) {  // right cap, going down
        double t = kPi / 2 - kPi * i / nc;
        pts.push_back({L + cap * std::cos(t), R * std::sin(t)});
    }
    for (int i = 0; i < ns; ++i) {  // bottom, right to left
        double x = L - 2 * L * i / ns;
        pts.push_back({x, -R});
    }
    for (int i = 0; i < nc; ++i) {  // left cap, going up
        double t = -kPi / 2 - kPi * i / nc;
        pts.push_back({-L + cap * std::cos(t), R * std::sin(t)});
    }
    int V = static_cast<int>(pts.size());
    mesh.vertices.resize(V, 2);
    for (int i = 0; i < V; ++i) {
        mesh.vertices(i, 0) = pts[i].first;
        mesh.vertices(i, 1) = pts[i].second;
    }
    for (int i = 0; i < V; ++i) mesh.simplices.push_back({i, (i + 1) % V});
    mesh.build_adjacency();
    return mesh;
}

SampledImmersion make_sphere(double R, int subdiv) {
    // subdivided icosahedron
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (auto& v : verts) v.normalize();
    for (int lvl = 0; lvl < subdiv; ++lvl) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            Eigen::Vector3d p = (verts[a] + verts[b]).normalized();
            verts.push_back(p);
            int id = static_cast<int>(verts.size()) - 1;
            mid[key] = id;
            return id;
        };
        std::vector<std::array<int, 3>> next;
        for (auto& f : faces) {
            int ab = midpoint(f[0], f[1]);
            int bc = midpoint(f[1], f[2]);
            int ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    SampledImmersion mesh;
    mesh.m = 2;
    mesh.n = 3;
    mesh.vertices.resize(static_cast<int>(verts.size()), 3);
    for (size_t i = 0; i < verts.size(); ++i)
        mesh.vertices.row(static_cast<int>(i)) = (R * verts[i]).transpose();
    for (auto& f : faces) mesh.simplices.push_back({f[0], f[1], f[2]});
    mesh.build_adjacency();
    return mesh;
}

SampledImmersion make_annulus_graph(
    double r0, double r1, int rings, int segments,
    const std::function<double(double, double)>& f) {
    SampledImmersion mesh;
    mesh.m = 2;
    mesh.n = 3;
    mesh.vertices.resize((rings + 1) * segments, 3);
    for (int i = 0; i <= rings; ++i) {
        double r = r0 + (r1 - r0) * i / rings;
        for (int j = 0; j < segments; ++j) {
            double t = 2 * kPi * j / segments;
            double x = r * std::cos(t), y = r * std::sin(t);
            int id = i * segments + j;
            mesh.vertices(id, 0) = x;
            mesh.vertices(id, 1) = y;
            mesh.vertices(id, 2) = f(x, y);
        }
    }
    for (int i = 0; i < rings; ++i)
        for (int j = 0; j < segments; ++j) {
            int a = i * segments + j;
            int b = i * segments + (j + 1) % segments;
            int c = (i + 1) * segments + j;
            int d = (i + 1) * segments + (j + 1) % segments;
            mesh.simplices.push_back({a, b, d});
            mesh.simplices.push_back({a, d, c});
        }
    mesh.build_adjacency();
    return mesh;
}

Scenario generate(const std::string& name,
                  const std::map<std::string, double>& params) {
    Scenario sc;
    sc.name = name;
    if (name == "circle_family") {
        int i_min = static_cast<int>(param(params, "i_min", 2));
        int i_max = static_cast<int>(param(params, "i_max", 17));
        int segments = static_cast<int>(param(params, "segments", 1024));
        for (int i = i_min; i <= i_max; ++i)
            sc.sequence.push_back(make_circle(1.0 + 1.0 / i, segments));
        sc.limit = make_circle(1.0, segments);
        sc.expected_components = 1;
        sc.annotations["limit_curvature"] = 1.0;
        sc.annotations["i_min"] = i_min;
    } else if (name == "sphere_family") {
        int i_min = static_cast<int>(param(params, "i_min", 2));
        int i_max = static_cast<int>(param(params, "i_max", 5));
        int subdiv = static_cast<int>(param(params, "subdiv", 3));
        for (int i = i_min; i <= i_max; ++i)
            sc.sequence.push_back(make_sphere(1.0 + 1.0 / i, subdiv));
        sc.limit = make_sphere(1.0, subdiv);
        sc.expected_components = 1;
    } else if (name == "two_lines_dumbbell") {
        int count = static_cast<int>(param(params, "count", 4));
        double gap = param(params, "gap", 1.0);
        int samples = static_cast<int>(param(params, "samples", 600));
        for (int i = 1; i <= count; ++i)
            sc.sequence.push_back(make_dumbbell(3.0 + i, gap, 1.0, samples));
        // inside any fixed window the limit is two parallel lines
        double L = 3.0 + count + 2.0;
        SampledImmersion top = make_segment(-L, L, gap / 2, samples);
        SampledImmersion bot = make_segment(-L, L, -gap / 2, samples);
        SampledImmersion both;
        both.m = 1;
        both.n = 2;
        both.vertices.resize(top.num_vertices() + bot.num_vertices(), 2);
        both.vertices.topRows(top.num_vertices()) = top.vertices;
        both.vertices.bottomRows(bot.num_vertices()) = bot.vertices;
        both.simplices = top.simplices;
        for (auto s : bot.simplices) {
            for (int& v : s) v += top.num_vertices();
            both.simplices.push_back(s);
        }
        both.build_adjacency();
        sc.limit = std::move(both);
        sc.expected_components = 2;
    } else if (name == "spiral_vs_circle") {
        double pitch = param(params, "pitch", 0.25);
        int segments = static_cast<int>(param(params, "segments", 512));
        sc.sequence.push_back(make_spiral(pitch, 2.0, segments));
        sc.limit = make_circle(1.0, segments);
        sc.expect_diffeomorphic = false;
        sc.annotations["pitch"] = pitch;
    } else if (name == "annulus_graphs") {
        int i_min = static_cast<int>(param(params, "i_min", 2));
        int i_max = static_cast<int>(param(params, "i_max", 5));
        for (int i = i_min; i <= i_max; ++i) {
            double amp = 0.2 / (i * i);
            sc.sequence.push_back(make_annulus_graph(
                1.0, 3.0, 24, 96, [amp](double x, double y) {
                    return amp * std::sin(x) * std::cos(y);
                }));
        }
        sc.limit = make_annulus_graph(1.0, 3.0, 24, 96,
                                      [](double, double) { return 0.0; });
        sc.expected_components = 1;
    } else if (name == "line_family") {
        int count = static_cast<int>(param(params, "count", 4));
        double L = param(params, "length", 6.0);
        int samples = static_cast<int>(param(params, "samples", 1200));
        for (int i = 0; i < count; ++i)
            sc.sequence.push_back(make_segment(-L, L, 0.0, samples));
        sc.limit = make_segment(-L, L, 0.0, samples);
        sc.expected_components = 1;
    } else if (name == "shrinking_perturbation") {
        int i_min = static_cast<int>(param(params, "i_min", 2));
        int i_max = static_cast<int>(param(params, "i_max", 17));
        double L = param(params, "length", 1.0);
        int samples = static_cast<int>(param(params, "samples", 4000));
        for (int i = i_min; i <= i_max; ++i)
            sc.sequence.push_back(
                make_graph_curve(-L, L, samples, [i](double x) {
                    return std::sin(i * x) / double(i * i);
                }));
        sc.limit = make_segment(-L, L, 0.0, samples);
        sc.expected_components = 1;
        sc.annotations["i_min"] = i_min;
    } else {
        throw std::invalid_argument("generate: unknown scenario " + name);
    }
    return sc;
}

}  // namespace imco
