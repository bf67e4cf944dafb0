#pragma once
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imco/mesh.hpp"

namespace imco {

// Deterministic mesh fixtures: same parameters, bit-identical meshes.
struct Scenario {
    std::string name;
    std::vector<SampledImmersion> sequence;
    std::optional<SampledImmersion> limit;  // analytic limit member, if known
    // ground-truth annotations
    int expected_components = 1;
    bool expect_diffeomorphic = true;
    std::map<std::string, double> annotations;
};

// Closed m=1 polygon of radius R in R^2.
SampledImmersion make_circle(double R, int segments, double cx = 0,
                             double cy = 0);
// Straight segment [x0, x1] x {y} sampled with the given count.
SampledImmersion make_segment(double x0, double x1, double y, int samples);
// Graph curve (x, f(x)) over [x0, x1].
SampledImmersion make_graph_curve(double x0, double x1, int samples,
                                  const std::function<double(double)>& f);
// Archimedean-type spiral radius 1 + pitch*(theta - mid)/(2 pi), theta in
// [0, turns*2 pi].
SampledImmersion make_spiral(double pitch, double turns, int segments_per_turn);
// Closed stadium-like curve: two horizontal lines y = +-gap/2 for |x| <= L,
// closed by caps at |x| in [L, L + cap].
SampledImmersion make_dumbbell(double L, double gap, double cap,
                               int samples_per_side);
// Triangulated sphere of radius R (subdivided icosahedron).
SampledImmersion make_sphere(double R, int subdiv);
// Triangulated graph z = f(x, y) over the annulus r0 < |x| < r1.
SampledImmersion make_annulus_graph(double r0, double r1, int rings,
                                    int segments,
                                    const std::function<double(double, double)>& f);

// Named scenario families used by the pipeline and the acceptance suite:
//   circle_family, sphere_family, two_lines_dumbbell, spiral_vs_circle,
//   annulus_graphs, line_family, shrinking_perturbation
Scenario generate(const std::string& name,
                  const std::map<std::string, double>& params = {});

}  // namespace imco
