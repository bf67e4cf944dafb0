#include <doctest.h>

#include <cmath>
#include <sstream>

#include "imco/scenario.hpp"
#include "imco/system.hpp"

using namespace imco;

namespace {

GraphPatch arc_patch(double R, double r, double h) {
    GraphPatch p(GridBall(1, r, h), 1);
    for (int nd = 0; nd < p.domain.size(); ++nd) {
        double x = p.domain.coord(nd)(0);
        p.values(nd, 0) = R - std::sqrt(R * R - x * x);
    }
    return p;
}

GraphSystem one_entry(const EuclideanIsometry& A, const GraphPatch& p) {
    GraphSystem g;
    g.entries.push_back({A, p});
    return g;
}

}  // namespace

TEST_CASE("extract_system over a circle net") {
    SampledImmersion c = make_circle(1.0, 1024);
    NetResult net = delta_net(c, 0.3, 0.44, 0.5);
    GraphSystem sys = extract_system(c, net, {0.44}, 0.5);
    REQUIRE(sys.size() == static_cast<int>(net.points.size()));
    CHECK(sys.m() == 1);
    CHECK(sys.k() == 1);
    sys.check_consistent();
    for (const auto& e : sys.entries) {
        CHECK(e.patch.check_centered(1e-6));
        PatchDerivs d = differentiate(e.patch);
        for (const Mat& J : d.Du) CHECK(J.norm() <= 0.5 + 1e-6);
        // arc graph over the tangent chart: u(x) = 1 - sqrt(1 - x^2)
        for (int nd = 0; nd < e.patch.domain.size(); ++nd) {
            double x = e.patch.domain.coord(nd)(0);
            double expect = 1 - std::sqrt(1 - x * x);
            CHECK(std::abs(std::abs(e.patch.values(nd, 0)) - expect) < 2e-3);
        }
    }
}

TEST_CASE("system distance of a system to itself is zero") {
    GraphSystem g = one_entry(EuclideanIsometry::identity(2),
                              arc_patch(1.0, 0.4, 0.01));
    CHECK(system_distance(g, g) == doctest::Approx(0.0));
}

TEST_CASE("pure translation contributes its length") {
    GraphPatch p = arc_patch(1.0, 0.4, 0.01);
    GraphSystem a = one_entry(EuclideanIsometry::identity(2), p);
    EuclideanIsometry shifted = EuclideanIsometry::identity(2);
    shifted.translation(0) = 1.0;
    GraphSystem b = one_entry(shifted, p);
    CHECK(system_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pure rotation contributes the operator-norm gap") {
    GraphPatch p = arc_patch(1.0, 0.4, 0.01);
    GraphSystem a = one_entry(EuclideanIsometry::identity(2), p);
    EuclideanIsometry rot(rotation2(M_PI / 3), Vec::Zero(2));
    GraphSystem b = one_entry(rot, p);
    // patches held fixed: only the rotation term, 2 sin(pi/6) = 1
    CHECK(system_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metric axioms on perturbed systems") {
    GraphPatch p = arc_patch(1.0, 0.4, 0.01);
    GraphPatch q = arc_patch(1.3, 0.4, 0.01);
    GraphPatch s = arc_patch(1.7, 0.4, 0.005);  // finer grid operand
    EuclideanIsometry I = EuclideanIsometry::identity(2);
    EuclideanIsometry rot(rotation2(0.2), (Vec(2) << 0.1, -0.3).finished());
    GraphSystem A = one_entry(I, p);
    GraphSystem B = one_entry(rot, q);
    GraphSystem C = one_entry(I, s);
    double ab = system_distance(A, B);
    double ba = system_distance(B, A);
    double ac = system_distance(A, C);
    double cb = system_distance(C, B);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(ab > 0);
}

TEST_CASE("truncation monotonicity") {
    GraphPatch p = arc_patch(1.0, 0.3, 0.01);
    GraphPatch q = arc_patch(1.5, 0.3, 0.01);
    GraphSystem A, B;
    for (int j = 0; j < 4; ++j) {
        EuclideanIsometry iso = EuclideanIsometry::identity(2);
        iso.translation(0) = j;
        A.entries.push_back({iso, p});
        B.entries.push_back({iso, q});
    }
    A.nu = {0, 1, 2, 4};
    B.nu = {0, 1, 2, 4};
    double d1 = system_distance(A, B, 1);
    double d2 = system_distance(A, B, 2);
    double d3 = system_distance(A, B, 3);
    CHECK(d1 <= d2 + 1e-15);
    CHECK(d2 <= d3 + 1e-15);
    CHECK(d3 == doctest::Approx(system_distance(A, B)).epsilon(1e-12));
}

TEST_CASE("constant sequence is Cauchy at any positive tolerance") {
    GraphSystem g = one_entry(EuclideanIsometry::identity(2),
                              arc_patch(1.0, 0.4, 0.01));
    std::vector<GraphSystem> seq(5, g);
    ConvergenceReport rep = detect_convergence(seq, 1e-12);
    REQUIRE(!rep.levels.empty());
    CHECK(rep.levels[0].cauchy);
    CHECK(rep.levels[0].selected.size() == 5);
}

TEST_CASE("shrinking arc perturbation converges") {
    std::vector<GraphSystem> seq;
    for (int i = 2; i <= 12; ++i)
        seq.push_back(one_entry(EuclideanIsometry::identity(2),
                                arc_patch(1.0 + 1.0 / i, 0.4, 0.01)));
    ConvergenceReport rep = detect_convergence(seq, 0.1);
    REQUIRE(!rep.levels.empty());
    CHECK(rep.levels[0].cauchy);
    // distances to the last member decrease along the sequence
    double prev = 1e9;
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
        double d = system_distance(seq[i], seq.back());
        CHECK(d < prev + 1e-12);
        prev = d;
    }
}

TEST_CASE("alternating shapes select one parity class") {
    GraphSystem a = one_entry(EuclideanIsometry::identity(2),
                              arc_patch(1.0, 0.4, 0.01));
    GraphSystem b = one_entry(EuclideanIsometry::identity(2),
                              arc_patch(3.0, 0.4, 0.01));
    std::vector<GraphSystem> seq;
    for (int i = 0; i < 8; ++i) seq.push_back(i % 2 ? b : a);
    ConvergenceReport rep = detect_convergence(seq, 0.01);
    REQUIRE(!rep.levels.empty());
    REQUIRE(rep.levels[0].selected.size() >= 2);
    int parity = rep.levels[0].selected[0] % 2;
    for (int idx : rep.levels[0].selected) CHECK(idx % 2 == parity);
    // no suffix settles down, so the tail Cauchy index never fires
    CHECK(!rep.levels[0].cauchy);
}

TEST_CASE("system serialization round trips bit-exactly") {
    SampledImmersion c = make_circle(1.0, 512);
    NetResult net = delta_net(c, 0.3, 0.44, 0.5);
    GraphSystem sys = extract_system(c, net, {0.44}, 0.5);
    sys.nu = {0, sys.size()};
    std::stringstream ss;
    write_system(ss, sys);
    GraphSystem back = read_system(ss);
    REQUIRE(back.size() == sys.size());
    CHECK(back.nu == sys.nu);
    CHECK(back.radius_seq == sys.radius_seq);
    for (int j = 0; j < sys.size(); ++j) {
        CHECK((back.entries[j].A.rotation - sys.entries[j].A.rotation).norm() ==
              0.0);
        CHECK((back.entries[j].A.translation - sys.entries[j].A.translation)
                  .norm() == 0.0);
        CHECK((back.entries[j].patch.values - sys.entries[j].patch.values)
                  .norm() == 0.0);
    }
    CHECK(system_distance(sys, back) == doctest::Approx(0.0));
}
