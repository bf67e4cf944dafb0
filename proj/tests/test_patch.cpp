#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "imco/patch.hpp"

using namespace imco;

namespace {

GraphPatch analytic_patch(int m, int k, double r, double h,
                          const std::function<Vec(const Vec&)>& f) {
    GraphPatch p(GridBall(m, r, h), k);
    for (int nd = 0; nd < p.domain.size(); ++nd)
        p.values.row(nd) = f(p.domain.coord(nd)).transpose();
    return p;
}

Vec scalar1(double v) {
    Vec out(1);
    out(0) = v;
    return out;
}

}  // namespace

TEST_CASE("GridBall lattice covers the open ball") {
    GridBall g(1, 1.0, 0.25);
    CHECK(g.size() == 7);  // -0.75 .. 0.75
    CHECK(g.coord(g.origin()).norm() == doctest::Approx(0.0));
    std::vector<int> idx{3};
    CHECK(g.find(idx) >= 0);
    CHECK(g.coord(g.find(idx))(0) == doctest::Approx(0.75));
    idx[0] = 4;
    CHECK(g.find(idx) == -1);
    CHECK(g.neighbor(g.origin(), 0, 1) >= 0);

    GridBall g2(2, 0.5, 0.1);
    for (int nd = 0; nd < g2.size(); ++nd)
        CHECK(g2.coord(nd).norm() < 0.5);
}

TEST_CASE("cell weights sum close to the ball volume") {
    GridBall g(2, 1.0, 0.05);
    double total = 0;
    for (int nd = 0; nd < g.size(); ++nd) total += g.cell_weight(nd);
    CHECK(total == doctest::Approx(M_PI).epsilon(0.02));
}

TEST_CASE("finite differences on u = x^2/2") {
    GraphPatch p = analytic_patch(1, 1, 1.0, 0.005, [](const Vec& x) {
        return scalar1(0.5 * x(0) * x(0));
    });
    PatchDerivs d = differentiate(p);
    std::vector<int> idx{100};  // x = 0.5
    int nd = p.domain.find(idx);
    REQUIRE(nd >= 0);
    CHECK(d.Du[nd](0, 0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(d.d2(p.domain.origin(), 0, 0, 1)(0) ==
          doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("mixed derivative of u = x1 x2") {
    GraphPatch p = analytic_patch(2, 1, 0.5, 0.01, [](const Vec& x) {
        return scalar1(x(0) * x(1));
    });
    PatchDerivs d = differentiate(p);
    CHECK(d.d2(p.domain.origin(), 0, 1, 2)(0) ==
          doctest::Approx(1.0).epsilon(1e-4));
    CHECK(d.d2(p.domain.origin(), 1, 0, 2)(0) ==
          doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("circle arc of radius 2 has curvature norm 1/2 at the center") {
    const double R = 2.0;
    GraphPatch p = analytic_patch(1, 1, 0.8, 0.005, [&](const Vec& x) {
        return scalar1(R - std::sqrt(R * R - x(0) * x(0)));
    });
    PatchGeometry g = fundamental_forms(p);
    CHECK(g.normA[p.domain.origin()] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("unit sphere cap has ||A||^2 = 2 at the pole") {
    GraphPatch p = analytic_patch(2, 1, 0.4, 0.01, [](const Vec& x) {
        return scalar1(1.0 - std::sqrt(1.0 - x.squaredNorm()));
    });
    PatchGeometry g = fundamental_forms(p);
    double a = g.normA[p.domain.origin()];
    CHECK(a * a == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("two curvature-norm formulas agree") {
    GraphPatch p = analytic_patch(2, 1, 0.4, 0.02, [](const Vec& x) {
        return scalar1(0.3 * x(0) * x(0) - 0.2 * x(0) * x(1) +
                       0.1 * std::sin(3 * x(1)));
    });
    PatchGeometry g = fundamental_forms(p);
    for (int nd = 0; nd < p.domain.size(); ++nd) {
        double alt = norm_A_orthoframe(g, nd);
        if (g.normA[nd] > 1e-8)
            CHECK(std::abs(alt - g.normA[nd]) / g.normA[nd] < 1e-10);
    }
}

TEST_CASE("L^p norms of a circle arc match the closed form") {
    const double R = 1.0, r = 0.5;
    GraphPatch p = analytic_patch(1, 1, r, 0.002, [&](const Vec& x) {
        return scalar1(R - std::sqrt(R * R - x(0) * x(0)));
    });
    PatchGeometry g = fundamental_forms(p);
    LpResult lp = lp_norms(p, g, 2.0);
    double arc = 2 * R * std::asin(r / R);
    CHECK(lp.volume == doctest::Approx(arc).epsilon(1e-2));
    CHECK(lp.A_lp == doctest::Approx(std::sqrt(arc) / R).epsilon(1e-2));
    CHECK(lp.A_sup == doctest::Approx(1.0 / R).epsilon(1e-2));
}

TEST_CASE("du_c0_norm of a linear graph is the slope") {
    GraphPatch p = analytic_patch(1, 1, 0.5, 0.01, [](const Vec& x) {
        return scalar1(0.3 * x(0));
    });
    PatchGeometry g = fundamental_forms(p);
    CHECK(du_c0_norm(g) == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("estimate report holds on a sampled arc and is sharp-ish") {
    const double R = 1.5;
    GraphPatch p = analytic_patch(1, 1, 0.6, 0.0025, [&](const Vec& x) {
        return scalar1(R - std::sqrt(R * R - x(0) * x(0)));
    });
    PatchGeometry g = fundamental_forms(p);
    EstimateReport rep = estimate_report(p, g, 2.0);
    CHECK(rep.lp_ok);
    CHECK(rep.height_ok);
    CHECK(rep.projection_ok);
    CHECK(rep.d2u_lp <= rep.rhs_lp * 1.02);
    CHECK(rep.morrey_ratio <= 1.0);
}

TEST_CASE("interpolation reproduces multilinear data exactly") {
    GraphPatch p = analytic_patch(2, 2, 0.5, 0.1, [](const Vec& x) {
        Vec v(2);
        v << 1 + 2 * x(0) - x(1) + 3 * x(0) * x(1), x(0);
        return v;
    });
    Vec q(2);
    q << 0.13, -0.07;
    Vec got = p.interpolate(q);
    CHECK(got(0) == doctest::Approx(1 + 2 * 0.13 + 0.07 + 3 * 0.13 * -0.07)
                        .epsilon(1e-12));
    CHECK(got(1) == doctest::Approx(0.13).epsilon(1e-12));
}

TEST_CASE("patch serialization round trips bit-exactly") {
    GraphPatch p = analytic_patch(2, 1, 0.37, 0.041, [](const Vec& x) {
        return scalar1(std::sin(x(0)) * std::exp(x(1)) / 3.0);
    });
    p.centered = true;
    std::stringstream ss;
    write_patch(ss, p);
    GraphPatch q = read_patch(ss);
    REQUIRE(q.domain.size() == p.domain.size());
    CHECK(q.k == p.k);
    CHECK(q.domain.r == p.domain.r);
    CHECK(q.domain.h == p.domain.h);
    CHECK(q.centered == p.centered);
    for (int nd = 0; nd < p.domain.size(); ++nd)
        for (int c = 0; c < p.k; ++c)
            CHECK(q.values(nd, c) == p.values(nd, c));  // exact
}
