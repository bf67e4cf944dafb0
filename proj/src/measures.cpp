#include "imco/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace imco {

namespace {

double simplex_mass(const std::vector<Vec>& verts) {
    int m = static_cast<int>(verts.size()) - 1;
    Mat E(verts[0].size(), m);
    for (int a = 0; a < m; ++a) E.col(a) = verts[a + 1] - verts[0];
    double g = (E.transpose() * E).determinant();
    if (g <= 0) return 0.0;
    double fact = 1.0;
    for (int a = 2; a <= m; ++a) fact *= a;
    return std::sqrt(g) / fact;
}

Vec centroid(const std::vector<Vec>& verts) {
    Vec c = Vec::Zero(verts[0].size());
    for (const Vec& v : verts) c += v;
    return c / double(verts.size());
}

// per node: how many chart balls contain its point, so overlap regions
// integrate with the right weight
std::vector<std::vector<double>> chart_multiplicity(const LimitManifold& lim) {
    std::vector<std::vector<double>> mult(lim.num_charts());
    for (int j = 0; j < lim.num_charts(); ++j) {
        const GridBall& g = lim.system.entries[j].patch.domain;
        mult[j].assign(g.size(), 1.0);
        for (int nd = 0; nd < g.size(); ++nd) {
            Vec x = g.coord(nd);
            int count = 1;  // the chart itself
            for (int k : lim.Z[j]) {
                if (k == j) continue;
                double res;
                chart_to_chart(lim.system, lim.radii, j, k, x, &res);
                if (res <= lim.tol_glue) ++count;
            }
            mult[j][nd] = double(count);
        }
    }
    return mult;
}

}  // namespace

MeasureHandle measure_from_mesh(const SampledImmersion& mesh) {
    MeasureHandle mu;
    mu.m = mesh.m;
    for (int s = 0; s < mesh.num_simplices(); ++s) {
        std::vector<Vec> verts;
        for (int v : mesh.simplices[s]) verts.push_back(mesh.vertex(v));
        double mass = simplex_mass(verts);
        mu.cells.push_back(std::move(verts));
        mu.mass.push_back(mass);
        mu.total += mass;
    }
    return mu;
}

MeasureHandle measure_from_limit(const LimitManifold& lim) {
    MeasureHandle mu;
    int m = lim.system.m();
    mu.m = m;
    // per-node weight: one over the number of chart balls containing it
    std::vector<std::vector<double>> mult = chart_multiplicity(lim);
    auto weight = [&](int j, int nd) { return 1.0 / mult[j][nd]; };

    for (int j = 0; j < lim.num_charts(); ++j) {
        const GridBall& g = lim.system.entries[j].patch.domain;
        for (int nd = 0; nd < g.size(); ++nd) {
            if (m == 1) {
                int nb = g.neighbor(nd, 0, 1);
                if (nb < 0) continue;
                std::vector<Vec> verts{lim.ambient(j, nd), lim.ambient(j, nb)};
                double w = (weight(j, nd) + weight(j, nb)) / 2;
                double mass = simplex_mass(verts) * w;
                mu.cells.push_back(std::move(verts));
                mu.mass.push_back(mass);
                mu.total += mass;
            } else if (m == 2) {
                int nx = g.neighbor(nd, 0, 1);
                int ny = g.neighbor(nd, 1, 1);
                int nxy = nx >= 0 ? g.neighbor(nx, 1, 1) : -1;
                if (nx < 0 || ny < 0 || nxy < 0) continue;
                Vec p = lim.ambient(j, nd), px = lim.ambient(j, nx),
                    py = lim.ambient(j, ny), pxy = lim.ambient(j, nxy);
                double w = (weight(j, nd) + weight(j, nx) + weight(j, ny) +
                            weight(j, nxy)) /
                           4;
                for (auto& tri :
                     {std::vector<Vec>{p, px, pxy}, std::vector<Vec>{p, pxy, py}}) {
                    double mass = simplex_mass(tri) * w;
                    mu.cells.push_back(tri);
                    mu.mass.push_back(mass);
                    mu.total += mass;
                }
            } else {
                throw std::invalid_argument(
                    "measure_from_limit: m > 2 not supported");
            }
        }
    }
    return mu;
}

double Probe::operator()(const Vec& p) const {
    double v = 1.0;
    for (int a = 0; a < center.size(); ++a) {
        double t = std::abs((p(a) - center(a)) / halfwidth(a));
        if (t >= 1) return 0.0;
        v *= 1 - 3 * t * t + 2 * t * t * t;
    }
    return v;
}

double Probe::lip() const {
    double l = 0;
    for (int a = 0; a < halfwidth.size(); ++a) l += 1.5 / halfwidth(a);
    return l;
}

std::vector<Probe> default_probes(
    const std::vector<const MeasureHandle*>& ms) {
    int n = 0;
    for (const auto* mu : ms)
        if (!mu->cells.empty()) n = static_cast<int>(mu->cells[0][0].size());
    Vec lo = Vec::Constant(n, 1e300), hi = Vec::Constant(n, -1e300);
    for (const auto* mu : ms)
        for (const auto& cell : mu->cells)
            for (const Vec& v : cell) {
                lo = lo.cwiseMin(v);
                hi = hi.cwiseMax(v);
            }
    Vec mid = (lo + hi) / 2, ext = (hi - lo).cwiseMax(1e-6);
    std::vector<Probe> probes;
    for (int i = 0; i < 8; ++i) {
        Probe p;
        p.center = mid;
        for (int a = 0; a < std::min(n, 3); ++a)
            if ((i >> a) & 1) p.center(a) += ext(a) / 4;
            else p.center(a) -= ext(a) / 4;
        p.halfwidth = 0.6 * ext;
        probes.push_back(std::move(p));
    }
    return probes;
}

namespace {

double ball_mass_cell(const std::vector<Vec>& verts, double mass, double R,
                      int depth) {
    double mx = 0, mn = 1e300;
    for (const Vec& v : verts) {
        double d = v.norm();
        mx = std::max(mx, d);
        mn = std::min(mn, d);
    }
    if (mx <= R) return mass;
    if (mn > R && depth == 0) return 0.0;
    if (depth == 0) return centroid(verts).norm() <= R ? mass : 0.0;
    if (mn > R) return 0.0;
    // split along the longest edge
    int ea = 0, eb = 1;
    double best = -1;
    for (size_t a = 0; a < verts.size(); ++a)
        for (size_t b = a + 1; b < verts.size(); ++b) {
            double d = (verts[a] - verts[b]).norm();
            if (d > best) {
                best = d;
                ea = static_cast<int>(a);
                eb = static_cast<int>(b);
            }
        }
    Vec mid = (verts[ea] + verts[eb]) / 2;
    std::vector<Vec> left = verts, right = verts;
    left[eb] = mid;
    right[ea] = mid;
    return ball_mass_cell(left, mass / 2, R, depth - 1) +
           ball_mass_cell(right, mass / 2, R, depth - 1);
}

}  // namespace

double ball_mass(const MeasureHandle& mu, double R, int depth) {
    if (R <= 0) throw std::invalid_argument("ball_mass: R must be positive");
    double total = 0;
    for (size_t c = 0; c < mu.cells.size(); ++c)
        total += ball_mass_cell(mu.cells[c], mu.mass[c], R, depth);
    return total;
}

double integrate(const MeasureHandle& mu, const Probe& phi) {
    double total = 0;
    for (size_t c = 0; c < mu.cells.size(); ++c) {
        const auto& v = mu.cells[c];
        double cell = 0;
        if (mu.m == 1) {
            static const double t[3] = {0.5 - std::sqrt(3.0 / 5.0) / 2, 0.5,
                                        0.5 + std::sqrt(3.0 / 5.0) / 2};
            static const double w[3] = {5.0 / 18, 8.0 / 18, 5.0 / 18};
            for (int q = 0; q < 3; ++q)
                cell += w[q] * phi(v[0] + t[q] * (v[1] - v[0]));
        } else if (mu.m == 2) {
            static const double a = 0.445948490915965,
                                b = 0.091576213509771,
                                wa = 0.223381589678011,
                                wb = 0.109951743655322;
            static const double bary[6][3] = {
                {a, a, 1 - 2 * a},       {a, 1 - 2 * a, a},
                {1 - 2 * a, a, a},       {b, b, 1 - 2 * b},
                {b, 1 - 2 * b, b},       {1 - 2 * b, b, b}};
            static const double wq[6] = {wa, wa, wa, wb, wb, wb};
            for (int q = 0; q < 6; ++q)
                cell += wq[q] * phi(bary[q][0] * v[0] + bary[q][1] * v[1] +
                                    bary[q][2] * v[2]);
        } else {
            cell = phi(centroid(v));
        }
        total += cell * mu.mass[c];
    }
    return total;
}

bool WeakReport::all_ok() const {
    for (const auto& r : regions)
        if (!r.ok) return false;
    return true;
}

WeakReport weak_convergence_check(const std::vector<MeasureHandle>& seq,
                                  const MeasureHandle& limit,
                                  const std::vector<Probe>& probes,
                                  const std::vector<double>& radii,
                                  double slack) {
    WeakReport rep;
    int N = static_cast<int>(seq.size());
    int tail_from = N - std::max(1, N / 3);
    for (size_t p = 0; p < probes.size(); ++p) {
        ProbeRow row;
        row.probe = static_cast<int>(p);
        row.limit_value = integrate(limit, probes[p]);
        for (const auto& mu : seq)
            row.values.push_back(integrate(mu, probes[p]));
        for (int i = 0; i < N; ++i) {
            double gap = std::abs(row.values[i] - row.limit_value);
            row.max_gap = std::max(row.max_gap, gap);
            if (i >= tail_from) row.tail_gap = std::max(row.tail_gap, gap);
        }
        row.shrinking = row.tail_gap <= row.max_gap + 1e-15;
        rep.probes.push_back(std::move(row));
    }
    for (double R : radii) {
        double lv = ball_mass(limit, R);
        std::vector<double> vals;
        for (const auto& mu : seq) vals.push_back(ball_mass(mu, R));
        RegionRow compact;
        compact.R = R;
        compact.compact = true;
        compact.values = vals;
        compact.limit_value = lv;
        double tail_max = -1e300, tail_min = 1e300;
        for (int i = tail_from; i < N; ++i) {
            tail_max = std::max(tail_max, vals[i]);
            tail_min = std::min(tail_min, vals[i]);
        }
        compact.ok = tail_max <= lv + slack;
        RegionRow open = compact;
        open.compact = false;
        open.ok = lv <= tail_min + slack;
        rep.regions.push_back(std::move(compact));
        rep.regions.push_back(std::move(open));
    }
    return rep;
}

double curve_curvature_lp(const SampledImmersion& mesh, double p_exp) {
    if (mesh.m != 1)
        throw std::invalid_argument("curve_curvature_lp: curves only");
    double acc = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& nbrs = mesh.vert_neighbors[v];
        if (nbrs.size() != 2) continue;
        Vec e1 = mesh.vertex(v) - mesh.vertex(nbrs[0]);
        Vec e2 = mesh.vertex(nbrs[1]) - mesh.vertex(v);
        double c = e1.dot(e2) / (e1.norm() * e2.norm());
        double theta = std::acos(std::clamp(c, -1.0, 1.0));
        double len = (e1.norm() + e2.norm()) / 2;
        double kappa = theta / len;
        acc += std::pow(kappa, p_exp) * len;
    }
    return std::pow(acc, 1.0 / p_exp);
}

std::pair<double, double> limit_lp_norms(const LimitManifold& lim,
                                         double p_exp) {
    std::vector<std::vector<double>> mult = chart_multiplicity(lim);
    double acc = 0, vol = 0;
    for (int j = 0; j < lim.num_charts(); ++j) {
        const GraphPatch& u = lim.system.entries[j].patch;
        const GridBall& g = u.domain;
        PatchGeometry geom = fundamental_forms(u);
        for (int nd = 0; nd < g.size(); ++nd) {
            double w = g.cell_weight(nd) / mult[j][nd];
            acc += std::pow(geom.normA[nd], p_exp) * geom.sqrtDetG[nd] * w;
            vol += geom.sqrtDetG[nd] * w;
        }
    }
    return {std::pow(acc, 1.0 / p_exp), vol};
}

SemicontReport limit_bound_check(const std::vector<SampledImmersion>& seq,
                                 const LimitManifold& lim, double p_exp,
                                 double slack, const BoundProfile* profile,
                                 const std::vector<double>& radii) {
    SemicontReport rep;
    rep.slack = slack;
    auto [alp, vol] = limit_lp_norms(lim, p_exp);
    rep.limit_A_lp = alp;
    rep.limit_vol = vol;
    int m = lim.system.m();
    for (const auto& mesh : seq) {
        rep.seq_vol.push_back(mesh.total_volume());
        if (m == 1) rep.seq_A_lp.push_back(curve_curvature_lp(mesh, p_exp));
    }
    int N = static_cast<int>(seq.size());
    int tail_from = N - std::max(1, N / 3);
    rep.tail_min_A = 1e300;
    rep.tail_min_vol = 1e300;
    for (int i = tail_from; i < N; ++i) {
        rep.tail_min_vol = std::min(rep.tail_min_vol, rep.seq_vol[i]);
        if (m == 1) rep.tail_min_A = std::min(rep.tail_min_A, rep.seq_A_lp[i]);
    }
    rep.vol_ok = rep.limit_vol <= rep.tail_min_vol + slack;
    if (m == 1) {
        rep.a_ok = rep.limit_A_lp <= rep.tail_min_A + slack;
    } else {
        rep.a_ok = false;
        rep.profile_failures.push_back(
            "sequence curvature norms are computed for curves only");
    }

    if (profile && profile->C) {
        MeasureHandle mu = measure_from_limit(lim);
        for (double R : radii) {
            double mass = ball_mass(mu, R);
            if (mass > profile->C(R) + slack)
                rep.profile_failures.push_back(
                    "ball mass at R=" + std::to_string(R) + " is " +
                    std::to_string(mass) + ", above the profile ceiling " +
                    std::to_string(profile->C(R)));
        }
    }
    return rep;
}

}  // namespace imco
