#include "imco/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace imco {

namespace {

// uniform-cell spatial index for ambient point sets
struct PointGrid {
    double cell = 1.0;
    std::map<std::vector<int>, std::vector<int>> cells;
    const std::vector<Vec>* pts = nullptr;

    void build(const std::vector<Vec>& points, double cell_size) {
        cell = cell_size;
        pts = &points;
        cells.clear();
        for (size_t i = 0; i < points.size(); ++i)
            cells[key(points[i])].push_back(static_cast<int>(i));
    }
    std::vector<int> key(const Vec& p) const {
        std::vector<int> k(p.size());
        for (int a = 0; a < p.size(); ++a)
            k[a] = static_cast<int>(std::floor(p(a) / cell));
        return k;
    }
    // indices of stored points within `radius` of p (radius <= cell)
    void near(const Vec& p, double radius, std::vector<int>& out) const {
        out.clear();
        std::vector<int> k = key(p);
        int n = static_cast<int>(k.size());
        std::vector<int> off(n, -1);
        while (true) {
            std::vector<int> kk(n);
            for (int a = 0; a < n; ++a) kk[a] = k[a] + off[a];
            auto it = cells.find(kk);
            if (it != cells.end())
                for (int i : it->second)
                    if (((*pts)[i] - p).norm() <= radius) out.push_back(i);
            int a = 0;
            while (a < n && off[a] == 1) off[a++] = -1;
            if (a == n) break;
            ++off[a];
        }
    }
};

GraphPatch field_patch(const GridBall& g, const std::vector<Vec>& vals) {
    GraphPatch p(g, static_cast<int>(vals[0].size()));
    for (int nd = 0; nd < g.size(); ++nd) p.values.row(nd) = vals[nd].transpose();
    return p;
}

}  // namespace

NormalField smooth_normal_field(const LimitManifold& lim,
                                double smoothing_radius, double alpha,
                                double cond_max) {
    NormalField nf;
    nf.N.resize(lim.num_charts());
    double sigma = smoothing_radius;
    for (int attempt = 0; attempt < 4; ++attempt) {
        nf.max_op = 0.0;
        nf.max_cond = 0.0;
        for (int j = 0; j < lim.num_charts(); ++j) {
            const GraphPatch& u = lim.system.entries[j].patch;
            const GridBall& g = u.domain;
            int m = g.m, k = u.k;
            PatchDerivs d = differentiate(u);
            std::vector<Mat> raw(g.size());
            for (int nd = 0; nd < g.size(); ++nd)
                raw[nd] = -d.Du[nd].transpose();  // m x k
            auto& N = nf.N[j];
            N.assign(g.size(), Mat::Zero(m, k));
            for (int nd = 0; nd < g.size(); ++nd) {
                if (sigma <= 0) {
                    N[nd] = raw[nd];
                } else {
                    Vec x = g.coord(nd);
                    double wsum = 0;
                    Mat acc = Mat::Zero(m, k);
                    for (int other = 0; other < g.size(); ++other) {
                        double dist = (g.coord(other) - x).norm();
                        if (dist > 3 * sigma) continue;
                        double w = std::exp(-dist * dist / (2 * sigma * sigma));
                        acc += w * raw[other];
                        wsum += w;
                    }
                    N[nd] = acc / wsum;
                }
                nf.max_op = std::max(nf.max_op, operator_norm(N[nd]));
                Mat B(m + k, m + k);
                B.topLeftCorner(m, m) = Mat::Identity(m, m);
                B.bottomLeftCorner(k, m) = d.Du[nd];
                B.topRightCorner(m, k) = N[nd];
                B.bottomRightCorner(k, k) = Mat::Identity(k, k);
                Eigen::JacobiSVD<Mat> svd(B);
                double smin = svd.singularValues().minCoeff();
                double smax = svd.singularValues().maxCoeff();
                nf.max_cond = std::max(
                    nf.max_cond,
                    smin > 0 ? smax / smin : std::numeric_limits<double>::infinity());
            }
        }
        nf.radius_used = sigma;
        if (nf.max_op <= 2 * alpha) break;
        if (attempt == 3)
            throw std::runtime_error(
                "smooth_normal_field: ||N||_op ceiling unattainable (max " +
                std::to_string(nf.max_op) + " vs " + std::to_string(2 * alpha) +
                ")");
        sigma /= 2;
    }
    if (nf.max_cond > cond_max)
        throw std::runtime_error(
            "smooth_normal_field: transversality conditioning " +
            std::to_string(nf.max_cond) + " exceeds the ceiling");
    return nf;
}

Mat frame_matrix(const Mat& N) {
    int m = static_cast<int>(N.rows()), k = static_cast<int>(N.cols());
    Mat E(m + k, k);
    E.topRows(m) = N;
    E.bottomRows(k) = Mat::Identity(k, k);
    return E;
}

ProjectResult project_point(const GraphPatch& u, const GraphPatch& target,
                            const Mat& N, const Vec& x, double tol_fix,
                            int max_steps) {
    ProjectResult out;
    Vec ux = u.interpolate(x);
    Vec y = x;
    double prev_step = -1;
    for (int s = 0; s < max_steps; ++s) {
        Vec ynext = x + N * (target.interpolate(y) - ux);
        double step = (ynext - y).norm();
        if (prev_step > 0 && step > 0)
            out.contraction = std::max(out.contraction, step / prev_step);
        prev_step = step;
        y = ynext;
        out.steps = s + 1;
        if (y.norm() >= target.domain.r) {
            out.error = "iterate left the target patch ball";
            return out;
        }
        if (step <= tol_fix) {
            out.X = y;
            out.T = target.interpolate(y) - ux;
            out.residual = (out.X - x - N * out.T).norm();
            out.ok = out.residual <= 10 * tol_fix;
            if (!out.ok) out.error = "fixed point residual too large";
            return out;
        }
        if (out.contraction >= 1.0) {
            out.error = "iteration is not contracting";
            return out;
        }
    }
    out.error = "fixed point iteration did not converge";
    return out;
}

TargetPatch extract_target_patch(const SampledImmersion& target,
                                 const EuclideanIsometry& frame,
                                 const GridBall& grid,
                                 const GraphPatch& u_ref, double core_r) {
    int m = grid.m;
    int k = target.n - m;
    TargetPatch out;
    out.patch = GraphPatch(grid, k);
    out.covered.assign(grid.size(), 0);
    std::vector<int> sheets(grid.size(), 0);

    // chart coordinates of every target vertex
    Mat P(target.num_vertices(), target.n);
    for (int v = 0; v < target.num_vertices(); ++v)
        P.row(v) = frame.apply_inverse(target.vertex(v)).transpose();

    std::vector<double> best_dist(grid.size(),
                                  std::numeric_limits<double>::infinity());
    for (const auto& simplex : target.simplices) {
        // horizontal bounding box in grid units
        bool skip = false;
        std::vector<int> lo(m), hi(m);
        for (int a = 0; a < m; ++a) {
            double mn = 1e300, mx = -1e300;
            for (int v : simplex) {
                mn = std::min(mn, P(v, a));
                mx = std::max(mx, P(v, a));
            }
            if (mn > grid.r || mx < -grid.r) skip = true;
            lo[a] = static_cast<int>(std::ceil((mn - 1e-12) / grid.h));
            hi[a] = static_cast<int>(std::floor((mx + 1e-12) / grid.h));
        }
        if (skip) continue;

        auto consider = [&](const std::vector<int>& ii) {
            int nd = grid.find(ii);
            if (nd < 0) return;
            Vec x = grid.coord(nd);
            // barycentric coordinates of x in the horizontal simplex
            Vec lambda;
            if (m == 1) {
                double h0 = P(simplex[0], 0), h1 = P(simplex[1], 0);
                double den = h1 - h0;
                if (std::abs(den) < 1e-12) return;
                double t = (x(0) - h0) / den;
                if (t < -1e-9 || t > 1 + 1e-9) return;
                lambda = Vec(2);
                lambda << 1 - t, t;
            } else {
                Mat A(m, m);
                for (int c = 0; c < m; ++c)
                    for (int a = 0; a < m; ++a)
                        A(a, c) = P(simplex[c + 1], a) - P(simplex[0], a);
                if (std::abs(A.determinant()) < 1e-12) return;
                Vec rhs(m);
                for (int a = 0; a < m; ++a) rhs(a) = x(a) - P(simplex[0], a);
                Vec t = A.fullPivLu().solve(rhs);
                double sum = t.sum();
                if (t.minCoeff() < -1e-9 || sum > 1 + 1e-9) return;
                lambda = Vec(m + 1);
                lambda(0) = 1 - sum;
                lambda.tail(m) = t;
            }
            Vec w = Vec::Zero(k);
            for (size_t c = 0; c < simplex.size(); ++c)
                w += lambda(static_cast<int>(c)) *
                     P.row(simplex[c]).tail(k).transpose();
            double dist = (w - u_ref.u(nd)).norm();
            double sep = 4 * grid.h * (1 + dist);
            if (out.covered[nd] &&
                (w - out.patch.u(nd)).norm() > sep)
                sheets[nd] = std::max(sheets[nd], 2);
            if (dist < best_dist[nd]) {
                best_dist[nd] = dist;
                out.patch.values.row(nd) = w.transpose();
            }
            out.covered[nd] = 1;
        };

        bool empty = false;
        for (int a = 0; a < m; ++a)
            if (lo[a] > hi[a]) empty = true;
        if (empty) continue;
        std::vector<int> ii = lo;
        while (true) {
            consider(ii);
            int a = 0;
            while (a < m) {
                if (ii[a] < hi[a]) {
                    ++ii[a];
                    break;
                }
                ii[a] = lo[a];
                ++a;
            }
            if (a == m) break;
        }
    }

    if (core_r <= 0) core_r = grid.r;
    out.complete = true;
    for (int nd = 0; nd < grid.size(); ++nd) {
        if (!out.covered[nd]) {
            if (grid.coord(nd).norm() <= core_r + 1e-12) out.complete = false;
            out.patch.values.row(nd) = u_ref.values.row(nd);
        }
        out.max_sheets = std::max(out.max_sheets, out.covered[nd] ? std::max(1, sheets[nd]) : 0);
    }
    if (out.complete) {
        PatchDerivs d = differentiate(out.patch);
        for (const Mat& J : d.Du)
            out.max_slope = std::max(out.max_slope, J.norm());
    } else {
        out.max_slope = std::numeric_limits<double>::infinity();
    }
    return out;
}

ReparamResult reparametrize(const LimitManifold& lim, const NormalField& nu,
                            const SampledImmersion& target, double alpha,
                            const ReparamParams& params,
                            const Exhaustion* exhaustion, int level) {
    (void)alpha;
    ReparamResult out;
    const GraphSystem& sys = lim.system;
    int s = level >= 0 ? sys.entries_at_level(level) : sys.size();
    double tol_wd = params.tol_wd > 0 ? params.tol_wd : 3 * lim.tol_glue;
    out.min_jacobian_sv = std::numeric_limits<double>::infinity();

    double h_min = std::numeric_limits<double>::infinity();
    // target patches on a 3/2 ball: fixed-point iterates may drift past the
    // chart core when the target sits at a distance
    std::vector<TargetPatch> tps(s);
    for (int j = 0; j < s; ++j) {
        const auto& e = sys.entries[j];
        const GridBall& g = e.patch.domain;
        h_min = std::min(h_min, g.h);
        GridBall big(g.m, 1.5 * g.r, g.h);
        GraphPatch uref(big, e.patch.k);
        for (int nd = 0; nd < big.size(); ++nd) {
            Vec x = big.coord(nd);
            double n = x.norm();
            if (n > g.r - g.h / 2) x *= (g.r - g.h / 2) / n;
            uref.values.row(nd) = e.patch.interpolate(x).transpose();
        }
        tps[j] = extract_target_patch(target, e.A, big, uref, g.r);
        if (!tps[j].complete) {
            out.projection_ok = false;
            if (out.witnesses.size() < 16)
                out.witnesses.push_back("chart " + std::to_string(j) +
                                        ": target does not cover the chart");
        }
    }

    out.charts.resize(s);
    for (int j = 0; j < s; ++j) {
        const auto& e = sys.entries[j];
        const GridBall& g = e.patch.domain;
        ChartReparam& cr = out.charts[j];
        cr.T.resize(g.size());
        cr.X.resize(g.size());
        cr.image.resize(g.size());
        cr.residual.assign(g.size(), 0.0);
        cr.contraction.assign(g.size(), 0.0);
        cr.phi_vertex.assign(g.size(), -1);
        cr.valid.assign(g.size(), 0);
        PatchDerivs td = tps[j].complete ? differentiate(tps[j].patch)
                                         : PatchDerivs{};
        const GridBall& big = tps[j].patch.domain;
        for (int nd = 0; nd < g.size(); ++nd) {
            ProjectResult pr = project_point(e.patch, tps[j].patch,
                                             nu.N[j][nd], g.coord(nd),
                                             params.tol_fix, params.max_steps);
            if (pr.ok) {
                // the interpolation cell at the foot point must be real data
                std::vector<int> ii(g.m);
                for (int a = 0; a < g.m; ++a)
                    ii[a] = static_cast<int>(std::lround(pr.X(a) / big.h));
                int near = big.find(ii);
                if (near < 0 || !tps[j].covered[near]) {
                    pr.ok = false;
                    pr.error = "foot point left the covered target region";
                }
            }
            cr.T[nd] = pr.ok ? pr.T : Vec::Zero(e.patch.k);
            cr.X[nd] = pr.ok ? pr.X : g.coord(nd);
            cr.residual[nd] = pr.residual;
            cr.contraction[nd] = pr.contraction;
            Vec xu(g.m + e.patch.k);
            xu.head(g.m) = cr.X[nd];
            xu.tail(e.patch.k) = tps[j].patch.interpolate(cr.X[nd]);
            cr.image[nd] = e.A.apply(xu);
            cr.valid[nd] = pr.ok && tps[j].complete;
            if (!pr.ok) {
                out.projection_ok = false;
                if (out.witnesses.size() < 16)
                    out.witnesses.push_back("chart " + std::to_string(j) +
                                            " node " + std::to_string(nd) +
                                            ": " + pr.error);
                continue;
            }
            out.sup_T = std::max(out.sup_T, pr.T.norm());
            out.max_residual = std::max(out.max_residual, pr.residual);
            out.max_contraction = std::max(out.max_contraction, pr.contraction);
            if (tps[j].complete) {
                // A^i at the foot point, from the nearest-node derivative
                std::vector<int> ii(g.m);
                for (int a = 0; a < g.m; ++a)
                    ii[a] = static_cast<int>(std::lround(cr.X[nd](a) / big.h));
                int near = big.find(ii);
                if (near >= 0 && tps[j].covered[near]) {
                    Mat Ai = (td.Du[near] * nu.N[j][nd]).transpose();
                    out.max_A_op = std::max(out.max_A_op, operator_norm(Ai));
                }
            }
        }

        // immersion check: composed map across grid neighbors
        for (int nd = 0; nd < g.size(); ++nd) {
            if (!cr.valid[nd]) continue;
            Mat J(target.n, g.m);
            bool full = true;
            for (int a = 0; a < g.m; ++a) {
                int np = g.neighbor(nd, a, 1), nm = g.neighbor(nd, a, -1);
                if (np < 0 || nm < 0 || !cr.valid[np] || !cr.valid[nm]) {
                    full = false;
                    break;
                }
                J.col(a) = (cr.image[np] - cr.image[nm]) / (2 * g.h);
            }
            if (!full) continue;
            Eigen::JacobiSVD<Mat> svd(J);
            double sv = svd.singularValues().minCoeff();
            out.min_jacobian_sv = std::min(out.min_jacobian_sv, sv);
            if (sv < params.imm_min) {
                out.immersion_ok = false;
                if (out.witnesses.size() < 16)
                    out.witnesses.push_back(
                        "chart " + std::to_string(j) + " node " +
                        std::to_string(nd) +
                        ": composed map is rank deficient (sv " +
                        std::to_string(sv) + ")");
            }
        }
    }

    // nearest target vertex per node, via a spatial index
    {
        std::vector<Vec> tv(target.num_vertices());
        for (int v = 0; v < target.num_vertices(); ++v) tv[v] = target.vertex(v);
        double cell = 2 * params.surj_factor * target.min_edge_length() + 1e-12;
        PointGrid pg;
        pg.build(tv, cell);
        std::vector<int> cand;
        for (int j = 0; j < s; ++j) {
            ChartReparam& cr = out.charts[j];
            for (size_t nd = 0; nd < cr.image.size(); ++nd) {
                if (!cr.valid[nd]) continue;
                pg.near(cr.image[nd], cell, cand);
                double best = std::numeric_limits<double>::infinity();
                for (int v : cand) {
                    double d = (tv[v] - cr.image[nd]).norm();
                    if (d < best) {
                        best = d;
                        cr.phi_vertex[nd] = v;
                    }
                }
            }
        }
    }

    // cross-chart well-definedness over the quotient classes; charts
    // project along fibers tilted by their frame difference, so images of
    // one point spread by about sup|T| times the frame angle
    {
        double frame_spread = 0.0;
        for (int j = 0; j < s; ++j)
            for (int k : lim.Z[j]) {
                if (k <= j || k >= s) continue;
                frame_spread = std::max(
                    frame_spread,
                    operator_norm(sys.entries[j].A.rotation -
                                  sys.entries[k].A.rotation));
            }
        tol_wd += 1.5 * out.sup_T * frame_spread;
        std::map<int, std::vector<std::pair<int, int>>> classes;
        for (int j = 0; j < s; ++j) {
            const GridBall& g = sys.entries[j].patch.domain;
            for (int nd = 0; nd < g.size(); ++nd)
                classes[lim.find(lim.global_id(j, nd))].push_back({j, nd});
        }
        for (const auto& [root, members] : classes) {
            for (size_t a = 0; a < members.size(); ++a)
                for (size_t b = a + 1; b < members.size(); ++b) {
                    auto [ja, na] = members[a];
                    auto [jb, nb] = members[b];
                    if (ja == jb) continue;
                    if (!out.charts[ja].valid[na] || !out.charts[jb].valid[nb])
                        continue;
                    double d = (out.charts[ja].image[na] -
                                out.charts[jb].image[nb])
                                   .norm();
                    if (d > tol_wd) {
                        out.well_defined = false;
                        if (out.witnesses.size() < 16) {
                            std::ostringstream os;
                            os << "charts " << ja << " and " << jb
                               << " project class " << root
                               << " to points " << d << " apart";
                            out.witnesses.push_back(os.str());
                        }
                    }
                }
        }

        // injectivity: representative images of distinct classes must stay
        // separated
        std::vector<Vec> reps;
        std::vector<int> rep_root;
        for (const auto& [root, members] : classes) {
            for (const auto& [j, nd] : members)
                if (out.charts[j].valid[nd]) {
                    reps.push_back(out.charts[j].image[nd]);
                    rep_root.push_back(root);
                    break;
                }
        }
        double sep = params.sep_factor * h_min;
        PointGrid pg;
        if (!reps.empty()) pg.build(reps, std::max(sep, 1e-12));
        std::vector<int> cand;
        for (size_t i = 0; i < reps.size(); ++i) {
            pg.near(reps[i], sep, cand);
            for (int c : cand) {
                if (static_cast<size_t>(c) <= i) continue;
                out.injective = false;
                if (out.witnesses.size() < 16) {
                    std::ostringstream os;
                    os << "classes " << rep_root[i] << " and " << rep_root[c]
                       << " collide in the target (distance "
                       << (reps[i] - reps[c]).norm() << ")";
                    out.witnesses.push_back(os.str());
                }
            }
        }
    }

    // surjectivity: every in-range target vertex is near some image
    {
        std::vector<Vec> images;
        for (const auto& cr : out.charts)
            for (size_t nd = 0; nd < cr.image.size(); ++nd)
                if (cr.valid[nd]) images.push_back(cr.image[nd]);
        double radius_max = params.surj_factor * target.min_edge_length();
        for (int v = 0; v < target.num_vertices(); ++v) {
            double radius =
                params.surj_factor * target.local_edge_length(v);
            radius_max = std::max(radius_max, radius);
        }
        PointGrid pg;
        if (!images.empty()) pg.build(images, radius_max + 1e-12);
        std::vector<int> cand;
        // only vertices well inside some chart ball are audited; the rim of
        // the outermost charts is legitimately unreached
        std::vector<Vec> centers(s);
        for (int j = 0; j < s; ++j)
            centers[j] = sys.entries[j].A.translation;
        for (int v = 0; v < target.num_vertices(); ++v) {
            Vec p = target.vertex(v);
            if (exhaustion && level >= 1 && !exhaustion->contains(p, level))
                continue;
            bool in_core = false;
            for (int j = 0; j < s && !in_core; ++j) {
                double rho = j < static_cast<int>(lim.radii.size())
                                 ? lim.radii[j]
                                 : lim.radii.back();
                if ((p - centers[j]).norm() <= 5.0 * rho / 6.0) in_core = true;
            }
            if (!in_core) continue;
            double radius = params.surj_factor * target.local_edge_length(v);
            pg.near(p, radius, cand);
            if (cand.empty()) {
                out.surjective = false;
                if (out.witnesses.size() < 16) {
                    std::ostringstream os;
                    os << "target vertex " << v
                       << " is not reached by any projection image";
                    out.witnesses.push_back(os.str());
                }
            }
        }
    }

    if (!std::isfinite(out.min_jacobian_sv)) out.min_jacobian_sv = 0.0;
    return out;
}

std::vector<ConvergenceRow> convergence_report(
    const LimitManifold& lim, const NormalField& nu,
    const std::vector<SampledImmersion>& targets, int max_order, double alpha,
    const ReparamParams& params) {
    std::vector<ConvergenceRow> rows;
    const GraphSystem& sys = lim.system;
    for (size_t i = 0; i < targets.size(); ++i) {
        ConvergenceRow row;
        row.index = static_cast<int>(i);
        ReparamResult rep =
            reparametrize(lim, nu, targets[i], alpha, params);
        row.sup_T = rep.sup_T;
        row.max_A_op = rep.max_A_op;
        row.max_contraction = rep.max_contraction;
        row.ok = rep.bijective() && rep.immersion_ok;
        if (!rep.witnesses.empty()) row.note = rep.witnesses.front();

        row.dT_sup.assign(std::max(0, max_order - 1), 0.0);
        for (int j = 0; j < sys.size(); ++j) {
            const auto& e = sys.entries[j];
            const GridBall& g = e.patch.domain;
            const ChartReparam& cr = rep.charts[j];
            std::vector<Vec> diff(g.size()), tvals(g.size());
            for (int nd = 0; nd < g.size(); ++nd) {
                Vec xu(g.m + e.patch.k);
                xu.head(g.m) = g.coord(nd);
                xu.tail(e.patch.k) = e.patch.u(nd);
                diff[nd] = cr.image[nd] - e.A.apply(xu);
                tvals[nd] = cr.T[nd];
                row.c0 = std::max(row.c0, diff[nd].norm());
            }
            PatchDerivs dd = differentiate(field_patch(g, diff));
            for (const Mat& J : dd.Du) row.c1 = std::max(row.c1, J.norm());

            // higher derivatives of T by repeated grid differences
            GraphPatch field = field_patch(g, tvals);
            for (int order = 1; order <= max_order - 1; ++order) {
                PatchDerivs d = differentiate(field);
                double sup = 0;
                for (const Mat& J : d.Du) sup = std::max(sup, J.norm());
                row.dT_sup[order - 1] = std::max(row.dT_sup[order - 1], sup);
                if (order == max_order - 1) break;
                GraphPatch next(g, field.k * g.m);
                for (int nd = 0; nd < g.size(); ++nd) {
                    Eigen::Map<const Vec> flat(d.Du[nd].data(),
                                               d.Du[nd].size());
                    next.values.row(nd) = flat.transpose();
                }
                field = std::move(next);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace imco
