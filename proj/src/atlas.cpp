#include "imco/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

namespace imco {

const char* to_string(GraphStatus s) {
    switch (s) {
        case GraphStatus::ok: return "ok";
        case GraphStatus::fold: return "fold";
        case GraphStatus::slope: return "slope";
        case GraphStatus::incomplete: return "incomplete";
    }
    return "?";
}

EuclideanIsometry tangent_frame_at(const SampledImmersion& imm, int q) {
    int m = imm.m, n = imm.n;
    Vec fq = imm.vertex(q);
    double sigma = imm.local_edge_length(q);
    if (sigma <= 0) throw std::invalid_argument("tangent_frame_at: isolated vertex");

    auto ring = [&](int depth) {
        std::set<int> out;
        std::set<int> frontier{q};
        for (int d = 0; d < depth; ++d) {
            std::set<int> next;
            for (int v : frontier)
                for (int w : imm.vert_neighbors[v])
                    if (w != q && !out.count(w)) next.insert(w);
            out.insert(next.begin(), next.end());
            frontier = next;
        }
        return out;
    };

    for (int depth = 1; depth <= 2; ++depth) {
        std::set<int> nbrs = ring(depth);
        if (static_cast<int>(nbrs.size()) < m + 1 && depth < 2) continue;
        Mat C = Mat::Zero(n, n);
        for (int w : nbrs) {
            Vec d = imm.vertex(w) - fq;
            double wgt = std::exp(-d.squaredNorm() / (sigma * sigma));
            C += wgt * d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(C);
        // eigenvalues ascending; tangent = top m eigenvectors
        double rank_gap = es.eigenvalues()(n - m);
        if (rank_gap <= 1e-12 * std::max(1.0, es.eigenvalues()(n - 1))) {
            if (depth < 2) continue;
            throw std::invalid_argument("tangent_frame_at: rank-deficient neighborhood");
        }
        Mat R(n, n);
        for (int a = 0; a < m; ++a) R.col(a) = es.eigenvectors().col(n - 1 - a);
        for (int c = 0; c < n - m; ++c) R.col(m + c) = es.eigenvectors().col(c);
        if (R.determinant() < 0) R.col(n - 1) *= -1.0;
        return EuclideanIsometry(nearest_rotation(R), fq);
    }
    throw std::invalid_argument("tangent_frame_at: unreachable");
}

std::vector<int> chart_component(const SampledImmersion& imm, int q, double rho,
                                 const EuclideanIsometry* frame) {
    EuclideanIsometry local = frame ? *frame : tangent_frame_at(imm, q);
    auto proj_in = [&](int v) {
        Vec z = local.apply_inverse(imm.vertex(v));
        return z.head(imm.m).norm() < rho;
    };
    std::vector<int> out;
    if (!proj_in(q)) return out;
    std::vector<char> seen(imm.num_vertices(), 0);
    std::deque<int> todo{q};
    seen[q] = 1;
    while (!todo.empty()) {
        int v = todo.front();
        todo.pop_front();
        out.push_back(v);
        for (int w : imm.vert_neighbors[v])
            if (!seen[w] && proj_in(w)) {
                seen[w] = 1;
                todo.push_back(w);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct ChartProj {
    Vec xy;      // chart coordinates, R^m
    Vec height;  // vertical part, R^k
};

ChartProj project_vertex(const SampledImmersion& imm,
                         const EuclideanIsometry& frame, int v) {
    Vec z = frame.apply_inverse(imm.vertex(v));
    return {z.head(imm.m), z.tail(imm.n - imm.m)};
}

// ---------------------------------------------------------------- m = 1 ----

LocalGraphResult local_graph_curve(const SampledImmersion& imm, int q, double r,
                                   double alpha, const AtlasParams& params,
                                   const EuclideanIsometry& frame) {
    int k = imm.n - 1;
    LocalGraphResult res;

    struct PathPt {
        int v;
        double x;
        Vec height;
    };
    auto proj = [&](int v) { return project_vertex(imm, frame, v); };

    bool wrapped = false, open_end_inside = false;
    auto walk = [&](int first) {
        std::vector<PathPt> path;
        int prev = q, cur = first;
        while (true) {
            ChartProj p = proj(cur);
            path.push_back({cur, p.xy(0), p.height});
            if (std::abs(p.xy(0)) >= r) break;  // terminator kept for clipping
            int next = -1;
            for (int w : imm.vert_neighbors[cur])
                if (w != prev) next = w;
            if (next < 0) {
                open_end_inside = true;
                break;
            }
            if (next == q) {
                wrapped = true;
                break;
            }
            prev = cur;
            cur = next;
        }
        return path;
    };

    const auto& nbrs = imm.vert_neighbors[q];
    if (nbrs.empty()) throw std::invalid_argument("local_graph: isolated vertex");
    std::vector<PathPt> plus = walk(nbrs[0]);
    std::vector<PathPt> minus =
        nbrs.size() > 1 ? walk(nbrs[1]) : std::vector<PathPt>{};
    if (wrapped) {
        res.status = GraphStatus::fold;
        return res;
    }

    std::vector<PathPt> path;
    for (auto it = minus.rbegin(); it != minus.rend(); ++it) path.push_back(*it);
    {
        ChartProj p = proj(q);
        path.push_back({q, p.xy(0), p.height});
    }
    for (const auto& pt : plus) path.push_back(pt);
    if (path.size() < 2) {
        res.status = GraphStatus::incomplete;
        return res;
    }

    if (path.front().x > path.back().x) std::reverse(path.begin(), path.end());
    for (size_t i = 0; i + 1 < path.size(); ++i)
        if (path[i + 1].x <= path[i].x) {
            res.status = GraphStatus::fold;
            return res;
        }

    // slope on segments overlapping (-r, r)
    double max_slope = 0;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        if (path[i + 1].x <= -r || path[i].x >= r) continue;
        double dx = path[i + 1].x - path[i].x;
        double dv = (path[i + 1].height - path[i].height).norm();
        max_slope = std::max(max_slope, dv / dx);
    }
    res.max_slope = max_slope;
    if (max_slope > alpha) {
        res.status = GraphStatus::slope;
        return res;
    }

    if (path.front().x > -r + 1e-12 * r || path.back().x < r - 1e-12 * r ||
        open_end_inside) {
        res.status = GraphStatus::incomplete;
        return res;
    }

    // resample onto the grid
    double edge = imm.local_edge_length(q);
    double h = params.h_grid > 0 ? params.h_grid : edge / 2;
    h = std::max(h, 2.0 * r / params.grid_cap);
    if (h > r / 2) h = r / 2;
    GraphPatch patch(GridBall(1, r, h), k);
    std::vector<double> xs(path.size());
    for (size_t i = 0; i < path.size(); ++i) xs[i] = path[i].x;
    for (int nd = 0; nd < patch.domain.size(); ++nd) {
        double x = patch.domain.coord(nd)(0);
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        size_t i1 = std::min<size_t>(xs.size() - 1,
                                     std::max<size_t>(1, it - xs.begin()));
        size_t i0 = i1 - 1;
        double t = (x - xs[i0]) / (xs[i1] - xs[i0]);
        patch.values.row(nd) =
            ((1 - t) * path[i0].height + t * path[i1].height).transpose();
    }
    res.patch = std::move(patch);
    res.U = chart_component(imm, q, r, &frame);
    res.status = GraphStatus::ok;
    return res;
}

// ---------------------------------------------------------------- m = 2 ----

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
}

// squared distance from the origin to a 2D triangle
double tri_dist2_origin(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c) {
    // inside test
    double d1 = cross2(b - a, -a), d2 = cross2(c - b, -b), d3 = cross2(a - c, -c);
    bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    if (!(has_neg && has_pos)) return 0.0;
    auto seg = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
        Eigen::Vector2d d = q - p;
        double t = d.squaredNorm() > 0 ? std::clamp(-p.dot(d) / d.squaredNorm(),
                                                    0.0, 1.0)
                                       : 0.0;
        return (p + t * d).squaredNorm();
    };
    return std::min({seg(a, b), seg(b, c), seg(c, a)});
}

LocalGraphResult local_graph_surface(const SampledImmersion& imm, int q,
                                     double r, double alpha,
                                     const AtlasParams& params,
                                     const EuclideanIsometry& frame) {
    int k = imm.n - 2;
    LocalGraphResult res;

    std::vector<ChartProj> proj(imm.num_vertices());
    std::vector<char> projected(imm.num_vertices(), 0);
    auto get_proj = [&](int v) -> const ChartProj& {
        if (!projected[v]) {
            proj[v] = project_vertex(imm, frame, v);
            projected[v] = 1;
        }
        return proj[v];
    };

    auto tri_xy = [&](int s, int a) {
        return Eigen::Vector2d(get_proj(imm.simplices[s][a]).xy);
    };

    // grow triangles whose chart projection intersects B_r
    std::set<int> tris;
    std::deque<int> todo;
    for (int s : imm.vert_simplices[q]) {
        tris.insert(s);
        todo.push_back(s);
    }
    // simplex adjacency via shared edges
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int s = 0; s < imm.num_simplices(); ++s)
        for (int a = 0; a < 3; ++a) {
            int u = imm.simplices[s][a], v = imm.simplices[s][(a + 1) % 3];
            edge_tris[{std::min(u, v), std::max(u, v)}].push_back(s);
        }
    while (!todo.empty()) {
        int s = todo.front();
        todo.pop_front();
        for (int a = 0; a < 3; ++a) {
            int u = imm.simplices[s][a], v = imm.simplices[s][(a + 1) % 3];
            for (int t : edge_tris[{std::min(u, v), std::max(u, v)}]) {
                if (tris.count(t)) continue;
                if (tri_dist2_origin(tri_xy(t, 0), tri_xy(t, 1), tri_xy(t, 2)) <
                    r * r) {
                    tris.insert(t);
                    todo.push_back(t);
                }
            }
        }
    }

    // per-triangle affine slope
    double max_slope = 0;
    std::map<int, Mat> tri_du;  // k x 2
    bool degenerate = false;
    for (int s : tris) {
        Eigen::Matrix2d E;
        E.col(0) = tri_xy(s, 1) - tri_xy(s, 0);
        E.col(1) = tri_xy(s, 2) - tri_xy(s, 0);
        if (std::abs(E.determinant()) < 1e-14) {
            degenerate = true;  // vertical triangle: graph condition fails
            continue;
        }
        Mat V(k, 2);
        V.col(0) = get_proj(imm.simplices[s][1]).height -
                   get_proj(imm.simplices[s][0]).height;
        V.col(1) = get_proj(imm.simplices[s][2]).height -
                   get_proj(imm.simplices[s][0]).height;
        Mat Du = V * E.inverse().cast<double>();
        tri_du[s] = Du;
        max_slope = std::max(max_slope, Du.norm());
    }
    res.max_slope = max_slope;
    if (degenerate) {
        res.status = GraphStatus::fold;
        return res;
    }

    double edge = imm.local_edge_length(q);
    double h = params.h_grid > 0 ? params.h_grid : edge / 2;
    h = std::max(h, 2.0 * r / params.grid_cap);
    if (h > r / 2) h = r / 2;
    double fold_tol = params.fold_factor * (edge + h) * (1.0 + alpha);

    // bin triangles for point location
    double bin = std::max(2 * edge, 2 * h);
    std::map<std::pair<int, int>, std::vector<int>> bins;
    for (int s : tris) {
        Eigen::Vector2d lo = tri_xy(s, 0), hi = lo;
        for (int a = 1; a < 3; ++a) {
            lo = lo.cwiseMin(tri_xy(s, a));
            hi = hi.cwiseMax(tri_xy(s, a));
        }
        for (int i = int(std::floor(lo.x() / bin)); i <= int(std::floor(hi.x() / bin)); ++i)
            for (int j = int(std::floor(lo.y() / bin)); j <= int(std::floor(hi.y() / bin)); ++j)
                bins[{i, j}].push_back(s);
    }

    GraphPatch patch(GridBall(2, r, h), k);
    bool fold = false, incomplete = false;
    for (int nd = 0; nd < patch.domain.size(); ++nd) {
        Vec x = patch.domain.coord(nd);
        Eigen::Vector2d p(x(0), x(1));
        auto key = std::make_pair(int(std::floor(p.x() / bin)),
                                  int(std::floor(p.y() / bin)));
        std::vector<double> sheet_lo, sheet_hi;
        Vec val;
        bool have = false;
        double vmin = 0, vmax = 0;
        auto it = bins.find(key);
        if (it != bins.end()) {
            for (int s : it->second) {
                Eigen::Vector2d a = tri_xy(s, 0), b = tri_xy(s, 1), c = tri_xy(s, 2);
                double det = cross2(b - a, c - a);
                double l1 = cross2(b - a, p - a) / det;
                double l2 = cross2(p - a, c - a) / det;
                double l0 = 1.0 - l1 - l2;
                if (l0 < -1e-9 || l1 < -1e-9 || l2 < -1e-9) continue;
                Vec v = l0 * get_proj(imm.simplices[s][0]).height +
                        l2 * get_proj(imm.simplices[s][1]).height +
                        l1 * get_proj(imm.simplices[s][2]).height;
                double vn = v.norm();
                if (!have) {
                    val = v;
                    vmin = vmax = vn;
                    have = true;
                } else {
                    vmin = std::min(vmin, vn);
                    vmax = std::max(vmax, vn);
                    if ((v - val).norm() > fold_tol) fold = true;
                }
            }
        }
        if (!have)
            incomplete = true;
        else
            patch.values.row(nd) = val.transpose();
        if (fold) break;
    }
    if (fold) {
        res.status = GraphStatus::fold;
        return res;
    }
    if (max_slope > alpha) {
        res.status = GraphStatus::slope;
        return res;
    }
    if (incomplete) {
        res.status = GraphStatus::incomplete;
        return res;
    }
    res.patch = std::move(patch);
    res.U = chart_component(imm, q, r, &frame);
    res.status = GraphStatus::ok;
    return res;
}

}  // namespace

LocalGraphResult local_graph(const SampledImmersion& imm, int q, double r,
                             double alpha, const AtlasParams& params,
                             const EuclideanIsometry* frame) {
    EuclideanIsometry local = frame ? *frame : tangent_frame_at(imm, q);
    try {
        if (imm.m == 1) return local_graph_curve(imm, q, r, alpha, params, local);
        if (imm.m == 2)
            return local_graph_surface(imm, q, r, alpha, params, local);
    } catch (const std::invalid_argument&) {
        LocalGraphResult res;
        res.status = GraphStatus::incomplete;
        return res;
    }
    throw std::invalid_argument("local_graph: unsupported domain dimension");
}

double max_graph_radius(const SampledImmersion& imm, int q, double alpha,
                        const AtlasParams& params) {
    EuclideanIsometry frame = tangent_frame_at(imm, q);
    auto ok = [&](double r) {
        return local_graph(imm, q, r, alpha, params, &frame).status ==
               GraphStatus::ok;
    };
    double edge = imm.local_edge_length(q);
    double lo = 0, hi = 4 * edge;
    // coarse meshes: the seed bracket may already breach the slope cap
    for (int shrink = 0; !ok(hi) && shrink < 12; ++shrink) hi /= 2;
    if (!ok(hi)) return 0.0;
    // extent cap: twice the mesh bounding radius around f(q)
    double cap = 0;
    for (int v = 0; v < imm.num_vertices(); ++v)
        cap = std::max(cap, (imm.vertex(v) - imm.vertex(q)).norm());
    cap = 2 * cap + 4 * edge;
    while (ok(hi) && hi < cap) {
        lo = hi;
        hi *= 2;
    }
    if (hi >= cap && ok(cap)) return cap;
    while (hi - lo > params.h_bisect) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

double radius_bound(double p_exp, int m, double alpha, double A_lp, double c) {
    if (p_exp <= m)
        throw std::invalid_argument("radius_bound: requires p_exp > m");
    if (alpha <= 0 || alpha > 1 || c <= 0 || A_lp < 0)
        throw std::invalid_argument("radius_bound: bad arguments");
    if (A_lp == 0) return std::numeric_limits<double>::infinity();
    return std::pow(c * alpha / A_lp, p_exp / (p_exp - m));
}

void RadiusSequence::validate(bool noncompact, bool projection_enabled,
                              int codim) const {
    if (values.empty()) throw std::invalid_argument("RadiusSequence: empty");
    for (size_t i = 0; i + 1 < values.size(); ++i)
        if (values[i + 1] > values[i] + 1e-15)
            throw std::invalid_argument("RadiusSequence: not decreasing");
    for (double v : values)
        if (v <= 0) throw std::invalid_argument("RadiusSequence: r <= 0");
    if (noncompact && values[0] > 3.0 / 8.0 + 1e-15)
        throw std::invalid_argument("RadiusSequence: r_1 > 3/8");
    if (alpha * alpha >= 1.0 / 3.0)
        throw std::invalid_argument("RadiusSequence: alpha^2 >= 1/3");
    if (projection_enabled && alpha > 1.0 / (4.0 * std::sqrt(double(codim))) + 1e-15)
        throw std::invalid_argument("RadiusSequence: alpha > 1/(4 sqrt k)");
}

NetResult delta_net(const SampledImmersion& imm, double delta, double r,
                    double alpha, const AtlasParams& params,
                    const std::vector<int>* restrict_to) {
    if (!(alpha * alpha < 1.0 / 3.0))
        throw std::invalid_argument("delta_net: requires alpha^2 < 1/3");
    if (!(delta > 0 && delta < r))
        throw std::invalid_argument("delta_net: requires 0 < delta < r");
    std::vector<char> candidate(imm.num_vertices(), restrict_to ? 0 : 1);
    if (restrict_to)
        for (int v : *restrict_to) candidate[v] = 1;
    std::vector<char> covered(imm.num_vertices(), 0);

    NetResult net;
    for (int v = 0; v < imm.num_vertices(); ++v) {
        if (!candidate[v] || covered[v]) continue;
        EuclideanIsometry frame = tangent_frame_at(imm, v);
        LocalGraphResult cert = local_graph(imm, v, r, alpha, params, &frame);
        if (cert.status != GraphStatus::ok)
            throw std::runtime_error(
                std::string("delta_net: certification failure (") +
                to_string(cert.status) + ") at vertex " + std::to_string(v));
        std::vector<int> U = chart_component(imm, v, delta, &frame);
        for (int w : U) covered[w] = 1;
        net.points.push_back(v);
        net.delta.push_back(delta);
        net.U.push_back(std::move(U));
    }
    intersection_sets(net);
    return net;
}

bool Exhaustion::contains(const Vec& x, int level) const {
    if (level <= 0) return false;
    if (x.norm() >= level * ball_step) return false;
    if (omega_boundary_dist)
        return omega_boundary_dist(x) > 1.0 / double(level);
    return true;
}

NetResult delta_net_subdivided(const SampledImmersion& imm,
                               const std::vector<double>& delta_seq,
                               const RadiusSequence& rseq,
                               const Exhaustion& exhaustion,
                               const std::function<double(double)>& profile_mass,
                               const AtlasParams& params) {
    rseq.validate(true, false, imm.n - imm.m);
    if (delta_seq.empty())
        throw std::invalid_argument("delta_net_subdivided: empty delta sequence");

    if (exhaustion.omega_boundary_dist) {
        for (int v = 0; v < imm.num_vertices(); ++v)
            if (exhaustion.omega_boundary_dist(imm.vertex(v)) <= 0)
                throw std::runtime_error(
                    "delta_net_subdivided: vertex outside every exhaustion "
                    "region (non-properness signal)");
    }

    auto seq_at = [](const std::vector<double>& s, int j) {
        return s[std::min<size_t>(j, s.size() - 1)];
    };

    NetResult net;
    net.subdivided = true;
    net.nu.push_back(0);
    net.nu_ceiling.push_back(0);
    std::vector<char> covered(imm.num_vertices(), 0);

    for (int j = 1; j <= exhaustion.levels; ++j) {
        double delta_j = seq_at(delta_seq, j - 1);
        double r_j = seq_at(rseq.values, j - 1);
        if (!(delta_j > 0 && delta_j < r_j))
            throw std::invalid_argument("delta_net_subdivided: delta >= r");
        int block = 0;
        for (int v = 0; v < imm.num_vertices(); ++v) {
            if (covered[v]) continue;
            Vec fv = imm.vertex(v);
            if (!exhaustion.contains(fv, j) || exhaustion.contains(fv, j - 1))
                continue;
            EuclideanIsometry frame = tangent_frame_at(imm, v);
            LocalGraphResult cert =
                local_graph(imm, v, r_j, rseq.alpha, params, &frame);
            if (cert.status != GraphStatus::ok)
                throw std::runtime_error(
                    std::string("delta_net_subdivided: certification failure (") +
                    to_string(cert.status) + ") at vertex " + std::to_string(v));
            std::vector<int> U = chart_component(imm, v, delta_j, &frame);
            for (int w : U) covered[w] = 1;
            net.points.push_back(v);
            net.delta.push_back(delta_j);
            net.U.push_back(std::move(U));
            ++block;
        }
        net.nu.push_back(net.nu.back() + block);
        double C = profile_mass((j + 1) * exhaustion.ball_step);
        int ceiling =
            static_cast<int>(std::floor(std::pow(4.0 / delta_j, imm.m) * C));
        net.nu_ceiling.push_back(net.nu_ceiling.back() + ceiling);
    }
    intersection_sets(net);
    return net;
}

void intersection_sets(NetResult& net) {
    size_t s = net.points.size();
    net.Z.assign(s, {});
    for (size_t j = 0; j < s; ++j)
        for (size_t k = j; k < s; ++k) {
            bool inter = false;
            // U sets are sorted
            const auto& a = net.U[j];
            const auto& b = net.U[k];
            size_t ia = 0, ib = 0;
            while (ia < a.size() && ib < b.size()) {
                if (a[ia] < b[ib])
                    ++ia;
                else if (b[ib] < a[ia])
                    ++ib;
                else {
                    inter = true;
                    break;
                }
            }
            if (inter) {
                net.Z[j].push_back(static_cast<int>(k));
                if (k != j) net.Z[k].push_back(static_cast<int>(j));
            }
        }
    for (auto& z : net.Z) std::sort(z.begin(), z.end());
}

}  // namespace imco
