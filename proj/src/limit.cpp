#include "imco/limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace imco {

namespace {

int uf_find(std::vector<int>& parent, int a) {
    while (parent[a] != a) {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    return a;
}

void uf_union(std::vector<int>& parent, int a, int b) {
    a = uf_find(parent, a);
    b = uf_find(parent, b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

}  // namespace

int LimitManifold::find(int gid) const {
    while (parent[gid] != gid) gid = parent[gid];
    return gid;
}

Vec LimitManifold::ambient(int chart, int node) const {
    const auto& e = system.entries[chart];
    int m = e.patch.domain.m;
    Vec xu(m + e.patch.k);
    xu.head(m) = e.patch.domain.coord(node);
    xu.tail(e.patch.k) = e.patch.u(node);
    return e.A.apply(xu);
}

Vec LimitManifold::evaluate_class(int root) const {
    int chart = int(std::upper_bound(node_offset.begin(), node_offset.end(),
                                     root) -
                    node_offset.begin()) -
                1;
    return ambient(chart, root - node_offset[chart]);
}

std::vector<int> LimitManifold::class_roots() const {
    std::vector<int> roots;
    for (int g = 0; g < total_nodes(); ++g)
        if (find(g) == g) roots.push_back(g);
    return roots;
}

std::vector<int> LimitManifold::class_members(int root) const {
    std::vector<int> out;
    for (int g = 0; g < total_nodes(); ++g)
        if (find(g) == root) out.push_back(g);
    return out;
}

Vec chart_to_chart(const GraphSystem& sys, const std::vector<double>& radii,
                   int j, int k, const Vec& x, double* residual) {
    const auto& ej = sys.entries[j];
    const auto& ek = sys.entries[k];
    int m = ej.patch.domain.m;
    Vec xu(m + ej.patch.k);
    xu.head(m) = x;
    xu.tail(ej.patch.k) = ej.patch.interpolate(x);
    Vec q = ek.A.apply_inverse(ej.A.apply(xu));
    Vec z = q.head(m);
    if (residual) {
        if (z.norm() >= radii[k])
            *residual = std::numeric_limits<double>::infinity();
        else
            *residual = (q.tail(ek.patch.k) - ek.patch.interpolate(z)).norm();
    }
    return z;
}

GlueRelation glue_relation(const GraphSystem& sys,
                           const std::vector<double>& radii,
                           const std::vector<std::vector<int>>& Z,
                           double tol_glue) {
    GlueRelation rel;
    rel.tol_glue = tol_glue;
    auto ambient = [&](int c, int n) {
        const auto& e = sys.entries[c];
        int m = e.patch.domain.m;
        Vec v(m + e.patch.k);
        v.head(m) = e.patch.domain.coord(n);
        v.tail(e.patch.k) = e.patch.u(n);
        return e.A.apply(v);
    };
    // owner cell -> first node seen with that key
    std::map<std::pair<int, int>, std::pair<int, int>> rep;
    for (int j = 0; j < sys.size(); ++j) {
        const auto& ej = sys.entries[j];
        int m = ej.patch.domain.m;
        std::vector<int> cand(Z[j]);
        cand.push_back(j);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (int nd = 0; nd < ej.patch.domain.size(); ++nd) {
            Vec x = ej.patch.domain.coord(nd);
            Vec pj = ambient(j, nd);
            int own_c = j, own_n = nd;
            for (int k : cand) {
                if (k > j) break;  // the node's own chart always qualifies
                Vec z;
                if (k == j) {
                    z = x;
                } else {
                    double res;
                    z = chart_to_chart(sys, radii, j, k, x, &res);
                    if (!(res <= tol_glue / 2)) continue;
                }
                const auto& ek = sys.entries[k];
                std::vector<int> idx(m);
                bool in_cell = true;
                for (int a = 0; a < m; ++a) {
                    double t = z(a) / ek.patch.domain.h;
                    idx[a] = int(std::lround(t));
                    if (std::abs(t - idx[a]) > 0.5) in_cell = false;
                }
                if (!in_cell) continue;
                int y = ek.patch.domain.find(idx);
                if (y < 0) continue;
                if (k != j && (pj - ambient(k, y)).norm() > tol_glue / 2)
                    continue;
                own_c = k;
                own_n = y;
                break;
            }
            auto [it, fresh] = rep.insert({{own_c, own_n}, {j, nd}});
            if (!fresh)
                rel.pairs.push_back(
                    {it->second.first, it->second.second, j, nd});
        }
    }
    return rel;
}

LimitManifold build_limit(const GraphSystem& sys,
                          const std::vector<double>& radii,
                          const std::vector<std::vector<int>>& Z,
                          const GlueRelation& rel) {
    LimitManifold lim;
    lim.system = sys;
    lim.radii = radii;
    lim.Z = Z;
    lim.tol_glue = rel.tol_glue;

    lim.node_offset.resize(sys.size() + 1, 0);
    for (int j = 0; j < sys.size(); ++j)
        lim.node_offset[j + 1] =
            lim.node_offset[j] + sys.entries[j].patch.domain.size();
    int total = lim.node_offset.back();
    lim.parent.resize(total);
    std::iota(lim.parent.begin(), lim.parent.end(), 0);
    for (const auto& p : rel.pairs)
        uf_union(lim.parent, lim.global_id(p.chart_j, p.node_j),
                 lim.global_id(p.chart_k, p.node_k));
    for (int g = 0; g < total; ++g) uf_find(lim.parent, g);

    // ambient consistency: each class maps to one point within tol_glue
    std::map<int, std::vector<int>> classes;
    for (int g = 0; g < total; ++g)
        if (lim.parent[g] != g) {
            classes[uf_find(lim.parent, g)].push_back(g);
        }
    for (auto& [root, members] : classes) {
        members.push_back(root);
        for (size_t a = 0; a < members.size(); ++a)
            for (size_t b = a + 1; b < members.size(); ++b) {
                double d = (lim.evaluate_class(members[a]) -
                            lim.evaluate_class(members[b]))
                               .norm();
                lim.max_class_spread = std::max(lim.max_class_spread, d);
                if (d > rel.tol_glue && lim.audit_witnesses.size() < 16) {
                    lim.audit_ok = false;
                    std::ostringstream os;
                    os << "class " << root << ": members " << members[a]
                       << " and " << members[b] << " are " << d
                       << " apart in the ambient space";
                    lim.audit_witnesses.push_back(os.str());
                }
            }
    }

    // components: grid adjacency within charts plus the glue pairs
    std::vector<int> comp(total);
    std::iota(comp.begin(), comp.end(), 0);
    for (int j = 0; j < sys.size(); ++j) {
        const GridBall& g = sys.entries[j].patch.domain;
        for (int nd = 0; nd < g.size(); ++nd)
            for (int a = 0; a < g.m; ++a) {
                int nb = g.neighbor(nd, a, 1);
                if (nb >= 0)
                    uf_union(comp, lim.global_id(j, nd), lim.global_id(j, nb));
            }
    }
    for (const auto& p : rel.pairs)
        uf_union(comp, lim.global_id(p.chart_j, p.node_j),
                 lim.global_id(p.chart_k, p.node_k));
    std::map<int, int> label;
    lim.component.resize(total);
    for (int g = 0; g < total; ++g) {
        int r = uf_find(comp, g);
        auto [it, fresh] = label.insert({r, int(label.size())});
        lim.component[g] = it->second;
    }
    lim.num_components = int(label.size());

    // transition maps with round-trip and Jacobian audits
    for (int j = 0; j < sys.size(); ++j) {
        const auto& ej = sys.entries[j];
        int m = ej.patch.domain.m;
        double h = ej.patch.domain.h;
        for (int k : Z[j]) {
            if (k == j) continue;
            TransitionMap tm;
            tm.j = j;
            tm.k = k;
            for (int nd = 0; nd < ej.patch.domain.size(); ++nd) {
                Vec x = ej.patch.domain.coord(nd);
                double res;
                Vec z = chart_to_chart(sys, radii, j, k, x, &res);
                if (!(res <= rel.tol_glue)) continue;
                tm.nodes.push_back(nd);
                tm.tau.push_back(z);
                double back_res;
                Vec xb = chart_to_chart(sys, radii, k, j, z, &back_res);
                if (std::isfinite(back_res))
                    lim.max_roundtrip =
                        std::max(lim.max_roundtrip, (xb - x).norm());
                // transition Jacobian on interior overlap nodes
                if (x.norm() + h < radii[j] && z.norm() + 2 * h < radii[k]) {
                    Mat J(m, m);
                    bool full = true;
                    for (int a = 0; a < m; ++a) {
                        Vec xp = x, xm = x;
                        xp(a) += h / 2;
                        xm(a) -= h / 2;
                        double rp, rm;
                        Vec zp = chart_to_chart(sys, radii, j, k, xp, &rp);
                        Vec zm = chart_to_chart(sys, radii, j, k, xm, &rm);
                        if (!std::isfinite(rp) || !std::isfinite(rm)) {
                            full = false;
                            break;
                        }
                        J.col(a) = (zp - zm) / h;
                    }
                    if (full)
                        lim.min_transition_det = std::min(
                            lim.min_transition_det, std::abs(J.determinant()));
                }
            }
            if (!tm.nodes.empty()) lim.transitions.push_back(std::move(tm));
        }
    }
    return lim;
}

bool CheckReport::all_ok() const {
    for (const auto& c : checks)
        if (!c.ok) return false;
    return true;
}

CheckReport structure_checks(const LimitManifold& lim,
                             const Exhaustion* exhaustion,
                             const std::vector<Vec>* cover_domain) {
    CheckReport rep;
    const GraphSystem& sys = lim.system;
    int s = sys.size();

    // (i) shrunk-chart cover: each modeled point lies within rho/6 of a
    // chart center, up to one grid cell
    {
        StructureCheck c{"cover_sixth"};
        std::vector<Vec> pts;
        if (cover_domain) {
            pts = *cover_domain;
        } else {
            for (int j = 0; j < s; ++j)
                for (int nd = 0; nd < sys.entries[j].patch.domain.size(); ++nd)
                    pts.push_back(lim.ambient(j, nd));
        }
        for (size_t i = 0; i < pts.size(); ++i) {
            bool covered = false;
            for (int k = 0; k < s && !covered; ++k) {
                const auto& ek = sys.entries[k];
                const GridBall& gk = ek.patch.domain;
                Vec q = ek.A.apply_inverse(pts[i]);
                Vec x = q.head(gk.m);
                if (x.norm() > lim.radii[k] / 6 + gk.h * std::sqrt(double(gk.m)))
                    continue;
                if ((q.tail(ek.patch.k) - ek.patch.interpolate(x)).norm() >
                    lim.tol_glue)
                    continue;
                covered = true;
            }
            if (!covered) {
                c.ok = false;
                ++c.failures;
                if (c.witness.empty())
                    c.witness = "point " + std::to_string(i) +
                                " is not covered by any shrunk chart";
            }
        }
        rep.checks.push_back(std::move(c));
    }

    // overlap at quarter radius, from the transition maps
    std::vector<std::vector<char>> quarter(s, std::vector<char>(s, 0));
    for (int j = 0; j < s; ++j) {
        const GridBall& gj = sys.entries[j].patch.domain;
        for (int k : lim.Z[j]) {
            if (k == j || quarter[j][k]) continue;
            for (int nd = 0; nd < gj.size(); ++nd) {
                Vec x = gj.coord(nd);
                if (x.norm() > lim.radii[j] / 4) continue;
                double res;
                Vec z = chart_to_chart(sys, lim.radii, j, k, x, &res);
                if (res <= lim.tol_glue && z.norm() <= lim.radii[k] / 4) {
                    quarter[j][k] = quarter[k][j] = 1;
                    break;
                }
            }
        }
    }

    // (ii) quarter-radius overlap forces inclusion of the quarter ball
    {
        StructureCheck c{"quarter_inclusion"};
        for (int j = 0; j < s; ++j)
            for (int k = 0; k < s; ++k) {
                if (j == k || !quarter[j][k]) continue;
                const GridBall& gk = sys.entries[k].patch.domain;
                for (int nd = 0; nd < gk.size(); ++nd) {
                    Vec y = gk.coord(nd);
                    if (y.norm() > lim.radii[k] / 4) continue;
                    double res;
                    Vec z =
                        chart_to_chart(sys, lim.radii, k, j, y, &res);
                    if (!(res <= lim.tol_glue) || z.norm() >= lim.radii[j]) {
                        c.ok = false;
                        ++c.failures;
                        if (c.witness.empty())
                            c.witness = "chart " + std::to_string(k) +
                                        " node " + std::to_string(nd) +
                                        " leaves chart " + std::to_string(j);
                    }
                }
            }
        rep.checks.push_back(std::move(c));
    }

    // (iii) geometric overlap at rho/5 must be recorded in Z
    {
        StructureCheck c{"z_completeness"};
        for (int j = 0; j < s; ++j) {
            const GridBall& gj = sys.entries[j].patch.domain;
            for (int k = 0; k < s; ++k) {
                if (j == k) continue;
                if (std::count(lim.Z[j].begin(), lim.Z[j].end(), k)) continue;
                for (int nd = 0; nd < gj.size(); ++nd) {
                    Vec x = gj.coord(nd);
                    if (x.norm() > lim.radii[j] / 5) continue;
                    double res;
                    Vec z = chart_to_chart(sys, lim.radii, j, k, x, &res);
                    if (res <= lim.tol_glue && z.norm() <= lim.radii[k] / 5) {
                        c.ok = false;
                        ++c.failures;
                        if (c.witness.empty())
                            c.witness = "charts " + std::to_string(j) +
                                        " and " + std::to_string(k) +
                                        " meet at node " + std::to_string(nd) +
                                        " but k is not listed in Z(j)";
                        break;
                    }
                }
            }
        }
        rep.checks.push_back(std::move(c));
    }

    // (iv) properness: a chart whose center lies in exhaustion region l must
    // belong to an annulus of index at most l
    if (exhaustion && !sys.nu.empty()) {
        StructureCheck c{"properness"};
        auto level_of = [&](int entry) {
            for (size_t j = 1; j < sys.nu.size(); ++j)
                if (entry < sys.nu[j]) return int(j) - 1;
            return int(sys.nu.size()) - 2;
        };
        for (int l = 1; l <= exhaustion->levels; ++l)
            for (int j = 0; j < s; ++j) {
                Vec center = sys.entries[j].A.translation;
                if (exhaustion->contains(center, l) && level_of(j) + 1 > l) {
                    c.ok = false;
                    ++c.failures;
                    if (c.witness.empty())
                        c.witness = "chart " + std::to_string(j) +
                                    " of annulus " +
                                    std::to_string(level_of(j)) +
                                    " intrudes into region " +
                                    std::to_string(l);
                }
            }
        rep.checks.push_back(std::move(c));
    }

    return rep;
}

}  // namespace imco
