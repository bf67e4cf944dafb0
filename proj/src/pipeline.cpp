#include "imco/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace imco {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string hash_tag(const PipelineConfig& cfg) {
    std::ostringstream os;
    os << std::hex << cfg.hash();
    return os.str();
}

class Rec {
  public:
    Rec(PipelineResult& out, const std::string& stage, const std::string& tag)
        : out_(out) {
        os_ << "stage=" << stage << " config=" << tag;
    }
    Rec& kv(const std::string& key, const std::string& v) {
        os_ << " " << key << "=" << v;
        return *this;
    }
    Rec& kv(const std::string& key, double v) { return kv(key, fmt(v)); }
    Rec& kv(const std::string& key, int v) {
        return kv(key, std::to_string(v));
    }
    ~Rec() { out_.add(os_.str()); }

  private:
    PipelineResult& out_;
    std::ostringstream os_;
};

}  // namespace

std::vector<int> interior_vertices(const SampledImmersion& mesh,
                                   double margin) {
    std::vector<char> boundary(mesh.num_vertices(), 0);
    if (mesh.m == 1) {
        for (int v = 0; v < mesh.num_vertices(); ++v)
            if (mesh.vert_neighbors[v].size() < 2) boundary[v] = 1;
    } else {
        std::map<std::vector<int>, int> face_count;
        for (const auto& s : mesh.simplices)
            for (size_t drop = 0; drop < s.size(); ++drop) {
                std::vector<int> face;
                for (size_t a = 0; a < s.size(); ++a)
                    if (a != drop) face.push_back(s[a]);
                std::sort(face.begin(), face.end());
                ++face_count[face];
            }
        for (const auto& [face, cnt] : face_count)
            if (cnt == 1)
                for (int v : face) boundary[v] = 1;
    }
    std::vector<int> bverts;
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (boundary[v]) bverts.push_back(v);

    std::vector<int> out;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (boundary[v]) continue;
        bool far = true;
        for (int b : bverts)
            if ((mesh.vertex(v) - mesh.vertex(b)).norm() <= margin) {
                far = false;
                break;
            }
        if (far) out.push_back(v);
    }
    return out;
}

double certified_radius(const SampledImmersion& mesh,
                        const PipelineConfig& cfg) {
    if (cfg.delta > 0) return cfg.delta;
    AtlasParams ap;
    ap.h_grid = cfg.h_grid;
    int V = mesh.num_vertices();
    int stride = std::max(1, V / 24);
    Vec centroid = Vec::Zero(mesh.n);
    for (int v = 0; v < V; ++v) centroid += mesh.vertex(v);
    centroid /= V;
    double extent = 0;
    for (int v = 0; v < V; ++v)
        extent = std::max(extent, (mesh.vertex(v) - centroid).norm());

    std::vector<std::pair<int, double>> samples;
    double r_max = 0;
    for (int v = 0; v < V; v += stride) {
        double r = max_graph_radius(mesh, v, cfg.alpha, ap);
        samples.push_back({v, r});
        r_max = std::max(r_max, r);
    }
    double rho0 = std::min(0.9 * r_max, extent / 4);
    if (cfg.noncompact) rho0 = std::min(rho0, 3.0 / 8);
    if (!(rho0 > 0))
        throw std::runtime_error("certified_radius: no certifiable chart");

    std::vector<int> interior = interior_vertices(mesh, 1.2 * rho0);
    std::set<int> iset(interior.begin(), interior.end());
    double r_min = rho0 / 0.9;
    bool any = false;
    for (const auto& [v, r] : samples) {
        if (!iset.count(v)) continue;
        any = true;
        r_min = std::min(r_min, r);
    }
    if (!any)
        throw std::runtime_error(
            "certified_radius: no interior sample survives the margin");
    return std::min(rho0, 0.9 * r_min);
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const Scenario& sc,
                            const std::string& stop_after) {
    PipelineResult out;
    std::string tag = hash_tag(cfg);

    if (sc.sequence.empty()) {
        Rec(out, "config", tag).kv("error", "scenario has no sequence");
        out.exit_code = 2;
        return out;
    }
    int m = sc.sequence[0].m;
    int k = sc.sequence[0].n - m;
    {
        std::vector<std::string> problems = cfg.validate(m, k);
        if (!problems.empty()) {
            for (const auto& p : problems)
                Rec(out, "config", tag).kv("error", p);
            out.exit_code = 2;
            return out;
        }
        Rec(out, "config", tag)
            .kv("scenario", sc.name)
            .kv("alpha", cfg.alpha)
            .kv("p_exp", cfg.p_exp)
            .kv("members", int(sc.sequence.size()));
    }

    AtlasParams ap;
    ap.h_grid = cfg.h_grid;
    const SampledImmersion& ref =
        sc.limit ? *sc.limit : sc.sequence.back();

    // ---- certify
    double rho;
    try {
        rho = certified_radius(ref, cfg);
        Rec r(out, "certify", tag);
        r.kv("rho", rho);
        if (m == 1) {
            double alp = curve_curvature_lp(ref, cfg.p_exp);
            r.kv("A_lp", alp)
                .kv("radius_bound",
                    radius_bound(cfg.p_exp, m, cfg.alpha, alp, cfg.c));
        }
    } catch (const std::exception& e) {
        Rec(out, "certify", tag).kv("error", e.what());
        out.exit_code = 1;
        return out;
    }
    if (stop_after == "certify") return out;

    // ---- net
    NetResult net;
    Exhaustion exh;
    std::vector<int> interior;
    double delta_cover = rho / cfg.net_shrink;
    try {
        interior = interior_vertices(ref, 1.2 * rho);
        if (cfg.noncompact) {
            exh.levels = cfg.exhaustion_levels;
            exh.ball_step = cfg.ball_step;
            RadiusSequence rseq;
            rseq.alpha = cfg.alpha;
            rseq.values =
                cfg.r_seq.empty()
                    ? std::vector<double>(exh.levels, rho)
                    : cfg.r_seq;
            std::vector<double> dseq =
                cfg.delta_seq.empty()
                    ? std::vector<double>(exh.levels, delta_cover)
                    : cfg.delta_seq;
            MeasureHandle mu = measure_from_mesh(ref);
            auto profile = [&](double R) {
                return 1.2 * ball_mass(mu, R) + 1.0;
            };
            net = delta_net_subdivided(ref, dseq, rseq, exh, profile, ap);
        } else {
            net = delta_net(ref, delta_cover, rho, cfg.alpha, ap, &interior);
        }
        double bound =
            std::floor(std::pow(4.0 / delta_cover, m) * ref.total_volume());
        Rec r(out, "net", tag);
        r.kv("points", int(net.points.size()))
            .kv("delta", delta_cover)
            .kv("bound", bound)
            .kv("within_bound", int(net.points.size() <= bound));
        if (net.subdivided) {
            std::ostringstream nu_s, ceil_s;
            for (size_t i = 0; i < net.nu.size(); ++i) {
                if (i) nu_s << ",";
                nu_s << net.nu[i];
            }
            for (size_t i = 0; i < net.nu_ceiling.size(); ++i) {
                if (i) ceil_s << ",";
                ceil_s << net.nu_ceiling[i];
            }
            r.kv("nu", nu_s.str()).kv("nu_ceiling", ceil_s.str());
        }
        // chart-scale intersection sets for the gluing stage
        for (size_t j = 0; j < net.points.size(); ++j)
            net.U[j] = chart_component(ref, net.points[j], rho);
        intersection_sets(net);
    } catch (const std::exception& e) {
        Rec(out, "net", tag).kv("error", e.what());
        out.exit_code = 1;
        return out;
    }
    if (stop_after == "net") return out;

    // ---- converge: pairwise system distances over the last member's net
    std::vector<GraphSystem> systems;
    if (sc.sequence.size() >= 2) {
        try {
            const SampledImmersion& base = sc.sequence.back();
            std::vector<int> interior_b = interior_vertices(base, 1.2 * rho);
            NetResult net_c =
                delta_net(base, rho / 4, rho, cfg.alpha, ap, &interior_b);
            for (const auto& member : sc.sequence)
                systems.push_back(extract_system(member, net_c, {rho},
                                                 cfg.alpha, ap));
            // the system metric sums over charts, so the tolerance is
            // declared per chart
            double tol_eff = cfg.conv_tol * std::max(1, systems.back().size());
            ConvergenceReport conv = detect_convergence(systems, tol_eff);
            const auto& L = conv.levels[0];
            int N = int(systems.size());
            bool tail_monotone = true;
            for (int i = 1; i + 1 < N; ++i)
                if (L.dist(i + 1, N - 1) > L.dist(i, N - 1) + 1e-12)
                    tail_monotone = false;
            Rec(out, "converge", tag)
                .kv("systems", N)
                .kv("tol", tol_eff)
                .kv("cauchy", int(L.cauchy))
                .kv("cauchy_from", L.cauchy_from)
                .kv("selected", int(L.selected.size()))
                .kv("dist_first_last", L.dist(0, N - 1))
                .kv("tail_monotone", int(tail_monotone));
        } catch (const std::exception& e) {
            // members without positional chart correspondence cannot be
            // compared over a shared net; the stage is inapplicable, not bad
            Rec(out, "converge", tag).kv("skipped", 1).kv("reason", e.what());
            systems.clear();
        }
    }
    if (stop_after == "converge") return out;

    // ---- limit
    GraphSystem sys;
    LimitManifold lim;
    try {
        sys = extract_system(ref, net, {rho}, cfg.alpha, ap);
        double h_max = 0;
        for (const auto& e : sys.entries)
            h_max = std::max(h_max, e.patch.domain.h);
        double tol_glue = cfg.tol_glue > 0
                              ? cfg.tol_glue
                              : std::max(3 * h_max * cfg.alpha, 2 * h_max);
        std::vector<double> radii(sys.size(), rho);
        GlueRelation rel = glue_relation(sys, radii, net.Z, tol_glue);
        lim = build_limit(sys, radii, net.Z, rel);
        Rec(out, "limit", tag)
            .kv("charts", lim.num_charts())
            .kv("glue_pairs", int(rel.pairs.size()))
            .kv("tol_glue", tol_glue)
            .kv("components", lim.num_components)
            .kv("expected_components", sc.expected_components)
            .kv("audit_ok", int(lim.audit_ok))
            .kv("class_spread", lim.max_class_spread)
            .kv("roundtrip", lim.max_roundtrip)
            .kv("transition_det", lim.min_transition_det);
        for (const auto& w : lim.audit_witnesses)
            Rec(out, "limit", tag).kv("witness", w);
        if (!lim.audit_ok || lim.num_components != sc.expected_components)
            out.exit_code = std::max(out.exit_code, 1);
        // the cover lemma is audited on the sampled points the net was
        // built from; chart balls overhang truncated meshes
        std::vector<Vec> cover_pts;
        for (int v : interior) {
            Vec p = ref.vertex(v);
            if (cfg.noncompact && !exh.contains(p, exh.levels)) continue;
            cover_pts.push_back(p);
        }
        CheckReport checks =
            structure_checks(lim, cfg.noncompact ? &exh : nullptr, &cover_pts);
        for (const auto& c : checks.checks) {
            Rec r(out, "limit", tag);
            r.kv("check", c.name).kv("ok", int(c.ok)).kv("failures",
                                                         c.failures);
            if (!c.ok) r.kv("witness", c.witness);
        }
        if (!checks.all_ok()) out.exit_code = std::max(out.exit_code, 1);
    } catch (const std::exception& e) {
        Rec(out, "limit", tag).kv("error", e.what());
        out.exit_code = std::max(out.exit_code, 1);
        return out;
    }
    if (stop_after == "limit") return out;

    // ---- project
    if (cfg.projection) {
        try {
            NormalField nf = smooth_normal_field(
                lim, cfg.smoothing_radius, cfg.alpha);
            Rec(out, "project", tag)
                .kv("normal_max_op", nf.max_op)
                .kv("normal_cond", nf.max_cond)
                .kv("smoothing_radius", nf.radius_used);

            std::vector<SampledImmersion> admitted;
            std::vector<int> admitted_idx;
            for (size_t i = 0; i < sc.sequence.size(); ++i) {
                const auto& target = sc.sequence[i];
                std::string gate = "na";
                bool admit = true;
                if (target.num_vertices() == ref.num_vertices()) {
                    try {
                        GraphSystem tsys = extract_system(target, net, {rho},
                                                          cfg.alpha, ap);
                        double d = system_distance(tsys, sys);
                        gate = fmt(d);
                        admit = d <= cfg.gate_tol;
                    } catch (const std::exception& e) {
                        gate = std::string("failed:") + e.what();
                        admit = false;
                    }
                }
                Rec(out, "gate", tag)
                    .kv("target", int(i))
                    .kv("distance", gate)
                    .kv("admitted", int(admit));
                if (admit) {
                    admitted.push_back(target);
                    admitted_idx.push_back(int(i));
                }
            }

            ReparamParams rp;
            rp.tol_fix = cfg.tol_fix;
            std::vector<ConvergenceRow> rows = convergence_report(
                lim, nf, admitted, cfg.max_order, cfg.alpha, rp);
            bool all_ok = true, any_fail = false;
            for (size_t r = 0; r < rows.size(); ++r) {
                Rec rec(out, "project", tag);
                rec.kv("target", admitted_idx[r])
                    .kv("sup_T", rows[r].sup_T)
                    .kv("c0", rows[r].c0)
                    .kv("c1", rows[r].c1);
                for (size_t o = 0; o < rows[r].dT_sup.size(); ++o)
                    rec.kv("dT" + std::to_string(o + 1), rows[r].dT_sup[o]);
                rec.kv("A_op", rows[r].max_A_op)
                    .kv("contraction", rows[r].max_contraction)
                    .kv("ok", int(rows[r].ok));
                if (!rows[r].note.empty()) rec.kv("note", rows[r].note);
                all_ok = all_ok && rows[r].ok;
                any_fail = any_fail || !rows[r].ok;
            }
            if (sc.expect_diffeomorphic) {
                if (!all_ok) out.exit_code = std::max(out.exit_code, 1);
            } else {
                Rec(out, "project", tag)
                    .kv("non_diffeomorphic_detected", int(any_fail));
                if (!any_fail) out.exit_code = std::max(out.exit_code, 1);
            }
        } catch (const std::exception& e) {
            Rec(out, "project", tag).kv("error", e.what());
            out.exit_code = std::max(out.exit_code, 1);
        }
    }
    if (stop_after == "project") return out;

    // ---- measure
    try {
        // members are compared over the region the charts model; truncated
        // meshes carry rim mass no chart sees
        auto clipped = [&](const SampledImmersion& mesh) {
            MeasureHandle full = measure_from_mesh(mesh);
            MeasureHandle mu;
            mu.m = full.m;
            for (size_t i = 0; i < full.cells.size(); ++i) {
                Vec cent = Vec::Zero(mesh.n);
                for (const Vec& v : full.cells[i]) cent += v;
                cent /= double(full.cells[i].size());
                bool keep = false;
                for (const auto& e : sys.entries)
                    if ((cent - e.A.translation).norm() <= rho) {
                        keep = true;
                        break;
                    }
                if (!keep) continue;
                mu.cells.push_back(full.cells[i]);
                mu.mass.push_back(full.mass[i]);
                mu.total += full.mass[i];
            }
            return mu;
        };
        std::vector<MeasureHandle> seq_mu;
        for (const auto& mesh : sc.sequence)
            seq_mu.push_back(clipped(mesh));
        MeasureHandle lim_mu = measure_from_limit(lim);
        std::vector<const MeasureHandle*> shapes{&lim_mu,
                                                 &seq_mu.back()};
        std::vector<Probe> probes = default_probes(shapes);
        double r_max = 0;
        for (int v = 0; v < ref.num_vertices(); ++v)
            r_max = std::max(r_max, ref.vertex(v).norm());
        std::vector<double> radii;
        // stay off the support radius itself: balls whose boundary carries
        // limit mass make the open/closed readings degenerate
        for (double f : {0.6, 1.2, 1.8, 2.4}) radii.push_back(f * r_max);

        // declared slack: 3 x (discretization + measured tail drift); the
        // limit loses its own grid scale at outermost chart rims
        int N = int(seq_mu.size());
        double disc = 0;
        for (const auto& mesh : sc.sequence)
            disc = std::max(disc, mesh.min_edge_length());
        for (const auto& e : sys.entries)
            disc += e.patch.domain.h / sys.size();
        double drift = 0;
        if (N >= 2)
            for (double R : radii)
                drift = std::max(drift,
                                 N * std::abs(ball_mass(seq_mu[N - 1], R) -
                                              ball_mass(seq_mu[N - 2], R)));
        double slack = 3 * (disc + drift);
        WeakReport weak =
            weak_convergence_check(seq_mu, lim_mu, probes, radii, slack);
        for (const auto& row : weak.probes)
            Rec(out, "measure", tag)
                .kv("probe", row.probe)
                .kv("limit_value", row.limit_value)
                .kv("max_gap", row.max_gap)
                .kv("tail_gap", row.tail_gap)
                .kv("shrinking", int(row.shrinking));
        for (const auto& row : weak.regions)
            Rec(out, "measure", tag)
                .kv("region_R", row.R)
                .kv("kind", row.compact ? "compact" : "open")
                .kv("limit_mass", row.limit_value)
                .kv("ok", int(row.ok));
        Rec(out, "measure", tag)
            .kv("slack", slack)
            .kv("weak_ok", int(weak.all_ok()));

        if (m == 1) {
            std::vector<double> a_norms;
            for (const auto& mesh : sc.sequence)
                a_norms.push_back(curve_curvature_lp(mesh, cfg.p_exp));
            double a_drift =
                a_norms.size() >= 2
                    ? N * std::abs(a_norms[N - 1] - a_norms[N - 2])
                    : 0;
            auto [lim_a, lim_vol] = limit_lp_norms(lim, cfg.p_exp);
            double a_slack = 3 * (0.02 * lim_a + a_drift);
            SemicontReport semi =
                limit_bound_check(sc.sequence, lim, cfg.p_exp, a_slack);
            Rec(out, "measure", tag)
                .kv("limit_A_lp", semi.limit_A_lp)
                .kv("limit_vol", semi.limit_vol)
                .kv("tail_min_A", semi.tail_min_A)
                .kv("tail_min_vol", semi.tail_min_vol)
                .kv("a_slack", a_slack)
                .kv("semicont_A_ok", int(semi.a_ok))
                .kv("semicont_vol_ok", int(semi.vol_ok))
                .kv("strict_gap",
                    fmt(semi.tail_min_A - semi.limit_A_lp));
        }
    } catch (const std::exception& e) {
        Rec(out, "measure", tag).kv("error", e.what());
        out.exit_code = std::max(out.exit_code, 1);
    }

    Rec(out, "done", tag).kv("exit", out.exit_code);
    return out;
}

}  // namespace imco
