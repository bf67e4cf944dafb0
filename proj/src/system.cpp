#include "imco/system.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

namespace imco {

int GraphSystem::entries_at_level(int level) const {
    if (level < 0) return size();
    if (!nu.empty()) {
        int idx = std::min<int>(level, static_cast<int>(nu.size()) - 1);
        return nu[idx];
    }
    return size();
}

void GraphSystem::check_consistent() const {
    for (const auto& e : entries) {
        if (e.patch.domain.m != m() || e.patch.k != k())
            throw std::invalid_argument("GraphSystem: mixed dimensions");
        if (e.A.dim() != n())
            throw std::invalid_argument("GraphSystem: isometry dimension mismatch");
    }
    if (!radius_seq.empty() &&
        radius_seq.size() != static_cast<size_t>(size()))
        throw std::invalid_argument("GraphSystem: radius_seq length mismatch");
}

namespace {

// one Gauss step aligning the chart with the measured graph tangent at 0
EuclideanIsometry recenter_frame(const EuclideanIsometry& frame, const Mat& Du0,
                                 int m, int k) {
    int n = m + k;
    Mat B(n, m);
    B.topRows(m) = Mat::Identity(m, m);
    B.bottomRows(k) = Du0;
    Mat Q = orthonormalize(B).basis;  // n x m
    // complete to an orthonormal frame of R^n
    Mat full(n, n);
    full.leftCols(m) = Q;
    Eigen::FullPivHouseholderQR<Mat> qr(Q);
    Mat ortho = qr.matrixQ();
    full.rightCols(k) = ortho.rightCols(k);
    if (full.determinant() < 0) full.col(n - 1) *= -1.0;
    return EuclideanIsometry(nearest_rotation(frame.rotation * full),
                             frame.translation);
}

}  // namespace

GraphSystem extract_system(const SampledImmersion& imm, const NetResult& net,
                           const std::vector<double>& rho_per_level,
                           double alpha, const AtlasParams& params,
                           double tol_center) {
    if (rho_per_level.empty())
        throw std::invalid_argument("extract_system: no radius given");
    GraphSystem sys;
    sys.nu = net.nu;

    auto level_of = [&](int entry) {
        if (!net.subdivided || net.nu.empty()) return 0;
        for (size_t j = 1; j < net.nu.size(); ++j)
            if (entry < net.nu[j]) return static_cast<int>(j) - 1;
        return static_cast<int>(net.nu.size()) - 2;
    };

    for (size_t j = 0; j < net.points.size(); ++j) {
        int q = net.points[j];
        double rho =
            rho_per_level[std::min<size_t>(level_of(static_cast<int>(j)),
                                           rho_per_level.size() - 1)];
        EuclideanIsometry frame = tangent_frame_at(imm, q);
        LocalGraphResult res;
        for (int iter = 0; iter < 4; ++iter) {
            res = local_graph(imm, q, rho, alpha, params, &frame);
            if (res.status != GraphStatus::ok)
                throw std::runtime_error(
                    std::string("extract_system: certification failure (") +
                    to_string(res.status) + ") at net point " +
                    std::to_string(q));
            PatchDerivs d = differentiate(res.patch);
            Mat Du0 = d.Du[res.patch.domain.origin()];
            if (Du0.norm() <= tol_center) break;
            frame = recenter_frame(frame, Du0, imm.m, imm.n - imm.m);
        }
        res.patch.centered = true;
        sys.entries.push_back({frame, std::move(res.patch)});
        if (net.subdivided) sys.radius_seq.push_back(rho);
    }
    sys.check_consistent();
    return sys;
}

double patch_c1_distance(const GraphPatch& a, const GraphPatch& b) {
    if (a.domain.m != b.domain.m || a.k != b.k)
        throw std::invalid_argument("patch_c1_distance: shape mismatch");
    double r = std::min(a.domain.r, b.domain.r);
    if (std::abs(a.domain.r - b.domain.r) > 1e-9 * r)
        throw std::invalid_argument("patch_c1_distance: radius mismatch");
    double h = std::min(a.domain.h, b.domain.h);
    auto resample = [&](const GraphPatch& p, const GridBall& g) {
        if (std::abs(p.domain.h - g.h) < 1e-15 && p.domain.size() == g.size())
            return p;
        GraphPatch out(g, p.k);
        for (int nd = 0; nd < g.size(); ++nd)
            out.values.row(nd) = p.interpolate(g.coord(nd)).transpose();
        return out;
    };
    GridBall common(a.domain.m, r, h);
    GraphPatch ra = resample(a, common);
    GraphPatch rb = resample(b, common);
    double c0 = 0;
    for (int nd = 0; nd < common.size(); ++nd)
        c0 = std::max(c0, (ra.u(nd) - rb.u(nd)).norm());
    GraphPatch diff(common, a.k);
    diff.values = ra.values - rb.values;
    PatchDerivs d = differentiate(diff);
    double c1 = 0;
    for (const Mat& J : d.Du) c1 = std::max(c1, J.norm());
    return c0 + c1;
}

double system_distance(const GraphSystem& g, const GraphSystem& gt, int level) {
    int sg = g.entries_at_level(level);
    int st = gt.entries_at_level(level);
    if (sg != st || sg > g.size() || st > gt.size())
        throw std::invalid_argument("system_distance: shape mismatch");
    double acc = 0;
    for (int j = 0; j < sg; ++j) {
        acc += rotation_distance(g.entries[j].A.rotation,
                                 gt.entries[j].A.rotation);
        acc += (g.entries[j].A.translation - gt.entries[j].A.translation).norm();
        acc += patch_c1_distance(g.entries[j].patch, gt.entries[j].patch);
    }
    return acc;
}

ConvergenceReport detect_convergence(const std::vector<GraphSystem>& seq,
                                     double tol,
                                     const std::vector<int>& levels) {
    int N = static_cast<int>(seq.size());
    if (N < 2)
        throw std::invalid_argument("detect_convergence: need at least 2 systems");
    std::vector<int> lvls = levels;
    if (lvls.empty()) lvls.push_back(-1);

    ConvergenceReport rep;
    for (int lvl : lvls) {
        ConvergenceLevel L;
        L.level = lvl;
        L.dist = Mat::Zero(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                L.dist(i, j) = L.dist(j, i) =
                    system_distance(seq[i], seq[j], lvl);

        // tail Cauchy index
        L.cauchy_from = -1;
        for (int i0 = 0; i0 < N - 1; ++i0) {
            double diam = 0;
            for (int a = i0; a < N; ++a)
                for (int b = a + 1; b < N; ++b)
                    diam = std::max(diam, L.dist(a, b));
            if (diam <= tol) {
                L.cauchy_from = i0;
                break;
            }
        }
        L.cauchy = L.cauchy_from >= 0;

        // greedy ball-growing around the medoid
        int medoid = 0;
        double best = 1e300;
        for (int i = 0; i < N; ++i) {
            double s = L.dist.row(i).sum();
            if (s < best) {
                best = s;
                medoid = i;
            }
        }
        std::set<int> sel{medoid};
        while (true) {
            int pick = -1;
            double pick_diam = 1e300;
            for (int c = 0; c < N; ++c) {
                if (sel.count(c)) continue;
                double diam = 0;
                for (int s : sel) diam = std::max(diam, L.dist(c, s));
                if (diam < pick_diam) {
                    pick_diam = diam;
                    pick = c;
                }
            }
            if (pick < 0 || pick_diam > tol) break;
            sel.insert(pick);
        }
        L.selected.assign(sel.begin(), sel.end());
        rep.levels.push_back(std::move(L));
    }

    // diagonal: systems selected at every level
    std::vector<int> diag;
    for (int i = 0; i < N; ++i) {
        bool all = true;
        for (const auto& L : rep.levels)
            if (!std::count(L.selected.begin(), L.selected.end(), i)) all = false;
        if (all) diag.push_back(i);
    }
    rep.diagonal = std::move(diag);
    return rep;
}

void write_system(std::ostream& os, const GraphSystem& g) {
    os << "system " << g.size() << " " << g.radius_seq.size() << " "
       << g.nu.size() << "\n";
    os << std::hexfloat;
    for (double r : g.radius_seq) os << r << " ";
    if (!g.radius_seq.empty()) os << "\n";
    os << std::defaultfloat;
    for (int v : g.nu) os << v << " ";
    if (!g.nu.empty()) os << "\n";
    for (const auto& e : g.entries) {
        int n = e.A.dim();
        os << "isometry " << n << "\n" << std::hexfloat;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) os << e.A.rotation(i, j) << " ";
            os << "\n";
        }
        for (int i = 0; i < n; ++i) os << e.A.translation(i) << " ";
        os << "\n" << std::defaultfloat;
        write_patch(os, e.patch);
    }
}

GraphSystem read_system(std::istream& is) {
    std::string tag;
    is >> tag;
    if (tag != "system") throw std::runtime_error("read_system: bad header");
    int s, nr, nnu;
    is >> s >> nr >> nnu;
    GraphSystem g;
    g.radius_seq.resize(nr);
    for (int i = 0; i < nr; ++i) g.radius_seq[i] = read_hexdouble(is);
    g.nu.resize(nnu);
    for (int i = 0; i < nnu; ++i) is >> g.nu[i];
    for (int e = 0; e < s; ++e) {
        is >> tag;
        if (tag != "isometry") throw std::runtime_error("read_system: bad entry");
        int n;
        is >> n;
        Mat R(n, n);
        Vec T(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = read_hexdouble(is);
        for (int i = 0; i < n; ++i) T(i) = read_hexdouble(is);
        SystemEntry entry{EuclideanIsometry(std::move(R), std::move(T)),
                          read_patch(is)};
        g.entries.push_back(std::move(entry));
    }
    g.check_consistent();
    return g;
}

}  // namespace imco
