#include "imco/patch.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace imco {

namespace {
constexpr int kPackBits = 21;
constexpr int kPackOffset = 1 << 20;
}  // namespace

GridBall::GridBall(int m_, double r_, double h_) : m(m_), r(r_), h(h_) {
    if (m < 1 || m > 3) throw std::invalid_argument("GridBall: m out of range");
    if (h <= 0 || r <= 0) throw std::invalid_argument("GridBall: need h,r > 0");
    int K = static_cast<int>(std::floor((r - 1e-12 * r) / h));
    if (K < 1)
        throw std::invalid_argument("GridBall: fewer than 3 nodes per axis");
    std::vector<int> idx(m, -K);
    // lexicographic sweep over the bounding cube
    while (true) {
        double s = 0;
        for (int a = 0; a < m; ++a) s += double(idx[a]) * idx[a];
        if (std::sqrt(s) * h < r) {
            index_[pack(idx)] = static_cast<int>(nodes.size());
            nodes.push_back(idx);
        }
        int a = 0;
        for (; a < m; ++a) {
            if (++idx[a] <= K) break;
            idx[a] = -K;
        }
        if (a == m) break;
    }
    origin_ = find(std::vector<int>(m, 0));
}

int64_t GridBall::pack(const std::vector<int>& idx) const {
    int64_t key = 0;
    for (int a = 0; a < m; ++a)
        key = (key << kPackBits) | int64_t(idx[a] + kPackOffset);
    return key;
}

Vec GridBall::coord(int node) const {
    Vec x(m);
    for (int a = 0; a < m; ++a) x(a) = nodes[node][a] * h;
    return x;
}

int GridBall::find(const std::vector<int>& idx) const {
    auto it = index_.find(pack(idx));
    return it == index_.end() ? -1 : it->second;
}

int GridBall::neighbor(int node, int axis, int step) const {
    std::vector<int> idx = nodes[node];
    idx[axis] += step;
    return find(idx);
}

double GridBall::cell_weight(int node) const {
    Vec x = coord(node);
    // fully inside?
    double corner = x.norm() + 0.5 * h * std::sqrt(double(m));
    if (corner < r) return std::pow(h, m);
    // subsample 4^m points of the cell
    int inside = 0, total = 0;
    std::vector<int> s(m, 0);
    while (true) {
        Vec y = x;
        for (int a = 0; a < m; ++a) y(a) += (-0.375 + 0.25 * s[a]) * h;
        ++total;
        if (y.norm() < r) ++inside;
        int a = 0;
        for (; a < m; ++a) {
            if (++s[a] <= 3) break;
            s[a] = 0;
        }
        if (a == m) break;
    }
    return std::pow(h, m) * double(inside) / double(total);
}

GraphPatch::GraphPatch(GridBall d, int k_) : domain(std::move(d)), k(k_) {
    values = Mat::Zero(domain.size(), k);
}

bool GraphPatch::check_centered(double tol_center) const {
    int o = domain.origin();
    if (o < 0) return false;
    if (values.row(o).norm() > tol_center) return false;
    PatchDerivs d = differentiate(*this);
    return d.Du[o].norm() <= tol_center;
}

Vec GraphPatch::interpolate(const Vec& x) const {
    const GridBall& g = domain;
    std::vector<int> base(g.m);
    std::vector<double> frac(g.m);
    for (int a = 0; a < g.m; ++a) {
        double t = x(a) / g.h;
        base[a] = static_cast<int>(std::floor(t));
        frac[a] = t - base[a];
    }
    // multilinear over the 2^m cell corners; fall back to the nearest node
    // if a corner is missing
    Vec acc = Vec::Zero(k);
    double wsum = 0;
    for (int c = 0; c < (1 << g.m); ++c) {
        std::vector<int> idx(g.m);
        double w = 1;
        for (int a = 0; a < g.m; ++a) {
            int bit = (c >> a) & 1;
            idx[a] = base[a] + bit;
            w *= bit ? frac[a] : 1.0 - frac[a];
        }
        int node = g.find(idx);
        if (node >= 0 && w > 0) {
            acc += w * u(node);
            wsum += w;
        }
    }
    if (wsum > 1e-12) return acc / wsum;
    // nearest node
    std::vector<int> idx(g.m);
    for (int a = 0; a < g.m; ++a)
        idx[a] = static_cast<int>(std::llround(x(a) / g.h));
    int node = g.find(idx);
    if (node < 0) throw std::domain_error("interpolate: point outside patch");
    return u(node);
}

namespace {

// First derivative of a per-node field along one axis: central where both
// neighbors exist, second-order one-sided otherwise, two-point as a last
// resort.
Vec fd_axis(const GridBall& g, const Mat& field, int node, int axis) {
    int k = static_cast<int>(field.cols());
    auto val = [&](int nd) { return field.row(nd).transpose(); };
    int p1 = g.neighbor(node, axis, 1), m1 = g.neighbor(node, axis, -1);
    double h = g.h;
    if (p1 >= 0 && m1 >= 0) return (val(p1) - val(m1)) / (2 * h);
    if (p1 >= 0) {
        int p2 = g.neighbor(node, axis, 2);
        if (p2 >= 0)
            return (-3.0 * val(node) + 4.0 * val(p1) - val(p2)) / (2 * h);
        return (val(p1) - val(node)) / h;
    }
    if (m1 >= 0) {
        int m2 = g.neighbor(node, axis, -2);
        if (m2 >= 0)
            return (3.0 * val(node) - 4.0 * val(m1) + val(m2)) / (2 * h);
        return (val(node) - val(m1)) / h;
    }
    return Vec::Zero(k);
}

}  // namespace

PatchDerivs differentiate(const GraphPatch& p) {
    const GridBall& g = p.domain;
    int N = g.size(), m = g.m, k = p.k;
    for (int a = 0; a < m; ++a) {
        std::vector<int> idx(m, 0);
        idx[a] = 1;
        if (g.find(idx) < 0)
            throw std::invalid_argument("differentiate: grid too small");
    }
    PatchDerivs out;
    out.Du.resize(N);
    for (int nd = 0; nd < N; ++nd) {
        Mat J(k, m);
        for (int a = 0; a < m; ++a) J.col(a) = fd_axis(g, p.values, nd, a);
        out.Du[nd] = std::move(J);
    }
    // second derivatives by nested differentiation of the Du field,
    // symmetrized
    std::vector<Mat> ducols(m, Mat(N, k));
    for (int a = 0; a < m; ++a)
        for (int nd = 0; nd < N; ++nd)
            ducols[a].row(nd) = out.Du[nd].col(a).transpose();
    out.D2u.assign(N, std::vector<Vec>(m * m, Vec::Zero(k)));
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b)
            for (int nd = 0; nd < N; ++nd) {
                Vec dab = fd_axis(g, ducols[a], nd, b);
                Vec dba = fd_axis(g, ducols[b], nd, a);
                Vec sym = 0.5 * (dab + dba);
                out.D2u[nd][a * m + b] = sym;
                out.D2u[nd][b * m + a] = sym;
            }
    return out;
}

PatchGeometry fundamental_forms(const GraphPatch& p) {
    const GridBall& g = p.domain;
    int N = g.size(), m = g.m, k = p.k, n = m + k;
    PatchGeometry out;
    out.m = m;
    out.k = k;
    out.n = n;
    out.derivs = differentiate(p);
    out.Df.resize(N);
    out.G.resize(N);
    out.Ginv.resize(N);
    out.pperp.resize(N);
    out.ptan.resize(N);
    out.A.assign(N, std::vector<Vec>(m * m));
    out.normA.resize(N);
    out.sqrtDetG.resize(N);
    out.normal_basis.resize(N);
    for (int nd = 0; nd < N; ++nd) {
        const Mat& Du = out.derivs.Du[nd];  // k x m
        Mat Df(n, m);
        Df.topRows(m) = Mat::Identity(m, m);
        Df.bottomRows(k) = Du;
        Mat G = Df.transpose() * Df;
        double detG = G.determinant();
        if (detG <= 0)
            throw std::domain_error("fundamental_forms: singular metric");
        Mat Ginv = G.inverse();
        Mat ptan = Df * Ginv * Df.transpose();
        Mat pperp = Mat::Identity(n, n) - ptan;
        // A_ij = pperp(d_ij f), d_ij f = (0, d_ij u)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                Vec d2f = Vec::Zero(n);
                d2f.tail(k) = out.derivs.d2(nd, i, j, m);
                out.A[nd][i * m + j] = pperp * d2f;
            }
        // ||A||^2 = sum A_ij . A_kl g^ik g^jl
        double s = 0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        s += out.A[nd][i * m + j].dot(out.A[nd][a * m + b]) *
                             Ginv(i, a) * Ginv(j, b);
        out.normA[nd] = std::sqrt(std::max(0.0, s));
        out.sqrtDetG[nd] = std::sqrt(detG);
        // orthonormal basis of the normal space: columns (-Du^t; I_k),
        // orthonormalized
        Mat nb(n, k);
        nb.topRows(m) = -Du.transpose();
        nb.bottomRows(k) = Mat::Identity(k, k);
        out.normal_basis[nd] = orthonormalize(nb).basis;
        out.Df[nd] = std::move(Df);
        out.G[nd] = std::move(G);
        out.Ginv[nd] = std::move(Ginv);
        out.pperp[nd] = std::move(pperp);
        out.ptan[nd] = std::move(ptan);
    }
    return out;
}

double norm_A_orthoframe(const PatchGeometry& g, int node) {
    int m = g.m;
    // G^{-1/2} via eigendecomposition of the SPD metric
    Eigen::SelfAdjointEigenSolver<Mat> es(g.G[node]);
    Mat Gmhalf = es.operatorInverseSqrt();
    double s = 0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            Vec v = Vec::Zero(g.n);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    v += Gmhalf(i, a) * Gmhalf(j, b) * g.a(node, i, j);
            s += v.squaredNorm();
        }
    return std::sqrt(s);
}

LpResult lp_norms(const GraphPatch& p, const PatchGeometry& geom, double p_exp) {
    if (p_exp < 1) throw std::invalid_argument("lp_norms: p_exp < 1");
    const GridBall& g = p.domain;
    LpResult out;
    double acc = 0;
    for (int nd = 0; nd < g.size(); ++nd) {
        double w = g.cell_weight(nd);
        out.volume += w * geom.sqrtDetG[nd];
        acc += w * geom.sqrtDetG[nd] * std::pow(geom.normA[nd], p_exp);
        out.A_sup = std::max(out.A_sup, geom.normA[nd]);
    }
    out.A_lp = std::pow(acc, 1.0 / p_exp);
    return out;
}

double du_c0_norm(const PatchGeometry& geom) {
    double s = 0;
    for (const Mat& J : geom.derivs.Du) s = std::max(s, J.norm());
    return s;
}

EstimateReport estimate_report(const GraphPatch& p, const PatchGeometry& geom,
                               double p_exp) {
    int m = p.domain.m;
    if (p_exp <= m)
        throw std::invalid_argument(
            "estimate_report: requires p_exp > m (degenerate at p = m)");
    const GridBall& g = p.domain;
    EstimateReport rep;
    rep.du_c0 = du_c0_norm(geom);

    // (i) Lebesgue L^p of the Frobenius density of D^2u vs the induced-measure
    // L^p of ||A||
    double accL = 0;
    for (int nd = 0; nd < g.size(); ++nd) {
        double w = g.cell_weight(nd);
        double d2 = 0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                d2 += geom.derivs.d2(nd, a, b, m).squaredNorm();
        accL += w * std::pow(std::sqrt(d2), p_exp);
    }
    rep.d2u_lp = std::pow(accL, 1.0 / p_exp);
    LpResult lp = lp_norms(p, geom, p_exp);
    rep.rhs_lp = std::pow(1.0 + rep.du_c0 * rep.du_c0, 1.5) * lp.A_lp;
    rep.lp_ok = rep.d2u_lp <= rep.rhs_lp * 1.02;

    // (ii) height bound for centered patches
    rep.max_height_ratio = 0;
    int o = g.origin();
    for (int nd = 0; nd < g.size(); ++nd) {
        if (nd == o) continue;
        double x = g.coord(nd).norm();
        double num = p.u(nd).norm();
        if (rep.du_c0 > 0 && x > 0)
            rep.max_height_ratio =
                std::max(rep.max_height_ratio, num / (rep.du_c0 * x));
        else if (num > 1e-14)
            rep.max_height_ratio = std::max(rep.max_height_ratio, 1e300);
    }
    rep.height_ok = rep.max_height_ratio <= 1.0 + 1e-9;

    // (iii) projection lower bounds, tested on the coordinate directions
    rep.min_tan_ratio = 1e300;
    rep.min_norm_ratio = 1e300;
    for (int nd = 0; nd < g.size(); ++nd) {
        double duloc = geom.derivs.Du[nd].norm();
        double floor_fac = 1.0 / std::sqrt(1.0 + duloc * duloc);
        for (int a = 0; a < m; ++a) {
            Vec zeta = Vec::Zero(geom.n);
            zeta(a) = 1.0;
            double got = (geom.ptan[nd] * zeta).norm();
            rep.min_tan_ratio = std::min(rep.min_tan_ratio, got / floor_fac);
        }
        for (int c = 0; c < p.k; ++c) {
            Vec xi = Vec::Zero(geom.n);
            xi(m + c) = 1.0;
            double got = (geom.pperp[nd] * xi).norm();
            rep.min_norm_ratio = std::min(rep.min_norm_ratio, got / floor_fac);
        }
    }
    rep.projection_ok =
        rep.min_tan_ratio >= 1.0 - 1e-9 && rep.min_norm_ratio >= 1.0 - 1e-9;

    // (iv) measured Morrey ratio (the constant C(m,p) is only reported)
    double sup_du_gap = 0;
    if (o >= 0) {
        const Mat& Du0 = geom.derivs.Du[o];
        for (int nd = 0; nd < g.size(); ++nd)
            sup_du_gap = std::max(sup_du_gap, (geom.derivs.Du[nd] - Du0).norm());
    }
    double denom = std::pow(g.r, 1.0 - double(m) / p_exp) * rep.d2u_lp;
    rep.morrey_ratio = denom > 1e-300 ? sup_du_gap / denom : 0.0;
    return rep;
}

void write_patch(std::ostream& os, const GraphPatch& p) {
    os << "patch " << p.domain.m << " " << p.k << " ";
    os << std::hexfloat << p.domain.r << " " << p.domain.h << std::defaultfloat;
    os << " " << (p.centered ? 1 : 0) << "\n";
    os << std::hexfloat;
    for (int nd = 0; nd < p.domain.size(); ++nd) {
        for (int c = 0; c < p.k; ++c) os << p.values(nd, c) << " ";
        os << "\n";
    }
    os << std::defaultfloat;
}

double read_hexdouble(std::istream& is) {
    // operator>> does not reliably parse hexfloat; go through strtod
    std::string tok;
    is >> tok;
    if (!is) throw std::runtime_error("read_hexdouble: truncated input");
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error("read_hexdouble: bad float token");
    return v;
}

GraphPatch read_patch(std::istream& is) {
    std::string tag;
    is >> tag;
    if (tag != "patch") throw std::runtime_error("read_patch: bad header");
    int m, k, cent;
    is >> m >> k;
    double r = read_hexdouble(is);
    double h = read_hexdouble(is);
    is >> cent;
    if (!is) throw std::runtime_error("read_patch: bad header fields");
    GraphPatch p(GridBall(m, r, h), k);
    p.centered = cent != 0;
    for (int nd = 0; nd < p.domain.size(); ++nd)
        for (int c = 0; c < k; ++c) {
            double v = read_hexdouble(is);
            if (!std::isfinite(v))
                throw std::runtime_error("read_patch: non-finite value");
            p.values(nd, c) = v;
        }
    return p;
}

}  // namespace imco
