#pragma once
#include <functional>
#include <string>
#include <vector>

#include "imco/limit.hpp"

namespace imco {

// Pushforward of the induced volume: a list of ambient m-simplices, each
// carrying its (possibly multiplicity-weighted) induced mass.
struct MeasureHandle {
    int m = 0;
    std::vector<std::vector<Vec>> cells;  // m+1 ambient vertices per cell
    std::vector<double> mass;             // >= 0
    double total = 0.0;
};

MeasureHandle measure_from_mesh(const SampledImmersion& mesh);
// Chart grid cells, weighted by 1 / (number of charts seeing the class) so
// overlaps are not double counted.
MeasureHandle measure_from_limit(const LimitManifold& lim);

// Separable bump on an axis-aligned box: product of 1 - 3t^2 + 2|t|^3
// factors, supported on |t| <= 1 per axis. C^1, piecewise cubic.
struct Probe {
    Vec center;
    Vec halfwidth;

    double operator()(const Vec& p) const;
    double lip() const;  // Lipschitz bound, sum of 1.5 / halfwidth
};

// 8 probes spread over the bounding box of the given point sets.
std::vector<Probe> default_probes(const std::vector<const MeasureHandle*>& ms);

// mass inside the ambient ball B_R; straddling cells are split recursively
double ball_mass(const MeasureHandle& mu, double R, int depth = 6);

// integral of the probe, per-cell quadrature of order 4
double integrate(const MeasureHandle& mu, const Probe& phi);

struct ProbeRow {
    int probe = 0;
    std::vector<double> values;  // per sequence member
    double limit_value = 0.0;
    double max_gap = 0.0;
    double tail_gap = 0.0;  // worst gap over the last third
    bool shrinking = false;
};

struct RegionRow {
    double R = 0.0;
    bool compact = true;  // closed ball vs open ball reading
    std::vector<double> values;
    double limit_value = 0.0;
    bool ok = true;  // the one-sided inequality surrogate
};

struct WeakReport {
    std::vector<ProbeRow> probes;
    std::vector<RegionRow> regions;
    bool all_ok() const;
};

// Finite surrogates of weak-* convergence: probe integral gaps plus the
// limsup/liminf inequalities on closed/open balls, tail = last third.
WeakReport weak_convergence_check(const std::vector<MeasureHandle>& seq,
                                  const MeasureHandle& limit,
                                  const std::vector<Probe>& probes,
                                  const std::vector<double>& radii,
                                  double slack);

struct BoundProfile {
    std::function<double(double)> C;  // R -> mass bound, nondecreasing
    std::function<double(int, double)> C_k;  // (order, R) -> derivative bound
};

struct SemicontReport {
    double limit_A_lp = 0.0;
    double limit_vol = 0.0;
    std::vector<double> seq_A_lp;  // discrete curvature L^p per member
    std::vector<double> seq_vol;
    double tail_min_A = 0.0;
    double tail_min_vol = 0.0;
    double slack = 0.0;
    bool a_ok = false;
    bool vol_ok = false;
    std::vector<std::string> profile_failures;
};

// Lower semicontinuity of ||A||_{L^p} and volume along the sequence, with
// the limit quantities computed from the chart system. Sequence curvature
// norms use the discrete turning-angle curvature (curves only). An optional
// profile adds ball-mass ceiling rows for the limit.
SemicontReport limit_bound_check(const std::vector<SampledImmersion>& seq,
                                 const LimitManifold& lim, double p_exp,
                                 double slack,
                                 const BoundProfile* profile = nullptr,
                                 const std::vector<double>& radii = {});

// (||A||_{L^p}, volume) of the limit from its charts, overlap weighted.
std::pair<double, double> limit_lp_norms(const LimitManifold& lim,
                                         double p_exp);

// Discrete L^p curvature norm of a polygonal curve (m = 1).
double curve_curvature_lp(const SampledImmersion& mesh, double p_exp);

}  // namespace imco
