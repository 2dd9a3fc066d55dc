#include "lavlab/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "lavlab/errors.hpp"

namespace lavlab {

double predicted_exponent(const MaterialParams& mp, double alpha, double beta, int dimension) {
    const FamilyKind kind = dimension == 2 ? FamilyKind::CrossPinch2D : FamilyKind::CrossPinch3D;
    DeformationFamily f;
    f.kind = kind;
    f.alpha = alpha;
    f.beta = beta;
    AdmissibilityReport rep = admissibility_check(f, mp);
    if (!rep.admissible) {
        std::string what = "predicted_exponent: inadmissible (alpha, beta):";
        for (const auto& c : rep.constraints)
            if (!c.ok) what += " [" + c.name + "]";
        fail(ErrorKind::Constraint, what);
    }
    const double p = mp.p, q = mp.q, a = alpha;
    if (dimension == 2)
        return std::min({p * a - p + 2.0, 2.0 + (1.0 - a) * q, 2.0 * a + 1.0});
    return std::min({2.0, (a - 1.0) * p + 2.0, q * (1.0 - a) + 2.0, 1.0 + 2.0 * a});
}

std::vector<EnergyReport> sweep(const DeformationFamily& family, const std::vector<double>& s_values,
                                const MaterialParams& mp, const QuadratureSpec& spec, par::Exec exec) {
    std::vector<EnergyReport> out;
    out.reserve(s_values.size());
    for (double s : s_values) {
        if (!(s > 0.0 && s < 1.0)) fail(ErrorKind::Parameter, "sweep: s must lie in (0,1)");
        StripeDomain dom = make_domain(mp.d, s);
        EnergyBreakdown eb = integrate_energy(family, dom, mp, spec, exec);
        EnergyReport rep;
        rep.s = s;
        rep.family = family;
        rep.total = eb.total.value;
        for (int i = 0; i < 4; ++i) rep.per_region[static_cast<std::size_t>(i)] = eb.region[i].value;
        rep.quadrature_error = eb.total.error_estimate;
        rep.divergent = eb.total.divergent;
        out.push_back(rep);
    }
    return out;
}

ScalingFit fit_exponent(const std::vector<EnergyReport>& reports) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : reports) {
        if (r.divergent) fail(ErrorKind::Numerical, "fit_exponent: divergent energy in the sweep");
        if (!(r.total > 0.0)) fail(ErrorKind::Numerical, "fit_exponent: nonpositive energy total");
        pts.push_back({std::log(r.s), std::log(r.total)});
    }
    if (pts.size() < 3) fail(ErrorKind::Parameter, "fit_exponent needs at least 3 reports");
    double mx = 0, my = 0;
    for (auto& p : pts) {
        mx += p.first;
        my += p.second;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (auto& p : pts) {
        sxx += (p.first - mx) * (p.first - mx);
        sxy += (p.first - mx) * (p.second - my);
        syy += (p.second - my) * (p.second - my);
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    auto [lo, hi] = std::minmax_element(reports.begin(), reports.end(),
                                        [](const EnergyReport& a, const EnergyReport& b) { return a.s < b.s; });
    fit.s_range = {lo->s, hi->s};
    return fit;
}

GapReport gap_report(const DeformationFamily& pinch, const DeformationFamily& lipschitz,
                     const std::vector<double>& s_values, const MaterialParams& mp,
                     const QuadratureSpec& spec, par::Exec exec) {
    std::vector<EnergyReport> ep = sweep(pinch, s_values, mp, spec, exec);
    std::vector<EnergyReport> eb = sweep(lipschitz, s_values, mp, spec, exec);
    GapReport out;
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        GapRow row;
        row.s = s_values[i];
        row.e_pinch = ep[i].total;
        row.e_bypass = eb[i].total;
        row.ratio = eb[i].total != 0.0 ? ep[i].total / eb[i].total : 0.0;
        out.rows.push_back(row);
    }
    // ratio strictly decreasing on the last four rows, in order of decreasing s
    std::vector<GapRow> sorted = out.rows;
    std::sort(sorted.begin(), sorted.end(), [](const GapRow& a, const GapRow& b) { return a.s > b.s; });
    out.tail_decreasing = sorted.size() >= 4;
    for (std::size_t i = sorted.size() >= 4 ? sorted.size() - 4 : 0; i + 1 < sorted.size(); ++i)
        if (!(sorted[i + 1].ratio < sorted[i].ratio)) out.tail_decreasing = false;
    return out;
}

namespace {

struct Feasible2D {
    double a_lo, a_hi;  // alpha in (a_lo, a_hi)
};

}  // namespace

ShapeOptimum optimize_shape(const MaterialParams& mp, double s, int dimension, const QuadratureSpec& spec) {
    const double p = mp.p, q = mp.q;
    const FamilyKind kind = dimension == 2 ? FamilyKind::CrossPinch2D : FamilyKind::CrossPinch3D;
    // Feasibility: 2D needs alpha in ((p-1)/p, 1), beta in (alpha, 1],
    // alpha + beta < 1 + 1/q; empty as soon as 2 (p-1)/p >= 1 + 1/q, i.e.
    // q >= p/(p-2). 3D needs alpha, beta in (1-1/p, 1], alpha + beta < 1 + 1/q.
    const double lo = 1.0 - 1.0 / p;
    const double cap = 1.0 + 1.0 / q;
    if (2.0 * lo >= cap) {
        fail(ErrorKind::Constraint,
             dimension == 2
                 ? "optimize_shape: empty feasible region, binding inequality (1-alpha-beta)q > -1 "
                   "against (p-1)/p < alpha < beta"
                 : "optimize_shape: empty feasible region, binding inequality (1-alpha-beta)q > -1 "
                   "against alpha, beta > 1-1/p");
    }

    StripeDomain dom = make_domain(mp.d, s);
    QuadratureSpec cheap = spec;
    cheap.gauss_order = std::max(8, spec.gauss_order / 2);

    auto energy_at = [&](double a, double b) {
        DeformationFamily f;
        f.kind = kind;
        f.alpha = a;
        f.beta = b;
        if (!admissibility_check(f, mp).admissible) return std::numeric_limits<double>::infinity();
        EnergyBreakdown eb = integrate_energy(f, dom, mp, cheap, par::Exec::Parallel);
        return eb.total.divergent ? std::numeric_limits<double>::infinity() : eb.total.value;
    };

    // coarse feasible grid
    double best_a = 0, best_b = 0, best_e = std::numeric_limits<double>::infinity();
    const int n = 14;
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
            const double a = lo + (std::min(1.0, cap - lo) - lo) * i / n;
            const double b_hi = std::min(1.0, cap - a);
            const double b_lo = dimension == 2 ? a : lo;
            if (!(b_hi > b_lo)) continue;
            const double b = b_lo + (b_hi - b_lo) * j / n;
            const double e = energy_at(a, b);
            if (e < best_e) {
                best_e = e;
                best_a = a;
                best_b = b;
            }
        }
    if (!std::isfinite(best_e))
        fail(ErrorKind::Constraint, "optimize_shape: no admissible grid point found");

    // pattern-search refinement
    double step = 0.5 / n;
    for (int round = 0; round < 40 && step > 1e-6; ++round) {
        bool improved = false;
        const double cand[4][2] = {{best_a + step, best_b}, {best_a - step, best_b},
                                   {best_a, best_b + step}, {best_a, best_b - step}};
        for (auto& c : cand) {
            const double e = energy_at(c[0], c[1]);
            if (e < best_e) {
                best_e = e;
                best_a = c[0];
                best_b = c[1];
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }

    // final value at full quadrature accuracy
    DeformationFamily f = make_family(kind, mp, best_a, best_b);
    EnergyBreakdown eb = integrate_energy(f, dom, mp, spec, par::Exec::Parallel);
    ShapeOptimum out;
    out.alpha = best_a;
    out.beta = best_b;
    out.energy = eb.total.value;
    return out;
}

std::vector<double> dyadic_s_values(int first_exp, int last_exp) {
    std::vector<double> v;
    for (int e = first_exp; e <= last_exp; ++e) v.push_back(std::pow(2.0, -e));
    return v;
}

}  // namespace lavlab
