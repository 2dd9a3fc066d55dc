#include "lavlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "lavlab/errors.hpp"

namespace lavlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void gauss_legendre_01(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    if (order < 2) fail(ErrorKind::Parameter, "gauss_order must be at least 2");
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) {
        const int n = order;
        std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
        const double pi = 2.0 * std::acos(0.0);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            // Newton iteration for the i-th root of P_n on [-1,1]
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[static_cast<std::size_t>(i)] = -z;
            x[static_cast<std::size_t>(n - 1 - i)] = z;
            const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
            w[static_cast<std::size_t>(i)] = wi;
            w[static_cast<std::size_t>(n - 1 - i)] = wi;
        }
        if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
        // map [-1,1] -> [0,1]
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(i)] = 0.5 * (1.0 + x[static_cast<std::size_t>(i)]);
            w[static_cast<std::size_t>(i)] *= 0.5;
        }
        it = cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first;
    }
    nodes = it->second.first;
    weights = it->second.second;
}

void tanh_sinh_01(std::vector<double>& nodes, std::vector<double>& weights) {
    static std::vector<double> xs, ws;
    static std::once_flag flag;
    std::call_once(flag, [] {
        const double h = 0.05;
        const double tmax = 6.1;
        const double pi2 = std::acos(0.0);  // pi/2
        const int n = static_cast<int>(tmax / h);
        for (int k = -n; k <= n; ++k) {
            const double t = k * h;
            const double z = pi2 * std::sinh(t);
            // sigma in (0,1), singularity end at 0; stable for z << 0
            const double sigma = z < 0.0 ? std::exp(2.0 * z) / (1.0 + std::exp(2.0 * z))
                                         : 1.0 / (1.0 + std::exp(-2.0 * z));
            const double ch = std::cosh(z);
            const double dsigma = pi2 * std::cosh(t) / (2.0 * ch * ch);
            const double w = h * dsigma;
            if (!(sigma > 1e-280) || !(sigma < 1.0) || !(w > 1e-300) || !std::isfinite(w)) continue;
            xs.push_back(sigma);
            ws.push_back(w);
        }
    });
    nodes = xs;
    weights = ws;
}

std::vector<Interval> graded_cells_1d(double a, double b, double singular_at, const QuadratureSpec& spec) {
    if (!(b > a)) fail(ErrorKind::Parameter, "empty interval");
    if (singular_at < a || singular_at > b)
        fail(ErrorKind::Parameter, "singular point must lie in the closed interval");
    if (!(spec.grading_ratio > 0.0 && spec.grading_ratio < 1.0))
        fail(ErrorKind::Parameter, "grading_ratio must lie in (0,1)");
    if (spec.grading_levels < 0) fail(ErrorKind::Parameter, "grading_levels must be nonnegative");

    std::vector<Interval> cells;
    const double c = singular_at, r = spec.grading_ratio;
    const int L = spec.grading_levels;
    auto add_side = [&](double width, int dir) {  // dir +1: cells to the right of c
        if (width <= 0.0) return;
        double outer = width;
        for (int k = 0; k < L; ++k) {
            const double inner = width * std::pow(r, k + 1);
            Interval iv;
            if (dir > 0) {
                iv.a = c + inner;
                iv.b = c + outer;
            } else {
                iv.a = c - outer;
                iv.b = c - inner;
            }
            cells.push_back(iv);
            outer = inner;
        }
        Interval inner_cell;
        if (dir > 0) {
            inner_cell.a = c;
            inner_cell.b = c + outer;
            inner_cell.singular_end = 0;
        } else {
            inner_cell.a = c - outer;
            inner_cell.b = c;
            inner_cell.singular_end = 1;
        }
        cells.push_back(inner_cell);
    };
    add_side(c - a, -1);
    add_side(b - c, +1);
    std::sort(cells.begin(), cells.end(), [](const Interval& u, const Interval& v) { return u.a < v.a; });
    return cells;
}

namespace {

struct Rule1D {
    std::vector<double> x, w;
};

Rule1D gl_rule(double a, double b, int order) {
    std::vector<double> n, w;
    gauss_legendre_01(order, n, w);
    Rule1D r;
    const double len = b - a;
    r.x.resize(n.size());
    r.w.resize(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        r.x[i] = a + len * n[i];
        r.w[i] = len * w[i];
    }
    return r;
}

// singular_end: 0 -> singularity at a, 1 -> singularity at b
Rule1D ts_rule(double a, double b, int singular_end) {
    std::vector<double> n, w;
    tanh_sinh_01(n, w);
    Rule1D r;
    const double len = b - a;
    r.x.resize(n.size());
    r.w.resize(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        r.x[i] = singular_end == 0 ? a + len * n[i] : b - len * n[i];
        r.w[i] = len * w[i];
    }
    return r;
}

Rule1D make_rule(const Interval& iv, int order) {
    return iv.singular_end >= 0 ? ts_rule(iv.a, iv.b, iv.singular_end) : gl_rule(iv.a, iv.b, order);
}

struct BoxSpec {
    Vec lo, hi;
    int graded_axis = -1;  // singular coordinate is 0 on that axis
};

std::vector<BoxSpec> region_boxes(RegionLabel region, const StripeDomain& dom) {
    const double s = dom.s;
    std::vector<BoxSpec> boxes;
    if (dom.dim == 2) {
        switch (region) {
            case RegionLabel::S1Inner:
                boxes.push_back({Vec(-s, -s), Vec(s, s), 0});
                break;
            case RegionLabel::S1Outer:
                boxes.push_back({Vec(-1.0, -s), Vec(-s, s), -1});
                boxes.push_back({Vec(s, -s), Vec(1.0, s), -1});
                break;
            case RegionLabel::S2Inner:
                boxes.push_back({Vec(4.0 - s, -s), Vec(4.0 + s, s), 1});
                break;
            case RegionLabel::S2Outer:
                boxes.push_back({Vec(4.0 - s, -1.0), Vec(4.0 + s, -s), -1});
                boxes.push_back({Vec(4.0 - s, s), Vec(4.0 + s, 1.0), -1});
                break;
            default:
                fail(ErrorKind::Parameter, "cannot integrate over the outside region");
        }
        return boxes;
    }
    switch (region) {
        case RegionLabel::S1Inner:
            boxes.push_back({Vec(-1.0, -s, -s), Vec(1.0, s, s), 1});
            break;
        case RegionLabel::S1Outer:
            boxes.push_back({Vec(-1.0, -1.0, -s), Vec(1.0, -s, s), -1});
            boxes.push_back({Vec(-1.0, s, -s), Vec(1.0, 1.0, s), -1});
            break;
        case RegionLabel::S2Inner:
            boxes.push_back({Vec(-1.0, 4.0 - s, -s), Vec(1.0, 4.0 + s, s), 2});
            break;
        case RegionLabel::S2Outer:
            boxes.push_back({Vec(-1.0, 4.0 - s, -1.0), Vec(1.0, 4.0 + s, -s), -1});
            boxes.push_back({Vec(-1.0, 4.0 - s, s), Vec(1.0, 4.0 + s, 1.0), -1});
            break;
        default:
            fail(ErrorKind::Parameter, "cannot integrate over the outside region");
    }
    return boxes;
}

std::vector<Rule1D> uniform_axis_rules(double lo, double hi, int cells, int order) {
    std::vector<Rule1D> rules;
    for (int i = 0; i < cells; ++i) {
        const double a = lo + (hi - lo) * i / cells;
        const double b = lo + (hi - lo) * (i + 1) / cells;
        rules.push_back(gl_rule(a, b, order));
    }
    return rules;
}

// One slab: a rule on the primary axis crossed with fixed rules on the
// remaining axes. dim-agnostic for d in {1,2,3}.
struct Slab {
    const Rule1D* primary = nullptr;
    int primary_axis = 0;
    const Rule1D* other1 = nullptr;
    int axis1 = 0;
    const Rule1D* other2 = nullptr;
    int axis2 = 0;
};

double eval_slab(const std::function<double(const Vec&)>& f, const Slab& t, int dim) {
    double sum = 0.0;
    Vec x = Vec::zero(dim);
    const std::size_t n0 = t.primary->x.size();
    const std::size_t n1 = t.other1 ? t.other1->x.size() : 1;
    const std::size_t n2 = t.other2 ? t.other2->x.size() : 1;
    for (std::size_t i = 0; i < n0; ++i) {
        x[t.primary_axis] = t.primary->x[i];
        const double wi = t.primary->w[i];
        double sj = 0.0;
        for (std::size_t j = 0; j < n1; ++j) {
            double wj = 1.0;
            if (t.other1) {
                x[t.axis1] = t.other1->x[j];
                wj = t.other1->w[j];
            }
            double sk = 0.0;
            for (std::size_t k = 0; k < n2; ++k) {
                double wk = 1.0;
                if (t.other2) {
                    x[t.axis2] = t.other2->x[k];
                    wk = t.other2->w[k];
                }
                sk += wk * f(x);
            }
            sj += wj * sk;
        }
        sum += wi * sj;
    }
    return sum;
}

// Sum slab contributions; deterministic reduction in index order.
double sum_slabs(const std::function<double(const Vec&)>& f, const std::vector<Slab>& slabs, int dim,
                 par::Exec exec) {
    std::vector<double> partial(slabs.size(), 0.0);
    par::for_each_index(slabs.size(), exec, [&](std::size_t i) { partial[i] = eval_slab(f, slabs[i], dim); });
    double sum = 0.0;
    for (double v : partial) sum += v;
    return sum;
}

struct BoxIntegral {
    double value = 0.0;
    double error = 0.0;
    long cells = 0;
    bool divergent = false;
};

// Integral over a box without grading: fixed tensor mesh, error estimated by
// comparing 4 against 6 cells on each axis.
BoxIntegral integrate_smooth_box(const std::function<double(const Vec&)>& f, const BoxSpec& box, int dim,
                                 const QuadratureSpec& spec, par::Exec exec) {
    BoxIntegral out;
    auto run = [&](int ncells) {
        std::vector<std::vector<Rule1D>> axes;
        for (int a = 0; a < dim; ++a) axes.push_back(uniform_axis_rules(box.lo[a], box.hi[a], ncells, spec.gauss_order));
        std::vector<Slab> slabs;
        const std::size_t m1 = dim > 1 ? axes[1].size() : 1;
        const std::size_t m2 = dim > 2 ? axes[2].size() : 1;
        for (std::size_t i = 0; i < axes[0].size(); ++i)
            for (std::size_t j = 0; j < m1; ++j)
                for (std::size_t k = 0; k < m2; ++k) {
                    Slab t;
                    t.primary = &axes[0][i];
                    t.primary_axis = 0;
                    if (dim > 1) {
                        t.other1 = &axes[1][j];
                        t.axis1 = 1;
                    }
                    if (dim > 2) {
                        t.other2 = &axes[2][k];
                        t.axis2 = 2;
                    }
                    slabs.push_back(t);
                }
        out.cells += static_cast<long>(slabs.size());
        return sum_slabs(f, slabs, dim, exec);
    };
    const double coarse = run(4);
    const double fine = run(6);
    out.value = fine;
    out.error = std::abs(fine - coarse);
    out.divergent = !std::isfinite(fine);
    return out;
}

// Integral over a box graded toward coordinate 0 on one axis, with level
// refinement, convergence/divergence detection, and tanh-sinh innermost cells.
BoxIntegral integrate_graded_box(const std::function<double(const Vec&)>& f, const BoxSpec& box, int dim,
                                 const QuadratureSpec& spec, par::Exec exec) {
    const int g = box.graded_axis;
    BoxIntegral out;

    // fixed rules on the smooth axes
    std::vector<std::vector<Rule1D>> smooth;
    std::vector<int> smooth_axis;
    for (int a = 0; a < dim; ++a) {
        if (a == g) continue;
        smooth.push_back(uniform_axis_rules(box.lo[a], box.hi[a], 4, spec.gauss_order));
        smooth_axis.push_back(a);
    }

    const double r = spec.grading_ratio;
    const double wl = -box.lo[g], wr = box.hi[g];  // side widths (singularity at 0)

    auto shell_cells_at = [&](int k) {  // the two geometric shells added at level k
        std::vector<Interval> cells;
        if (wl > 0.0) cells.push_back({-wl * std::pow(r, k - 1), -wl * std::pow(r, k), -1});
        if (wr > 0.0) cells.push_back({wr * std::pow(r, k), wr * std::pow(r, k - 1), -1});
        return cells;
    };
    auto ts_cells_at = [&](int k) {  // innermost cells at level k
        std::vector<Interval> cells;
        if (wl > 0.0) cells.push_back({-wl * std::pow(r, k), 0.0, 1});
        if (wr > 0.0) cells.push_back({0.0, wr * std::pow(r, k), 0});
        return cells;
    };
    auto chunk_value = [&](const std::vector<Interval>& cells) {
        std::vector<Rule1D> grules;
        grules.reserve(cells.size());
        for (const auto& iv : cells) grules.push_back(make_rule(iv, spec.gauss_order));
        std::vector<Slab> slabs;
        const std::size_t m1 = !smooth.empty() ? smooth[0].size() : 1;
        const std::size_t m2 = smooth.size() > 1 ? smooth[1].size() : 1;
        for (std::size_t i = 0; i < grules.size(); ++i)
            for (std::size_t j = 0; j < m1; ++j)
                for (std::size_t k = 0; k < m2; ++k) {
                    Slab t;
                    t.primary = &grules[i];
                    t.primary_axis = g;
                    if (!smooth.empty()) {
                        t.other1 = &smooth[0][j];
                        t.axis1 = smooth_axis[0];
                    }
                    if (smooth.size() > 1) {
                        t.other2 = &smooth[1][k];
                        t.axis2 = smooth_axis[1];
                    }
                    slabs.push_back(t);
                }
        out.cells += static_cast<long>(slabs.size());
        return sum_slabs(f, slabs, dim, exec);
    };

    const int l_start = std::min(4, std::max(1, spec.grading_levels));
    const int l_target = std::max(spec.grading_levels, l_start);
    const int l_cap = std::max(l_target, spec.refinement_cap);

    double shells_sum = 0.0;
    for (int k = 1; k <= l_start; ++k) shells_sum += chunk_value(shell_cells_at(k));
    double ts = chunk_value(ts_cells_at(l_start));
    double value = shells_sum + ts;

    std::vector<double> corrections;
    int consecutive_small = 0;
    bool divergent = !std::isfinite(value);
    double last_err = std::abs(value);

    for (int L = l_start + 1; L <= l_cap && !divergent; ++L) {
        shells_sum += chunk_value(shell_cells_at(L));
        const double ts_new = chunk_value(ts_cells_at(L));
        const double value_new = shells_sum + ts_new;
        const double corr = value_new - value;
        corrections.push_back(corr);
        value = value_new;
        ts = ts_new;
        if (!std::isfinite(value)) {
            divergent = true;
            break;
        }
        const double scale = std::max(std::abs(value), 1e-300);
        last_err = std::abs(corr);
        if (std::abs(corr) <= 1e-14 * scale) {
            if (++consecutive_small >= 2 && L >= l_start + 3) break;
        } else {
            consecutive_small = 0;
        }
        // divergence: a window of non-decaying, non-negligible corrections
        if (corrections.size() >= 5) {
            bool growing = true;
            const std::size_t n = corrections.size();
            for (std::size_t i = n - 4; i < n; ++i) {
                if (!(std::abs(corrections[i]) > 1e-11 * scale &&
                      std::abs(corrections[i]) >= 0.999 * std::abs(corrections[i - 1]))) {
                    growing = false;
                    break;
                }
            }
            if (growing) {
                divergent = true;
                break;
            }
        }
        if (L >= l_target && consecutive_small >= 1) break;
    }

    out.value = value;
    out.error = last_err;
    out.divergent = divergent;
    return out;
}

}  // namespace

double integrate_interval(const std::function<double(double)>& f, const Interval& iv, int gauss_order) {
    Rule1D rule = make_rule(iv, gauss_order);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) sum += rule.w[i] * f(rule.x[i]);
    return sum;
}

IntegralResult integrate_1d_singular(const std::function<double(double)>& f, double a, double b,
                                     double singular_at, const QuadratureSpec& spec) {
    BoxSpec box;
    box.lo = Vec(a, 0.0);
    box.hi = Vec(b, 0.0);
    box.lo.d = 1;
    box.hi.d = 1;
    box.graded_axis = 0;
    // shift so the singular point sits at coordinate 0
    auto g = [&](const Vec& x) { return f(x[0] + singular_at); };
    BoxSpec shifted = box;
    shifted.lo[0] = a - singular_at;
    shifted.hi[0] = b - singular_at;
    BoxIntegral r = integrate_graded_box(g, shifted, 1, spec, par::Exec::Serial);
    IntegralResult out;
    out.value = r.value;
    out.error_estimate = r.error;
    out.cells = r.cells;
    out.divergent = r.divergent;
    return out;
}

IntegralResult integrate_region(const std::function<double(const Vec&)>& f, RegionLabel region,
                                const StripeDomain& dom, const QuadratureSpec& spec, par::Exec exec) {
    if (spec.gauss_order < 2) fail(ErrorKind::Parameter, "gauss_order must be at least 2");
    IntegralResult out;
    for (const BoxSpec& box : region_boxes(region, dom)) {
        BoxIntegral bi = box.graded_axis >= 0 ? integrate_graded_box(f, box, dom.dim, spec, exec)
                                              : integrate_smooth_box(f, box, dom.dim, spec, exec);
        out.value += bi.value;
        out.error_estimate += bi.error;
        out.cells += bi.cells;
        out.divergent = out.divergent || bi.divergent;
    }
    return out;
}

int region_index(RegionLabel r) {
    switch (r) {
        case RegionLabel::S1Inner: return 0;
        case RegionLabel::S1Outer: return 1;
        case RegionLabel::S2Inner: return 2;
        case RegionLabel::S2Outer: return 3;
        default: return -1;
    }
}

EnergyBreakdown integrate_energy(const DeformationFamily& family, const StripeDomain& dom,
                                 const MaterialParams& mp, const QuadratureSpec& spec, par::Exec exec) {
    const double wi = energy_at_identity(mp);
    auto f = [&](const Vec& x) {
        EvalResult e = evaluate(family, x, dom);
        if (!e.grad_defined) return kInf;
        return energy_density(e.grad, mp) - wi;
    };
    EnergyBreakdown out;
    const RegionLabel regions[4] = {RegionLabel::S1Inner, RegionLabel::S1Outer, RegionLabel::S2Inner,
                                    RegionLabel::S2Outer};
    for (int i = 0; i < 4; ++i) {
        out.region[i] = integrate_region(f, regions[i], dom, spec, exec);
        out.total.value += out.region[i].value;
        out.total.error_estimate += out.region[i].error_estimate;
        out.total.cells += out.region[i].cells;
        out.total.divergent = out.total.divergent || out.region[i].divergent;
    }
    return out;
}

}  // namespace lavlab
