#include "lavlab/injectivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lavlab/errors.hpp"

namespace lavlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* verdict_name(CNVerdict v) {
    switch (v) {
        case CNVerdict::Satisfied: return "satisfied";
        case CNVerdict::Violated: return "violated";
        case CNVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

// A C1 piece of the deformation: an absolute-coordinate box, with one axis
// optionally banded geometrically toward coordinate 0 (pinch/kink axis).
struct Piece {
    Vec lo, hi;
    int var_axis = -1;
    bool toward_zero = false;  // true when the box touches 0 on var_axis
};

std::vector<Piece> family_pieces(const StripeDomain& dom) {
    const double s = dom.s;
    std::vector<Piece> pieces;
    auto add_strip = [&](int strip, int var_axis) {
        Vec lo, hi;
        component_box(dom, strip, lo, hi);
        const double cuts[5] = {-1.0, -s, 0.0, s, 1.0};
        for (int i = 0; i < 4; ++i) {
            Piece p;
            p.lo = lo;
            p.hi = hi;
            p.lo[var_axis] = cuts[i];
            p.hi[var_axis] = cuts[i + 1];
            p.var_axis = var_axis;
            p.toward_zero = cuts[i] == 0.0 || cuts[i + 1] == 0.0;
            pieces.push_back(p);
        }
    };
    if (dom.dim == 2) {
        add_strip(1, 0);
        add_strip(2, 1);
    } else {
        add_strip(1, 1);
        add_strip(2, 2);
    }
    return pieces;
}

struct RasterGrid {
    int d = 2;
    double h = 0.0;
    long lo[3] = {0, 0, 0};
    long n[3] = {1, 1, 1};
    std::vector<std::uint8_t> covered, upper, corner;

    long voxel_count() const {
        long c = 1;
        for (int a = 0; a < d; ++a) c *= n[a];
        return c;
    }
    long corner_count() const {
        long c = 1;
        for (int a = 0; a < d; ++a) c *= n[a] + 1;
        return c;
    }
    long voxel_index(const long* ix) const {
        long idx = 0;
        for (int a = 0; a < d; ++a) idx = idx * n[a] + (ix[a] - lo[a]);
        return idx;
    }
    long corner_index(const long* ix) const {
        long idx = 0;
        for (int a = 0; a < d; ++a) idx = idx * (n[a] + 1) + (ix[a] - lo[a]);
        return idx;
    }
};

struct SubcellJob {
    Vec lo, hi;  // parameter box
};

// Builds the subcell list of one band: uniform subdivision sized so the image
// step per axis is about h/2, using probed gradient column norms.
void band_subcells(const DeformationFamily& family, const StripeDomain& dom, const Piece& band,
                   double h, std::vector<SubcellJob>& out) {
    const int d = dom.dim;
    double col_norm[3] = {0.0, 0.0, 0.0};
    const int np = 3;
    Vec x = Vec::zero(d);
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j)
            for (int k = 0; k < (d == 3 ? np : 1); ++k) {
                const double f[3] = {(i + 0.5) / np, (j + 0.5) / np, (k + 0.5) / np};
                for (int a = 0; a < d; ++a) x[a] = band.lo[a] + (band.hi[a] - band.lo[a]) * f[a];
                EvalResult e = evaluate(family, x, dom);
                if (!e.grad_defined) continue;
                for (int a = 0; a < d; ++a) {
                    double cn = 0.0;
                    for (int r = 0; r < d; ++r) cn += e.grad(r, a) * e.grad(r, a);
                    col_norm[a] = std::max(col_norm[a], std::sqrt(cn));
                }
            }
    long cnt[3] = {1, 1, 1};
    long total = 1;
    for (int a = 0; a < d; ++a) {
        const double len = band.hi[a] - band.lo[a];
        cnt[a] = std::max<long>(1, static_cast<long>(std::ceil(len * std::max(col_norm[a], 1e-9) / (0.5 * h))));
        cnt[a] = std::min<long>(cnt[a], 4096);
        total *= cnt[a];
    }
    if (total > (1L << 22)) {
        // coarsen proportionally; upper bounds stay sound via defect inflation
        const double scale = std::pow(static_cast<double>(total) / (1L << 22), 1.0 / d);
        for (int a = 0; a < d; ++a) cnt[a] = std::max<long>(1, static_cast<long>(cnt[a] / scale));
    }
    long idx[3] = {0, 0, 0};
    for (idx[0] = 0; idx[0] < cnt[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < cnt[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < (d == 3 ? cnt[2] : 1); ++idx[2]) {
                SubcellJob job;
                job.lo = Vec::zero(d);
                job.hi = Vec::zero(d);
                for (int a = 0; a < d; ++a) {
                    const double len = band.hi[a] - band.lo[a];
                    job.lo[a] = band.lo[a] + len * idx[a] / cnt[a];
                    job.hi[a] = band.lo[a] + len * (idx[a] + 1) / cnt[a];
                }
                out.push_back(job);
            }
}

std::vector<SubcellJob> raster_jobs(const DeformationFamily& family, const StripeDomain& dom, double h) {
    std::vector<SubcellJob> jobs;
    for (const Piece& piece : family_pieces(dom)) {
        if (!piece.toward_zero) {
            band_subcells(family, dom, piece, h, jobs);
            continue;
        }
        // geometric bands toward 0 on the variable axis
        const int va = piece.var_axis;
        const bool positive = piece.hi[va] > 0.0;
        const double w = positive ? piece.hi[va] : -piece.lo[va];
        const int depth = std::max(8, static_cast<int>(std::ceil(2.0 * std::log2(std::max(2.0, w / h)))));
        double outer = w;
        for (int j = 0; j < depth; ++j) {
            const double inner = (j + 1 == depth) ? 0.0 : w * std::pow(0.5, j + 1);
            Piece band = piece;
            if (positive) {
                band.lo[va] = inner;
                band.hi[va] = outer;
            } else {
                band.lo[va] = -outer;
                band.hi[va] = -inner;
            }
            band_subcells(family, dom, band, h, jobs);
            outer = inner;
            if (outer == 0.0) break;
        }
    }
    return jobs;
}

struct SubcellMarks {
    // per-chunk mask deltas, merged in order for determinism
    std::vector<std::uint8_t> covered, upper, corner;
};

void process_subcell(const DeformationFamily& family, const StripeDomain& dom, const SubcellJob& job,
                     const RasterGrid& grid, std::uint8_t* covered, std::uint8_t* upper,
                     std::uint8_t* corner_mask) {
    const int d = dom.dim;
    const double h = grid.h;
    const int ncorners = 1 << d;
    Vec corner_img[8];
    Vec center = Vec::zero(d);
    for (int a = 0; a < d; ++a) center[a] = 0.5 * (job.lo[a] + job.hi[a]);
    EvalResult ec = evaluate(family, center, dom);

    Vec bb_lo = Vec::zero(d), bb_hi = Vec::zero(d);
    for (int c = 0; c < ncorners; ++c) {
        Vec x = Vec::zero(d);
        for (int a = 0; a < d; ++a) x[a] = (c >> a) & 1 ? job.hi[a] : job.lo[a];
        corner_img[c] = evaluate(family, x, dom).y;
        for (int a = 0; a < d; ++a) {
            if (c == 0) {
                bb_lo[a] = corner_img[c][a];
                bb_hi[a] = corner_img[c][a];
            } else {
                bb_lo[a] = std::min(bb_lo[a], corner_img[c][a]);
                bb_hi[a] = std::max(bb_hi[a], corner_img[c][a]);
            }
        }
    }

    // affine model and its defect on the corners
    double defect = 0.0;
    bool healthy = ec.grad_defined && std::isfinite(ec.det) && std::abs(ec.det) > 1e-13;
    Mat jinv(d);
    double jinv_norm = 0.0;
    if (healthy) {
        jinv = inverse(ec.grad);
        jinv_norm = frob_norm(jinv);
        healthy = all_finite(jinv);
    }
    if (healthy) {
        for (int c = 0; c < ncorners; ++c) {
            Vec x = Vec::zero(d);
            for (int a = 0; a < d; ++a) x[a] = (c >> a) & 1 ? job.hi[a] : job.lo[a];
            Vec pred = ec.y + matvec(ec.grad, x - center);
            defect = std::max(defect, norm(corner_img[c] - pred));
        }
        if (!(defect < 0.5 * h)) healthy = false;
    }

    const double sqrt_d = d == 2 ? std::sqrt(2.0) : std::sqrt(3.0);
    const double infl = 2.0 * defect + 0.5 * h * sqrt_d + 1e-12;

    long ix_lo[3], ix_hi[3];
    for (int a = 0; a < d; ++a) {
        ix_lo[a] = std::max(grid.lo[a], static_cast<long>(std::floor((bb_lo[a] - infl) / h)));
        ix_hi[a] = std::min(grid.lo[a] + grid.n[a] - 1, static_cast<long>(std::floor((bb_hi[a] + infl) / h)));
    }

    double half_w[3];
    for (int a = 0; a < d; ++a) half_w[a] = 0.5 * (job.hi[a] - job.lo[a]);
    const double m_in = jinv_norm * defect;

    auto in_affine = [&](const Vec& x, double margin) {
        Vec u = matvec(jinv, x - ec.y);
        for (int a = 0; a < d; ++a)
            if (std::abs(u[a]) > half_w[a] - margin) return false;
        return true;
    };

    long ix[3] = {0, 0, 0};
    for (ix[0] = ix_lo[0]; ix[0] <= ix_hi[0]; ++ix[0])
        for (ix[1] = d > 1 ? ix_lo[1] : 0; ix[1] <= (d > 1 ? ix_hi[1] : 0); ++ix[1])
            for (ix[2] = d > 2 ? ix_lo[2] : 0; ix[2] <= (d > 2 ? ix_hi[2] : 0); ++ix[2]) {
                Vec xc = Vec::zero(d);
                bool in_bbox = true;
                for (int a = 0; a < d; ++a) {
                    xc[a] = (ix[a] + 0.5) * h;
                    if (xc[a] < bb_lo[a] - infl || xc[a] > bb_hi[a] + infl) in_bbox = false;
                }
                if (!in_bbox) continue;
                upper[grid.voxel_index(ix)] = 1;
                if (healthy && in_affine(xc, 0.0)) covered[grid.voxel_index(ix)] = 1;
            }

    if (healthy) {
        // corner lattice coverage with inward defect margin; the tiny outward
        // slop absorbs roundoff ties on internal subcell boundaries
        const double slop = 1e-9 * h;
        for (int a = 0; a < d; ++a) {
            ix_lo[a] = std::max(grid.lo[a], static_cast<long>(std::floor(bb_lo[a] / h)));
            ix_hi[a] = std::min(grid.lo[a] + grid.n[a], static_cast<long>(std::ceil(bb_hi[a] / h)));
        }
        for (ix[0] = ix_lo[0]; ix[0] <= ix_hi[0]; ++ix[0])
            for (ix[1] = d > 1 ? ix_lo[1] : 0; ix[1] <= (d > 1 ? ix_hi[1] : 0); ++ix[1])
                for (ix[2] = d > 2 ? ix_lo[2] : 0; ix[2] <= (d > 2 ? ix_hi[2] : 0); ++ix[2]) {
                    Vec xc = Vec::zero(d);
                    for (int a = 0; a < d; ++a) xc[a] = ix[a] * h;
                    if (in_affine(xc, m_in - slop)) corner_mask[grid.corner_index(ix)] = 1;
                }
    }
}

struct RasterResult {
    double estimate = 0.0;  // center-rule point estimate of |y(Omega)|
    double lower = 0.0;
    double upper = 0.0;
    bool degenerate = false;
};

RasterResult rasterize_image(const DeformationFamily& family, const StripeDomain& dom, double h,
                             par::Exec exec) {
    const int d = dom.dim;
    RasterGrid grid;
    grid.d = d;
    grid.h = h;

    // global bounds from a coarse probe of all piece corners and centers
    double lo[3], hi[3];
    bool first = true;
    for (const Piece& piece : family_pieces(dom)) {
        const int np = 5;
        Vec x = Vec::zero(d);
        for (int i = 0; i <= np; ++i)
            for (int j = 0; j <= np; ++j)
                for (int k = 0; k <= (d == 3 ? np : 0); ++k) {
                    const double f[3] = {static_cast<double>(i) / np, static_cast<double>(j) / np,
                                         static_cast<double>(k) / np};
                    for (int a = 0; a < d; ++a) x[a] = piece.lo[a] + (piece.hi[a] - piece.lo[a]) * f[a];
                    Vec y = evaluate(family, x, dom).y;
                    for (int a = 0; a < d; ++a) {
                        if (first) {
                            lo[a] = hi[a] = y[a];
                        } else {
                            lo[a] = std::min(lo[a], y[a]);
                            hi[a] = std::max(hi[a], y[a]);
                        }
                    }
                    first = false;
                }
    }
    long total = 1;
    for (int a = 0; a < d; ++a) {
        grid.lo[a] = static_cast<long>(std::floor(lo[a] / h)) - 4;
        grid.n[a] = static_cast<long>(std::floor(hi[a] / h)) + 5 - grid.lo[a];
        total *= grid.n[a];
    }
    if (total > (1L << 26)) fail(ErrorKind::Parameter, "cn_check: raster resolution h is too fine");

    grid.covered.assign(static_cast<std::size_t>(grid.voxel_count()), 0);
    grid.upper.assign(static_cast<std::size_t>(grid.voxel_count()), 0);
    grid.corner.assign(static_cast<std::size_t>(grid.corner_count()), 0);

    std::vector<SubcellJob> jobs = raster_jobs(family, dom, h);

    const int nchunks = exec == par::Exec::Parallel ? 8 : 1;
    if (nchunks == 1) {
        for (const auto& job : jobs)
            process_subcell(family, dom, job, grid, grid.covered.data(), grid.upper.data(), grid.corner.data());
    } else {
        std::vector<SubcellMarks> marks(static_cast<std::size_t>(nchunks));
        par::for_each_index(static_cast<std::size_t>(nchunks), exec, [&](std::size_t c) {
            SubcellMarks& m = marks[c];
            m.covered.assign(grid.covered.size(), 0);
            m.upper.assign(grid.upper.size(), 0);
            m.corner.assign(grid.corner.size(), 0);
            for (std::size_t i = c; i < jobs.size(); i += static_cast<std::size_t>(nchunks))
                process_subcell(family, dom, jobs[i], grid, m.covered.data(), m.upper.data(), m.corner.data());
        });
        for (const auto& m : marks) {
            for (std::size_t i = 0; i < grid.covered.size(); ++i) grid.covered[i] |= m.covered[i];
            for (std::size_t i = 0; i < grid.upper.size(); ++i) grid.upper[i] |= m.upper[i];
            for (std::size_t i = 0; i < grid.corner.size(); ++i) grid.corner[i] |= m.corner[i];
        }
    }

    // counts; lower requires the center and all cell corners covered
    long n_cov = 0, n_up = 0, n_low = 0;
    long ix[3] = {0, 0, 0};
    const long n0 = grid.n[0], n1 = d > 1 ? grid.n[1] : 1, n2 = d > 2 ? grid.n[2] : 1;
    for (long i = 0; i < n0; ++i)
        for (long j = 0; j < n1; ++j)
            for (long k = 0; k < n2; ++k) {
                ix[0] = grid.lo[0] + i;
                ix[1] = d > 1 ? grid.lo[1] + j : 0;
                ix[2] = d > 2 ? grid.lo[2] + k : 0;
                const long vi = grid.voxel_index(ix);
                if (grid.upper[static_cast<std::size_t>(vi)]) ++n_up;
                if (!grid.covered[static_cast<std::size_t>(vi)]) continue;
                ++n_cov;
                bool full = true;
                for (int c = 0; c < (1 << d) && full; ++c) {
                    long cx[3] = {ix[0] + ((c >> 0) & 1), ix[1] + (d > 1 ? (c >> 1) & 1 : 0),
                                  ix[2] + (d > 2 ? (c >> 2) & 1 : 0)};
                    if (!grid.corner[static_cast<std::size_t>(grid.corner_index(cx))]) full = false;
                }
                if (full) ++n_low;
            }

    const double cell = std::pow(h, d);
    RasterResult out;
    out.estimate = cell * static_cast<double>(n_cov);
    out.lower = cell * static_cast<double>(n_low);
    out.upper = cell * static_cast<double>(n_up);
    out.degenerate = n_cov < (1 << d);
    return out;
}

}  // namespace

CNReport cn_check(const DeformationFamily& family, const StripeDomain& dom, const MaterialParams& mp,
                  double h, par::Exec exec) {
    (void)mp;
    if (!(h > 0.0)) fail(ErrorKind::Parameter, "cn_check: resolution h must be positive");
    QuadratureSpec spec;
    auto det_f = [&](const Vec& x) { return evaluate(family, x, dom).det; };
    double bulk = 0.0, bulk_err = 0.0;
    const RegionLabel regions[4] = {RegionLabel::S1Inner, RegionLabel::S1Outer, RegionLabel::S2Inner,
                                    RegionLabel::S2Outer};
    for (RegionLabel r : regions) {
        IntegralResult ir = integrate_region(det_f, r, dom, spec, exec);
        bulk += ir.value;
        bulk_err += ir.error_estimate;
    }

    RasterResult raster = rasterize_image(family, dom, h, exec);

    CNReport rep;
    rep.bulk_integral = bulk;
    rep.image_measure_lower = raster.lower;
    rep.image_measure_upper = raster.upper;
    rep.image_measure_estimate = raster.estimate;
    rep.resolution = h;
    const double margin = bulk_err + std::pow(h, dom.dim);
    if (raster.degenerate || raster.upper < raster.lower)
        rep.verdict = CNVerdict::Inconclusive;
    else if (bulk > raster.upper + margin)
        rep.verdict = CNVerdict::Violated;
    else
        rep.verdict = CNVerdict::Satisfied;
    return rep;
}

DistortionReport distortion_integral(const DeformationFamily& family, const StripeDomain& dom, double eta,
                                     const QuadratureSpec& spec) {
    if (!(eta > 0.0)) fail(ErrorKind::Parameter, "distortion exponent eta must be positive");
    const int d = dom.dim;
    auto f = [&](const Vec& x) {
        EvalResult e = evaluate(family, x, dom);
        if (!e.grad_defined || !(e.det > 0.0)) return kInf;
        const double k = std::pow(frob_norm_sq(e.grad), 0.5 * d) / e.det;
        return std::pow(k, eta);
    };
    DistortionReport rep;
    rep.eta = eta;
    const RegionLabel regions[4] = {RegionLabel::S1Inner, RegionLabel::S1Outer, RegionLabel::S2Inner,
                                    RegionLabel::S2Outer};
    bool divergent = false;
    for (int levels = 6; levels <= spec.grading_levels; levels += 8) {
        QuadratureSpec capped = spec;
        capped.grading_levels = levels;
        capped.refinement_cap = levels;
        double total = 0.0;
        bool level_divergent = false;
        for (RegionLabel r : regions) {
            IntegralResult ir = integrate_region(f, r, dom, capped, par::Exec::Parallel);
            total += ir.value;
            level_divergent = level_divergent || ir.divergent;
        }
        rep.integral_estimates.push_back(total);
        divergent = level_divergent;  // judged at the deepest level
    }
    rep.flag = divergent ? DistortionFlag::Divergent : DistortionFlag::Finite;
    return rep;
}

double distortion_threshold(const DeformationFamily& family, const StripeDomain& dom, double eta_lo,
                            double eta_hi, const QuadratureSpec& spec, int iters) {
    auto flag_at = [&](double eta) {
        return distortion_integral(family, dom, eta, spec).flag == DistortionFlag::Divergent;
    };
    bool lo_div = flag_at(eta_lo), hi_div = flag_at(eta_hi);
    if (lo_div == hi_div)
        fail(ErrorKind::Numerical, "distortion_threshold: no transition inside the bracket");
    double lo = eta_lo, hi = eta_hi;
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (flag_at(mid) == lo_div)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double section_arclength(const DeformationFamily& family, const StripeDomain& dom, double sigma,
                         int strip, int n) {
    if (std::abs(sigma) >= dom.s) fail(ErrorKind::Parameter, "section requires |sigma| < s");
    if (n <= 0) fail(ErrorKind::Parameter, "probe count must be positive");
    const int d = dom.dim;
    QuadratureSpec spec;
    spec.grading_levels = std::max(20, std::min(60, n));

    auto speed = [&](double t) {
        Vec x = Vec::zero(d);
        int col = 0;
        if (d == 2) {
            if (strip == 1) {
                x = Vec(t, sigma);
                col = 0;
            } else {
                x = Vec(4.0 + sigma, t);
                col = 1;
            }
        } else {
            if (strip == 1) {
                x = Vec(0.0, t, sigma);
                col = 1;
            } else {
                x = Vec(0.0, sigma + 4.0, t);
                col = 2;
            }
        }
        EvalResult e = evaluate(family, x, dom);
        double sum = 0.0;
        for (int r = 0; r < d; ++r) sum += e.grad(r, col) * e.grad(r, col);
        return std::sqrt(sum);
    };
    IntegralResult ir = integrate_1d_singular(speed, -1.0, 1.0, 0.0, spec);
    return ir.value;
}

Vec miranda_g(const DeformationFamily& family, double sigma, double x1, double tau1, double tau2,
              const StripeDomain& dom) {
    if (dom.dim != 3) fail(ErrorKind::Parameter, "miranda_g is defined for 3D domains");
    if (std::abs(sigma) >= dom.s) fail(ErrorKind::Parameter, "miranda_g requires |sigma| < s");
    const Vec a(x1, tau1, sigma);
    const Vec b(0.0, sigma + 4.0, -tau2);
    return evaluate(family, a, dom).y - evaluate(family, b, dom).y;
}

std::optional<IntersectionWitness> find_self_intersection(const DeformationFamily& family,
                                                          const StripeDomain& dom, double sigma,
                                                          int grid_n, double tol, par::Exec exec) {
    if (dom.dim != 3) fail(ErrorKind::Parameter, "find_self_intersection is defined for 3D domains");
    if (grid_n < 2) fail(ErrorKind::Parameter, "grid_n must be at least 2");

    auto g_at = [&](const Vec& p) { return miranda_g(family, sigma, p[0], p[1], p[2], dom); };

    // corner values of g on the (grid_n+1)^3 lattice over [-1,1]^3
    const long m = grid_n + 1;
    std::vector<Vec> gval(static_cast<std::size_t>(m * m * m));
    par::for_each_index(static_cast<std::size_t>(m * m * m), exec, [&](std::size_t idx) {
        const long i = static_cast<long>(idx) / (m * m);
        const long j = (static_cast<long>(idx) / m) % m;
        const long k = static_cast<long>(idx) % m;
        const Vec p(-1.0 + 2.0 * i / grid_n, -1.0 + 2.0 * j / grid_n, -1.0 + 2.0 * k / grid_n);
        gval[idx] = g_at(p);
    });
    auto gv = [&](long i, long j, long k) -> const Vec& {
        return gval[static_cast<std::size_t>((i * m + j) * m + k)];
    };

    // Miranda sign certificate on a cell from its corner samples
    auto cell_certified = [&](long i, long j, long k) {
        for (int axis = 0; axis < 3; ++axis) {
            double max_lo = -kInf, min_hi = kInf;
            for (int c = 0; c < 8; ++c) {
                const long ci = i + ((c >> 0) & 1), cj = j + ((c >> 1) & 1), ck = k + ((c >> 2) & 1);
                const double v = gv(ci, cj, ck)[axis];
                const bool hi_face = (axis == 0 && ci == i + 1) || (axis == 1 && cj == j + 1) ||
                                     (axis == 2 && ck == k + 1);
                if (hi_face)
                    min_hi = std::min(min_hi, v);
                else
                    max_lo = std::max(max_lo, v);
            }
            if (!(max_lo <= 0.0 && min_hi >= 0.0)) return false;
        }
        return true;
    };

    for (long i = 0; i < grid_n; ++i)
        for (long j = 0; j < grid_n; ++j)
            for (long k = 0; k < grid_n; ++k) {
                if (!cell_certified(i, j, k)) continue;
                // bisection refinement within this cell
                Vec lo(-1.0 + 2.0 * i / grid_n, -1.0 + 2.0 * j / grid_n, -1.0 + 2.0 * k / grid_n);
                Vec hi(-1.0 + 2.0 * (i + 1) / grid_n, -1.0 + 2.0 * (j + 1) / grid_n,
                       -1.0 + 2.0 * (k + 1) / grid_n);
                for (int step = 0; step < 240; ++step) {
                    Vec c = 0.5 * (lo + hi);
                    const Vec gc = g_at(c);
                    if (norm(gc) <= tol) {
                        IntersectionWitness w;
                        w.param = c;
                        w.x_s1 = Vec(c[0], c[1], sigma);
                        w.x_s2 = Vec(0.0, sigma + 4.0, -c[2]);
                        w.image = evaluate(family, w.x_s1, dom).y;
                        w.mismatch = norm(gc);
                        return w;
                    }
                    // halve the longest axis, keep the half with the smaller center value
                    int axis = 0;
                    double len = hi[0] - lo[0];
                    for (int a = 1; a < 3; ++a)
                        if (hi[a] - lo[a] > len) {
                            len = hi[a] - lo[a];
                            axis = a;
                        }
                    Vec lo_a = lo, hi_a = hi, lo_b = lo, hi_b = hi;
                    hi_a[axis] = c[axis];
                    lo_b[axis] = c[axis];
                    Vec ca = 0.5 * (lo_a + hi_a), cb = 0.5 * (lo_b + hi_b);
                    if (norm(g_at(ca)) <= norm(g_at(cb))) {
                        lo = lo_a;
                        hi = hi_a;
                    } else {
                        lo = lo_b;
                        hi = hi_b;
                    }
                }
            }
    return std::nullopt;
}

}  // namespace lavlab
