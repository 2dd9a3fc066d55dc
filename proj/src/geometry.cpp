#include "lavlab/geometry.hpp"

#include <cmath>

#include "lavlab/errors.hpp"
#include "lavlab/rng.hpp"

namespace lavlab {

StripeDomain make_domain(int dim, double s) {
    if (dim != 2 && dim != 3) fail(ErrorKind::Parameter, "dimension must be 2 or 3");
    if (!(s > 0.0 && s < 1.0)) fail(ErrorKind::Parameter, "width parameter s must lie in (0,1)");
    StripeDomain dom;
    dom.dim = dim;
    dom.s = s;
    if (dim == 2) {
        dom.xi = Vec(4.0, 0.0);
        dom.Q = Mat(2);
        dom.Q(0, 1) = -1.0;
        dom.Q(1, 0) = 1.0;
    } else {
        dom.xi = Vec(0.0, 4.0, 0.0);
        dom.Q = Mat(3);
        dom.Q(0, 0) = 1.0;
        dom.Q(1, 2) = -1.0;
        dom.Q(2, 1) = 1.0;
    }
    return dom;
}

int pinch_axis(const StripeDomain& dom) { return dom.dim == 2 ? 0 : 1; }

Vec pull_back(const Vec& x, const StripeDomain& dom) { return matvec(transpose(dom.Q), x - dom.xi); }

Vec push_forward(const Vec& u, const StripeDomain& dom) { return dom.xi + matvec(dom.Q, u); }

namespace {

// Closure membership: classify works on closed pieces so that boundary
// (Gamma_s) points remain evaluable; the components are far apart, so the
// closures stay disjoint.
bool in_s1_chart(const Vec& u, const StripeDomain& dom) {
    if (dom.dim == 2) return std::abs(u[0]) <= 1.0 && std::abs(u[1]) <= dom.s;
    return std::abs(u[0]) <= 1.0 && std::abs(u[1]) <= 1.0 && std::abs(u[2]) <= dom.s;
}

}  // namespace

RegionLabel classify(const Vec& x, const StripeDomain& dom) {
    const int pa = pinch_axis(dom);
    if (in_s1_chart(x, dom))
        return std::abs(x[pa]) <= dom.s ? RegionLabel::S1Inner : RegionLabel::S1Outer;
    const Vec u = pull_back(x, dom);
    if (in_s1_chart(u, dom))
        return std::abs(u[pa]) <= dom.s ? RegionLabel::S2Inner : RegionLabel::S2Outer;
    return RegionLabel::Outside;
}

bool on_dirichlet_boundary(const Vec& x, const StripeDomain& dom, double tol) {
    const double s = dom.s;
    if (dom.dim == 2) {
        // {-1,1} x (-s,s)
        if (std::abs(std::abs(x[0]) - 1.0) <= tol && std::abs(x[1]) <= s + tol) return true;
        // (4-s,4+s) x {-1,1}
        if (std::abs(x[0] - 4.0) <= s + tol && std::abs(std::abs(x[1]) - 1.0) <= tol) return true;
        return false;
    }
    // [-1,1] x {-1,1} x [-s,s]
    if (std::abs(x[0]) <= 1.0 + tol && std::abs(std::abs(x[1]) - 1.0) <= tol && std::abs(x[2]) <= s + tol)
        return true;
    // [-1,1] x [4-s,4+s] x {-1,1}
    if (std::abs(x[0]) <= 1.0 + tol && std::abs(x[1] - 4.0) <= s + tol && std::abs(std::abs(x[2]) - 1.0) <= tol)
        return true;
    return false;
}

double domain_measure(const StripeDomain& dom) { return dom.dim == 2 ? 8.0 * dom.s : 16.0 * dom.s; }

std::vector<Vec> sample_points(const StripeDomain& dom, std::size_t n, std::uint64_t seed) {
    if (n == 0) fail(ErrorKind::Parameter, "sample count must be positive");
    SplitMix64 rng(seed);
    std::vector<Vec> pts;
    pts.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const int strip = rng.unit() < 0.5 ? 1 : 2;  // equal component measures
        Vec lo, hi;
        component_box(dom, strip, lo, hi);
        Vec x = Vec::zero(dom.dim);
        for (int i = 0; i < dom.dim; ++i) x[i] = rng.uniform(lo[i], hi[i]);
        pts.push_back(x);
    }
    return pts;
}

void component_box(const StripeDomain& dom, int strip, Vec& lo, Vec& hi) {
    const double s = dom.s;
    lo = Vec::zero(dom.dim);
    hi = Vec::zero(dom.dim);
    if (dom.dim == 2) {
        if (strip == 1) {
            lo = Vec(-1.0, -s);
            hi = Vec(1.0, s);
        } else {
            lo = Vec(4.0 - s, -1.0);
            hi = Vec(4.0 + s, 1.0);
        }
        return;
    }
    if (strip == 1) {
        lo = Vec(-1.0, -1.0, -s);
        hi = Vec(1.0, 1.0, s);
    } else {
        lo = Vec(-1.0, 4.0 - s, -1.0);
        hi = Vec(1.0, 4.0 + s, 1.0);
    }
}

}  // namespace lavlab
