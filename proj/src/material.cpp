#include "lavlab/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lavlab/errors.hpp"
#include "lavlab/rng.hpp"

namespace lavlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double derive_gamma(int d, double p, double q) {
    if (d != 2 && d != 3) fail(ErrorKind::Parameter, "dimension must be 2 or 3");
    if (!(p > d)) fail(ErrorKind::Parameter, "exponent p must exceed the dimension");
    if (!(q > 0)) fail(ErrorKind::Parameter, "exponent q must be positive");
    return p * std::pow(static_cast<double>(d), p / 2.0 - 1.0) / q;
}

MaterialParams make_material(int d, double p, double q) {
    MaterialParams mp;
    mp.d = d;
    mp.p = p;
    mp.q = q;
    mp.gamma = derive_gamma(d, p, q);
    return mp;
}

SingularValues singular_values(const Mat& F) {
    // one-sided Jacobi: right rotations diagonalize F^T F while the tiny
    // singular values stay accurate (no explicit squaring of F)
    const int d = F.d;
    Mat a = F;
    for (int sweep = 0; sweep < 64; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int k = 0; k < d; ++k) {
                    app += a(k, p) * a(k, p);
                    aqq += a(k, q) * a(k, q);
                    apq += a(k, p) * a(k, q);
                }
                if (std::abs(apq) <= 1e-18 * std::sqrt(app * aqq) + 1e-300) continue;
                rotated = true;
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
            }
        if (!rotated) break;
    }
    SingularValues sv;
    sv.d = d;
    for (int j = 0; j < d; ++j) {
        double nrm = 0.0;
        for (int k = 0; k < d; ++k) nrm += a(k, j) * a(k, j);
        sv.lam[static_cast<std::size_t>(j)] = std::sqrt(nrm);
    }
    std::sort(sv.lam.begin(), sv.lam.begin() + d, std::greater<double>());
    return sv;
}

double operator_norm(const Mat& F) { return singular_values(F).lam[0]; }

double energy_density(const Mat& F, const MaterialParams& mp) {
    const double dt = det(F);
    if (!(dt > 0.0)) return kInf;
    const double n2 = frob_norm_sq(F);
    return std::pow(n2, mp.p / 2.0) + mp.gamma * std::pow(dt, -mp.q);
}

double energy_density_sv(const SingularValues& sv, const MaterialParams& mp) {
    double s2 = 0.0, prod = 1.0;
    for (int i = 0; i < sv.d; ++i) {
        const double l = sv.lam[static_cast<std::size_t>(i)];
        if (l <= 0.0) return kInf;
        s2 += l * l;
        prod *= l;
    }
    return std::pow(s2, mp.p / 2.0) + mp.gamma * std::pow(prod, -mp.q);
}

double energy_at_identity(const MaterialParams& mp) {
    return std::pow(static_cast<double>(mp.d), mp.p / 2.0) + mp.gamma;
}

Mat energy_gradient(const Mat& F, const MaterialParams& mp) {
    const double dt = det(F);
    if (!(dt > 0.0)) fail(ErrorKind::SingularInput, "energy_gradient requires det F > 0");
    const double n2 = frob_norm_sq(F);
    const double a = mp.p * std::pow(n2, mp.p / 2.0 - 1.0);
    const double b = mp.gamma * mp.q * std::pow(dt, -mp.q);
    // F^{-T} = cof(F) / det(F)
    Mat cof = cofactor(F);
    Mat g(F.d);
    for (int i = 0; i < F.d; ++i)
        for (int j = 0; j < F.d; ++j) g(i, j) = a * F(i, j) - b * cof(i, j) / dt;
    return g;
}

Mat sv_hessian(const SingularValues& sv, const MaterialParams& mp) {
    const int d = sv.d;
    double s2 = 0.0, prod = 1.0;
    for (int i = 0; i < d; ++i) {
        const double l = sv.lam[static_cast<std::size_t>(i)];
        if (l <= 0.0) fail(ErrorKind::SingularInput, "sv_hessian requires positive singular values");
        s2 += l * l;
        prod *= l;
    }
    const double p = mp.p, q = mp.q;
    const double spm4 = std::pow(s2, (p - 4.0) / 2.0);
    const double pmq = std::pow(prod, -q);
    Mat h(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double li = sv.lam[static_cast<std::size_t>(i)], lj = sv.lam[static_cast<std::size_t>(j)];
            const double dij = (i == j) ? 1.0 : 0.0;
            h(i, j) = (p * (p - 2.0) * li * lj + p * dij * s2) * spm4 +
                      mp.gamma * q * (q + dij) * pmq / (li * lj);
        }
    return h;
}

namespace {

// Objective lambda_1^{-2} P^{-q} on the unit sphere within (0,1]^d.
// Parametrized by angles in (0, pi/2); symmetric in the choice of j.
double mu_objective_2d(double theta, double q) {
    const double l1 = std::cos(theta), l2 = std::sin(theta);
    return std::pow(l1, -2.0) * std::pow(l1 * l2, -q);
}

double mu_objective_3d(double a, double b, double q) {
    const double l1 = std::cos(a);
    const double l2 = std::sin(a) * std::cos(b);
    const double l3 = std::sin(a) * std::sin(b);
    return std::pow(l1, -2.0) * std::pow(l1 * l2 * l3, -q);
}

template <class F>
double golden_section(F&& f, double lo, double hi, int iters) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iters; ++k) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return std::min(f(0.5 * (a + b)), std::min(fc, fd));
}

double compute_mu(int d, double q) {
    const double pi2 = std::acos(0.0);  // pi/2
    if (d == 2) {
        auto f = [&](double t) { return mu_objective_2d(t, q); };
        const int n = 4001;
        double best = kInf, best_t = 0.25 * pi2;
        for (int i = 1; i < n; ++i) {
            const double t = pi2 * i / n;
            const double v = f(t);
            if (v < best) {
                best = v;
                best_t = t;
            }
        }
        const double w = pi2 / n;
        return golden_section(f, std::max(1e-12, best_t - 2 * w), std::min(pi2 - 1e-12, best_t + 2 * w), 120);
    }
    auto f = [&](double a, double b) { return mu_objective_3d(a, b, q); };
    const int n = 600;
    double best = kInf, ba = 0, bb = 0;
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
            const double a = pi2 * i / n, b = pi2 * j / n;
            const double v = f(a, b);
            if (v < best) {
                best = v;
                ba = a;
                bb = b;
            }
        }
    // coordinate-descent refinement
    double wa = pi2 / n, wb = pi2 / n;
    for (int round = 0; round < 60; ++round) {
        const double a0 = ba;
        ba = [&] {
            double lo = std::max(1e-12, ba - 2 * wa), hi = std::min(pi2 - 1e-12, ba + 2 * wa);
            double best_a = ba, best_v = f(ba, bb);
            for (int i = 0; i <= 64; ++i) {
                const double a = lo + (hi - lo) * i / 64.0;
                const double v = f(a, bb);
                if (v < best_v) {
                    best_v = v;
                    best_a = a;
                }
            }
            return best_a;
        }();
        bb = [&] {
            double lo = std::max(1e-12, bb - 2 * wb), hi = std::min(pi2 - 1e-12, bb + 2 * wb);
            double best_b = bb, best_v = f(ba, bb);
            for (int i = 0; i <= 64; ++i) {
                const double b = lo + (hi - lo) * i / 64.0;
                const double v = f(ba, b);
                if (v < best_v) {
                    best_v = v;
                    best_b = b;
                }
            }
            return best_b;
        }();
        wa *= 0.25;
        wb *= 0.25;
        if (std::abs(ba - a0) < 1e-14 && wa < 1e-13) break;
    }
    return f(ba, bb);
}

}  // namespace

LowerBoundConstants lower_bound_constants(const MaterialParams& mp) {
    LowerBoundConstants out;
    out.mu = compute_mu(mp.d, mp.q);
    const double floor_mu = std::pow(static_cast<double>(mp.d), mp.q * mp.d / 2.0);
    if (!(out.mu >= floor_mu * (1.0 - 1e-9)))
        fail(ErrorKind::Numerical, "mu minimization fell below its analytic floor d^{qd/2}; mu=" +
                                       std::to_string(out.mu));
    out.mu = std::max(out.mu, floor_mu);

    const double p = mp.p, q = mp.q, g = mp.gamma;
    auto ratio = [&](double logS) {
        const double S = std::exp(logS);
        const double num = p * std::pow(S, p - 2.0) + g * q * out.mu * std::pow(S, -q * mp.d - 2.0);
        const double den = p * (p - 1.0) * std::pow(S, p - 2.0) + 2.0;
        return num / den;
    };
    double best = kInf, best_l = 0.0;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double l = -8.0 + 16.0 * i / n;
        const double v = ratio(l);
        if (v < best) {
            best = v;
            best_l = l;
        }
    }
    const double w = 16.0 / n;
    out.c_hat = golden_section(ratio, best_l - 2 * w, best_l + 2 * w, 160);
    if (!(out.c_hat > 0.0) || !std::isfinite(out.c_hat))
        fail(ErrorKind::Numerical, "c_hat minimization did not converge to a positive value");
    out.c = std::min(out.c_hat, 0.5);
    return out;
}

CheckResult check_lower_bound(const Mat& F, const MaterialParams& mp, const LowerBoundConstants& consts) {
    const double lhs = energy_density(F, mp) - energy_at_identity(mp);
    const double t = operator_norm(F) - 1.0;
    const double rhs = consts.c * std::pow(std::abs(t), mp.p) + consts.c * t * t;
    CheckResult r;
    r.slack = lhs - rhs;
    r.holds = r.slack >= -1e-12 * (1.0 + std::abs(lhs));
    return r;
}

CheckResult check_coercivity(const Mat& F, const MaterialParams& mp, double c, double b) {
    const double dt = det(F);
    const double w = energy_density(F, mp);
    const double sum = std::pow(frob_norm_sq(F), mp.p / 2.0) +
                       std::pow(frob_norm_sq(cofactor(F)), mp.p / (2.0 * (mp.d - 1))) +
                       std::pow(dt, mp.p / mp.d);
    CheckResult r;
    r.slack = w - (c * sum + b);
    r.holds = r.slack >= -1e-12 * (1.0 + std::abs(w));
    return r;
}

CoercivityConstants find_coercivity_constants(const MaterialParams& mp, std::uint64_t seed, int samples) {
    SplitMix64 rng(seed);
    double min_ratio = kInf;
    for (int k = 0; k < samples; ++k) {
        Mat F = random_matrix_with_det(mp.d, rng, 1e-3, 1e3, 4.0);
        const double w = energy_density(F, mp);
        const double sum = std::pow(frob_norm_sq(F), mp.p / 2.0) +
                           std::pow(frob_norm_sq(cofactor(F)), mp.p / (2.0 * (mp.d - 1))) +
                           std::pow(det(F), mp.p / mp.d);
        min_ratio = std::min(min_ratio, w / sum);
    }
    CoercivityConstants out;
    out.c = 0.9 * min_ratio;
    out.b = 0.0;
    return out;
}

RankOneProbe rank_one_convexity_probe(const Mat& F, const Vec& a, const Vec& b,
                                      const MaterialParams& mp, int steps) {
    if (steps < 3) fail(ErrorKind::Parameter, "rank_one_convexity_probe needs at least 3 steps");
    Mat ab = outer(a, b);
    auto feasible = [&](double t) { return det(F + t * ab) > 0.0; };
    if (!feasible(0.0)) fail(ErrorKind::SingularInput, "base point must have det F > 0");

    // shrink the symmetric interval until both endpoints stay in det > 0
    double half = 0.5;
    while (half > 1e-8 && (!feasible(half) || !feasible(-half))) half *= 0.5;
    RankOneProbe out;
    out.t_lo = -half;
    out.t_hi = half;
    const double dt = 2.0 * half / (steps + 1);
    auto w = [&](double t) { return energy_density(F + t * ab, mp); };
    double min_dd = kInf;
    for (int i = 1; i <= steps; ++i) {
        const double t = -half + dt * i;
        const double dd = (w(t + dt) - 2.0 * w(t) + w(t - dt)) / (dt * dt);
        min_dd = std::min(min_dd, dd);
    }
    out.min_second_difference = min_dd;
    // tolerance covers FD rounding noise, which grows like eps / dt^2
    const double scale = std::abs(w(0.0)) + 1.0;
    const double tol = 1e-8 * scale + 1e-12 * scale / (dt * dt);
    out.convex = min_dd >= -tol;
    return out;
}

Mat random_matrix_with_det(int d, SplitMix64& rng, double det_lo, double det_hi, double range) {
    for (int tries = 0; tries < 100000; ++tries) {
        Mat F(d);
        for (int i = 0; i < d * d; ++i) F.m[static_cast<std::size_t>(i)] = rng.uniform(-range, range);
        const double dt = det(F);
        if (dt > det_lo && dt < det_hi) return F;
    }
    fail(ErrorKind::Numerical, "could not sample a matrix with det in the requested range");
}

Mat random_rotation(int d, SplitMix64& rng) {
    if (d == 2) {
        const double th = rng.uniform(0.0, 4.0 * std::acos(0.0));
        Mat r(2);
        r(0, 0) = std::cos(th);
        r(0, 1) = -std::sin(th);
        r(1, 0) = std::sin(th);
        r(1, 1) = std::cos(th);
        return r;
    }
    // Gram-Schmidt on a random matrix, then fix orientation.
    for (;;) {
        Vec u(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        Vec v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double nu = norm(u);
        if (nu < 1e-3) continue;
        u = (1.0 / nu) * u;
        v = v - dot(u, v) * u;
        const double nv = norm(v);
        if (nv < 1e-3) continue;
        v = (1.0 / nv) * v;
        Vec w(u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]);
        Mat r(3);
        for (int i = 0; i < 3; ++i) {
            r(i, 0) = u[i];
            r(i, 1) = v[i];
            r(i, 2) = w[i];
        }
        return r;
    }
}

}  // namespace lavlab
