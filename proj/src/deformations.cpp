#include "lavlab/deformations.hpp"

#include <algorithm>
#include <cmath>

#include "lavlab/errors.hpp"

namespace lavlab {

namespace {

double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

}  // namespace

int family_dimension(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::CrossPinch3D:
        case FamilyKind::Bypass3D:
            return 3;
        case FamilyKind::BoundaryDatum:
            return 0;  // works in both dimensions
        default:
            return 2;
    }
}

const char* family_name(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::BoundaryDatum: return "datum";
        case FamilyKind::CrossPinch2D: return "cross2d";
        case FamilyKind::CrossPinchLog2D: return "crosslog2d";
        case FamilyKind::Bypass2D: return "bypass2d";
        case FamilyKind::CrossPinch3D: return "cross3d";
        case FamilyKind::Bypass3D: return "bypass3d";
    }
    return "?";
}

FamilyKind parse_family(const std::string& name) {
    if (name == "datum") return FamilyKind::BoundaryDatum;
    if (name == "cross2d") return FamilyKind::CrossPinch2D;
    if (name == "crosslog2d") return FamilyKind::CrossPinchLog2D;
    if (name == "bypass2d") return FamilyKind::Bypass2D;
    if (name == "cross3d") return FamilyKind::CrossPinch3D;
    if (name == "bypass3d") return FamilyKind::Bypass3D;
    fail(ErrorKind::Parameter, "unknown family '" + name + "'");
}

bool family_is_pinch(FamilyKind kind) {
    return kind == FamilyKind::CrossPinch2D || kind == FamilyKind::CrossPinchLog2D ||
           kind == FamilyKind::CrossPinch3D;
}

AdmissibilityReport admissibility_check(const DeformationFamily& family, const MaterialParams& mp) {
    AdmissibilityReport rep;
    const double a = family.alpha, b = family.beta, p = mp.p, q = mp.q;
    auto push = [&](const std::string& name, double slack, bool strict) {
        ConstraintCheck c;
        c.name = name;
        c.slack = slack;
        c.ok = strict ? slack > 0.0 : slack >= 0.0;
        rep.constraints.push_back(c);
    };
    switch (family.kind) {
        case FamilyKind::BoundaryDatum:
        case FamilyKind::Bypass2D:
        case FamilyKind::Bypass3D:
            rep.admissible = true;
            return rep;
        case FamilyKind::CrossPinch2D:
            push("p(alpha-1) > -1", p * (a - 1.0) + 1.0, true);
            push("alpha < beta", b - a, true);
            push("beta <= 1", 1.0 - b, false);
            push("(1-alpha-beta)q > -1", (1.0 - a - b) * q + 1.0, true);
            break;
        case FamilyKind::CrossPinchLog2D:
            push("beta >= alpha", b - a, false);
            push("(1-alpha-beta)q >= -1", (1.0 - a - b) * q + 1.0, false);
            push("p(alpha-1) >= -1", p * (a - 1.0) + 1.0, false);
            break;
        case FamilyKind::CrossPinch3D:
            push("alpha > 1-1/p", a - (1.0 - 1.0 / p), true);
            push("beta > 1-1/p", b - (1.0 - 1.0 / p), true);
            push("alpha <= 1", 1.0 - a, false);
            push("beta <= 1", 1.0 - b, false);
            push("(1-alpha-beta)q > -1", (1.0 - a - b) * q + 1.0, true);
            break;
    }
    rep.admissible = std::all_of(rep.constraints.begin(), rep.constraints.end(),
                                 [](const ConstraintCheck& c) { return c.ok; });
    return rep;
}

DeformationFamily make_family(FamilyKind kind, const MaterialParams& mp, double alpha, double beta) {
    DeformationFamily f;
    f.kind = kind;
    f.alpha = alpha;
    f.beta = beta;
    const int fd = family_dimension(kind);
    if (fd != 0 && fd != mp.d)
        fail(ErrorKind::Parameter, std::string("family ") + family_name(kind) + " requires dimension " +
                                       std::to_string(fd));
    AdmissibilityReport rep = admissibility_check(f, mp);
    if (!rep.admissible) {
        std::string what = std::string("inadmissible parameters for ") + family_name(kind) + ":";
        for (const auto& c : rep.constraints)
            if (!c.ok) what += " [" + c.name + "]";
        fail(ErrorKind::Constraint, what);
    }
    return f;
}

DeformationFamily default_family(FamilyKind kind, const MaterialParams& mp) {
    switch (kind) {
        case FamilyKind::CrossPinch2D: return make_family(kind, mp, 0.7, 0.75);
        case FamilyKind::CrossPinchLog2D: return make_family(kind, mp, (mp.p - 1.0) / mp.p, (mp.p - 1.0) / mp.p);
        case FamilyKind::CrossPinch3D: return make_family(kind, mp, 0.72, 0.72);
        default: return make_family(kind, mp);
    }
}

namespace {

// Local evaluation in the S1 chart. `branch`: 0 = choose by |t|, 1 = force
// inner formula, 2 = force outer formula (used by the continuity probe).
struct Local {
    Vec y;
    Mat grad;
    double det = 0.0;
    bool grad_defined = true;
};

Local eval_local(const DeformationFamily& f, const Vec& u, const StripeDomain& dom, int branch = 0) {
    const double s = dom.s;
    Local r;
    const int d = dom.dim;
    r.y = Vec::zero(d);
    r.grad = Mat::identity(d);
    r.det = 1.0;

    switch (f.kind) {
        case FamilyKind::BoundaryDatum:
        case FamilyKind::Bypass2D:
        case FamilyKind::Bypass3D:
            r.y = u;  // identity on S1; bypass families act on S2 only
            return r;
        case FamilyKind::CrossPinch2D: {
            const double t = u[0], at = std::abs(t), sa = sgn(t);
            const double a = f.alpha, b = f.beta;
            const bool inner = branch == 1 || (branch == 0 && at <= s);
            if (inner) {
                r.y = Vec(sa * std::pow(at, a), std::pow(at / s, b) * u[1]);
                if (t == 0.0) {
                    r.grad = Mat::zero(2);
                    r.det = 0.0;
                    r.grad_defined = false;
                    return r;
                }
                r.grad = Mat(2);
                r.grad(0, 0) = a * std::pow(at, a - 1.0);
                r.grad(1, 0) = sa * b * std::pow(at, b - 1.0) * std::pow(s, -b) * u[1];
                r.grad(1, 1) = std::pow(at / s, b);
                r.det = a * std::pow(at, a + b - 1.0) * std::pow(s, -b);
            } else {
                const double slope = (1.0 - std::pow(s, a)) / (1.0 - s);
                r.y = Vec(sa * (slope * (at - 1.0) + 1.0), u[1]);
                r.grad = Mat::diag2(slope, 1.0);
                r.det = slope;
            }
            return r;
        }
        case FamilyKind::CrossPinchLog2D: {
            const double t = u[0], at = std::abs(t), sa = sgn(t);
            const double a = f.alpha, b = f.beta;
            const double Ls = -std::log(s);
            const bool inner = branch == 1 || (branch == 0 && at <= s);
            if (inner) {
                if (t == 0.0) {
                    r.y = Vec(0.0, 0.0);
                    r.grad = Mat::zero(2);
                    r.det = 0.0;
                    r.grad_defined = false;
                    return r;
                }
                const double L = -std::log(at);
                const double ratio2 = (Ls / L) * (Ls / L);
                r.y = Vec(sa * std::pow(at, a) / L, ratio2 * std::pow(at / s, b) * u[1]);
                r.grad = Mat(2);
                r.grad(0, 0) = std::pow(at, a - 1.0) * (a * L + 1.0) / (L * L);
                r.grad(1, 0) = sa * Ls * Ls * std::pow(s, -b) * std::pow(at, b - 1.0) * (b * L + 2.0) /
                               (L * L * L) * u[1];
                r.grad(1, 1) = ratio2 * std::pow(at / s, b);
                r.det = (a * L + 1.0) * Ls * Ls * std::pow(s, -b) * std::pow(at, a + b - 1.0) /
                        (L * L * L * L);
            } else {
                const double slope = (1.0 - std::pow(s, a) / Ls) / (1.0 - s);
                r.y = Vec(sa * (slope * (at - 1.0) + 1.0), u[1]);
                r.grad = Mat::diag2(slope, 1.0);
                r.det = slope;
            }
            return r;
        }
        case FamilyKind::CrossPinch3D: {
            const double t = u[1], at = std::abs(t), sa = sgn(t);
            const double a = f.alpha, b = f.beta;
            const bool inner = branch == 1 || (branch == 0 && at <= s);
            if (inner) {
                r.y = Vec(u[0], sa * std::pow(at, a), std::pow(at / s, b) * u[2]);
                if (t == 0.0) {
                    r.grad = Mat::zero(3);
                    r.grad(0, 0) = 1.0;
                    r.det = 0.0;
                    r.grad_defined = false;
                    return r;
                }
                r.grad = Mat(3);
                r.grad(0, 0) = 1.0;
                r.grad(1, 1) = a * std::pow(at, a - 1.0);
                r.grad(2, 1) = sa * b * std::pow(at, b - 1.0) * std::pow(s, -b) * u[2];
                r.grad(2, 2) = std::pow(at / s, b);
                r.det = a * std::pow(at, a + b - 1.0) * std::pow(s, -b);
            } else {
                const double slope = (1.0 - std::pow(s, a)) / (1.0 - s);
                r.y = Vec(u[0], sa * (slope * (at - 1.0) + 1.0), u[2]);
                r.grad = Mat::diag3(1.0, slope, 1.0);
                r.det = slope;
            }
            return r;
        }
    }
    return r;
}

// Bypass on the S2 piece, absolute coordinates:
//   2D: y = x - xi + ( k (1-|x2|), 0 ),      k = (1+s)/(1-2s)
//   3D: y = x - xi + ( 0, k (1-|x3|), 0 )
Local eval_bypass_s2(const DeformationFamily& f, const Vec& x, const StripeDomain& dom) {
    const double s = dom.s;
    const double k = (1.0 + s) / (1.0 - 2.0 * s);
    Local r;
    if (f.kind == FamilyKind::Bypass2D) {
        r.y = Vec(x[0] - 4.0 + k * (1.0 - std::abs(x[1])), x[1]);
        r.grad = Mat::identity(2);
        r.grad(0, 1) = -k * sgn(x[1]);
        r.det = 1.0;
        r.grad_defined = x[1] != 0.0;
    } else {
        r.y = Vec(x[0], x[1] - 4.0 + k * (1.0 - std::abs(x[2])), x[2]);
        r.grad = Mat::identity(3);
        r.grad(1, 2) = -k * sgn(x[2]);
        r.det = 1.0;
        r.grad_defined = x[2] != 0.0;
    }
    return r;
}

}  // namespace

EvalResult evaluate(const DeformationFamily& family, const Vec& x, const StripeDomain& dom) {
    const RegionLabel region = classify(x, dom);
    if (region == RegionLabel::Outside)
        fail(ErrorKind::Domain, "evaluate: point lies outside the reference configuration");
    const bool on_s2 = region == RegionLabel::S2Inner || region == RegionLabel::S2Outer;

    EvalResult out;
    out.region = region;

    if ((family.kind == FamilyKind::Bypass2D || family.kind == FamilyKind::Bypass3D) && on_s2) {
        Local l = eval_bypass_s2(family, x, dom);
        out.y = l.y;
        out.grad = l.grad;
        out.det = l.det;
        out.grad_defined = l.grad_defined;
        return out;
    }

    if (!on_s2) {
        Local l = eval_local(family, x, dom);
        out.y = l.y;
        out.grad = l.grad;
        out.det = l.det;
        out.grad_defined = l.grad_defined;
        return out;
    }

    // S2 by conjugation: y(x) = Q y_loc(Q^T (x - xi)), grad = Q grad_loc Q^T.
    const Vec u = pull_back(x, dom);
    Local l = eval_local(family, u, dom);
    out.y = matvec(dom.Q, l.y);
    out.grad = matmul(dom.Q, matmul(l.grad, transpose(dom.Q)));
    out.det = l.det;
    out.grad_defined = l.grad_defined;
    return out;
}

EvalResult evaluate_in_s2_chart(const DeformationFamily& family, const Vec& u, const StripeDomain& dom) {
    const RegionLabel local = classify(u, dom);
    if (local != RegionLabel::S1Inner && local != RegionLabel::S1Outer)
        fail(ErrorKind::Domain, "evaluate_in_s2_chart: chart point outside the piece");
    EvalResult out;
    out.region = local == RegionLabel::S1Inner ? RegionLabel::S2Inner : RegionLabel::S2Outer;
    if (family.kind == FamilyKind::Bypass2D || family.kind == FamilyKind::Bypass3D) {
        // in chart coordinates the kink coordinate of x is a plain component
        // of u (2D: x2 = u1; 3D: x3 = u2), so no roundtrip through x is needed
        const double s = dom.s;
        const double k = (1.0 + s) / (1.0 - 2.0 * s);
        const Vec qu = matvec(dom.Q, u);  // x - xi, exactly
        if (family.kind == FamilyKind::Bypass2D) {
            out.y = Vec(qu[0] + k * (1.0 - std::abs(u[0])), qu[1]);
            out.grad = Mat::identity(2);
            out.grad(0, 1) = -k * sgn(u[0]);
            out.det = 1.0;
            out.grad_defined = u[0] != 0.0;
        } else {
            out.y = Vec(qu[0], qu[1] + k * (1.0 - std::abs(u[1])), qu[2]);
            out.grad = Mat::identity(3);
            out.grad(1, 2) = -k * sgn(u[1]);
            out.det = 1.0;
            out.grad_defined = u[1] != 0.0;
        }
        return out;
    }
    Local l = eval_local(family, u, dom);
    out.y = matvec(dom.Q, l.y);
    out.grad = matmul(dom.Q, matmul(l.grad, transpose(dom.Q)));
    out.det = l.det;
    out.grad_defined = l.grad_defined;
    return out;
}

PinchSet pinch_set(const DeformationFamily& family, const StripeDomain& dom) {
    PinchSet ps;
    if (!family_is_pinch(family.kind)) return ps;
    const double s = dom.s;
    if (dom.dim == 2) {
        ps.boxes.push_back({Vec(0.0, -s), Vec(0.0, s)});
        ps.boxes.push_back({Vec(4.0 - s, 0.0), Vec(4.0 + s, 0.0)});
    } else {
        ps.boxes.push_back({Vec(-1.0, 0.0, -s), Vec(1.0, 0.0, s)});
        ps.boxes.push_back({Vec(-1.0, 4.0 - s, 0.0), Vec(1.0, 4.0 + s, 0.0)});
    }
    return ps;
}

double interface_continuity_residual(const DeformationFamily& family, const StripeDomain& dom, int n) {
    if (n <= 0) fail(ErrorKind::Parameter, "probe count must be positive");
    const double s = dom.s;
    const int d = dom.dim;
    const int pa = pinch_axis(dom);
    double res = 0.0;

    // inner/outer interface |t| = s: compare forced branches
    for (int i = 0; i < n; ++i) {
        const double frac = (i + 0.5) / n;
        for (int side = -1; side <= 1; side += 2) {
            Vec u = Vec::zero(d);
            u[pa] = side * s;
            if (d == 2) {
                u[1 - pa] = -s + 2.0 * s * frac;
            } else {
                u[0] = -1.0 + 2.0 * frac;
                u[2] = -s + 2.0 * s * frac;
            }
            Local in = eval_local(family, u, dom, 1);
            Local outb = eval_local(family, u, dom, 2);
            res = std::max(res, norm(in.y - outb.y));
        }
    }

    // Dirichlet match |y - y0| on Gamma_s, both pieces
    for (int i = 0; i < n; ++i) {
        const double frac = (i + 0.5) / n;
        for (int side = -1; side <= 1; side += 2) {
            Vec u = Vec::zero(d);
            if (d == 2) {
                u[0] = static_cast<double>(side);
                u[1] = -s + 2.0 * s * frac;
            } else {
                u[0] = -1.0 + 2.0 * frac;
                u[1] = static_cast<double>(side);
                u[2] = -s + 2.0 * s * frac;
            }
            if (family.kind == FamilyKind::Bypass2D || family.kind == FamilyKind::Bypass3D) {
                // S1 trace is the identity; S2 trace checked in absolute coords
                Local l1 = eval_local(family, u, dom);
                res = std::max(res, norm(l1.y - u));
                Vec x2 = push_forward(u, dom);
                Local l2 = eval_bypass_s2(family, x2, dom);
                res = std::max(res, norm(l2.y - (x2 - dom.xi)));
            } else {
                Local l = eval_local(family, u, dom, 2);
                res = std::max(res, norm(l.y - u));  // y0 = id in the S1 chart
            }
        }
    }
    return res;
}

}  // namespace lavlab
