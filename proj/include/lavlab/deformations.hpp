#pragma once

#include <string>
#include <vector>

#include "lavlab/geometry.hpp"
#include "lavlab/material.hpp"

// Closed-form deformations: the identity boundary datum, the cross-pinch
// families (2D power, 2D log-corrected, 3D power) squeezing a central
// cross-section of each piece to a point/segment, and the Lipschitz bypass
// competitors shearing the second piece around the first. All with analytic
// gradients and determinants, region-aware, with the S2 piece obtained by
// conjugation y(x) = Q y(Q^T (x - xi)) for the pinch families.

namespace lavlab {

enum class FamilyKind {
    BoundaryDatum,
    CrossPinch2D,
    CrossPinchLog2D,
    Bypass2D,
    CrossPinch3D,
    Bypass3D,
};

int family_dimension(FamilyKind kind);
const char* family_name(FamilyKind kind);
FamilyKind parse_family(const std::string& name);
bool family_is_pinch(FamilyKind kind);

struct DeformationFamily {
    FamilyKind kind = FamilyKind::BoundaryDatum;
    double alpha = 0.0;
    double beta = 0.0;
};

struct ConstraintCheck {
    std::string name;
    double slack = 0.0;  // >= 0 when satisfied (strict constraints need > 0)
    bool ok = false;
};

struct AdmissibilityReport {
    bool admissible = false;
    std::vector<ConstraintCheck> constraints;
};

/// Exponent constraints coupling (alpha, beta) to the material:
///   CrossPinch2D:    (p-1)/p < alpha < beta <= 1,  (1-alpha-beta) q > -1
///   CrossPinchLog2D: beta >= alpha, (1-alpha-beta) q >= -1, p(alpha-1) >= -1
///   CrossPinch3D:    alpha, beta in (1-1/p, 1],    (1-alpha-beta) q > -1
/// Datum and bypass families carry no parameters and are always admissible.
AdmissibilityReport admissibility_check(const DeformationFamily& family, const MaterialParams& mp);

/// Validates eagerly; throws a constraint error naming the violated inequality.
DeformationFamily make_family(FamilyKind kind, const MaterialParams& mp, double alpha = 0.0, double beta = 0.0);

struct EvalResult {
    Vec y;
    Mat grad;
    double det = 0.0;
    RegionLabel region = RegionLabel::Outside;
    bool grad_defined = true;  // false exactly on the pinch set / shear kink
};

/// Value, analytic gradient, determinant at a point of Omega_s.
/// Throws a domain error for points outside.
EvalResult evaluate(const DeformationFamily& family, const Vec& x, const StripeDomain& dom);

/// Evaluation on the second piece directly from the chart coordinate
/// u = Q^T (x - xi); avoids the push-forward/pull-back roundtrip when the
/// caller already works in the chart (grid sampling does).
EvalResult evaluate_in_s2_chart(const DeformationFamily& family, const Vec& u, const StripeDomain& dom);

struct PinchSet {
    // axis-aligned (possibly degenerate) boxes in absolute coordinates
    std::vector<std::pair<Vec, Vec>> boxes;
};

PinchSet pinch_set(const DeformationFamily& family, const StripeDomain& dom);

/// Max over n probe points of the jump across each piecewise interface and of
/// |y - y0| on Gamma_s.
double interface_continuity_residual(const DeformationFamily& family, const StripeDomain& dom, int n);

/// Default showcase parameters: 2D pinch (0.7, 0.75) for p=3, q=2;
/// 3D pinch (0.72, 0.72) for p=3.2, q=2.2.
DeformationFamily default_family(FamilyKind kind, const MaterialParams& mp);

}  // namespace lavlab
