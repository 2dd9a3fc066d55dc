#pragma once

#include <array>
#include <cstdint>

#include "lavlab/mat.hpp"

// Stored-energy density W(F) = |F|^p + gamma (det F)^{-q} for det F > 0,
// +inf otherwise, with gamma chosen so that W is minimized exactly at the
// identity. Includes the singular-value form, derivatives, and the
// quantitative constants (mu, c_hat, c) behind the lower bound
//   W(F) - W(I) >= c |‖F‖₂ - 1|^p + c (‖F‖₂ - 1)^2.

namespace lavlab {

struct MaterialParams {
    int d = 2;        // space dimension, 2 or 3
    double p = 3.0;   // gradient growth exponent, p > d
    double q = 2.0;   // compression penalty exponent, q > 0
    double gamma = 0; // p d^{p/2-1} / q
};

/// gamma = p d^{p/2-1} / q. Throws on p <= d or q <= 0.
double derive_gamma(int d, double p, double q);

MaterialParams make_material(int d, double p, double q);

struct SingularValues {
    int d = 2;
    std::array<double, 3> lam{0.0, 0.0, 0.0};  // sorted nonincreasing, all >= 0
};

/// Singular values of F via Jacobi eigen-decomposition of F^T F.
SingularValues singular_values(const Mat& F);

/// Largest singular value.
double operator_norm(const Mat& F);

double energy_density(const Mat& F, const MaterialParams& mp);
double energy_density_sv(const SingularValues& sv, const MaterialParams& mp);

/// Minimum value W(I) = d^{p/2} + gamma.
double energy_at_identity(const MaterialParams& mp);

/// DW(F) = p |F|^{p-2} F - gamma q (det F)^{-q} F^{-T}; requires det F > 0.
Mat energy_gradient(const Mat& F, const MaterialParams& mp);

/// Hessian of the singular-value form, entry (i,j) =
/// (p(p-2) li lj + p delta_ij S^2) S^{p-4} + gamma q (q + delta_ij) (li lj)^{-1} P^{-q}.
/// Requires all singular values positive.
Mat sv_hessian(const SingularValues& sv, const MaterialParams& mp);

struct LowerBoundConstants {
    double mu = 0;     // min of lambda_j^{-2} P^{-q} over the unit sphere in (0,1]^d
    double c_hat = 0;  // inf over S>0 of (p S^{p-2} + gamma q mu S^{-qd-2}) / (p(p-1) S^{p-2} + 2)
    double c = 0;      // min(c_hat, 1/2)
};

LowerBoundConstants lower_bound_constants(const MaterialParams& mp);

struct CheckResult {
    bool holds = false;
    double slack = 0;  // LHS - RHS
};

CheckResult check_lower_bound(const Mat& F, const MaterialParams& mp, const LowerBoundConstants& consts);

/// W(F) >= c (|F|^p + |cof F|^{p/(d-1)} + (det F)^{p/d}) + b.
CheckResult check_coercivity(const Mat& F, const MaterialParams& mp, double c, double b);

struct CoercivityConstants {
    double c = 0;
    double b = 0;
};

/// Candidate coercivity constants from sampled minimization of the ratio
/// W / (|F|^p + |cof F|^{p/(d-1)} + (det F)^{p/d}); re-verify on fresh samples.
CoercivityConstants find_coercivity_constants(const MaterialParams& mp, std::uint64_t seed, int samples);

struct RankOneProbe {
    bool convex = false;
    double t_lo = 0, t_hi = 0;       // effective probed interval (may shrink)
    double min_second_difference = 0;
};

/// Probes convexity of t -> W(F + t a⊗b) by central second differences.
/// The interval shrinks as needed to keep det > 0.
RankOneProbe rank_one_convexity_probe(const Mat& F, const Vec& a, const Vec& b,
                                      const MaterialParams& mp, int steps);

/// Random matrix with entries uniform in [-range, range] conditioned on
/// det in (det_lo, det_hi). Deterministic under seed state.
Mat random_matrix_with_det(int d, struct SplitMix64& rng, double det_lo, double det_hi, double range = 2.0);

/// Random rotation in SO(d).
Mat random_rotation(int d, struct SplitMix64& rng);

}  // namespace lavlab
