#pragma once

#include <optional>
#include <vector>

#include "lavlab/quadrature.hpp"

// Ciarlet-Necas verification (bulk integral of det vs. a rasterized bracket
// of |y(Omega)|), distortion integrability probes, section arc lengths, and
// the Poincare-Miranda self-intersection finder for the 3D families.

namespace lavlab {

enum class CNVerdict { Satisfied, Violated, Inconclusive };

struct CNReport {
    double bulk_integral = 0.0;
    double image_measure_lower = 0.0;
    double image_measure_upper = 0.0;
    double image_measure_estimate = 0.0;  // unbiased center-rule point estimate
    double resolution = 0.0;              // raster cell size h
    CNVerdict verdict = CNVerdict::Inconclusive;
};

const char* verdict_name(CNVerdict v);

/// Bulk integral of det grad y against a pixel/voxel bracket of the image
/// measure. Violated only when bulk - upper exceeds the combined error
/// bounds; inconclusive when the raster is too coarse to say anything.
CNReport cn_check(const DeformationFamily& family, const StripeDomain& dom, const MaterialParams& mp,
                  double h, par::Exec exec = par::Exec::Parallel);

enum class DistortionFlag { Finite, Divergent };

struct DistortionReport {
    double eta = 0.0;
    std::vector<double> integral_estimates;  // per refinement level
    DistortionFlag flag = DistortionFlag::Finite;
};

/// Integral of K^eta over Omega_s, K = |grad y|^d / det grad y, with
/// divergence detection via grading refinement.
DistortionReport distortion_integral(const DeformationFamily& family, const StripeDomain& dom, double eta,
                                     const QuadratureSpec& spec);

/// Bisection for the finite/divergent transition of eta -> distortion_integral.
double distortion_threshold(const DeformationFamily& family, const StripeDomain& dom, double eta_lo,
                            double eta_hi, const QuadratureSpec& spec, int iters = 12);

/// Arc length of the image of the section T^sigma of the given strip
/// (1: first piece, 2: second piece).
double section_arclength(const DeformationFamily& family, const StripeDomain& dom, double sigma,
                         int strip, int n);

/// g(x1, tau1, tau2) = y(x1, tau1, sigma) - y(0, sigma + 4, -tau2); 3D only.
Vec miranda_g(const DeformationFamily& family, double sigma, double x1, double tau1, double tau2,
              const StripeDomain& dom);

struct IntersectionWitness {
    Vec param;     // (x1, tau1, tau2) in [-1,1]^3
    Vec x_s1;      // witness point in S1
    Vec x_s2;      // witness point in S2
    Vec image;     // common image value y(x_s1) (= y(x_s2) up to mismatch)
    double mismatch = 0.0;
};

/// Grid scan of miranda_g for a sign-consistent cell followed by bisection
/// refinement. Returns a witness with |y(x) - y(x')| <= tol or nothing.
std::optional<IntersectionWitness> find_self_intersection(const DeformationFamily& family,
                                                          const StripeDomain& dom, double sigma,
                                                          int grid_n, double tol = 1e-8,
                                                          par::Exec exec = par::Exec::Parallel);

}  // namespace lavlab
