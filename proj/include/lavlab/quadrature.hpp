#pragma once

#include <functional>
#include <vector>

#include "lavlab/deformations.hpp"
#include "lavlab/geometry.hpp"
#include "lavlab/parallel.hpp"

// Integration over Omega_s regions with geometric grading toward the pinch
// set. Regular cells use tensor-product Gauss-Legendre; the innermost cells
// touching the singular line use an open tanh-sinh rule, which resolves
// |x|^{-r}, r < 1, to near machine precision without ever evaluating at the
// singular coordinate. Refinement adds grading levels one at a time; the
// corrections drive both the error estimate and divergence detection.

namespace lavlab {

struct QuadratureSpec {
    int gauss_order = 16;       // nodes per cell per axis
    int grading_levels = 40;    // geometric cells per side of the singularity
    double grading_ratio = 0.5; // in (0,1)
    int refinement_cap = 60;    // absolute cap on levels during refinement
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;  // from the last two refinement levels
    long cells = 0;
    bool divergent = false;
};

struct Interval {
    double a = 0.0;
    double b = 0.0;
    int singular_end = -1;  // -1 none, 0 singular at a, 1 singular at b
};

/// Geometric subdivision of [a,b] accumulating toward singular_at; `levels`
/// geometric cells on each affected side plus one innermost cell flagged
/// with its singular end. Intervals are returned sorted ascending.
std::vector<Interval> graded_cells_1d(double a, double b, double singular_at, const QuadratureSpec& spec);

/// Gauss-Legendre nodes/weights on [0,1] (cached per order).
void gauss_legendre_01(int order, std::vector<double>& nodes, std::vector<double>& weights);

/// Tanh-sinh nodes/weights on (0,1), singularity assumed at 0.
void tanh_sinh_01(std::vector<double>& nodes, std::vector<double>& weights);

/// Integral of f over one 1D interval; uses tanh-sinh when singular_end >= 0.
double integrate_interval(const std::function<double(double)>& f, const Interval& iv, int gauss_order);

/// 1D integral over [a,b] with a singular point, using graded cells plus
/// refinement. Shares the engine of integrate_region.
IntegralResult integrate_1d_singular(const std::function<double(double)>& f, double a, double b,
                                     double singular_at, const QuadratureSpec& spec);

/// Integral of f over one region of Omega_s. Pinch regions (inner labels)
/// are graded toward the pinch plane; outer regions use uniform cells split
/// at coordinate 0 where the box spans it.
IntegralResult integrate_region(const std::function<double(const Vec&)>& f, RegionLabel region,
                                const StripeDomain& dom, const QuadratureSpec& spec,
                                par::Exec exec = par::Exec::Parallel);

struct EnergyBreakdown {
    // indexed S1Inner, S1Outer, S2Inner, S2Outer
    IntegralResult region[4];
    IntegralResult total;
};

/// E_s(family) = sum over the four regions of the integral of W(grad y) - W(I).
EnergyBreakdown integrate_energy(const DeformationFamily& family, const StripeDomain& dom,
                                 const MaterialParams& mp, const QuadratureSpec& spec,
                                 par::Exec exec = par::Exec::Parallel);

int region_index(RegionLabel r);

}  // namespace lavlab
