#pragma once

#include <utility>
#include <vector>

#include "lavlab/quadrature.hpp"

// s-sweeps of E_s per family, log-log exponent fits against the predicted
// scaling exponents, and the pinch-vs-bypass energy gap table.

namespace lavlab {

struct EnergyReport {
    double s = 0.0;
    DeformationFamily family;
    double total = 0.0;
    std::array<double, 4> per_region{};  // S1Inner, S1Outer, S2Inner, S2Outer
    double quadrature_error = 0.0;
    bool divergent = false;
};

/// Predicted energy-scaling exponent of the pinch family:
///   2D: min{p a - p + 2, 2 + (1-a) q, 2a + 1}
///   3D: min{2, (a-1) p + 2, q (1-a) + 2, 1 + 2a}
/// Throws a constraint error when (alpha, beta) is inadmissible.
double predicted_exponent(const MaterialParams& mp, double alpha, double beta, int dimension);

std::vector<EnergyReport> sweep(const DeformationFamily& family, const std::vector<double>& s_values,
                                const MaterialParams& mp, const QuadratureSpec& spec,
                                par::Exec exec = par::Exec::Parallel);

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;  // of ln E against ln s
    double r_squared = 0.0;
    std::pair<double, double> s_range{0.0, 0.0};
};

/// Least-squares line through (ln s, ln E_s); requires >= 3 positive totals.
ScalingFit fit_exponent(const std::vector<EnergyReport>& reports);

struct GapRow {
    double s = 0.0;
    double e_pinch = 0.0;
    double e_bypass = 0.0;
    double ratio = 0.0;
};

struct GapReport {
    std::vector<GapRow> rows;
    bool tail_decreasing = false;  // ratio strictly decreasing on the last four rows
};

GapReport gap_report(const DeformationFamily& pinch, const DeformationFamily& lipschitz,
                     const std::vector<double>& s_values, const MaterialParams& mp,
                     const QuadratureSpec& spec, par::Exec exec = par::Exec::Parallel);

struct ShapeOptimum {
    double alpha = 0.0;
    double beta = 0.0;
    double energy = 0.0;
};

/// Constrained minimization of E_s over admissible (alpha, beta) of the pinch
/// family at fixed s: feasible grid scan plus pattern refinement. Errors out
/// when the feasible region is empty, naming the binding inequality.
ShapeOptimum optimize_shape(const MaterialParams& mp, double s, int dimension, const QuadratureSpec& spec);

/// Dyadic default sweep 2^-4 .. 2^-lastExp.
std::vector<double> dyadic_s_values(int first_exp, int last_exp);

}  // namespace lavlab
