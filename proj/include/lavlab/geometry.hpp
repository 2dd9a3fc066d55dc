#pragma once

#include <cstdint>
#include <vector>

#include "lavlab/mat.hpp"

// Two-component reference configurations: S1 a stripe (2D) or thin cuboid
// (3D) pinned at width parameter s, S2 a rotated translated copy xi + Q S1.
// The Dirichlet part Gamma_s consists of the short end faces of each piece.

namespace lavlab {

enum class RegionLabel { S1Inner, S1Outer, S2Inner, S2Outer, Outside };

struct StripeDomain {
    int dim = 2;
    double s = 0.25;
    Vec xi;  // translation of the second component
    Mat Q;   // rotation of the second component
};

/// Canonical domain: 2D Q = [[0,-1],[1,0]], xi = (4,0);
/// 3D Q = [[1,0,0],[0,0,-1],[0,1,0]], xi = (0,4,0). Requires 0 < s < 1.
StripeDomain make_domain(int dim, double s);

/// Index of the coordinate axis that carries the pinch (and the inner/outer
/// split) in the S1 chart: 0 in 2D, 1 in 3D.
int pinch_axis(const StripeDomain& dom);

/// Pullback u = Q^T (x - xi) of a point in the S2 component to the S1 chart.
Vec pull_back(const Vec& x, const StripeDomain& dom);

/// Inverse map x = xi + Q u.
Vec push_forward(const Vec& u, const StripeDomain& dom);

/// Region membership. Interface points (|pinch coordinate| == s) are
/// assigned to the inner region.
RegionLabel classify(const Vec& x, const StripeDomain& dom);

bool on_dirichlet_boundary(const Vec& x, const StripeDomain& dom, double tol);

/// 8s in 2D, 16s in 3D.
double domain_measure(const StripeDomain& dom);

/// n points uniform in Omega_s, deterministic under seed.
std::vector<Vec> sample_points(const StripeDomain& dom, std::size_t n, std::uint64_t seed);

/// Axis-aligned bounding box of one component in absolute coordinates.
void component_box(const StripeDomain& dom, int strip, Vec& lo, Vec& hi);

}  // namespace lavlab
