#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lavlab/deformations.hpp"
#include "lavlab/parallel.hpp"

// Discrete energy minimization over multilinear grid deformations with
// Dirichlet data on Gamma_s. Each strip is meshed in its own chart (the S2
// chart is the pullback u = Q^T(x - xi)); since Q is a rotation, W and det
// are unchanged and assembly is identical for both strips.

namespace lavlab {

struct StripMesh {
    std::array<std::vector<double>, 3> coords;  // node coordinates per axis
    int cells(int axis) const { return static_cast<int>(coords[static_cast<std::size_t>(axis)].size()) - 1; }
    int nodes(int axis) const { return static_cast<int>(coords[static_cast<std::size_t>(axis)].size()); }
};

struct GridDeformation {
    StripeDomain domain;
    std::array<StripMesh, 2> mesh;       // strip 1 and strip 2 (local charts)
    std::vector<Vec> pos;                // nodal positions: strip 1 nodes then strip 2
    std::vector<std::uint8_t> dirichlet; // mask, bit-exact y0 values where set

    std::size_t strip_offset(int strip) const;
    std::size_t node_count() const { return pos.size(); }
};

struct MinimizeOptions {
    int max_iterations = 2000;
    double grad_tol = 1e-5;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 50;
};

/// Nodal sampling of a family onto a tensor grid; Dirichlet mask from
/// on_dirichlet_boundary; degenerate cells (det <= 0 at a quadrature node)
/// are nudged toward the identity datum until feasible.
/// resolution = cells along (long axis, narrow axis[, third axis]).
GridDeformation discretize(const DeformationFamily& family, const StripeDomain& dom,
                           std::array<int, 3> resolution, bool grade_toward_pinch);

/// Per-cell 2-point Gauss quadrature of W(grad y_h) - W(I) on the
/// multilinear interpolant; +inf when any quadrature node has det <= 0.
double discrete_energy(const GridDeformation& g, const MaterialParams& mp,
                       par::Exec exec = par::Exec::Parallel);

/// Assembled analytic gradient; entries on Dirichlet nodes are zeroed.
std::vector<Vec> discrete_energy_gradient(const GridDeformation& g, const MaterialParams& mp,
                                          par::Exec exec = par::Exec::Parallel);

struct TraceRow {
    int iter = 0;
    double energy = 0.0;
    double grad_norm = 0.0;
};

struct MinimizeResult {
    GridDeformation state;
    std::vector<TraceRow> trace;
    bool stalled = false;
};

/// Projected descent with Barzilai-Borwein steps and Armijo backtracking;
/// infeasible steps (energy +inf) are rejected by the line search.
MinimizeResult minimize(GridDeformation g, const MaterialParams& mp, const MinimizeOptions& opts,
                        par::Exec exec = par::Exec::Parallel);

/// Checkpoint: one row per node (strip, node index, reference coords,
/// deformed coords). Schema "checkpoint/v1", shared with the CLI.
void write_checkpoint_csv(std::ostream& os, const GridDeformation& g);

}  // namespace lavlab
