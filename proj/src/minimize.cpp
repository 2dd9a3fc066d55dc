#include "lavlab/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "lavlab/errors.hpp"

namespace lavlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// local chart box of one strip (the S1 box in both cases)
void chart_box(const StripeDomain& dom, Vec& lo, Vec& hi) { component_box(dom, 1, lo, hi); }

int dirichlet_axis(const StripeDomain& dom) { return dom.dim == 2 ? 0 : 1; }

std::vector<double> axis_coords(double lo, double hi, int cells, bool graded, double s) {
    std::vector<double> c;
    if (!graded || !(lo < 0.0 && hi > 0.0)) {
        for (int i = 0; i <= cells; ++i) c.push_back(lo + (hi - lo) * i / cells);
        return c;
    }
    // symmetric layout with nodes at -s, 0, s and geometric refinement in
    // (0, s); cells are split half inner, half outer per side. The grading
    // depth is capped: cells below ~s/256 only add stiffness that throttles
    // the line search without changing the resolved energy.
    const int per_side = std::max(2, cells / 2);
    const int n_in = std::min(8, std::max(1, per_side / 2));
    const int n_out = std::max(1, per_side - n_in);
    std::vector<double> side;  // positive side, ascending, without 0
    for (int j = n_in - 1; j >= 1; --j) side.push_back(s * std::pow(0.5, j));
    side.push_back(s);
    for (int j = 1; j <= n_out; ++j) side.push_back(s + (hi - s) * j / n_out);
    c.push_back(0.0);
    for (double t : side) c.push_back(t);
    std::vector<double> full;
    for (auto it = c.rbegin(); it != c.rend(); ++it) full.push_back(-*it);
    full.pop_back();  // drop duplicate 0
    for (double t : c) full.push_back(t);
    return full;
}

std::size_t strip_nodes(const StripMesh& m, int dim) {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(m.nodes(a));
    return n;
}

std::size_t node_id(const StripMesh& m, int dim, const int* ij) {
    std::size_t id = 0;
    for (int a = 0; a < dim; ++a) id = id * static_cast<std::size_t>(m.nodes(a)) + static_cast<std::size_t>(ij[a]);
    return id;
}

struct CellRef {
    int strip;       // 0 or 1
    int ij[3];       // cell indices
};

std::vector<CellRef> all_cells(const GridDeformation& g) {
    std::vector<CellRef> cells;
    const int dim = g.domain.dim;
    for (int strip = 0; strip < 2; ++strip) {
        const StripMesh& m = g.mesh[static_cast<std::size_t>(strip)];
        const int c0 = m.cells(0), c1 = dim > 1 ? m.cells(1) : 1, c2 = dim > 2 ? m.cells(2) : 1;
        for (int i = 0; i < c0; ++i)
            for (int j = 0; j < c1; ++j)
                for (int k = 0; k < c2; ++k) {
                    CellRef c;
                    c.strip = strip;
                    c.ij[0] = i;
                    c.ij[1] = j;
                    c.ij[2] = k;
                    cells.push_back(c);
                }
    }
    return cells;
}

// 2-point Gauss positions on [0,1]
const double kGp[2] = {0.5 - 0.5 / 1.7320508075688772, 0.5 + 0.5 / 1.7320508075688772};

struct CellQuad {
    // per quadrature point: weight, and shape gradient for each corner
    // (constant bookkeeping recomputed per cell; d<=3, corners<=8, gp<=8)
    double weight[8];
    double dn[8][8][3];  // [gp][corner][axis]
    Vec corner_pos[8];   // nodal positions of the corners
    std::size_t corner_id[8];
    int ncorner = 0, ngp = 0;
};

void build_cell(const GridDeformation& g, const CellRef& c, CellQuad& q) {
    const int dim = g.domain.dim;
    const StripMesh& m = g.mesh[static_cast<std::size_t>(c.strip)];
    double lo[3], len[3];
    for (int a = 0; a < dim; ++a) {
        const auto& coords = m.coords[static_cast<std::size_t>(a)];
        lo[a] = coords[static_cast<std::size_t>(c.ij[a])];
        len[a] = coords[static_cast<std::size_t>(c.ij[a] + 1)] - lo[a];
    }
    q.ncorner = 1 << dim;
    q.ngp = 1 << dim;
    const std::size_t base = g.strip_offset(c.strip + 1);
    for (int corner = 0; corner < q.ncorner; ++corner) {
        int ij[3];
        for (int a = 0; a < dim; ++a) ij[a] = c.ij[a] + ((corner >> a) & 1);
        q.corner_id[corner] = base + node_id(m, dim, ij);
        q.corner_pos[corner] = g.pos[q.corner_id[corner]];
    }
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) vol *= len[a];
    for (int gp = 0; gp < q.ngp; ++gp) {
        double xi[3];
        for (int a = 0; a < dim; ++a) xi[a] = kGp[(gp >> a) & 1];
        q.weight[gp] = vol / q.ngp;
        for (int corner = 0; corner < q.ncorner; ++corner) {
            for (int a = 0; a < dim; ++a) {
                double dna = 1.0;
                for (int b = 0; b < dim; ++b) {
                    const int bit = (corner >> b) & 1;
                    const double nb = bit ? xi[b] : 1.0 - xi[b];
                    if (b == a)
                        dna *= (bit ? 1.0 : -1.0) / len[b];
                    else
                        dna *= nb;
                }
                q.dn[gp][corner][a] = dna;
            }
        }
    }
}

Mat cell_gradient_at(const CellQuad& q, int gp, int dim) {
    Mat f(dim);
    for (int corner = 0; corner < q.ncorner; ++corner)
        for (int r = 0; r < dim; ++r)
            for (int a = 0; a < dim; ++a) f(r, a) += q.corner_pos[corner][r] * q.dn[gp][corner][a];
    return f;
}

double cell_energy(const GridDeformation& g, const CellRef& c, const MaterialParams& mp, double wi) {
    CellQuad q;
    build_cell(g, c, q);
    const int dim = g.domain.dim;
    double sum = 0.0;
    for (int gp = 0; gp < q.ngp; ++gp) {
        Mat f = cell_gradient_at(q, gp, dim);
        const double w = energy_density(f, mp);
        if (!std::isfinite(w)) return kInf;
        sum += q.weight[gp] * (w - wi);
    }
    return sum;
}

bool cell_feasible(const GridDeformation& g, const CellRef& c) {
    CellQuad q;
    build_cell(g, c, q);
    const int dim = g.domain.dim;
    for (int gp = 0; gp < q.ngp; ++gp)
        if (!(det(cell_gradient_at(q, gp, dim)) > 0.0)) return false;
    return true;
}

Vec datum_value(const GridDeformation& g, int strip, const Vec& u) {
    // y0 in the local chart is the identity for both strips (strip 2 values
    // are Q u = x - xi, stored in absolute image coordinates)
    if (strip == 0) return u;
    return matvec(g.domain.Q, u);
}

}  // namespace

std::size_t GridDeformation::strip_offset(int strip) const {
    if (strip <= 1) return 0;
    return strip_nodes(mesh[0], domain.dim);
}

GridDeformation discretize(const DeformationFamily& family, const StripeDomain& dom,
                           std::array<int, 3> resolution, bool grade_toward_pinch) {
    GridDeformation g;
    g.domain = dom;
    const int dim = dom.dim;
    Vec lo, hi;
    chart_box(dom, lo, hi);
    const int pa = pinch_axis(dom);
    for (int strip = 0; strip < 2; ++strip) {
        StripMesh& m = g.mesh[static_cast<std::size_t>(strip)];
        for (int a = 0; a < dim; ++a) {
            const int cells = std::max(1, resolution[static_cast<std::size_t>(a)]);
            m.coords[static_cast<std::size_t>(a)] =
                axis_coords(lo[a], hi[a], cells, grade_toward_pinch && a == pa, dom.s);
        }
    }

    const std::size_t n0 = strip_nodes(g.mesh[0], dim);
    const std::size_t n1 = strip_nodes(g.mesh[1], dim);
    g.pos.resize(n0 + n1);
    g.dirichlet.assign(n0 + n1, 0);

    const int da = dirichlet_axis(dom);
    for (int strip = 0; strip < 2; ++strip) {
        const StripMesh& m = g.mesh[static_cast<std::size_t>(strip)];
        const std::size_t base = g.strip_offset(strip + 1);
        int ij[3] = {0, 0, 0};
        const int nn0 = m.nodes(0), nn1 = dim > 1 ? m.nodes(1) : 1, nn2 = dim > 2 ? m.nodes(2) : 1;
        for (ij[0] = 0; ij[0] < nn0; ++ij[0])
            for (ij[1] = 0; ij[1] < nn1; ++ij[1])
                for (ij[2] = 0; ij[2] < nn2; ++ij[2]) {
                    Vec u = Vec::zero(dim);
                    for (int a = 0; a < dim; ++a) u[a] = m.coords[static_cast<std::size_t>(a)][static_cast<std::size_t>(ij[a])];
                    const std::size_t id = base + node_id(m, dim, ij);
                    g.pos[id] = strip == 0 ? evaluate(family, u, dom).y
                                           : evaluate_in_s2_chart(family, u, dom).y;
                    const bool on_gamma = ij[da] == 0 || ij[da] == m.nodes(da) - 1;
                    if (on_gamma) {
                        g.dirichlet[id] = 1;
                        g.pos[id] = datum_value(g, strip, u);
                    }
                }
    }

    // feasibility repair: nudge nodes of degenerate cells toward the datum
    std::vector<CellRef> cells = all_cells(g);
    double t = 1.0 / (1 << 20);
    for (int round = 0; round < 64; ++round) {
        bool all_ok = true;
        for (const CellRef& c : cells) {
            if (cell_feasible(g, c)) continue;
            all_ok = false;
            CellQuad q;
            build_cell(g, c, q);
            const StripMesh& m = g.mesh[static_cast<std::size_t>(c.strip)];
            for (int corner = 0; corner < q.ncorner; ++corner) {
                const std::size_t id = q.corner_id[corner];
                if (g.dirichlet[id]) continue;
                int ij[3];
                for (int a = 0; a < dim; ++a) ij[a] = c.ij[a] + ((corner >> a) & 1);
                Vec u = Vec::zero(dim);
                for (int a = 0; a < dim; ++a) u[a] = m.coords[static_cast<std::size_t>(a)][static_cast<std::size_t>(ij[a])];
                const Vec y0 = datum_value(g, c.strip, u);
                g.pos[id] = (1.0 - t) * g.pos[id] + t * y0;
            }
        }
        if (all_ok) return g;
        t = std::min(1.0, t * 2.0);
    }
    fail(ErrorKind::Numerical, "discretize: could not repair degenerate cells");
}

double discrete_energy(const GridDeformation& g, const MaterialParams& mp, par::Exec exec) {
    const double wi = energy_at_identity(mp);
    std::vector<CellRef> cells = all_cells(g);
    std::vector<double> partial(cells.size());
    par::for_each_index(cells.size(), exec,
                        [&](std::size_t i) { partial[i] = cell_energy(g, cells[i], mp, wi); });
    double sum = 0.0;
    for (double v : partial) sum += v;
    return sum;
}

std::vector<Vec> discrete_energy_gradient(const GridDeformation& g, const MaterialParams& mp,
                                          par::Exec exec) {
    const int dim = g.domain.dim;
    std::vector<CellRef> cells = all_cells(g);
    const int ncorner = 1 << dim;
    std::vector<Vec> contrib(cells.size() * static_cast<std::size_t>(ncorner), Vec::zero(dim));
    par::for_each_index(cells.size(), exec, [&](std::size_t ci) {
        CellQuad q;
        build_cell(g, cells[ci], q);
        for (int gp = 0; gp < q.ngp; ++gp) {
            Mat f = cell_gradient_at(q, gp, dim);
            if (!(det(f) > 0.0)) continue;  // barrier handled by the energy
            Mat dw = energy_gradient(f, mp);
            for (int corner = 0; corner < q.ncorner; ++corner) {
                Vec gcol = Vec::zero(dim);
                for (int r = 0; r < dim; ++r) {
                    double s = 0.0;
                    for (int a = 0; a < dim; ++a) s += dw(r, a) * q.dn[gp][corner][a];
                    gcol[r] = s;
                }
                contrib[ci * static_cast<std::size_t>(ncorner) + static_cast<std::size_t>(corner)] =
                    contrib[ci * static_cast<std::size_t>(ncorner) + static_cast<std::size_t>(corner)] +
                    q.weight[gp] * gcol;
            }
        }
    });
    std::vector<Vec> grad(g.node_count(), Vec::zero(dim));
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        CellQuad q;
        build_cell(g, cells[ci], q);
        for (int corner = 0; corner < ncorner; ++corner) {
            const std::size_t id = q.corner_id[corner];
            grad[id] = grad[id] + contrib[ci * static_cast<std::size_t>(ncorner) + static_cast<std::size_t>(corner)];
        }
    }
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (g.dirichlet[i]) grad[i] = Vec::zero(dim);
    return grad;
}

namespace {

double grad_norm(const std::vector<Vec>& grad) {
    double s = 0.0;
    for (const Vec& v : grad) s += dot(v, v);
    return std::sqrt(s);
}

}  // namespace

MinimizeResult minimize(GridDeformation g, const MaterialParams& mp, const MinimizeOptions& opts,
                        par::Exec exec) {
    MinimizeResult out;
    double energy = discrete_energy(g, mp, exec);
    if (!std::isfinite(energy)) fail(ErrorKind::Parameter, "minimize: infeasible initial state");
    std::vector<Vec> grad = discrete_energy_gradient(g, mp, exec);
    double gnorm = grad_norm(grad);
    out.trace.push_back({0, energy, gnorm});

    // plain steepest descent; the accepted step is reused and regrown, so the
    // line search typically costs one energy evaluation per iteration
    double step = 1e-3 / std::max(gnorm, 1.0);

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        if (gnorm <= opts.grad_tol) break;

        bool accepted = false;
        double t = step;
        GridDeformation trial = g;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < g.pos.size(); ++i) trial.pos[i] = g.pos[i] - t * grad[i];
            const double e_new = discrete_energy(trial, mp, exec);
            if (std::isfinite(e_new) && e_new <= energy - opts.armijo_c * t * gnorm * gnorm) {
                g.pos.swap(trial.pos);
                energy = e_new;
                accepted = true;
                step = (t == step) ? 2.0 * t : t;  // regrow when the first try lands
                break;
            }
            t *= opts.backtrack;
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }
        grad = discrete_energy_gradient(g, mp, exec);
        gnorm = grad_norm(grad);
        out.trace.push_back({iter, energy, gnorm});
    }
    out.state = std::move(g);
    return out;
}

void write_checkpoint_csv(std::ostream& os, const GridDeformation& g) {
    const int dim = g.domain.dim;
    os << "#schema=checkpoint/v1\n";
    os << "strip,node";
    for (int a = 0; a < dim; ++a) os << ",x" << a;
    for (int a = 0; a < dim; ++a) os << ",y" << a;
    os << "\n";
    char buf[64];
    for (int strip = 0; strip < 2; ++strip) {
        const StripMesh& m = g.mesh[static_cast<std::size_t>(strip)];
        const std::size_t base = g.strip_offset(strip + 1);
        int ij[3] = {0, 0, 0};
        const int nn0 = m.nodes(0), nn1 = dim > 1 ? m.nodes(1) : 1, nn2 = dim > 2 ? m.nodes(2) : 1;
        for (ij[0] = 0; ij[0] < nn0; ++ij[0])
            for (ij[1] = 0; ij[1] < nn1; ++ij[1])
                for (ij[2] = 0; ij[2] < nn2; ++ij[2]) {
                    const std::size_t id = base + node_id(m, dim, ij);
                    os << strip + 1 << "," << id;
                    for (int a = 0; a < dim; ++a) {
                        Vec u = Vec::zero(dim);
                        for (int b = 0; b < dim; ++b)
                            u[b] = m.coords[static_cast<std::size_t>(b)][static_cast<std::size_t>(ij[b])];
                        const Vec x = strip == 0 ? u : push_forward(u, g.domain);
                        std::snprintf(buf, sizeof buf, ",%.17g", x[a]);
                        os << buf;
                    }
                    for (int a = 0; a < dim; ++a) {
                        std::snprintf(buf, sizeof buf, ",%.17g", g.pos[id][a]);
                        os << buf;
                    }
                    os << "\n";
                }
    }
}

}  // namespace lavlab
