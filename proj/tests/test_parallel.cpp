#include <doctest.h>

#include "lavlab/injectivity.hpp"
#include "lavlab/minimize.hpp"
#include "lavlab/quadrature.hpp"

using namespace lavlab;

// The OpenMP kernels write to disjoint slots and reduce in fixed index
// order, so the parallel results must agree with the serial reference
// bit for bit.

TEST_CASE("energy quadrature: parallel equals serial bitwise") {
    MaterialParams mp = make_material(2, 3.0, 2.0);
    StripeDomain dom = make_domain(2, 0.125);
    QuadratureSpec spec;
    DeformationFamily pinch = default_family(FamilyKind::CrossPinch2D, mp);
    EnergyBreakdown serial = integrate_energy(pinch, dom, mp, spec, par::Exec::Serial);
    EnergyBreakdown parallel = integrate_energy(pinch, dom, mp, spec, par::Exec::Parallel);
    CHECK(serial.total.value == parallel.total.value);
    for (int i = 0; i < 4; ++i) CHECK(serial.region[i].value == parallel.region[i].value);
    CHECK(serial.total.error_estimate == parallel.total.error_estimate);
}

TEST_CASE("cn rasterizer: parallel equals serial bitwise") {
    MaterialParams mp = make_material(2, 3.0, 2.0);
    StripeDomain dom = make_domain(2, 0.25);
    DeformationFamily bypass = default_family(FamilyKind::Bypass2D, mp);
    CNReport serial = cn_check(bypass, dom, mp, 0.25 / 32.0, par::Exec::Serial);
    CNReport parallel = cn_check(bypass, dom, mp, 0.25 / 32.0, par::Exec::Parallel);
    CHECK(serial.bulk_integral == parallel.bulk_integral);
    CHECK(serial.image_measure_lower == parallel.image_measure_lower);
    CHECK(serial.image_measure_upper == parallel.image_measure_upper);
    CHECK(serial.image_measure_estimate == parallel.image_measure_estimate);
    CHECK(serial.verdict == parallel.verdict);
}

TEST_CASE("discrete energy and gradient: parallel equals serial bitwise") {
    MaterialParams mp = make_material(2, 3.0, 2.0);
    StripeDomain dom = make_domain(2, 0.125);
    GridDeformation g = discretize(default_family(FamilyKind::CrossPinch2D, mp), dom, {32, 8, 0}, true);
    CHECK(discrete_energy(g, mp, par::Exec::Serial) == discrete_energy(g, mp, par::Exec::Parallel));
    std::vector<Vec> gs = discrete_energy_gradient(g, mp, par::Exec::Serial);
    std::vector<Vec> gp = discrete_energy_gradient(g, mp, par::Exec::Parallel);
    REQUIRE(gs.size() == gp.size());
    for (std::size_t i = 0; i < gs.size(); ++i)
        for (int a = 0; a < 2; ++a) CHECK(gs[i][a] == gp[i][a]);
}

TEST_CASE("thread cap plumbing") {
    const int before = par::max_threads();
    par::set_threads(3);
    CHECK(par::max_threads() == 3);
    par::set_threads(0);
    CHECK(par::max_threads() == 0);
    par::set_threads(before);
}
