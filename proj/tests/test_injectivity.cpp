#include <doctest.h>

#include <cmath>

#include "lavlab/errors.hpp"
#include "lavlab/injectivity.hpp"

using namespace lavlab;

TEST_CASE("cn: boundary datum violated with the exact overlap deficit") {
    MaterialParams mp = make_material(2, 3.0, 2.0);
    const double s = 0.25;
    StripeDomain dom = make_domain(2, s);
    CNReport rep = cn_check(default_family(FamilyKind::BoundaryDatum, mp), dom, mp, s / 64.0);
    CHECK(rep.verdict == CNVerdict::Violated);
    CHECK(rep.bulk_integral == doctest::Approx(2.0).epsilon(1e-12));
    // overlap square (-s,s)^2 is doubly covered: |y0(Omega)| = 8s - 4s^2
    const double deficit = rep.bulk_integral - rep.image_measure_estimate;
    CHECK(std::abs(deficit - 4.0 * s * s) <= 0.05 * 4.0 * s * s);
    CHECK(rep.image_measure_lower <= rep.image_measure_upper);
    CHECK(rep.image_measure_estimate >= rep.image_measure_lower - 1e-12);
    CHECK(rep.image_measure_estimate <= rep.image_measure_upper + 1e-12);
}

TEST_CASE("cn: admissible pinch satisfied, bypass satisfied with near-equality") {
    MaterialParams mp = make_material(2, 3.0, 2.0);
    const double s = 0.25;
    StripeDomain dom = make_domain(2, s);
    const double h = s / 64.0;

    CNReport pinch = cn_check(default_family(FamilyKind::CrossPinch2D, mp), dom, mp, h);
    CHECK(pinch.verdict == CNVerdict::Satisfied);
    // bulk equals the image measure for the a.e.-injective pinch
    CHECK(pinch.bulk_integral >= pinch.image_measure_lower - 2.0 * h);
    CHECK(pinch.bulk_integral <= pinch.image_measure_upper + 2.0 * h);

    CNReport bypass = cn_check(default_family(FamilyKind::Bypass2D, mp), dom, mp, h);
    CHECK(bypass.verdict == CNVerdict::Satisfied);
    CHECK(bypass.bulk_integral == doctest::Approx(2.0).epsilon(1e-12));  // det = 1
    const double bracket = bypass.image_measure_upper - bypass.image_measure_lower;
    CHECK(std::abs(bypass.bulk_integral - bypass.image_measure_estimate) <= bracket + 1e-12);
    CHECK(bypass.image_measure_lower <= 2.0);
    CHECK(bypass.image_measure_upper >= 2.0);
}

TEST_CASE("cn in 3D: pinch and bypass satisfied, datum overlap measured") {
    MaterialParams mp = make_material(3, 3.2, 2.2);
    const double s = 0.25;
    StripeDomain dom = make_domain(3, s);
    const double h = s / 8.0;

    CNReport pinch = cn_check(default_family(FamilyKind::CrossPinch3D, mp), dom, mp, h);
    CHECK(pinch.verdict == CNVerdict::Satisfied);

    CNReport bypass = cn_check(default_family(FamilyKind::Bypass3D, mp), dom, mp, h);
    CHECK(bypass.verdict == CNVerdict::Satisfied);
    CHECK(bypass.bulk_integral == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(bypass.image_measure_lower <= 4.0 + 1e-12);
    CHECK(bypass.image_measure_upper >= 4.0 - 1e-12);

    CNReport datum = cn_check(default_family(FamilyKind::BoundaryDatum, mp), dom, mp, h);
    // overlap cuboid has volume 8 s^2; the center-rule estimate sees it even
    // when the coarse-h bracket cannot certify a violation
    const double deficit = datum.bulk_integral - datum.image_measure_estimate;
    CHECK(std::abs(deficit - 8.0 * s * s) <= 0.1 * 8.0 * s * s);
}

TEST_CASE("distortion: identity constant, pinch threshold, bypass bounded") {
    QuadratureSpec spec;
    MaterialParams mp = make_material(2, 3.0, 2.0);
    StripeDomain dom = make_domain(2, 0.25);

    // identity-gradient family: K = d exactly, integral d^eta |Omega|
    DeformationFamily datum = default_family(FamilyKind::BoundaryDatum, mp);
    DistortionReport id_rep = distortion_integral(datum, dom, 1.5, spec);
    CHECK(id_rep.flag == DistortionFlag::Finite);
    CHECK(id_rep.integral_estimates.back() ==
          doctest::Approx(std::pow(2.0, 1.5) * 2.0).epsilon(1e-10));

    DeformationFamily pinch = default_family(FamilyKind::CrossPinch2D, mp);
    DistortionReport low = distortion_integral(pinch, dom, 0.5, spec);
    CHECK(low.flag == DistortionFlag::Finite);
    DistortionReport high = distortion_integral(pinch, dom, 1.0, spec);
    CHECK(high.flag == DistortionFlag::Divergent);
    // estimates nondecreasing under refinement (nonnegative integrand)
    for (std::size_t i = 1; i < low.integral_estimates.size(); ++i)
        CHECK(low.integral_estimates[i] >=
              low.integral_estimates[i - 1] - 1e-10 * std::abs(low.integral_estimates[i]));

    // near the pinch K ~ |x1|^{alpha-beta-1}; threshold 1/(1+beta-alpha)
    const double expected = 1.0 / (1.0 + 0.75 - 0.7);
    const double located = distortion_threshold(pinch, dom, 0.5, 1.3, spec);
    CHECK(std::abs(located - expected) <= 0.05);

    DeformationFamily bypass = default_family(FamilyKind::Bypass2D, mp);
    for (double eta : {1.0, 2.0, 4.0})
        CHECK(distortion_integral(bypass, dom, eta, spec).flag == DistortionFlag::Finite);
}

TEST_CASE("section arc lengths against hand values") {
    MaterialParams mp = make_material(2, 3.0, 2.0);
    const double s = 0.25;
    StripeDomain dom = make_domain(2, s);

    CHECK(section_arclength(default_family(FamilyKind::BoundaryDatum, mp), dom, 0.1, 1, 32) ==
          doctest::Approx(2.0).epsilon(1e-10));

    // bypass strip-2 section at sigma=0: straight segments of slope k
    const double k = (1.0 + s) / (1.0 - 2.0 * s);
    const double len = section_arclength(default_family(FamilyKind::Bypass2D, mp), dom, 0.0, 2, 32);
    CHECK(len == doctest::Approx(2.0 * std::sqrt(1.0 + k * k)).epsilon(1e-10));
    CHECK(len >= 2.0 * std::sqrt(2.0) * (1.0 - s));

    // the pinch family defeats the Lipschitz stretching bound
    const double pinch_len =
        section_arclength(default_family(FamilyKind::CrossPinch2D, mp), dom, 0.0, 1, 32);
    CHECK(pinch_len == doctest::Approx(2.0).epsilon(1e-8));  // 2(s^a + 1 - s^a)
    CHECK(pinch_len < 2.0 * std::sqrt(2.0) * (1.0 - s));

    CHECK_THROWS_AS(section_arclength(default_family(FamilyKind::BoundaryDatum, mp), dom, 0.3, 1, 32),
                    Error);
}

TEST_CASE("miranda field: closed form for the datum, outward signs") {
    MaterialParams mp = make_material(3, 3.2, 2.2);
    const double s = 0.25;
    StripeDomain dom = make_domain(3, s);
    DeformationFamily datum = default_family(FamilyKind::BoundaryDatum, mp);
    const double sigma = 0.1 * s;

    for (double x1 : {-0.7, 0.0, 0.4})
        for (double t1 : {-0.9, 0.1, 0.8})
            for (double t2 : {-0.8, 0.0, 0.6}) {
                Vec g = miranda_g(datum, sigma, x1, t1, t2, dom);
                CHECK(g[0] == doctest::Approx(x1).epsilon(1e-14));
                CHECK(g[1] == doctest::Approx(t1 - sigma).epsilon(1e-13));
                CHECK(g[2] == doctest::Approx(sigma + t2).epsilon(1e-13));
            }

    // outward pointing on the six faces
    for (double a : {-0.5, 0.5}) {
        CHECK(miranda_g(datum, sigma, -1.0, a, a, dom)[0] < 0.0);
        CHECK(miranda_g(datum, sigma, 1.0, a, a, dom)[0] > 0.0);
        CHECK(miranda_g(datum, sigma, a, -1.0, a, dom)[1] < 0.0);
        CHECK(miranda_g(datum, sigma, a, 1.0, a, dom)[1] > 0.0);
        CHECK(miranda_g(datum, sigma, a, a, -1.0, dom)[2] < 0.0);
        CHECK(miranda_g(datum, sigma, a, a, 1.0, dom)[2] > 0.0);
    }
}

TEST_CASE("miranda field is continuous: grid jumps shrink at the Holder rate") {
    MaterialParams mp = make_material(3, 3.2, 2.2);
    const double s = 0.25;
    StripeDomain dom = make_domain(3, s);
    DeformationFamily pinch = default_family(FamilyKind::CrossPinch3D, mp);
    const double sigma = 0.1 * s;

    auto max_jump = [&](int n) {
        double worst = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                for (int k = 0; k + 1 <= n; ++k) {
                    const double x1 = -1.0 + 2.0 * i / n;
                    const double t1 = -1.0 + 2.0 * j / n;
                    const double a = -1.0 + 2.0 * k / n;
                    const double b = -1.0 + 2.0 * (k + 1) / n;
                    // vary each parameter axis in turn
                    worst = std::max(worst, norm(miranda_g(pinch, sigma, b, t1, x1, dom) -
                                                 miranda_g(pinch, sigma, a, t1, x1, dom)));
                    worst = std::max(worst, norm(miranda_g(pinch, sigma, x1, b, t1, dom) -
                                                 miranda_g(pinch, sigma, x1, a, t1, dom)));
                    worst = std::max(worst, norm(miranda_g(pinch, sigma, x1, t1, b, dom) -
                                                 miranda_g(pinch, sigma, x1, t1, a, dom)));
                }
        return worst;
    };
    const double coarse = max_jump(16);
    const double fine = max_jump(32);
    CHECK(fine < coarse);
    // jumps decay at least like h^gamma with gamma = 1 - 2/p
    const double gamma = 1.0 - 2.0 / mp.p;
    CHECK(fine <= coarse * std::pow(0.5, gamma) * 1.05);
}

TEST_CASE("self-intersection witnesses: datum closed form, pinch segment, bypass none") {
    MaterialParams mp = make_material(3, 3.2, 2.2);
    const double s = 0.25;
    StripeDomain dom = make_domain(3, s);
    const double sigma = 0.1 * s;

    auto datum_witness =
        find_self_intersection(default_family(FamilyKind::BoundaryDatum, mp), dom, sigma, 32);
    REQUIRE(datum_witness.has_value());
    CHECK(datum_witness->mismatch <= 1e-8);
    CHECK(std::abs(datum_witness->param[0] - 0.0) <= 1e-6);
    CHECK(std::abs(datum_witness->param[1] - sigma) <= 1e-6);
    CHECK(std::abs(datum_witness->param[2] + sigma) <= 1e-6);
    CHECK(std::abs(datum_witness->image[0]) <= 1e-6);
    CHECK(std::abs(datum_witness->image[1] - sigma) <= 1e-6);
    CHECK(std::abs(datum_witness->image[2] - sigma) <= 1e-6);

    auto pinch_witness =
        find_self_intersection(default_family(FamilyKind::CrossPinch3D, mp), dom, sigma, 32);
    REQUIRE(pinch_witness.has_value());
    CHECK(pinch_witness->mismatch <= 1e-8);
    // the intersection value lies on the pinch image segment (-1,1) x {0} x {0}
    CHECK(std::abs(pinch_witness->image[1]) <= 1e-5);
    CHECK(std::abs(pinch_witness->image[2]) <= 1e-5);

    auto none = find_self_intersection(default_family(FamilyKind::Bypass3D, mp), dom, sigma, 64);
    CHECK_FALSE(none.has_value());
}
