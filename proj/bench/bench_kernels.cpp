// Benchmark of the OpenMP kernels against the serial reference paths:
// graded energy quadrature and the CN rasterizer. Results must agree
// bit-for-bit; the timing difference is the point of the comparison.

#include <chrono>
#include <cstdio>

#include "lavlab/injectivity.hpp"
#include "lavlab/quadrature.hpp"

using namespace lavlab;

namespace {

template <class F>
double time_ms(F&& f, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    const MaterialParams mp = make_material(2, 3.0, 2.0);
    const StripeDomain dom = make_domain(2, 1.0 / 64.0);
    const DeformationFamily pinch = default_family(FamilyKind::CrossPinch2D, mp);
    const QuadratureSpec spec;

    std::printf("threads (LAVLAB_THREADS, 0=auto): %d\n", par::max_threads());

    double serial_value = 0.0, parallel_value = 0.0;
    const double t_serial = time_ms(
        [&] { serial_value = integrate_energy(pinch, dom, mp, spec, par::Exec::Serial).total.value; }, 3);
    const double t_parallel = time_ms(
        [&] { parallel_value = integrate_energy(pinch, dom, mp, spec, par::Exec::Parallel).total.value; }, 3);
    std::printf("energy quadrature: serial %8.2f ms  parallel %8.2f ms  speedup %.2fx  %s\n", t_serial,
                t_parallel, t_serial / t_parallel,
                serial_value == parallel_value ? "bitwise equal" : "MISMATCH");

    const StripeDomain dom_cn = make_domain(2, 0.25);
    CNReport cn_serial, cn_parallel;
    const double t_cn_serial = time_ms(
        [&] { cn_serial = cn_check(pinch, dom_cn, mp, 0.25 / 64.0, par::Exec::Serial); }, 2);
    const double t_cn_parallel = time_ms(
        [&] { cn_parallel = cn_check(pinch, dom_cn, mp, 0.25 / 64.0, par::Exec::Parallel); }, 2);
    const bool cn_equal = cn_serial.bulk_integral == cn_parallel.bulk_integral &&
                          cn_serial.image_measure_lower == cn_parallel.image_measure_lower &&
                          cn_serial.image_measure_upper == cn_parallel.image_measure_upper;
    std::printf("cn rasterization:  serial %8.2f ms  parallel %8.2f ms  speedup %.2fx  %s\n",
                t_cn_serial, t_cn_parallel, t_cn_serial / t_cn_parallel,
                cn_equal ? "bitwise equal" : "MISMATCH");
    return 0;
}
