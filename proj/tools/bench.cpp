// Benchmark: OpenMP kernels against the serial reference (same outputs,
// entry for entry).  Covers the grid solve and the germ profile quadrature.
#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cohomfield/germ.hpp"
#include "cohomfield/scenarios.hpp"
#include "cohomfield/solver.hpp"

using namespace cohomfield;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double timed(F&& fn) {
    const double t0 = now_s();
    fn();
    return now_s() - t0;
}

} // namespace

int main(int argc, char** argv) {
    int nx = 81, ny = 81;
    if (argc >= 3) {
        nx = std::atoi(argv[1]);
        ny = std::atoi(argv[2]);
    }
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif

    const Scenario s = builtin("ham-strip");
    const ScalarField g = ScalarField::from_text("1", false);
    const SeedData seed{0.0, [](double) { return 0.0; }};
    const Rect box{-2.0, 2.0, -2.0, 2.0};

    SolutionGrid serial, parallel;
    const double t_serial =
        timed([&] { serial = solve_on_grid_serial(s, g, Mode::Xi, seed, box, nx, ny); });
    const double t_parallel =
        timed([&] { parallel = solve_on_grid(s, g, Mode::Xi, seed, box, nx, ny); });

    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < serial.values.size(); ++i) {
        if (serial.status[i] != parallel.status[i] || serial.values[i] != parallel.values[i])
            ++mismatches;
    }
    std::printf("solve_on_grid %dx%d: serial %.3fs, parallel %.3fs, speedup %.2fx, mismatches %zu\n",
                nx, ny, t_serial, t_parallel, t_serial / t_parallel, mismatches);

    const SeparatrixPair pair = s.pairs.front();
    const ChartFn ghat = [](double xp, double yp) {
        return std::pow(xp * xp + yp * yp, -0.75);
    };
    GermConfig gcfg;
    GermProfile prof_s, prof_p;
    gcfg.parallel = false;
    const double t_ps = timed([&] { prof_s = phi_profile(pair, ghat, gcfg); });
    gcfg.parallel = true;
    const double t_pp = timed([&] { prof_p = phi_profile(pair, ghat, gcfg); });

    std::size_t pmis = 0;
    for (std::size_t i = 0; i < prof_s.phis.size(); ++i)
        if (prof_s.phis[i] != prof_p.phis[i]) ++pmis;
    std::printf("phi_profile (%d samples): serial %.3fs, parallel %.3fs, speedup %.2fx, mismatches %zu\n",
                gcfg.samples, t_ps, t_pp, t_ps / t_pp, pmis);

    return (mismatches == 0 && pmis == 0) ? 0 : 1;
}
