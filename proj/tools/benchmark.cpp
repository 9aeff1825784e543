// Timing comparison of the OpenMP projection kernels against the serial
// reference implementations.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "wtomo/experiments.hpp"
#include "wtomo/projector.hpp"
#include "wtomo/weights.hpp"

using namespace wtomo;

namespace {

double seconds_per_call(const auto& fn, int reps) {
    // one warm-up call, then the best of `reps` timed calls
    fn();
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        if (dt < best) best = dt;
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int grid = 256;
    int angles = 180;
    int reps = 5;
    if (argc > 1) grid = std::atoi(argv[1]);
    if (argc > 2) angles = std::atoi(argv[2]);
    if (argc > 3) reps = std::atoi(argv[3]);

    std::printf("geometry: %dx%d grid, %d views (best of %d runs)\n", grid,
                grid, angles, reps);

    const auto tb0 = std::chrono::steady_clock::now();
    const Geometry g = make_wedge_geometry(grid, grid, angles);
    const BlockSystem bs = build_block_system(g);
    const double build_s = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - tb0)
                               .count();
    std::printf("system build: %.3f s\n", build_s);

    const WeightField w = ramp_weights(g, 0.25, 1.0);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    ImageGrid x(grid, grid);
    for (double& v : x.values) v = dist(rng);
    Sinogram p(g);
    for (double& v : p.values) v = dist(rng);

    const double fwd_par =
        seconds_per_call([&] { forward_project(bs, w, x); }, reps);
    const double fwd_ser =
        seconds_per_call([&] { forward_project_serial(bs, w, x); }, reps);
    const double bwd_par =
        seconds_per_call([&] { back_project(bs, w, p); }, reps);
    const double bwd_ser =
        seconds_per_call([&] { back_project_serial(bs, w, p); }, reps);

    std::printf("%-18s %-12s %-12s %s\n", "kernel", "serial [ms]",
                "openmp [ms]", "speedup");
    std::printf("%-18s %-12.3f %-12.3f %.2fx\n", "forward_project",
                fwd_ser * 1e3, fwd_par * 1e3, fwd_ser / fwd_par);
    std::printf("%-18s %-12.3f %-12.3f %.2fx\n", "back_project",
                bwd_ser * 1e3, bwd_par * 1e3, bwd_ser / bwd_par);
    return 0;
}
