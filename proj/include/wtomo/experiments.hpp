#pragma once

#include <map>
#include <string>

#include "wtomo/linalg.hpp"
#include "wtomo/solvers.hpp"
#include "wtomo/types.hpp"
#include "wtomo/weights.hpp"

namespace wtomo {

/// The 22-ray toy geometry: 4x4 grid, views at {0, pi/4, pi/2, 3pi/4} with
/// 4/7/4/7 detector bins. Axis-aligned views use unit bins through the voxel
/// column/row centers; diagonal views use bins of sqrt(2)/2 so all 7 rays
/// cross the grid.
Geometry make_toy_geometry();

/// Wedge geometry: nx x ny grid, num_angles views uniform over [0, pi),
/// nx unit detector bins per view.
Geometry make_wedge_geometry(int nx, int ny, int num_angles);

struct ExperimentConfig {
    int grid_size = 256;
    int num_angles = 360;
    double s_min = 0.25;
    double s_max = 1.0;
    SolverConfig solver;
    std::string out_dir = "out";
    bool export_weights = false;  // per-angle weight PGMs
    double window_lo = 0.0;
    double window_hi = 1.0;
};

struct ToyPinvResult {
    PinvReport direct;
    PinvReport split;
    PinvReport product;
};

/// Reproduces the small pseudoinverse comparison: triangle phantom, ramp
/// weights, three inversion pathways. Writes images, metrics, and metadata
/// when out_dir is nonempty.
ToyPinvResult run_toy_pinv(const ExperimentConfig& cfg);

struct MethodResult {
    ImageGrid reconstruction;
    double rmse = 0.0;
    double ssim = 0.0;
};

struct WedgeResult {
    ImageGrid ground_truth;
    std::map<std::string, MethodResult> methods;  // bpf, wrong-psinv, iterative, iterative-tv
};

/// Reproduces the wedge experiment: ramp-weighted sinogram of the two-wedge
/// phantom, reconstructed with BPF, the wrong split pseudoinverse (matrix-
/// free), Kaczmarz, and Kaczmarz+TV. Writes images, the diagonal line-profile
/// CSV, a metrics table, and metadata when out_dir is nonempty.
WedgeResult run_wedge(const ExperimentConfig& cfg);

}  // namespace wtomo
