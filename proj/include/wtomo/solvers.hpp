#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wtomo/projector.hpp"
#include "wtomo/types.hpp"
#include "wtomo/weights.hpp"

namespace wtomo {

enum class RowOrder { Sequential, AngleInterleaved };

struct SolverConfig {
    double relaxation = 0.5;   // scales the Kaczmarz correction, in (0, 2)
    int iterations = 100;      // full sweeps over all rows
    double tv_weight = 0.0;    // lambda; 0 disables the TV step
    double tv_epsilon = 1e-6;  // smoothing of the isotropic TV
    double tv_initial_step = 1.0;
    double tv_shrink = 0.5;
    double tv_sufficient_decrease = 1e-4;
    RowOrder row_order = RowOrder::Sequential;
    long rng_seed = 0;  // reserved; unused by the deterministic orderings

    void validate() const;
};

struct SolveTrace {
    std::vector<double> objective;  // 0.5 ||BWx - p||^2 after each sweep
    std::vector<double> rmse;       // vs ground truth, empty when none given
    std::vector<std::string> diagnostics;  // degenerate rows etc.
    ImageGrid final_image;
};

/// 0.5 * ||B W x - p||^2, matrix-free.
double objective(const BlockSystem& bs, const WeightField& w,
                 const ImageGrid& x, const Sinogram& p);

/// One Kaczmarz row update:
///   x += relaxation * (p_i - b_i W x) / (b_i W W^T b_i^T) * W^T b_i^T.
/// Returns false (and leaves x unchanged) when the denominator is zero.
bool kaczmarz_step(std::vector<double>& x, std::span<const int> row_cols,
                   std::span<const double> row_vals,
                   std::span<const double> w_row, double p_i,
                   double relaxation);

SolveTrace solve_kaczmarz(const BlockSystem& bs, const WeightField& w,
                          const Sinogram& p, const SolverConfig& cfg,
                          const ImageGrid* ground_truth = nullptr);

/// Kaczmarz sweep followed by a backtracking gradient step on the smoothed
/// isotropic TV; with tv_weight == 0 this is exactly solve_kaczmarz.
SolveTrace solve_kaczmarz_tv(const BlockSystem& bs, const WeightField& w,
                             const Sinogram& p, const SolverConfig& cfg,
                             const ImageGrid* ground_truth = nullptr);

/// Smoothed isotropic TV (forward differences, replicate boundary) and its
/// gradient.
double tv_value(const ImageGrid& x, double epsilon);
ImageGrid tv_gradient(const ImageGrid& x, double epsilon);

struct BpfConfig {
    double cg_tolerance = 1e-8;  // relative residual
    int cg_max_iterations = 2000;
    int dense_voxel_cap = 1024;  // below this V, invert A^T A densely
};

/// Weight-ignorant baseline x = (A^T A)^-1 A^T p with A the stacked
/// unweighted per-angle blocks. Dense solve for small grids, matrix-free
/// conjugate gradient otherwise.
ImageGrid solve_bpf(const BlockSystem& bs, const Sinogram& p,
                    const BpfConfig& cfg = {});

/// W^ddagger B^dagger p evaluated matrix-free: per-angle conjugate gradient
/// on A_theta A_theta^T, then the diagonal column-norm inverse of W^T W.
ImageGrid solve_wrong_pinv(const BlockSystem& bs, const WeightField& w,
                           const Sinogram& p, const BpfConfig& cfg = {});

}  // namespace wtomo
