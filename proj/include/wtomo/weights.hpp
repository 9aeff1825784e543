#pragma once

#include <span>
#include <vector>

#include "wtomo/types.hpp"

namespace wtomo {

/// Per-angle, per-voxel weights w[j][i], the diagonal entries of the stacked
/// diagonal blocks W_theta_j of the weight matrix W.
struct WeightField {
    int num_angles = 0;
    int num_voxels = 0;
    std::vector<double> w;  // angle-major, size num_angles * num_voxels

    WeightField() = default;
    WeightField(int omega, int v, double fill = 0.0)
        : num_angles(omega), num_voxels(v),
          w(static_cast<size_t>(omega) * v, fill) {}

    std::span<const double> row(int j) const {
        return {w.data() + static_cast<size_t>(j) * num_voxels,
                static_cast<size_t>(num_voxels)};
    }
    std::span<double> row(int j) {
        return {w.data() + static_cast<size_t>(j) * num_voxels,
                static_cast<size_t>(num_voxels)};
    }
    double at(int j, int i) const { return w[static_cast<size_t>(j) * num_voxels + i]; }
    double& at(int j, int i) { return w[static_cast<size_t>(j) * num_voxels + i]; }

    // Every column of W must be nonzero, i.e. sum_j w[j][i]^2 > 0 per voxel.
    void check_columns_nonzero() const;
};

/// Linear sensitivity ramp that rotates with the view: weight grows from
/// s_min on the detector side to s_max on the source side, normalized over
/// the span of voxel-center coordinates along the ray direction.
WeightField ramp_weights(const Geometry& g, double s_min, double s_max);

/// All weights equal to c (c = 1 collapses to the unweighted system).
WeightField constant_weights(const Geometry& g, double c);

/// Diagonal of (W^T W)^-1: entry i = 1 / sum_j w[j][i]^2.
std::vector<double> wtw_inverse_diagonal(const WeightField& w);

/// Numerical rank of the dense V*Omega x V*Omega matrix W W^T via SVD.
/// tolerance < 0 selects sigma_max * max(dims) * eps.
/// densify_cap guards the V*Omega dimension.
int wwt_rank(const WeightField& w, double tolerance = -1.0,
             int densify_cap = 4096);

}  // namespace wtomo
