#pragma once

#include <span>
#include <vector>

#include "wtomo/types.hpp"
#include "wtomo/weights.hpp"

namespace wtomo {

/// Sparse per-angle system matrix A_theta in CSR form, shape N_j x V.
/// Entry (n, i) is the intersection length of ray n with voxel i.
struct SystemBlock {
    int angle_index = 0;
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;   // size rows+1
    std::vector<int> col_idx;
    std::vector<double> values;

    std::span<const int> row_cols(int r) const {
        return {col_idx.data() + row_ptr[r],
                static_cast<size_t>(row_ptr[r + 1] - row_ptr[r])};
    }
    std::span<const double> row_vals(int r) const {
        return {values.data() + row_ptr[r],
                static_cast<size_t>(row_ptr[r + 1] - row_ptr[r])};
    }
};

/// The block-diagonal system matrix B, kept as its per-angle blocks.
struct BlockSystem {
    int grid_nx = 0;
    int grid_ny = 0;
    std::vector<SystemBlock> blocks;

    int num_angles() const { return static_cast<int>(blocks.size()); }
    int total_rows() const {
        int n = 0;
        for (const auto& b : blocks) n += b.rows;
        return n;
    }
    int voxels() const { return blocks.empty() ? 0 : blocks[0].cols; }
};

/// Intersection lengths of one ray with the grid, Siddon-style traversal.
/// The ray for view angle theta and signed detector offset t runs along
/// direction (-sin t, cos t) through the point t * (cos t, sin t).
/// Returns an empty result if the ray misses the grid.
void trace_ray(const Geometry& g, double angle, double detector_offset,
               std::vector<int>& cols_out, std::vector<double>& vals_out);

/// Exact ray/pixel intersection system matrix for one view.
/// Throws if any ray misses the grid (such bins must be excluded when the
/// geometry is constructed).
SystemBlock build_system_block(const Geometry& g, int angle_index);

/// All per-angle blocks; construction is independent per angle.
BlockSystem build_block_system(const Geometry& g);

/// p = B W x, matrix-free over the per-angle blocks.
Sinogram forward_project(const BlockSystem& bs, const WeightField& w,
                         const ImageGrid& x);
Sinogram forward_project_serial(const BlockSystem& bs, const WeightField& w,
                                const ImageGrid& x);

/// x = W^T B^T p, the adjoint of forward_project.
ImageGrid back_project(const BlockSystem& bs, const WeightField& w,
                       const Sinogram& p);
ImageGrid back_project_serial(const BlockSystem& bs, const WeightField& w,
                              const Sinogram& p);

}  // namespace wtomo
