#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wtomo {

/// 2D parallel-beam acquisition geometry.
///
/// The grid center is the rotation axis. Voxel (ix, iy) has center
///   ((ix - (nx-1)/2) * voxel_size, (iy - (ny-1)/2) * voxel_size).
/// The detector is centered on the rotation axis and rotates with the view
/// angle; bin n of view j has signed offset (n - (N_j-1)/2) * bin size.
struct Geometry {
    int num_voxels_x = 0;
    int num_voxels_y = 0;
    double voxel_size = 1.0;
    std::vector<double> angles;                  // radians, in [0, pi)
    std::vector<int> detector_bins_per_angle;    // N_j, one per angle
    std::vector<double> detector_bin_size;       // one per angle

    int num_voxels() const { return num_voxels_x * num_voxels_y; }
    int num_angles() const { return static_cast<int>(angles.size()); }

    int total_rays() const {
        int n = 0;
        for (int b : detector_bins_per_angle) n += b;
        return n;
    }

    // First sinogram row of view j.
    int row_offset(int j) const {
        int n = 0;
        for (int k = 0; k < j; ++k) n += detector_bins_per_angle[k];
        return n;
    }

    // Half-extent of the grid (distance from center to a grid corner edge).
    double half_width() const { return 0.5 * num_voxels_x * voxel_size; }
    double half_height() const { return 0.5 * num_voxels_y * voxel_size; }

    void validate() const;
};

/// Uniform-bin-size convenience constructor.
Geometry make_geometry(int nx, int ny, std::vector<double> angles,
                       int bins_per_angle, double voxel_size = 1.0,
                       double bin_size = 1.0);

inline int flatten_index(int ix, int iy, const Geometry& g) {
    if (ix < 0 || ix >= g.num_voxels_x || iy < 0 || iy >= g.num_voxels_y)
        throw std::out_of_range("flatten_index: voxel (" + std::to_string(ix) +
                                "," + std::to_string(iy) + ") outside grid");
    return iy * g.num_voxels_x + ix;
}

inline std::pair<int, int> unflatten_index(int i, const Geometry& g) {
    if (i < 0 || i >= g.num_voxels())
        throw std::out_of_range("unflatten_index: voxel index out of range");
    return {i % g.num_voxels_x, i / g.num_voxels_x};
}

/// 2D voxel field flattened row-major (y-major, x-minor), length V.
struct ImageGrid {
    int nx = 0;
    int ny = 0;
    std::vector<double> values;

    ImageGrid() = default;
    ImageGrid(int nx_, int ny_, double fill = 0.0)
        : nx(nx_), ny(ny_), values(static_cast<size_t>(nx_) * ny_, fill) {}

    double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * nx + ix]; }
    double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * nx + ix]; }
    size_t size() const { return values.size(); }

    void check_finite(const char* where) const;
};

/// Stacked projections, angle-major: all bins of view 0, then view 1, ...
struct Sinogram {
    std::vector<int> bins_per_angle;
    std::vector<double> values;

    Sinogram() = default;
    explicit Sinogram(const Geometry& g)
        : bins_per_angle(g.detector_bins_per_angle),
          values(g.total_rays(), 0.0) {}

    size_t size() const { return values.size(); }

    int row_offset(int j) const {
        int n = 0;
        for (int k = 0; k < j; ++k) n += bins_per_angle[k];
        return n;
    }

    double& at(int j, int n) { return values[row_offset(j) + n]; }
    double at(int j, int n) const { return values[row_offset(j) + n]; }

    void check_finite(const char* where) const;
};

/// Row-major dense matrix, the backing store for desk-scale pinv analysis.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> entries;

    DenseMatrix() = default;
    DenseMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), entries(static_cast<size_t>(r) * c, fill) {}

    double& at(int r, int c) { return entries[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return entries[static_cast<size_t>(r) * cols + c]; }
};

}  // namespace wtomo
