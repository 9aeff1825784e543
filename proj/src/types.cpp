#include "wtomo/types.hpp"

#include <cmath>

namespace wtomo {

void Geometry::validate() const {
    if (num_voxels_x <= 0 || num_voxels_y <= 0)
        throw std::invalid_argument("Geometry: voxel counts must be positive");
    if (voxel_size <= 0.0)
        throw std::invalid_argument("Geometry: voxel_size must be positive");
    if (angles.empty()) throw std::invalid_argument("Geometry: no angles");
    for (double a : angles)
        if (!(a >= 0.0 && a < M_PI))
            throw std::invalid_argument("Geometry: angles must lie in [0, pi)");
    if (detector_bins_per_angle.size() != angles.size())
        throw std::invalid_argument(
            "Geometry: detector_bins_per_angle must have one entry per angle");
    if (detector_bin_size.size() != angles.size())
        throw std::invalid_argument(
            "Geometry: detector_bin_size must have one entry per angle");
    for (int b : detector_bins_per_angle)
        if (b <= 0) throw std::invalid_argument("Geometry: bin counts must be positive");
    for (double s : detector_bin_size)
        if (s <= 0.0) throw std::invalid_argument("Geometry: bin sizes must be positive");
}

Geometry make_geometry(int nx, int ny, std::vector<double> angles,
                       int bins_per_angle, double voxel_size, double bin_size) {
    Geometry g;
    g.num_voxels_x = nx;
    g.num_voxels_y = ny;
    g.voxel_size = voxel_size;
    g.angles = std::move(angles);
    g.detector_bins_per_angle.assign(g.angles.size(), bins_per_angle);
    g.detector_bin_size.assign(g.angles.size(), bin_size);
    g.validate();
    return g;
}

void ImageGrid::check_finite(const char* where) const {
    for (double v : values)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string(where) + ": non-finite image value");
}

void Sinogram::check_finite(const char* where) const {
    for (double v : values)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string(where) + ": non-finite sinogram value");
}

}  // namespace wtomo
