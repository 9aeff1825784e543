#include "wtomo/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wtomo {

namespace {
constexpr double kParamEps = 1e-12;
constexpr double kLengthEps = 1e-12;
}  // namespace

void trace_ray(const Geometry& g, double angle, double detector_offset,
               std::vector<int>& cols_out, std::vector<double>& vals_out) {
    cols_out.clear();
    vals_out.clear();

    const double h = g.voxel_size;
    const double wx = g.half_width();
    const double wy = g.half_height();
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    // Detector axis u, ray direction v (unit length, so ray parameters are
    // Euclidean distances).
    const double ox = detector_offset * ca;
    const double oy = detector_offset * sa;
    const double vx = -sa;
    const double vy = ca;

    // Clip the ray against the grid box.
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    if (std::abs(vx) < kParamEps) {
        if (ox < -wx || ox > wx) return;
    } else {
        double t0 = (-wx - ox) / vx;
        double t1 = (wx - ox) / vx;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
    }
    if (std::abs(vy) < kParamEps) {
        if (oy < -wy || oy > wy) return;
    } else {
        double t0 = (-wy - oy) / vy;
        double t1 = (wy - oy) / vy;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
    }
    if (!(tmax - tmin > kLengthEps)) return;

    // Entry cell.
    const double ex = ox + tmin * vx;
    const double ey = oy + tmin * vy;
    int ix = std::clamp(static_cast<int>(std::floor((ex + wx) / h)), 0,
                        g.num_voxels_x - 1);
    int iy = std::clamp(static_cast<int>(std::floor((ey + wy) / h)), 0,
                        g.num_voxels_y - 1);

    const int step_x = vx > 0 ? 1 : -1;
    const int step_y = vy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    const double t_delta_x = std::abs(vx) < kParamEps ? inf : h / std::abs(vx);
    const double t_delta_y = std::abs(vy) < kParamEps ? inf : h / std::abs(vy);

    double t_next_x = inf;
    if (std::abs(vx) >= kParamEps) {
        const double xb = -wx + (ix + (step_x > 0 ? 1 : 0)) * h;
        t_next_x = (xb - ox) / vx;
    }
    double t_next_y = inf;
    if (std::abs(vy) >= kParamEps) {
        const double yb = -wy + (iy + (step_y > 0 ? 1 : 0)) * h;
        t_next_y = (yb - oy) / vy;
    }

    double t_cur = tmin;
    while (t_cur < tmax - kLengthEps) {
        const double t_next = std::min({t_next_x, t_next_y, tmax});
        const double seg = t_next - t_cur;
        if (seg > kLengthEps) {
            cols_out.push_back(iy * g.num_voxels_x + ix);
            vals_out.push_back(seg);
        }
        // Advance across the crossed boundary; a corner crossing advances
        // both axes at once.
        bool moved = false;
        if (t_next_x <= t_next + kParamEps) {
            ix += step_x;
            t_next_x += t_delta_x;
            moved = true;
        }
        if (t_next_y <= t_next + kParamEps) {
            iy += step_y;
            t_next_y += t_delta_y;
            moved = true;
        }
        t_cur = t_next;
        if (!moved || ix < 0 || ix >= g.num_voxels_x || iy < 0 ||
            iy >= g.num_voxels_y)
            break;
    }
}

SystemBlock build_system_block(const Geometry& g, int angle_index) {
    g.validate();
    if (angle_index < 0 || angle_index >= g.num_angles())
        throw std::out_of_range("build_system_block: angle index out of range");

    const int n_bins = g.detector_bins_per_angle[angle_index];
    const double ds = g.detector_bin_size[angle_index];
    const double angle = g.angles[angle_index];

    SystemBlock blk;
    blk.angle_index = angle_index;
    blk.rows = n_bins;
    blk.cols = g.num_voxels();
    blk.row_ptr.reserve(n_bins + 1);
    blk.row_ptr.push_back(0);

    std::vector<int> cols;
    std::vector<double> vals;
    for (int n = 0; n < n_bins; ++n) {
        const double t = (n - (n_bins - 1) / 2.0) * ds;
        trace_ray(g, angle, t, cols, vals);
        if (cols.empty())
            throw std::runtime_error(
                "build_system_block: ray " + std::to_string(n) + " of view " +
                std::to_string(angle_index) +
                " misses the grid; exclude it from the geometry");
        blk.col_idx.insert(blk.col_idx.end(), cols.begin(), cols.end());
        blk.values.insert(blk.values.end(), vals.begin(), vals.end());
        blk.row_ptr.push_back(static_cast<int>(blk.col_idx.size()));
    }
    return blk;
}

BlockSystem build_block_system(const Geometry& g) {
    g.validate();
    BlockSystem bs;
    bs.grid_nx = g.num_voxels_x;
    bs.grid_ny = g.num_voxels_y;
    bs.blocks.resize(g.num_angles());
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < g.num_angles(); ++j)
        bs.blocks[j] = build_system_block(g, j);
    return bs;
}

namespace {

void check_dims(const BlockSystem& bs, const WeightField& w) {
    if (bs.num_angles() != w.num_angles || bs.voxels() != w.num_voxels)
        throw std::invalid_argument("block system / weight field dimension mismatch");
}

double weighted_row_dot(const SystemBlock& blk, int r,
                        std::span<const double> w_row, const double* x) {
    const auto cols = blk.row_cols(r);
    const auto vals = blk.row_vals(r);
    double acc = 0.0;
    for (size_t k = 0; k < cols.size(); ++k)
        acc += vals[k] * w_row[cols[k]] * x[cols[k]];
    return acc;
}

}  // namespace

Sinogram forward_project_serial(const BlockSystem& bs, const WeightField& w,
                                const ImageGrid& x) {
    check_dims(bs, w);
    if (static_cast<int>(x.size()) != bs.voxels())
        throw std::invalid_argument("forward_project: image size mismatch");

    Sinogram p;
    p.bins_per_angle.reserve(bs.num_angles());
    for (const auto& blk : bs.blocks) p.bins_per_angle.push_back(blk.rows);
    p.values.assign(bs.total_rows(), 0.0);

    int offset = 0;
    for (const auto& blk : bs.blocks) {
        const auto w_row = w.row(blk.angle_index);
        for (int r = 0; r < blk.rows; ++r)
            p.values[offset + r] = weighted_row_dot(blk, r, w_row, x.values.data());
        offset += blk.rows;
    }
    return p;
}

Sinogram forward_project(const BlockSystem& bs, const WeightField& w,
                         const ImageGrid& x) {
    check_dims(bs, w);
    if (static_cast<int>(x.size()) != bs.voxels())
        throw std::invalid_argument("forward_project: image size mismatch");

    Sinogram p;
    p.bins_per_angle.reserve(bs.num_angles());
    std::vector<int> offsets(bs.num_angles());
    int offset = 0;
    for (int j = 0; j < bs.num_angles(); ++j) {
        p.bins_per_angle.push_back(bs.blocks[j].rows);
        offsets[j] = offset;
        offset += bs.blocks[j].rows;
    }
    p.values.assign(offset, 0.0);

#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < bs.num_angles(); ++j) {
        const auto& blk = bs.blocks[j];
        const auto w_row = w.row(blk.angle_index);
        for (int r = 0; r < blk.rows; ++r)
            p.values[offsets[j] + r] =
                weighted_row_dot(blk, r, w_row, x.values.data());
    }
    return p;
}

ImageGrid back_project_serial(const BlockSystem& bs, const WeightField& w,
                              const Sinogram& p) {
    check_dims(bs, w);
    if (static_cast<int>(p.size()) != bs.total_rows())
        throw std::invalid_argument("back_project: sinogram size mismatch");

    ImageGrid x(bs.grid_nx, bs.grid_ny);
    int offset = 0;
    for (const auto& blk : bs.blocks) {
        const auto w_row = w.row(blk.angle_index);
        for (int r = 0; r < blk.rows; ++r) {
            const double pv = p.values[offset + r];
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k)
                x.values[cols[k]] += vals[k] * w_row[cols[k]] * pv;
        }
        offset += blk.rows;
    }
    return x;
}

ImageGrid back_project(const BlockSystem& bs, const WeightField& w,
                       const Sinogram& p) {
    check_dims(bs, w);
    if (static_cast<int>(p.size()) != bs.total_rows())
        throw std::invalid_argument("back_project: sinogram size mismatch");

    const int omega = bs.num_angles();
    const int v = bs.voxels();
    std::vector<int> offsets(omega);
    int offset = 0;
    for (int j = 0; j < omega; ++j) {
        offsets[j] = offset;
        offset += bs.blocks[j].rows;
    }

    // Per-angle partial images, reduced in fixed angle order so the result is
    // independent of the thread count.
    std::vector<std::vector<double>> partial(omega);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < omega; ++j) {
        const auto& blk = bs.blocks[j];
        const auto w_row = w.row(blk.angle_index);
        auto& acc = partial[j];
        acc.assign(v, 0.0);
        for (int r = 0; r < blk.rows; ++r) {
            const double pv = p.values[offsets[j] + r];
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k)
                acc[cols[k]] += vals[k] * w_row[cols[k]] * pv;
        }
    }

    ImageGrid x(bs.grid_nx, bs.grid_ny);
    for (int j = 0; j < omega; ++j)
        for (int i = 0; i < v; ++i) x.values[i] += partial[j][i];
    return x;
}

}  // namespace wtomo
