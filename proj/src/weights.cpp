#include "wtomo/weights.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace wtomo {

void WeightField::check_columns_nonzero() const {
    for (int i = 0; i < num_voxels; ++i) {
        double s = 0.0;
        for (int j = 0; j < num_angles; ++j) s += at(j, i) * at(j, i);
        if (!(s > 0.0))
            throw std::runtime_error("WeightField: column of W is zero at voxel " +
                                     std::to_string(i));
    }
}

WeightField ramp_weights(const Geometry& g, double s_min, double s_max) {
    g.validate();
    if (s_min < 0.0 || s_max <= s_min)
        throw std::invalid_argument("ramp_weights: require 0 <= s_min < s_max");

    const int nx = g.num_voxels_x;
    const int ny = g.num_voxels_y;
    const int v = g.num_voxels();
    const int omega = g.num_angles();
    WeightField wf(omega, v);

    for (int j = 0; j < omega; ++j) {
        const double ca = std::cos(g.angles[j]);
        const double sa = std::sin(g.angles[j]);
        // Rays travel along (-sa, ca); the source sits on the opposite side,
        // so the coordinate toward the source is d = (sa, -ca) . r.
        auto coord = [&](int ix, int iy) {
            const double x = (ix - (nx - 1) / 2.0) * g.voxel_size;
            const double y = (iy - (ny - 1) / 2.0) * g.voxel_size;
            return sa * x - ca * y;
        };
        double d_lo = std::numeric_limits<double>::infinity();
        double d_hi = -d_lo;
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double d = coord(ix, iy);
                d_lo = std::min(d_lo, d);
                d_hi = std::max(d_hi, d);
            }
        const double span = d_hi - d_lo;
        auto row = wf.row(j);
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double frac =
                    span > 0.0 ? (coord(ix, iy) - d_lo) / span : 0.5;
                row[iy * nx + ix] = s_min + (s_max - s_min) * frac;
            }
    }
    return wf;
}

WeightField constant_weights(const Geometry& g, double c) {
    g.validate();
    if (c == 0.0)
        throw std::invalid_argument("constant_weights: c = 0 zeroes every column of W");
    return WeightField(g.num_angles(), g.num_voxels(), c);
}

std::vector<double> wtw_inverse_diagonal(const WeightField& w) {
    std::vector<double> d(w.num_voxels);
    for (int i = 0; i < w.num_voxels; ++i) {
        double s = 0.0;
        for (int j = 0; j < w.num_angles; ++j) s += w.at(j, i) * w.at(j, i);
        if (!(s > 0.0))
            throw std::runtime_error("wtw_inverse_diagonal: zero column at voxel " +
                                     std::to_string(i));
        d[i] = 1.0 / s;
    }
    return d;
}

int wwt_rank(const WeightField& w, double tolerance, int densify_cap) {
    w.check_columns_nonzero();
    const int dim = w.num_angles * w.num_voxels;
    if (dim > densify_cap)
        throw std::runtime_error("wwt_rank: V*Omega = " + std::to_string(dim) +
                                 " exceeds densify cap " + std::to_string(densify_cap));

    // W W^T has diagonal blocks W_a W_b = diag(w[a][i] * w[b][i]).
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int a = 0; a < w.num_angles; ++a)
        for (int b = 0; b < w.num_angles; ++b)
            for (int i = 0; i < w.num_voxels; ++i)
                m(a * w.num_voxels + i, b * w.num_voxels + i) =
                    w.at(a, i) * w.at(b, i);

    // W W^T is symmetric positive semidefinite: its eigenvalues are its
    // singular values, and the self-adjoint solver resolves the zero modes
    // far more accurately than a general SVD on this permuted block shape.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m,
                                                       Eigen::EigenvaluesOnly);
    const Eigen::VectorXd sigma = eig.eigenvalues().cwiseAbs();
    const double tol =
        tolerance >= 0.0
            ? tolerance
            : sigma.maxCoeff() * dim * std::numeric_limits<double>::epsilon();
    int rank = 0;
    for (int k = 0; k < sigma.size(); ++k)
        if (sigma(k) > tol) ++rank;
    return rank;
}

}  // namespace wtomo
