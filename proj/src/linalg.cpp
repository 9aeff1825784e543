#include "wtomo/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace wtomo {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMatrix> to_eigen(const DenseMatrix& m) {
    return {m.entries.data(), m.rows, m.cols};
}

DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
    DenseMatrix m(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
    Eigen::Map<RowMajorMatrix>(m.entries.data(), e.rows(), e.cols()) = e;
    return m;
}

void check_finite(const DenseMatrix& m, const char* where) {
    for (double v : m.entries)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(where) + ": non-finite entry");
}

double default_tol(const Eigen::VectorXd& sigma, int rows, int cols) {
    if (sigma.size() == 0) return 0.0;
    return sigma(0) * std::max(rows, cols) *
           std::numeric_limits<double>::epsilon();
}

void check_densify_cap(const BlockSystem& bs, const WeightField& w) {
    const int col_dim = bs.voxels() * bs.num_angles();
    const int row_dim = bs.total_rows();
    if (col_dim > kDensifyCap || row_dim > kDensifyCap)
        throw std::runtime_error(
            "densify cap exceeded: V*Omega = " + std::to_string(col_dim) +
            ", rows = " + std::to_string(row_dim) + " (cap " +
            std::to_string(kDensifyCap) + ")");
    if (w.num_angles != bs.num_angles() || w.num_voxels != bs.voxels())
        throw std::invalid_argument("block system / weight field dimension mismatch");
}

Eigen::VectorXd sinogram_vector(const Sinogram& p) {
    return Eigen::Map<const Eigen::VectorXd>(p.values.data(), p.values.size());
}

ImageGrid image_from_vector(const Eigen::VectorXd& x, int nx, int ny) {
    ImageGrid img(nx, ny);
    Eigen::Map<Eigen::VectorXd>(img.values.data(), img.values.size()) = x;
    return img;
}

double l2_to_gt(const ImageGrid& rec, const ImageGrid* gt) {
    if (!gt) return -1.0;
    if (gt->size() != rec.size())
        throw std::invalid_argument("ground truth dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < rec.size(); ++i) {
        const double d = rec.values[i] - gt->values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// rank and condition number of the singular values above tolerance
std::pair<int, double> rank_and_cond(const Eigen::VectorXd& sigma, int rows,
                                     int cols) {
    const double tol = default_tol(sigma, rows, cols);
    int rank = 0;
    double smin = 0.0;
    for (int k = 0; k < sigma.size(); ++k)
        if (sigma(k) > tol) {
            ++rank;
            smin = sigma(k);
        }
    const double cond = rank > 0 ? sigma(0) / smin : 0.0;
    return {rank, cond};
}

}  // namespace

DenseMatrix pinv(const DenseMatrix& m, double tolerance) {
    check_finite(m, "pinv");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        to_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double tol =
        tolerance >= 0.0 ? tolerance : default_tol(sigma, m.rows, m.cols);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
    for (int k = 0; k < sigma.size(); ++k)
        if (sigma(k) > tol) inv(k) = 1.0 / sigma(k);
    Eigen::MatrixXd result =
        svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return from_eigen(result);
}

int numerical_rank(const DenseMatrix& m, double tolerance) {
    check_finite(m, "numerical_rank");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(to_eigen(m));
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double tol =
        tolerance >= 0.0 ? tolerance : default_tol(sigma, m.rows, m.cols);
    int rank = 0;
    for (int k = 0; k < sigma.size(); ++k)
        if (sigma(k) > tol) ++rank;
    return rank;
}

DenseMatrix densify_B(const BlockSystem& bs) {
    const int v = bs.voxels();
    const int omega = bs.num_angles();
    const int rows = bs.total_rows();
    if (v * omega > kDensifyCap || rows > kDensifyCap)
        throw std::runtime_error("densify_B: densify cap exceeded");
    DenseMatrix m(rows, v * omega);
    int row0 = 0;
    for (int j = 0; j < omega; ++j) {
        const auto& blk = bs.blocks[j];
        for (int r = 0; r < blk.rows; ++r) {
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k)
                m.at(row0 + r, j * v + cols[k]) = vals[k];
        }
        row0 += blk.rows;
    }
    return m;
}

DenseMatrix densify_W(const WeightField& w) {
    const int v = w.num_voxels;
    const int omega = w.num_angles;
    if (v * omega > kDensifyCap)
        throw std::runtime_error("densify_W: densify cap exceeded");
    DenseMatrix m(v * omega, v);
    for (int j = 0; j < omega; ++j)
        for (int i = 0; i < v; ++i) m.at(j * v + i, i) = w.at(j, i);
    return m;
}

DenseMatrix densify_weighted(const BlockSystem& bs, const WeightField& w) {
    check_densify_cap(bs, w);
    // Equals densify_B * densify_W; built blockwise so each entry is the
    // plain product a * w with no intermediate rounding.
    const int v = bs.voxels();
    DenseMatrix m(bs.total_rows(), v);
    int row0 = 0;
    for (const auto& blk : bs.blocks) {
        const auto w_row = w.row(blk.angle_index);
        for (int r = 0; r < blk.rows; ++r) {
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k)
                m.at(row0 + r, cols[k]) = vals[k] * w_row[cols[k]];
        }
        row0 += blk.rows;
    }
    return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
    return from_eigen(to_eigen(a) * to_eigen(b));
}

std::string to_string(PinvMethod m) {
    switch (m) {
        case PinvMethod::DirectWeighted: return "direct-weighted";
        case PinvMethod::SplitWrong: return "split-wrong";
        case PinvMethod::ProductFormula: return "product-formula";
    }
    return "?";
}

PinvReport reconstruct_direct_pinv(const BlockSystem& bs, const WeightField& w,
                                   const Sinogram& p,
                                   const ImageGrid* ground_truth) {
    check_densify_cap(bs, w);
    const DenseMatrix a_tilde = densify_weighted(bs, w);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        to_eigen(a_tilde), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto [rank, cond] =
        rank_and_cond(svd.singularValues(), a_tilde.rows, a_tilde.cols);

    const DenseMatrix a_pinv = pinv(a_tilde);
    const Eigen::VectorXd x = to_eigen(a_pinv) * sinogram_vector(p);

    PinvReport rep;
    rep.method = PinvMethod::DirectWeighted;
    rep.reconstruction = image_from_vector(x, bs.grid_nx, bs.grid_ny);
    rep.ranks["A_tilde"] = rank;
    rep.condition_number = cond;
    rep.l2_distance_to_ground_truth = l2_to_gt(rep.reconstruction, ground_truth);
    return rep;
}

PinvReport reconstruct_split_pinv(const BlockSystem& bs, const WeightField& w,
                                  const Sinogram& p,
                                  const ImageGrid* ground_truth) {
    check_densify_cap(bs, w);
    const DenseMatrix b_dense = densify_B(bs);
    const auto b = to_eigen(b_dense);

    // Broad pseudoinverse of B applied to p: B^T (B B^T)^-1 p.
    const Eigen::MatrixXd bbt = b * b.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(bbt);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("reconstruct_split_pinv: B B^T not invertible");
    const Eigen::VectorXd y = b.transpose() * ldlt.solve(sinogram_vector(p));

    // Tall pseudoinverse of W: (W^T W)^-1 W^T, with diagonal W^T W.
    const std::vector<double> inv_col_norms = wtw_inverse_diagonal(w);
    const int v = w.num_voxels;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(v);
    for (int j = 0; j < w.num_angles; ++j)
        for (int i = 0; i < v; ++i)
            x(i) += w.at(j, i) * y(static_cast<Eigen::Index>(j) * v + i);
    for (int i = 0; i < v; ++i) x(i) *= inv_col_norms[i];

    Eigen::BDCSVD<Eigen::MatrixXd> svd_bbt(bbt);
    const auto [rank_bbt, cond_bbt] = rank_and_cond(
        svd_bbt.singularValues(), static_cast<int>(bbt.rows()),
        static_cast<int>(bbt.cols()));

    PinvReport rep;
    rep.method = PinvMethod::SplitWrong;
    rep.reconstruction = image_from_vector(x, bs.grid_nx, bs.grid_ny);
    rep.ranks["B"] = numerical_rank(b_dense);
    rep.ranks["W"] = numerical_rank(densify_W(w));
    rep.ranks["BBt"] = rank_bbt;
    rep.condition_number = cond_bbt;
    rep.l2_distance_to_ground_truth = l2_to_gt(rep.reconstruction, ground_truth);
    return rep;
}

PinvReport reconstruct_product_formula_pinv(const BlockSystem& bs,
                                            const WeightField& w,
                                            const Sinogram& p,
                                            const ImageGrid* ground_truth) {
    check_densify_cap(bs, w);
    const DenseMatrix b_dense = densify_B(bs);
    const auto b = to_eigen(b_dense);
    const DenseMatrix w_dense = densify_W(w);
    const auto wm = to_eigen(w_dense);

    // Left factor: B^T (B B^T)^-1 B W, then its pseudoinverse.
    Eigen::LDLT<Eigen::MatrixXd> bbt_ldlt(b * b.transpose());
    if (bbt_ldlt.info() != Eigen::Success)
        throw std::runtime_error("product_formula: B B^T not invertible");
    const Eigen::MatrixXd left = b.transpose() * bbt_ldlt.solve(b * wm);

    // Right factor: B W (W^T W)^-1 W^T, then its pseudoinverse. W W^+ has
    // rank V, so this factor is rank deficient by construction.
    const std::vector<double> inv_col_norms = wtw_inverse_diagonal(w);
    Eigen::MatrixXd wwp = wm;  // W (W^T W)^-1, scaled columns
    for (int i = 0; i < w.num_voxels; ++i) wwp.col(i) *= inv_col_norms[i];
    const Eigen::MatrixXd right = b * (wwp * wm.transpose());

    // Outer pseudoinverses in their full-rank closed forms: tall for the
    // left factor, broad for the right. The right factor only has rank V,
    // so its Gram matrix R R^T is singular and the plain inverse amplifies
    // rounding noise. This is the ill-conditioned pathway on display; a
    // rank-thresholded pinv here would collapse the identity back to the
    // exact (BW)^+ and hide the failure.
    const Eigen::MatrixXd ltl = left.transpose() * left;
    const Eigen::MatrixXd rrt = right * right.transpose();
    const Eigen::MatrixXd left_pinv =
        ltl.partialPivLu().solve(left.transpose());
    const Eigen::MatrixXd right_pinv =
        right.transpose() * rrt.partialPivLu().inverse();
    const Eigen::VectorXd x = left_pinv * (right_pinv * sinogram_vector(p));

    Eigen::BDCSVD<Eigen::MatrixXd> svd_right(right);
    const auto [rank_right, cond_right] =
        rank_and_cond(svd_right.singularValues(), static_cast<int>(right.rows()),
                      static_cast<int>(right.cols()));

    PinvReport rep;
    rep.method = PinvMethod::ProductFormula;
    rep.reconstruction = image_from_vector(x, bs.grid_nx, bs.grid_ny);
    rep.ranks["BWW_pinv"] = rank_right;
    rep.ranks["WWt"] = wwt_rank(w);
    rep.condition_number = cond_right;
    rep.l2_distance_to_ground_truth = l2_to_gt(rep.reconstruction, ground_truth);
    return rep;
}

}  // namespace wtomo
