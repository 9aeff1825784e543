#include "wtomo/solvers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numeric>

namespace wtomo {

void SolverConfig::validate() const {
    if (!(relaxation > 0.0 && relaxation < 2.0))
        throw std::invalid_argument("SolverConfig: relaxation must lie in (0, 2)");
    if (iterations < 1)
        throw std::invalid_argument("SolverConfig: iterations must be >= 1");
    if (tv_weight < 0.0)
        throw std::invalid_argument("SolverConfig: tv_weight must be >= 0");
    if (!(tv_epsilon > 0.0))
        throw std::invalid_argument("SolverConfig: tv_epsilon must be > 0");
}

double objective(const BlockSystem& bs, const WeightField& w,
                 const ImageGrid& x, const Sinogram& p) {
    const Sinogram fwd = forward_project(bs, w, x);
    if (fwd.size() != p.size())
        throw std::invalid_argument("objective: sinogram size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double r = fwd.values[i] - p.values[i];
        s += r * r;
    }
    return 0.5 * s;
}

bool kaczmarz_step(std::vector<double>& x, std::span<const int> row_cols,
                   std::span<const double> row_vals,
                   std::span<const double> w_row, double p_i,
                   double relaxation) {
    double dot = 0.0;
    double denom = 0.0;
    for (size_t k = 0; k < row_cols.size(); ++k) {
        const double c = row_vals[k] * w_row[row_cols[k]];
        dot += c * x[row_cols[k]];
        denom += c * c;
    }
    if (!(denom > 0.0)) return false;
    const double factor = relaxation * (p_i - dot) / denom;
    for (size_t k = 0; k < row_cols.size(); ++k)
        x[row_cols[k]] += factor * row_vals[k] * w_row[row_cols[k]];
    return true;
}

namespace {

// (block index, row within block, sinogram row) in sweep order
struct RowRef {
    int block;
    int row;
    int sino_row;
};

std::vector<RowRef> row_schedule(const BlockSystem& bs, RowOrder order) {
    std::vector<int> offsets(bs.num_angles());
    int off = 0;
    for (int j = 0; j < bs.num_angles(); ++j) {
        offsets[j] = off;
        off += bs.blocks[j].rows;
    }
    std::vector<RowRef> sched;
    sched.reserve(off);
    if (order == RowOrder::Sequential) {
        for (int j = 0; j < bs.num_angles(); ++j)
            for (int r = 0; r < bs.blocks[j].rows; ++r)
                sched.push_back({j, r, offsets[j] + r});
    } else {
        int max_rows = 0;
        for (const auto& blk : bs.blocks) max_rows = std::max(max_rows, blk.rows);
        for (int r = 0; r < max_rows; ++r)
            for (int j = 0; j < bs.num_angles(); ++j)
                if (r < bs.blocks[j].rows) sched.push_back({j, r, offsets[j] + r});
    }
    return sched;
}

double rmse_to(const std::vector<double>& x, const ImageGrid& gt) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - gt.values[i];
        s += d * d;
    }
    return std::sqrt(s / x.size());
}

void run_sweep(const BlockSystem& bs, const WeightField& w, const Sinogram& p,
               const SolverConfig& cfg, const std::vector<RowRef>& sched,
               std::vector<double>& x, std::vector<bool>& degenerate_logged,
               std::vector<std::string>& diagnostics) {
    for (const RowRef& rr : sched) {
        const auto& blk = bs.blocks[rr.block];
        const bool ok =
            kaczmarz_step(x, blk.row_cols(rr.row), blk.row_vals(rr.row),
                          w.row(blk.angle_index), p.values[rr.sino_row],
                          cfg.relaxation);
        if (!ok && !degenerate_logged[rr.sino_row]) {
            degenerate_logged[rr.sino_row] = true;
            diagnostics.push_back("degenerate ray skipped: sinogram row " +
                                  std::to_string(rr.sino_row));
        }
    }
}

SolveTrace solve_impl(const BlockSystem& bs, const WeightField& w,
                      const Sinogram& p, const SolverConfig& cfg,
                      const ImageGrid* gt, bool with_tv) {
    cfg.validate();
    if (static_cast<int>(p.size()) != bs.total_rows())
        throw std::invalid_argument("solve_kaczmarz: sinogram size mismatch");
    if (gt && static_cast<int>(gt->size()) != bs.voxels())
        throw std::invalid_argument("solve_kaczmarz: ground truth size mismatch");

    const auto sched = row_schedule(bs, cfg.row_order);
    SolveTrace trace;
    ImageGrid img(bs.grid_nx, bs.grid_ny);
    std::vector<bool> degenerate_logged(p.size(), false);

    for (int sweep = 0; sweep < cfg.iterations; ++sweep) {
        run_sweep(bs, w, p, cfg, sched, img.values, degenerate_logged,
                  trace.diagnostics);

        if (with_tv) {
            // Backtracking gradient step on lambda * TV, accepted on
            // sufficient decrease of the combined objective.
            ImageGrid grad = tv_gradient(img, cfg.tv_epsilon);
            double gnorm2 = 0.0;
            for (double& gv : grad.values) {
                gv *= cfg.tv_weight;
                gnorm2 += gv * gv;
            }
            if (gnorm2 > 0.0) {
                const double phi0 = objective(bs, w, img, p) +
                                    cfg.tv_weight * tv_value(img, cfg.tv_epsilon);
                double step = cfg.tv_initial_step;
                for (int bt = 0; bt < 40; ++bt) {
                    ImageGrid trial = img;
                    for (size_t i = 0; i < trial.size(); ++i)
                        trial.values[i] -= step * grad.values[i];
                    const double phi =
                        objective(bs, w, trial, p) +
                        cfg.tv_weight * tv_value(trial, cfg.tv_epsilon);
                    if (phi <= phi0 - cfg.tv_sufficient_decrease * step * gnorm2) {
                        img = std::move(trial);
                        break;
                    }
                    step *= cfg.tv_shrink;
                }
            }
        }

        const double obj = objective(bs, w, img, p);
        if (!std::isfinite(obj))
            throw std::runtime_error("solver diverged (non-finite objective) at sweep " +
                                     std::to_string(sweep));
        trace.objective.push_back(obj);
        if (gt) trace.rmse.push_back(rmse_to(img.values, *gt));
    }

    img.check_finite("solve_kaczmarz");
    trace.final_image = std::move(img);
    return trace;
}

}  // namespace

SolveTrace solve_kaczmarz(const BlockSystem& bs, const WeightField& w,
                          const Sinogram& p, const SolverConfig& cfg,
                          const ImageGrid* ground_truth) {
    return solve_impl(bs, w, p, cfg, ground_truth, false);
}

SolveTrace solve_kaczmarz_tv(const BlockSystem& bs, const WeightField& w,
                             const Sinogram& p, const SolverConfig& cfg,
                             const ImageGrid* ground_truth) {
    // tv_weight == 0 takes the identical code path as the plain solver.
    return solve_impl(bs, w, p, cfg, ground_truth, cfg.tv_weight > 0.0);
}

double tv_value(const ImageGrid& x, double epsilon) {
    double s = 0.0;
    for (int v = 0; v < x.ny; ++v)
        for (int u = 0; u < x.nx; ++u) {
            const double dx = u + 1 < x.nx ? x.at(u + 1, v) - x.at(u, v) : 0.0;
            const double dy = v + 1 < x.ny ? x.at(u, v + 1) - x.at(u, v) : 0.0;
            s += std::sqrt(dx * dx + dy * dy + epsilon * epsilon);
        }
    return s;
}

ImageGrid tv_gradient(const ImageGrid& x, double epsilon) {
    auto t = [&](int u, int v, double& dx, double& dy) {
        dx = u + 1 < x.nx ? x.at(u + 1, v) - x.at(u, v) : 0.0;
        dy = v + 1 < x.ny ? x.at(u, v + 1) - x.at(u, v) : 0.0;
        return std::sqrt(dx * dx + dy * dy + epsilon * epsilon);
    };
    ImageGrid g(x.nx, x.ny);
    for (int v = 0; v < x.ny; ++v)
        for (int u = 0; u < x.nx; ++u) {
            double dx, dy;
            double acc = 0.0;
            const double tc = t(u, v, dx, dy);
            acc -= (dx + dy) / tc;
            if (u > 0) {
                const double tl = t(u - 1, v, dx, dy);
                acc += dx / tl;
            }
            if (v > 0) {
                const double tu = t(u, v - 1, dx, dy);
                acc += dy / tu;
            }
            g.at(u, v) = acc;
        }
    return g;
}

namespace {

// Plain conjugate gradient for SPD apply; returns iterations used.
int conjugate_gradient(const std::function<void(const std::vector<double>&,
                                                std::vector<double>&)>& apply,
                       const std::vector<double>& b, std::vector<double>& x,
                       double rel_tol, int max_iter) {
    const size_t n = b.size();
    x.assign(n, 0.0);
    std::vector<double> r = b;
    std::vector<double> d = b;
    std::vector<double> q(n);
    double rr = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
    const double bnorm = std::sqrt(rr);
    if (bnorm == 0.0) return 0;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::sqrt(rr) <= rel_tol * bnorm) break;
        apply(d, q);
        const double dq = std::inner_product(d.begin(), d.end(), q.begin(), 0.0);
        if (!(dq > 0.0))
            throw std::runtime_error("conjugate gradient: operator not positive definite");
        const double alpha = rr / dq;
        for (size_t i = 0; i < n; ++i) {
            x[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        const double rr_new =
            std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
        const double beta = rr_new / rr;
        for (size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
        rr = rr_new;
    }
    return it;
}

// y = A^T A x with A the stacked unweighted per-angle blocks.
void apply_normal_equations(const BlockSystem& bs, const std::vector<double>& x,
                            std::vector<double>& y) {
    y.assign(x.size(), 0.0);
    for (const auto& blk : bs.blocks) {
        for (int r = 0; r < blk.rows; ++r) {
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            double dot = 0.0;
            for (size_t k = 0; k < cols.size(); ++k) dot += vals[k] * x[cols[k]];
            for (size_t k = 0; k < cols.size(); ++k) y[cols[k]] += vals[k] * dot;
        }
    }
}

}  // namespace

ImageGrid solve_bpf(const BlockSystem& bs, const Sinogram& p,
                    const BpfConfig& cfg) {
    if (static_cast<int>(p.size()) != bs.total_rows())
        throw std::invalid_argument("solve_bpf: sinogram size mismatch");
    const int v = bs.voxels();

    // A^T p, the unweighted backprojection.
    std::vector<double> aty(v, 0.0);
    int offset = 0;
    for (const auto& blk : bs.blocks) {
        for (int r = 0; r < blk.rows; ++r) {
            const double pv = p.values[offset + r];
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k)
                aty[cols[k]] += vals[k] * pv;
        }
        offset += blk.rows;
    }

    ImageGrid img(bs.grid_nx, bs.grid_ny);
    if (v <= cfg.dense_voxel_cap) {
        // Small grids: invert A^T A densely so a singular system can be
        // reported with its rank.
        Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(v, v);
        for (const auto& blk : bs.blocks)
            for (int r = 0; r < blk.rows; ++r) {
                const auto cols = blk.row_cols(r);
                const auto vals = blk.row_vals(r);
                for (size_t a = 0; a < cols.size(); ++a)
                    for (size_t b = 0; b < cols.size(); ++b)
                        ata(cols[a], cols[b]) += vals[a] * vals[b];
            }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
        if (!lu.isInvertible())
            throw std::runtime_error("solve_bpf: A^T A singular, rank " +
                                     std::to_string(lu.rank()) + " of " +
                                     std::to_string(v));
        Eigen::Map<Eigen::VectorXd>(img.values.data(), v) =
            lu.solve(Eigen::Map<const Eigen::VectorXd>(aty.data(), v));
    } else {
        conjugate_gradient(
            [&](const std::vector<double>& in, std::vector<double>& out) {
                apply_normal_equations(bs, in, out);
            },
            aty, img.values, cfg.cg_tolerance, cfg.cg_max_iterations);
    }
    img.check_finite("solve_bpf");
    return img;
}

ImageGrid solve_wrong_pinv(const BlockSystem& bs, const WeightField& w,
                           const Sinogram& p, const BpfConfig& cfg) {
    if (static_cast<int>(p.size()) != bs.total_rows())
        throw std::invalid_argument("solve_wrong_pinv: sinogram size mismatch");
    const int v = bs.voxels();
    const std::vector<double> inv_col_norms = wtw_inverse_diagonal(w);

    std::vector<double> numerator(v, 0.0);
    int offset = 0;
    for (const auto& blk : bs.blocks) {
        // z = (A_j A_j^T)^-1 p_j by conjugate gradient, matrix-free.
        std::vector<double> rhs(p.values.begin() + offset,
                                p.values.begin() + offset + blk.rows);
        std::vector<double> z;
        conjugate_gradient(
            [&](const std::vector<double>& in, std::vector<double>& out) {
                std::vector<double> tmp(v, 0.0);
                for (int r = 0; r < blk.rows; ++r) {
                    const auto cols = blk.row_cols(r);
                    const auto vals = blk.row_vals(r);
                    for (size_t k = 0; k < cols.size(); ++k)
                        tmp[cols[k]] += vals[k] * in[r];
                }
                out.assign(blk.rows, 0.0);
                for (int r = 0; r < blk.rows; ++r) {
                    const auto cols = blk.row_cols(r);
                    const auto vals = blk.row_vals(r);
                    double dot = 0.0;
                    for (size_t k = 0; k < cols.size(); ++k)
                        dot += vals[k] * tmp[cols[k]];
                    out[r] = dot;
                }
            },
            rhs, z, cfg.cg_tolerance, cfg.cg_max_iterations);

        // y_j = A_j^T z, then the W^T contraction w[j] .* y_j.
        const auto w_row = w.row(blk.angle_index);
        std::vector<double> y(v, 0.0);
        for (int r = 0; r < blk.rows; ++r) {
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k)
                y[cols[k]] += vals[k] * z[r];
        }
        for (int i = 0; i < v; ++i) numerator[i] += w_row[i] * y[i];
        offset += blk.rows;
    }

    ImageGrid img(bs.grid_nx, bs.grid_ny);
    for (int i = 0; i < v; ++i) img.values[i] = numerator[i] * inv_col_norms[i];
    img.check_finite("solve_wrong_pinv");
    return img;
}

}  // namespace wtomo
