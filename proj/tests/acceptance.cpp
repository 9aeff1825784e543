// Acceptance suite: one pass/fail line per criterion.
//
// Criteria 1-10 and 12 run in under two minutes. Criterion 11 repeats the
// wedge experiment at full scale (256x256, 360 views, several minutes) and
// only runs when invoked with --full; otherwise it is reported as SKIP.

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "wtomo/experiments.hpp"
#include "wtomo/io.hpp"
#include "wtomo/linalg.hpp"
#include "wtomo/metrics.hpp"
#include "wtomo/phantoms.hpp"
#include "wtomo/solvers.hpp"

using namespace wtomo;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool ok,
            const std::string& detail) {
    std::printf("criterion %02d [%s] %s%s%s\n", criterion, name,
                ok ? "PASS" : "FAIL", detail.empty() ? "" : " — ",
                detail.c_str());
    if (!ok) ++g_failures;
}

void report_skip(int criterion, const char* name, const std::string& detail) {
    std::printf("criterion %02d [%s] SKIP — %s\n", criterion, name,
                detail.c_str());
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

using RowMajorMap = Eigen::Map<const Eigen::Matrix<
    double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

RowMajorMap as_eigen(const DenseMatrix& m) {
    return {m.entries.data(), m.rows, m.cols};
}

DenseMatrix random_matrix(int rows, int cols, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix m(rows, cols);
    for (double& v : m.entries) v = dist(rng);
    return m;
}

// --- criterion 1: Moore-Penrose conditions and the two closed forms --------

void criterion_pinv_suite() {
    std::mt19937 rng(101);
    std::uniform_int_distribution<int> dim(1, 60);
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const DenseMatrix md = random_matrix(dim(rng), dim(rng), rng);
        const DenseMatrix pd = pinv(md);
        const auto m = as_eigen(md);
        const auto p = as_eigen(pd);
        const double tol = 1e-8 * std::max(m.norm(), 1.0);
        const double e1 = (m * p * m - m).cwiseAbs().maxCoeff();
        const double e2 = (p * m * p - p).cwiseAbs().maxCoeff();
        const double e3 =
            ((m * p).transpose() - m * p).eval().cwiseAbs().maxCoeff();
        const double e4 =
            ((p * m).transpose() - p * m).eval().cwiseAbs().maxCoeff();
        const double e = std::max({e1, e2, e3, e4});
        worst = std::max(worst, e / tol * 1e-8);
        if (e > tol) ok = false;
    }

    // full-rank closed forms vs the SVD pseudoinverse
    const DenseMatrix tall_d = random_matrix(40, 20, rng);
    const DenseMatrix broad_d = random_matrix(20, 40, rng);
    const auto tall = as_eigen(tall_d);
    const auto broad = as_eigen(broad_d);
    const Eigen::MatrixXd tall_cf =
        (tall.transpose() * tall).inverse() * tall.transpose();
    const Eigen::MatrixXd broad_cf =
        broad.transpose() * (broad * broad.transpose()).inverse();
    const double et = (as_eigen(pinv(tall_d)) - tall_cf).cwiseAbs().maxCoeff();
    const double eb = (as_eigen(pinv(broad_d)) - broad_cf).cwiseAbs().maxCoeff();
    if (et > 1e-10 || eb > 1e-10) ok = false;

    report(1, "pseudoinverse conditions + closed forms", ok,
           fmt("worst condition residual %.2e (tol 1e-8*||M||), closed forms "
               "%.2e / %.2e (tol 1e-10)",
               worst, et, eb));
}

// --- criterion 2: rank of W W^T is V ----------------------------------------

void criterion_wwt_rank() {
    const Geometry g = make_toy_geometry();
    std::mt19937 rng(103);
    std::uniform_real_distribution<double> dist(0.05, 2.0);
    bool ok = true;
    int bad = -1;
    for (int trial = 0; trial < 20; ++trial) {
        WeightField w(g.num_angles(), g.num_voxels());
        for (double& v : w.w) v = dist(rng);
        const int r = wwt_rank(w);
        if (r != g.num_voxels()) {
            ok = false;
            bad = r;
        }
    }
    report(2, "rank(W W^T) = V for positive weights", ok,
           ok ? std::string("20 random fields on the 64x64 product, rank 16")
              : fmt("got rank %g, expected 16", static_cast<double>(bad)));
}

// --- criterion 3: (BW)+ != W+ B+ --------------------------------------------

void criterion_product_inequality() {
    const Geometry g = make_toy_geometry();
    const BlockSystem bs = build_block_system(g);
    const WeightField w = ramp_weights(g, 0.25, 1.0);

    const DenseMatrix bw_pinv = pinv(densify_weighted(bs, w));
    const DenseMatrix bd = densify_B(bs);
    const DenseMatrix wd = densify_W(w);
    const auto b = as_eigen(bd);
    const auto wm = as_eigen(wd);
    const Eigen::MatrixXd split =
        (wm.transpose() * wm).inverse() * wm.transpose() * b.transpose() *
        (b * b.transpose()).inverse();
    const double rel =
        (as_eigen(bw_pinv) - split).norm() / as_eigen(bw_pinv).norm();
    report(3, "(BW)+ differs from W+ B+", rel > 1e-3,
           fmt("relative Frobenius gap %.3e (require > 1e-3)", rel));
}

// --- criterion 4: adjointness of the projector pair -------------------------

void criterion_adjointness() {
    std::vector<double> angles(45);
    for (int j = 0; j < 45; ++j) angles[j] = j * M_PI / 45.0;
    const Geometry g = make_geometry(32, 32, angles, 32);
    const BlockSystem bs = build_block_system(g);
    const WeightField w = ramp_weights(g, 0.25, 1.0);

    std::mt19937 rng(107);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        ImageGrid x(32, 32);
        for (double& v : x.values) v = dist(rng);
        Sinogram p(g);
        for (double& v : p.values) v = dist(rng);

        const Sinogram fx = forward_project(bs, w, x);
        const ImageGrid bp = back_project(bs, w, p);
        double lhs = 0.0, rhs = 0.0, xn = 0.0, pn = 0.0;
        for (size_t i = 0; i < p.size(); ++i) lhs += fx.values[i] * p.values[i];
        for (size_t i = 0; i < x.size(); ++i) {
            rhs += x.values[i] * bp.values[i];
            xn += x.values[i] * x.values[i];
        }
        for (double v : p.values) pn += v * v;
        worst = std::max(worst,
                         std::abs(lhs - rhs) / (std::sqrt(xn) * std::sqrt(pn)));
    }
    report(4, "<BWx, p> = <x, (BW)^T p>", worst <= 1e-10,
           fmt("worst relative mismatch %.3e over 20 pairs (tol 1e-10)",
               worst));
}

// --- criterion 5: objective gradient vs finite differences ------------------

void criterion_gradient() {
    const Geometry g = make_wedge_geometry(16, 16, 12);
    const BlockSystem bs = build_block_system(g);
    const WeightField w = ramp_weights(g, 0.25, 1.0);
    const Sinogram p = forward_project(bs, w, make_two_wedge(16, 16));

    std::mt19937 rng(109);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    ImageGrid x(16, 16);
    for (double& v : x.values) v = dist(rng);

    // gradient of 0.5 ||BWx - p||^2 is (BW)^T (BWx - p)
    Sinogram res = forward_project(bs, w, x);
    for (size_t i = 0; i < res.size(); ++i) res.values[i] -= p.values[i];
    const ImageGrid grad = back_project(bs, w, res);

    std::uniform_int_distribution<int> pick(0, 255);
    const double h = 1e-6;
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const int i = pick(rng);
        ImageGrid xp = x, xm = x;
        xp.values[i] += h;
        xm.values[i] -= h;
        const double fd =
            (objective(bs, w, xp, p) - objective(bs, w, xm, p)) / (2.0 * h);
        const double rel =
            std::abs(grad.values[i] - fd) / std::max(std::abs(fd), 1e-8);
        worst = std::max(worst, rel);
    }
    report(5, "objective gradient matches finite differences", worst <= 1e-5,
           fmt("worst relative error %.3e on 20 coordinates (tol 1e-5)",
               worst));
}

// --- criterion 6: exact row projection at relaxation 1 ----------------------

void criterion_row_exactness() {
    const Geometry g = make_toy_geometry();
    const BlockSystem bs = build_block_system(g);
    const WeightField w = ramp_weights(g, 0.25, 1.0);
    const Sinogram p = forward_project(bs, w, make_triangle4());

    std::mt19937 rng(113);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(16);
    for (double& v : x) v = dist(rng);

    double worst = 0.0;
    for (const auto& blk : bs.blocks) {
        const auto w_row = w.row(blk.angle_index);
        for (int r = 0; r < blk.rows; ++r) {
            const auto cols = blk.row_cols(r);
            const auto vals = blk.row_vals(r);
            const double p_i = p.values[g.row_offset(blk.angle_index) + r];
            kaczmarz_step(x, cols, vals, w_row, p_i, 1.0);
            double res = p_i;
            for (size_t k = 0; k < cols.size(); ++k)
                res -= vals[k] * w_row[cols[k]] * x[cols[k]];
            worst = std::max(worst,
                             std::abs(res) / std::max(std::abs(p_i), 1.0));
        }
    }
    report(6, "relaxation-1 step zeroes the row residual", worst <= 1e-12,
           fmt("worst relative row residual %.3e (tol 1e-12)", worst));
}

// --- criterion 7: unit weights reduce to classical Kaczmarz -----------------

void criterion_unweighted_reduction() {
    const Geometry g = make_toy_geometry();
    const BlockSystem bs = build_block_system(g);
    const WeightField ones = constant_weights(g, 1.0);
    const Sinogram p = forward_project(bs, ones, make_triangle4());

    // independent classical reference over the unweighted rows, sequential
    std::vector<double> ref(16, 0.0);
    const double relax = 0.7;
    const int sweeps = 12;
    for (int s = 0; s < sweeps; ++s) {
        int row = 0;
        for (const auto& blk : bs.blocks)
            for (int r = 0; r < blk.rows; ++r, ++row) {
                const auto cols = blk.row_cols(r);
                const auto vals = blk.row_vals(r);
                double dot = 0.0, nrm = 0.0;
                for (size_t k = 0; k < cols.size(); ++k) {
                    dot += vals[k] * ref[cols[k]];
                    nrm += vals[k] * vals[k];
                }
                const double step = relax * (p.values[row] - dot) / nrm;
                for (size_t k = 0; k < cols.size(); ++k)
                    ref[cols[k]] += step * vals[k];
            }
    }

    SolverConfig cfg;
    cfg.relaxation = relax;
    cfg.iterations = sweeps;
    const SolveTrace tr = solve_kaczmarz(bs, ones, p, cfg);
    double worst = 0.0;
    for (int i = 0; i < 16; ++i)
        worst = std::max(worst, std::abs(tr.final_image.values[i] - ref[i]));
    report(7, "unit weights equal classical Kaczmarz", worst <= 1e-10,
           fmt("max deviation %.3e after 12 sweeps (tol 1e-10)", worst));
}

// --- criterion 8: the three pseudoinverse pathways on the toy system --------

void criterion_toy_pinv() {
    ExperimentConfig cfg;
    cfg.out_dir = "";
    const ToyPinvResult r = run_toy_pinv(cfg);
    const double d = r.direct.l2_distance_to_ground_truth;
    const double s = r.split.l2_distance_to_ground_truth;
    const double q = r.product.l2_distance_to_ground_truth;
    const bool ok = d <= 1e-10 && s >= 0.3 && s <= 5.0 && q >= 3.0 * s &&
                    d < s && s < q;
    report(8, "toy inversion: direct exact, split off, product worse", ok,
           fmt("L2 direct %.3e, split %.4f, product %.4f", d, s, q));
}

// --- criterion 9: Kaczmarz converges to the pseudoinverse solution ----------

void criterion_kaczmarz_oracle() {
    const Geometry g = make_toy_geometry();
    const BlockSystem bs = build_block_system(g);
    const WeightField w = ramp_weights(g, 0.25, 1.0);
    const Sinogram p = forward_project(bs, w, make_triangle4());

    const PinvReport oracle = reconstruct_direct_pinv(bs, w, p);
    SolverConfig cfg;
    cfg.relaxation = 0.5;
    cfg.iterations = 500;
    const SolveTrace tr = solve_kaczmarz(bs, w, p, cfg);
    const double dist = l2_distance(tr.final_image, oracle.reconstruction);
    report(9, "500 Kaczmarz sweeps reach the pseudoinverse solution",
           dist <= 1e-6, fmt("||x - pinv solution|| = %.3e (tol 1e-6)", dist));
}

// --- criterion 10: scaled wedge comparison ----------------------------------

void criterion_scaled_wedge() {
    ExperimentConfig cfg;
    cfg.grid_size = 64;
    cfg.num_angles = 90;
    cfg.solver.iterations = 100;
    cfg.out_dir = "";
    const WedgeResult r = run_wedge(cfg);
    const MethodResult& it = r.methods.at("iterative");
    const MethodResult& bpf = r.methods.at("bpf");
    const MethodResult& wp = r.methods.at("wrong-psinv");

    const bool order = it.rmse < bpf.rmse && bpf.rmse < wp.rmse;
    const bool it_ssim = it.ssim >= 0.9;
    const bool bpf_ssim = bpf.ssim <= 0.8;
    const bool wp_ssim = wp.ssim <= 0.1;
    report(10, "scaled wedge: RMSE ordering and SSIM levels",
           order && it_ssim && bpf_ssim && wp_ssim,
           fmt("RMSE iter %.4f < bpf %.4f", it.rmse, bpf.rmse) +
               fmt(" < wrong %.4f; ", wp.rmse) +
               fmt("SSIM iter %.3f (>=0.9), bpf %.3f (<=0.8), ", it.ssim,
                   bpf.ssim) +
               fmt("wrong %.3f (<=0.1)", wp.ssim));
}

// --- criterion 11: full-scale wedge (only with --full) ----------------------

void criterion_full_wedge(bool run_full) {
    if (!run_full) {
        report_skip(11, "full wedge 256x256/360",
                    "several minutes; run `acceptance --full`");
        return;
    }
    ExperimentConfig cfg;
    cfg.solver.relaxation = 1.0;
    cfg.solver.iterations = 800;
    cfg.out_dir = "";
    const WedgeResult r = run_wedge(cfg);
    const MethodResult& it = r.methods.at("iterative");
    const MethodResult& tv = r.methods.at("iterative-tv");
    const double diff = std::abs(it.rmse - tv.rmse);
    const bool ok = it.rmse <= 0.12 && it.ssim >= 0.95 && diff <= 1e-2;
    report(11, "full wedge 256x256/360", ok,
           fmt("iterative RMSE %.4f (<=0.12), SSIM %.3f (>=0.95), ", it.rmse,
               it.ssim) +
               fmt("|RMSE tv - plain| = %.4f (<=0.01)", diff));
}

// --- criterion 12: deterministic outputs ------------------------------------

std::vector<std::string> snapshot_files(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

bool identical_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    const std::string ca((std::istreambuf_iterator<char>(fa)),
                         std::istreambuf_iterator<char>());
    const std::string cb((std::istreambuf_iterator<char>(fb)),
                         std::istreambuf_iterator<char>());
    return !ca.empty() && ca == cb;
}

void criterion_determinism() {
    const fs::path base =
        fs::temp_directory_path() /
        ("wtomo-accept-" + std::to_string(std::random_device{}()));
    const fs::path w1 = base / "wedge1", w2 = base / "wedge2";
    const fs::path t1 = base / "toy1", t2 = base / "toy2";

    ExperimentConfig wedge;
    wedge.grid_size = 16;
    wedge.num_angles = 20;
    wedge.solver.iterations = 10;
    wedge.out_dir = w1.string();
    run_wedge(wedge);
    wedge.out_dir = w2.string();
    run_wedge(wedge);

    ExperimentConfig toy;
    toy.out_dir = t1.string();
    run_toy_pinv(toy);
    toy.out_dir = t2.string();
    run_toy_pinv(toy);

    bool ok = true;
    int compared = 0;
    for (auto [a, b] : {std::pair{w1, w2}, std::pair{t1, t2}}) {
        const auto names = snapshot_files(a);
        if (names != snapshot_files(b)) ok = false;
        for (const auto& n : names) {
            ++compared;
            if (!identical_bytes(a / n, b / n)) ok = false;
        }
    }
    fs::remove_all(base);
    report(12, "repeated runs are bit-identical", ok,
           fmt("%g files compared across both experiments",
               static_cast<double>(compared)));
}

}  // namespace

int main(int argc, char** argv) {
    bool run_full = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--full") == 0) run_full = true;

    auto guarded = [](int criterion, const char* name, const auto& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(criterion, name, false, std::string("exception: ") + e.what());
        }
    };

    guarded(1, "pseudoinverse conditions + closed forms", criterion_pinv_suite);
    guarded(2, "rank(W W^T) = V for positive weights", criterion_wwt_rank);
    guarded(3, "(BW)+ differs from W+ B+", criterion_product_inequality);
    guarded(4, "<BWx, p> = <x, (BW)^T p>", criterion_adjointness);
    guarded(5, "objective gradient matches finite differences",
            criterion_gradient);
    guarded(6, "relaxation-1 step zeroes the row residual",
            criterion_row_exactness);
    guarded(7, "unit weights equal classical Kaczmarz",
            criterion_unweighted_reduction);
    guarded(8, "toy inversion: direct exact, split off, product worse",
            criterion_toy_pinv);
    guarded(9, "500 Kaczmarz sweeps reach the pseudoinverse solution",
            criterion_kaczmarz_oracle);
    guarded(10, "scaled wedge: RMSE ordering and SSIM levels",
            criterion_scaled_wedge);
    guarded(11, "full wedge 256x256/360",
            [&] { criterion_full_wedge(run_full); });
    guarded(12, "repeated runs are bit-identical", criterion_determinism);

    std::printf("%s (%d criterion failure%s)\n",
                g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
