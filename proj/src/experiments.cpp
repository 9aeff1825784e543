#include "wtomo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "wtomo/io.hpp"
#include "wtomo/metrics.hpp"
#include "wtomo/phantoms.hpp"

namespace wtomo {

namespace fs = std::filesystem;
using nlohmann::json;

Geometry make_toy_geometry() {
    Geometry g;
    g.num_voxels_x = 4;
    g.num_voxels_y = 4;
    g.voxel_size = 1.0;
    g.angles = {0.0, M_PI / 4.0, M_PI / 2.0, 3.0 * M_PI / 4.0};
    g.detector_bins_per_angle = {4, 7, 4, 7};
    const double diag = std::sqrt(2.0) / 2.0;
    g.detector_bin_size = {1.0, diag, 1.0, diag};
    g.validate();
    return g;
}

Geometry make_wedge_geometry(int nx, int ny, int num_angles) {
    std::vector<double> angles(num_angles);
    for (int j = 0; j < num_angles; ++j) angles[j] = j * M_PI / num_angles;
    return make_geometry(nx, ny, std::move(angles), nx);
}

namespace {

void write_json(const json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

json solver_json(const SolverConfig& s) {
    return {{"relaxation", s.relaxation},
            {"iterations", s.iterations},
            {"tv_weight", s.tv_weight},
            {"tv_epsilon", s.tv_epsilon},
            {"tv_initial_step", s.tv_initial_step},
            {"tv_shrink", s.tv_shrink},
            {"tv_sufficient_decrease", s.tv_sufficient_decrease},
            {"row_order", s.row_order == RowOrder::Sequential
                              ? "sequential"
                              : "angle-interleaved"},
            {"rng_seed", s.rng_seed}};
}

json metadata_json(const ExperimentConfig& cfg, const std::string& experiment) {
    return {{"experiment", experiment},
            {"grid_size", cfg.grid_size},
            {"num_angles", cfg.num_angles},
            {"weight_model", "rotating-linear-ramp"},
            {"s_min", cfg.s_min},
            {"s_max", cfg.s_max},
            {"window_lo", cfg.window_lo},
            {"window_hi", cfg.window_hi},
            {"solver", solver_json(cfg.solver)}};
}

json report_json(const PinvReport& r) {
    json j = {{"method", to_string(r.method)},
              {"l2_distance", r.l2_distance_to_ground_truth},
              {"condition_number", r.condition_number}};
    for (const auto& [k, v] : r.ranks) j["rank"][k] = v;
    return j;
}

// window a reconstruction at its own value range when it overflows [lo, hi]
void export_windowed(const ImageGrid& img, double lo, double hi,
                     const std::string& path, json& windows,
                     const std::string& name) {
    const auto [mn, mx] =
        std::minmax_element(img.values.begin(), img.values.end());
    double wlo = lo, whi = hi;
    if (*mn < lo || *mx > hi) {
        wlo = *mn;
        whi = *mx > *mn ? *mx : *mn + 1.0;
    }
    export_image(img, wlo, whi, path);
    windows[name] = {{"lo", wlo}, {"hi", whi}};
}

void export_weight_pgms(const WeightField& w, int nx, int ny,
                        const std::string& dir) {
    for (int j = 0; j < w.num_angles; ++j) {
        ImageGrid img(nx, ny);
        const auto row = w.row(j);
        std::copy(row.begin(), row.end(), img.values.begin());
        std::ostringstream name;
        name << dir << "/weights_" << std::setw(3) << std::setfill('0') << j
             << ".pgm";
        export_image(img, 0.0, *std::max_element(row.begin(), row.end()),
                     name.str());
    }
}

void write_trace_csv(const SolveTrace& trace, const std::string& path) {
    std::vector<double> it(trace.objective.size());
    for (size_t i = 0; i < it.size(); ++i) it[i] = static_cast<double>(i + 1);
    std::vector<std::string> header = {"iteration", "objective"};
    std::vector<std::vector<double>> cols = {it, trace.objective};
    if (!trace.rmse.empty()) {
        header.push_back("rmse");
        cols.push_back(trace.rmse);
    }
    write_csv(path, header, cols);
}

}  // namespace

ToyPinvResult run_toy_pinv(const ExperimentConfig& cfg) {
    const Geometry geom = make_toy_geometry();
    const BlockSystem bs = build_block_system(geom);
    const WeightField w = ramp_weights(geom, cfg.s_min, cfg.s_max);
    const ImageGrid gt = make_triangle4();
    const Sinogram p = forward_project(bs, w, gt);

    ToyPinvResult res;
    res.direct = reconstruct_direct_pinv(bs, w, p, &gt);
    res.split = reconstruct_split_pinv(bs, w, p, &gt);
    res.product = reconstruct_product_formula_pinv(bs, w, p, &gt);

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        const std::string d = cfg.out_dir;
        json windows;
        export_image(gt, cfg.window_lo, cfg.window_hi, d + "/gt.pgm");
        export_windowed(res.direct.reconstruction, cfg.window_lo, cfg.window_hi,
                        d + "/direct_pinv.pgm", windows, "direct_pinv");
        export_windowed(res.split.reconstruction, cfg.window_lo, cfg.window_hi,
                        d + "/split_pinv.pgm", windows, "split_pinv");
        export_windowed(res.product.reconstruction, cfg.window_lo, cfg.window_hi,
                        d + "/product_pinv.pgm", windows, "product_pinv");
        write_raw(gt, d + "/gt.raw");

        json metrics = {{"direct", report_json(res.direct)},
                        {"split", report_json(res.split)},
                        {"product", report_json(res.product)},
                        {"windows", windows}};
        write_json(metrics, d + "/metrics.json");
        write_json(metadata_json(cfg, "toy-pinv"), d + "/metadata.json");
        if (cfg.export_weights) export_weight_pgms(w, 4, 4, d);
    }
    return res;
}

WedgeResult run_wedge(const ExperimentConfig& cfg) {
    const int n = cfg.grid_size;
    const Geometry geom = make_wedge_geometry(n, n, cfg.num_angles);
    const BlockSystem bs = build_block_system(geom);
    const WeightField w = ramp_weights(geom, cfg.s_min, cfg.s_max);
    const ImageGrid gt = make_two_wedge(n, n);
    const Sinogram p = forward_project(bs, w, gt);

    WedgeResult res;
    res.ground_truth = gt;

    auto add = [&](const std::string& name, ImageGrid img) {
        MethodResult mr;
        mr.rmse = rmse(img, gt);
        mr.ssim = ssim(img, gt, 1.0);
        mr.reconstruction = std::move(img);
        res.methods[name] = std::move(mr);
    };

    add("bpf", solve_bpf(bs, p));
    add("wrong-psinv", solve_wrong_pinv(bs, w, p));

    SolverConfig plain = cfg.solver;
    plain.tv_weight = 0.0;
    const SolveTrace trace_plain = solve_kaczmarz(bs, w, p, plain, &gt);
    add("iterative", trace_plain.final_image);

    SolverConfig with_tv = cfg.solver;
    if (with_tv.tv_weight <= 0.0) with_tv.tv_weight = 0.01;
    const SolveTrace trace_tv = solve_kaczmarz_tv(bs, w, p, with_tv, &gt);
    add("iterative-tv", trace_tv.final_image);

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        const std::string d = cfg.out_dir;
        json windows;
        export_image(gt, cfg.window_lo, cfg.window_hi, d + "/gt.pgm");
        write_raw(gt, d + "/gt.raw");
        for (const auto& [name, mr] : res.methods) {
            std::string fname = name;
            std::replace(fname.begin(), fname.end(), '-', '_');
            export_windowed(mr.reconstruction, cfg.window_lo, cfg.window_hi,
                            d + "/" + fname + ".pgm", windows, name);
            write_raw(mr.reconstruction, d + "/" + fname + ".raw");
        }

        // Diagonal line profiles of GT and every method in one CSV.
        std::vector<std::string> header = {"index", "gt"};
        std::vector<std::vector<double>> cols;
        std::vector<double> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        cols.push_back(idx);
        cols.push_back(line_profile(gt));
        for (const auto& [name, mr] : res.methods) {
            header.push_back(name);
            cols.push_back(line_profile(mr.reconstruction));
        }
        write_csv(d + "/line_profile.csv", header, cols);

        write_trace_csv(trace_plain, d + "/iterative_trace.csv");
        write_trace_csv(trace_tv, d + "/iterative_tv_trace.csv");

        json metrics;
        for (const auto& [name, mr] : res.methods)
            metrics[name] = {{"rmse", mr.rmse}, {"ssim", mr.ssim}};
        metrics["windows"] = windows;
        write_json(metrics, d + "/metrics.json");

        std::ofstream table(d + "/metrics.txt");
        table << std::left << std::setw(16) << "Method" << std::setw(12)
              << "RMSE" << std::setw(12) << "SSIM" << "\n";
        for (const char* name :
             {"bpf", "wrong-psinv", "iterative", "iterative-tv"}) {
            const auto& mr = res.methods.at(name);
            table << std::left << std::setw(16) << name << std::setw(12)
                  << std::setprecision(4) << mr.rmse << std::setw(12) << mr.ssim
                  << "\n";
        }

        write_json(metadata_json(cfg, "wedge"), d + "/metadata.json");
        if (cfg.export_weights) export_weight_pgms(w, n, n, d);
    }
    return res;
}

}  // namespace wtomo
