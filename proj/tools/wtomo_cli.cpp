// Command-line front end: experiment drivers, a generic reconstruction
// entry point, and a weight-rank report.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "wtomo/experiments.hpp"
#include "wtomo/io.hpp"
#include "wtomo/linalg.hpp"
#include "wtomo/metrics.hpp"
#include "wtomo/phantoms.hpp"
#include "wtomo/solvers.hpp"

using namespace wtomo;
using nlohmann::json;

namespace {

struct CommonOpts {
    double scale = 1.0;
    double s_min = 0.25;
    double s_max = 1.0;
    double relaxation = 0.5;
    int iterations = 100;
    double tv_weight = 0.0;
    std::string out = "out";
    long seed = 0;
    bool export_weights = false;
};

void add_weight_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--smin", o.s_min, "Ramp weight on the detector side")
        ->capture_default_str();
    cmd->add_option("--smax", o.s_max, "Ramp weight on the source side")
        ->capture_default_str();
}

void add_solver_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--relaxation", o.relaxation,
                    "Kaczmarz relaxation factor in (0, 2)")
        ->capture_default_str();
    cmd->add_option("--iterations", o.iterations, "Full sweeps over all rays")
        ->capture_default_str();
    cmd->add_option("--tv-weight", o.tv_weight,
                    "TV regularization weight (0 disables)")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed recorded in the run metadata")
        ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_flag("--export-weights", o.export_weights,
                  "Also write per-angle weight images");
}

// Flat key=value config file; keys are the long flag names without the
// leading dashes. Command-line flags win over config values.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        if (strip(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError(
                "--config", "expected key=value at line " + std::to_string(lineno));
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        CLI::Option* opt =
            key == "config" ? nullptr : cmd->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw CLI::ValidationError("--config", "unknown key '" + key +
                                                       "' at line " +
                                                       std::to_string(lineno));
        if (opt->count() > 0) continue;  // command line wins
        opt->add_result(value);
        opt->run_callback();
    }
}

void add_config_flag(CLI::App* cmd) {
    // parsed and applied after all regular flags, so flags take precedence
    auto path = std::make_shared<std::string>();
    cmd->add_option("--config", *path, "Flat key=value config file")
        ->configurable(false);
    cmd->parse_complete_callback([cmd, path] {
        if (!path->empty()) apply_config_file(cmd, *path);
    });
}

SolverConfig solver_config(const CommonOpts& o) {
    SolverConfig s;
    s.relaxation = o.relaxation;
    s.iterations = o.iterations;
    s.tv_weight = o.tv_weight;
    s.rng_seed = o.seed;
    s.validate();
    return s;
}

int scaled(int base, double scale, int lo) {
    return std::max(lo, static_cast<int>(std::lround(base * scale)));
}

int run_toy(const CommonOpts& o) {
    ExperimentConfig cfg;
    cfg.s_min = o.s_min;
    cfg.s_max = o.s_max;
    cfg.out_dir = o.out;
    cfg.export_weights = o.export_weights;
    const ToyPinvResult r = run_toy_pinv(cfg);
    std::printf("%-16s %s\n", "Pathway", "L2 distance to ground truth");
    std::printf("%-16s %.6e\n", "direct", r.direct.l2_distance_to_ground_truth);
    std::printf("%-16s %.6e\n", "split", r.split.l2_distance_to_ground_truth);
    std::printf("%-16s %.6e\n", "product",
                r.product.l2_distance_to_ground_truth);
    if (!o.out.empty()) std::printf("outputs written to %s\n", o.out.c_str());
    return 0;
}

int run_wedge_cmd(const CommonOpts& o) {
    ExperimentConfig cfg;
    cfg.grid_size = scaled(256, o.scale, 16);
    cfg.num_angles = scaled(360, o.scale, 4);
    cfg.s_min = o.s_min;
    cfg.s_max = o.s_max;
    cfg.solver = solver_config(o);
    cfg.out_dir = o.out;
    cfg.export_weights = o.export_weights;
    std::printf("wedge experiment: %dx%d grid, %d views\n", cfg.grid_size,
                cfg.grid_size, cfg.num_angles);
    const WedgeResult r = run_wedge(cfg);
    std::printf("%-16s %-10s %-10s\n", "Method", "RMSE", "SSIM");
    for (const char* name :
         {"bpf", "wrong-psinv", "iterative", "iterative-tv"}) {
        const MethodResult& mr = r.methods.at(name);
        std::printf("%-16s %-10.4f %-10.4f\n", name, mr.rmse, mr.ssim);
    }
    if (!o.out.empty()) std::printf("outputs written to %s\n", o.out.c_str());
    return 0;
}

int run_reconstruct(const CommonOpts& o, const std::string& input,
                    const std::string& method, int grid, int angles) {
    const ImageGrid gt =
        input.empty() ? make_two_wedge(grid, grid) : read_raw(input);
    if (gt.nx != gt.ny)
        throw std::runtime_error("reconstruct: input image must be square");
    const Geometry geom = make_wedge_geometry(gt.nx, gt.ny, angles);
    const BlockSystem bs = build_block_system(geom);
    const WeightField w = ramp_weights(geom, o.s_min, o.s_max);
    const Sinogram p = forward_project(bs, w, gt);

    ImageGrid x;
    if (method == "bpf") {
        x = solve_bpf(bs, p);
    } else if (method == "wrong-psinv") {
        x = solve_wrong_pinv(bs, w, p);
    } else if (method == "iterative" || method == "iterative-tv") {
        SolverConfig s = solver_config(o);
        if (method == "iterative-tv" && s.tv_weight <= 0.0) s.tv_weight = 0.01;
        x = (method == "iterative-tv" ? solve_kaczmarz_tv(bs, w, p, s, &gt)
                                      : solve_kaczmarz(bs, w, p, s, &gt))
                .final_image;
    } else if (method == "direct-pinv") {
        x = reconstruct_direct_pinv(bs, w, p, &gt).reconstruction;
    } else {
        throw CLI::ValidationError("--method", "unknown method " + method);
    }

    const double r = rmse(x, gt);
    const double s = ssim(x, gt, 1.0);
    std::printf("%s: rmse %.6f ssim %.6f\n", method.c_str(), r, s);
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        write_raw(x, o.out + "/recon.raw");
        const auto [mn, mx] = std::minmax_element(x.values.begin(),
                                                  x.values.end());
        const double hi = *mx > *mn ? *mx : *mn + 1.0;
        export_image(x, std::min(0.0, *mn), std::max(1.0, hi),
                     o.out + "/recon.pgm");
        export_line_profile(x, o.out + "/recon_profile.csv");
        json metrics = {{"method", method},
                        {"rmse", r},
                        {"ssim", s},
                        {"grid", gt.nx},
                        {"angles", angles},
                        {"s_min", o.s_min},
                        {"s_max", o.s_max}};
        std::ofstream(o.out + "/metrics.json") << metrics.dump(2) << "\n";
        std::printf("outputs written to %s\n", o.out.c_str());
    }
    return 0;
}

int run_rank_report(const CommonOpts& o, const std::string& weights_path,
                    int grid, int angles) {
    WeightField w;
    if (!weights_path.empty()) {
        // raw image reinterpreted as the weight table: one row per view
        const ImageGrid img = read_raw(weights_path);
        w = WeightField(img.ny, img.nx);
        std::copy(img.values.begin(), img.values.end(), w.w.begin());
    } else {
        const Geometry g = make_wedge_geometry(grid, grid, angles);
        w = ramp_weights(g, o.s_min, o.s_max);
    }
    w.check_columns_nonzero();
    json rep = {{"num_angles", w.num_angles},
                {"num_voxels", w.num_voxels},
                {"rank_W", numerical_rank(densify_W(w))},
                {"rank_WWt", wwt_rank(w)},
                {"full_rank_would_be", w.num_angles * w.num_voxels}};
    std::printf("%s\n", rep.dump(2).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted tomographic reconstruction toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string input, weights_path;
    std::string method = "iterative";
    int grid = 64;
    int angles = 90;

    CLI::App* toy = app.add_subcommand(
        "toy-pinv", "Small-system pseudoinverse pathway comparison");
    add_config_flag(toy);
    add_weight_flags(toy, o);
    add_output_flags(toy, o);

    CLI::App* wedge = app.add_subcommand(
        "wedge", "Two-wedge phantom experiment (BPF, wrong split "
                 "pseudoinverse, Kaczmarz, Kaczmarz+TV)");
    add_config_flag(wedge);
    wedge->add_option("--scale", o.scale,
                      "Scales the 256x256/360-view default geometry")
        ->capture_default_str();
    add_weight_flags(wedge, o);
    add_solver_flags(wedge, o);
    add_output_flags(wedge, o);

    CLI::App* rec = app.add_subcommand(
        "reconstruct", "Reconstruct a phantom image with one chosen method");
    add_config_flag(rec);
    rec->add_option("--input", input,
                    "Square ground-truth image (raw float32); omitted: "
                    "built-in wedge phantom at --grid");
    rec->add_option("--method", method,
                    "bpf | wrong-psinv | iterative | iterative-tv | "
                    "direct-pinv")
        ->capture_default_str();
    rec->add_option("--grid", grid, "Phantom size when --input is omitted")
        ->capture_default_str();
    rec->add_option("--angles", angles, "Number of views")
        ->capture_default_str();
    add_weight_flags(rec, o);
    add_solver_flags(rec, o);
    add_output_flags(rec, o);

    CLI::App* rank = app.add_subcommand(
        "rank-report", "Numerical ranks of the weight matrix W and W W^T");
    add_config_flag(rank);
    rank->add_option("--weights", weights_path,
                     "Weight table as raw float32 (rows = views)");
    rank->add_option("--grid", grid, "Grid size for generated ramp weights")
        ->default_val(4);
    rank->add_option("--angles", angles, "Views for generated ramp weights")
        ->default_val(4);
    add_weight_flags(rank, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (toy->parsed()) return run_toy(o);
        if (wedge->parsed()) return run_wedge_cmd(o);
        if (rec->parsed()) return run_reconstruct(o, input, method, grid, angles);
        if (rank->parsed()) return run_rank_report(o, weights_path, grid, angles);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
