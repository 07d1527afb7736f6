#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "lippfm/sweep.hpp"

namespace fs = std::filesystem;
using namespace lippfm;

namespace {

SweepConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) {
        SweepConfig c;
        c.validate();
        return c;
    }
    return load_config(config_path);
}

void ensure_out_dir(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir, bool svg, int jobs) {
    SweepConfig config = load_or_default(config_path);
    if (jobs >= 0) config.jobs = jobs;

    const fs::path out(out_dir);
    ensure_out_dir(out);
    write_config_echo(config, out / "resolved_config.json");

    const RegionMap map = run_sweep(config);
    emit_csv(map, out / config.csv_name);
    if (svg) emit_svg(map, out / config.svg_name);

    const auto warnings = ray_monotonicity_warnings(map);
    if (!warnings.empty()) {
        std::ofstream wf(out / "warnings.txt");
        if (!wf) throw IoError("cannot write " + (out / "warnings.txt").string());
        for (const auto& w : warnings) wf << w << '\n';
    }

    std::map<std::string, int> counts;
    for (const auto& cell : map.cells) ++counts[to_string(cell.classification)];
    std::cout << "sweep: " << map.theta_a.count << "x" << map.theta_a_dot.count << " cells";
    for (const auto& [name, n] : counts) std::cout << ", " << name << "=" << n;
    std::cout << "\nwrote " << (out / config.csv_name).string();
    if (svg) std::cout << ", " << (out / config.svg_name).string();
    if (!warnings.empty())
        std::cout << "\n" << warnings.size() << " region-structure warning(s) -> "
                  << (out / "warnings.txt").string();
    std::cout << std::endl;
    return 0;
}

int run_episode_cmd(const std::string& config_path, const std::string& out_dir) {
    SweepConfig config = load_or_default(config_path);

    const fs::path out(out_dir);
    ensure_out_dir(out);
    write_config_echo(config, out / "resolved_config.json");

    const EpisodeResult result = run_episode(config.model, config.episode_config());

    {
        std::ofstream csv(out / "trajectory.csv", std::ios::binary);
        if (!csv) throw IoError("cannot write " + (out / "trajectory.csv").string());
        write_trajectory_csv(result, csv);
        if (!csv) throw IoError("write failed: " + (out / "trajectory.csv").string());
    }
    {
        std::ofstream js(out / "episode.json", std::ios::binary);
        if (!js) throw IoError("cannot write " + (out / "episode.json").string());
        write_episode_json(result, js);
        if (!js) throw IoError("write failed: " + (out / "episode.json").string());
    }

    std::cout << "episode: classification=" << to_string(result.classification)
              << ", t_event=" << result.t_event << " s, samples=" << result.samples.size()
              << ", events=" << result.events.size() << "\nwrote "
              << (out / "trajectory.csv").string() << ", " << (out / "episode.json").string()
              << std::endl;
    return 0;
}

int run_design_cmd(const std::string& config_path) {
    SweepConfig config = load_or_default(config_path);
    const DerivedConstants consts = derive_constants(config.model);
    const LinearPlant plant = linearize(config.model, consts);
    std::cout << "controllability rank: " << controllability_rank(plant) << "\n";
    const LqrDesign design = lqr_gain(plant, config.weights);
    std::cout << design_report(design);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Balance stabilization toolbox for a planar inverted pendulum with flywheel:\n"
                 "LQR torque control, DCM-based step decisions, push-recovery region sweeps."};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    bool svg = false;
    int jobs = -1;
    long seed = 0;  // reserved; no randomness in v1

    auto* sweep = app.add_subcommand("sweep", "Classify a grid of initial conditions (CSV/SVG map)");
    sweep->add_option("--config", config_path, "Config file (JSON); defaults when omitted");
    sweep->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sweep->add_flag("--svg", svg, "Also emit the SVG heatmap");
    sweep->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");
    sweep->add_option("--seed", seed, "Reserved; accepted and ignored");

    auto* episode = app.add_subcommand("episode", "Run one episode, write trajectory CSV + JSON record");
    episode->add_option("--config", config_path, "Config file (JSON); defaults when omitted");
    episode->add_option("--out", out_dir, "Output directory")->capture_default_str();
    episode->add_option("--seed", seed, "Reserved; accepted and ignored");

    auto* design = app.add_subcommand("design", "Print the LQR diagnostic report");
    design->add_option("--config", config_path, "Config file (JSON); defaults when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) return run_sweep_cmd(config_path, out_dir, svg, jobs);
        if (episode->parsed()) return run_episode_cmd(config_path, out_dir);
        if (design->parsed()) return run_design_cmd(config_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
