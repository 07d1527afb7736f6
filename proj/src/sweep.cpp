#include "lippfm/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace lippfm {
namespace {

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

bool any_event(const EpisodeResult& r, EventKind kind) {
    for (const auto& e : r.events) {
        if (e.kind == kind) return true;
    }
    return false;
}

} // namespace

RegionMap run_sweep(const SweepConfig& config) {
    config.validate();
    const DerivedConstants consts = derive_constants(config.model);
    const LinearPlant plant = linearize(config.model, consts);
    const LqrDesign design = lqr_gain(plant, config.weights);  // shared by all cells

    RegionMap map;
    map.theta_a = config.theta_a;
    map.theta_a_dot = config.theta_a_dot;
    const int nx = config.theta_a.count;
    const int ny = config.theta_a_dot.count;
    map.cells.resize(static_cast<size_t>(nx) * ny);

    unsigned workers = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, map.cells.size());

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= static_cast<int>(map.cells.size())) return;
            try {
                const int i = k / ny;
                const int j = k % ny;
                EpisodeConfig ec = config.episode_config();
                ec.initial_state = State{config.theta_a.value(i), config.theta_a_dot.value(j), 0.0, 0.0};
                ec.record_samples = false;
                const EpisodeResult r = run_episode(config.model, consts, plant, design, ec);

                CellResult& cell = map.cells[k];
                cell.classification = r.classification;
                cell.max_abs_tau_a = r.max_abs_tau_a;
                cell.max_abs_zeta = r.max_abs_zeta;
                cell.t_event = r.t_event;
                cell.initial_zeta =
                    measure_dcm(plant, ec.initial_state.controlled(), InputVec::Zero()).zeta;
                cell.any_saturation = any_event(r, EventKind::saturation_on);
                cell.step_event = any_event(r, EventKind::step);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return map;
}

std::vector<std::string> ray_monotonicity_warnings(const RegionMap& map) {
    std::vector<std::string> warnings;
    const int ny = map.theta_a_dot.count;
    auto walk = [&](int i, int j_begin, int j_end, int stride) {
        bool hit_nonstable = false;
        double hit_at = 0.0;
        for (int j = j_begin; j != j_end; j += stride) {
            const auto cls = map.cell(i, j).classification;
            if (cls == Classification::step_required || cls == Classification::fallen) {
                if (!hit_nonstable) hit_at = map.theta_a_dot.value(j);
                hit_nonstable = true;
            } else if (hit_nonstable && cls == Classification::stable) {
                std::ostringstream os;
                os << "non-monotone ray at theta_a=" << g9(map.theta_a.value(i))
                   << ": stable cell at theta_a_dot=" << g9(map.theta_a_dot.value(j))
                   << " lies beyond non-stable cell at theta_a_dot=" << g9(hit_at);
                warnings.push_back(os.str());
            }
        }
    };
    for (int i = 0; i < map.theta_a.count; ++i) {
        int j0 = 0;
        while (j0 < ny && map.theta_a_dot.value(j0) < 0.0) ++j0;
        if (j0 < ny) walk(i, j0, ny, 1);  // outward along increasing theta_a_dot >= 0
        int j1 = ny - 1;
        while (j1 >= 0 && map.theta_a_dot.value(j1) > 0.0) --j1;
        if (j1 >= 0) walk(i, j1, -1, -1);  // outward along decreasing theta_a_dot <= 0
    }
    return warnings;
}

void emit_csv(const RegionMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "theta_a,theta_a_dot,classification,max_abs_tau_a,max_abs_zeta,t_event\n";
    for (int i = 0; i < map.theta_a.count; ++i) {
        for (int j = 0; j < map.theta_a_dot.count; ++j) {
            const CellResult& c = map.cell(i, j);
            out << g9(map.theta_a.value(i)) << ',' << g9(map.theta_a_dot.value(j)) << ','
                << to_string(c.classification) << ',' << g9(c.max_abs_tau_a) << ','
                << g9(c.max_abs_zeta) << ',' << g9(c.t_event) << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

const char* cell_color(Classification c) {
    switch (c) {
        case Classification::stable: return "#dcedc8";
        case Classification::step_recovered: return "#90caf9";
        case Classification::step_required: return "#f48fb1";  // pink family
        case Classification::fallen: return "#e91e63";         // pink family
        case Classification::aborted: return "#bdbdbd";
    }
    return "#000000";
}

std::string g3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

} // namespace

void emit_svg(const RegionMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());

    const int nx = map.theta_a.count;
    const int ny = map.theta_a_dot.count;
    const double left = 70.0, top = 20.0, plot_w = 520.0, plot_h = 440.0;
    const double cw = plot_w / nx, ch = plot_h / ny;
    const double width = left + plot_w + 170.0;
    const double height = top + plot_h + 60.0;

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"#ffffff\"/>\n";

    // cells; theta_a on x, theta_a_dot on y (max at top)
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const double x = left + i * cw;
            const double y = top + (ny - 1 - j) * ch;
            out << "  <rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw
                << "\" height=\"" << ch << "\" fill=\"" << cell_color(map.cell(i, j).classification)
                << "\"/>\n";
        }
    }

    // axes with the grid bounds as tick labels
    out << "  <rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    out << "  <text x=\"" << left << "\" y=\"" << top + plot_h + 16
        << "\" font-size=\"12\" text-anchor=\"middle\">" << g3(map.theta_a.min) << "</text>\n";
    out << "  <text x=\"" << left + plot_w << "\" y=\"" << top + plot_h + 16
        << "\" font-size=\"12\" text-anchor=\"middle\">" << g3(map.theta_a.max) << "</text>\n";
    out << "  <text x=\"" << left + plot_w / 2 << "\" y=\"" << top + plot_h + 40
        << "\" font-size=\"13\" text-anchor=\"middle\">theta_a [rad]</text>\n";
    out << "  <text x=\"" << left - 8 << "\" y=\"" << top + plot_h
        << "\" font-size=\"12\" text-anchor=\"end\">" << g3(map.theta_a_dot.min) << "</text>\n";
    out << "  <text x=\"" << left - 8 << "\" y=\"" << top + 10
        << "\" font-size=\"12\" text-anchor=\"end\">" << g3(map.theta_a_dot.max) << "</text>\n";
    out << "  <text x=\"14\" y=\"" << top + plot_h / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << top + plot_h / 2 << ")\">theta_a_dot [rad/s]</text>\n";

    // legend
    const Classification legend[] = {Classification::stable, Classification::step_recovered,
                                     Classification::step_required, Classification::fallen,
                                     Classification::aborted};
    double ly = top + 10.0;
    const double lx = left + plot_w + 20.0;
    for (const auto cls : legend) {
        out << "  <rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"14\" fill=\""
            << cell_color(cls) << "\" stroke=\"#000000\"/>\n";
        out << "  <text x=\"" << lx + 20 << "\" y=\"" << ly + 12 << "\" font-size=\"12\">"
            << to_string(cls) << "</text>\n";
        ly += 22.0;
    }

    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace lippfm
