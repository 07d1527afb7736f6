#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lippfm/config.hpp"

namespace lippfm {

struct CellResult {
    Classification classification = Classification::stable;
    double max_abs_tau_a = 0.0;
    double max_abs_zeta = 0.0;
    double t_event = 0.0;
    double initial_zeta = 0.0;
    bool any_saturation = false;
    bool step_event = false;
};

/// Stability-region map over the initial-condition grid. Cells are stored
/// row-major: index = i * theta_a_dot.count + j, where i walks theta_a and
/// j walks theta_a_dot.
struct RegionMap {
    GridAxis theta_a{};
    GridAxis theta_a_dot{};
    std::vector<CellResult> cells;

    const CellResult& cell(int i, int j) const { return cells[i * theta_a_dot.count + j]; }
};

/// Classifies every grid cell with an independent episode. The LQR synthesis
/// runs once and is shared; cells are distributed over a pool of
/// config.jobs workers (0 = hardware concurrency) and assembled by index, so
/// the result is identical regardless of parallelism. Throws SynthesisError
/// before any episode runs if synthesis fails; per-cell non-finite aborts
/// become Classification::aborted cells.
RegionMap run_sweep(const SweepConfig& config);

/// Region-structure check: walking outward from theta_a_dot = 0 along each
/// grid column (fixed theta_a), once a cell is non-stable every farther cell
/// on that ray should be non-stable too. Returns one message per violation.
std::vector<std::string> ray_monotonicity_warnings(const RegionMap& map);

/// Header plus one row per cell: theta_a, theta_a_dot, classification,
/// max_abs_tau_a, max_abs_zeta, t_event. 9 significant digits, byte-stable.
void emit_csv(const RegionMap& map, const std::filesystem::path& path);

/// Standalone SVG heatmap: one rect per cell keyed by classification (step
/// classes in the pink family), labeled axes, legend.
void emit_svg(const RegionMap& map, const std::filesystem::path& path);

} // namespace lippfm
