#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "labscene/geometry.hpp"
#include "labscene/protocol.hpp"

namespace labscene {

// Binary raster of traversable floor space. Cell (0,0) sits at origin; cell
// centers are origin + ((i+0.5), (j+0.5)) * resolution. 1 = occupied.
struct OccupancyGrid {
    double resolution = 0.05;
    Vec2 origin;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells;

    bool in_bounds(int gx, int gy) const {
        return gx >= 0 && gy >= 0 && gx < width && gy < height;
    }
    bool occupied(int gx, int gy) const {
        return cells[static_cast<std::size_t>(gy) * width + gx] != 0;
    }
    Vec2 cell_center(int gx, int gy) const {
        return {origin.x + (gx + 0.5) * resolution, origin.y + (gy + 0.5) * resolution};
    }
    // Cell containing a world point; false when outside the raster.
    bool locate(Vec2 p, int& gx, int& gy) const;
};

struct NavTarget {
    double x = 0.0;
    double y = 0.0;
    double theta_deg = 0.0;  // internal degrees; files serialize radians
    int step_index = 0;
    std::string target_instance;
};

struct GoalPair {
    NavTarget start;
    NavTarget end;
};

enum class NavStatus { ok, start_blocked, end_blocked, path_blocked };
std::string to_string(NavStatus s);

struct NavOutcome {
    NavStatus status = NavStatus::ok;
    std::vector<std::pair<int, int>> path;  // grid cells, present iff ok
    double length = 0.0;                    // meters
};

enum class InflationMode { rounded, bbox };

struct NavConfig {
    double resolution = 0.05;
    double agent_radius = 0.3;
    double offset_radius = 0.3;
    InflationMode inflation = InflationMode::rounded;
};

// Direction of the navigation approach offset for a given yaw: the unit
// vector (-sin yaw, -cos yaw) the target pose is displaced along.
Vec2 nav_offset_direction(double yaw_deg);

// Navigation pose for one protocol step: the step's primary asset, retargeted
// to its parent surface when the parent footprint is larger, displaced by
// dist = d_y/2 + 2*offset_radius and turned to face back at the target.
NavTarget nav_target_for(const ProtocolStep& step, const Layout& layout,
                         const AssetBase& base, double offset_radius);

// Consecutive step targets paired start->end; coincident pairs (position and
// heading both matching) are discarded.
std::vector<GoalPair> goal_pairs(const Protocol& protocol, const Layout& layout,
                                 const AssetBase& base, double offset_radius);

// Floor-level footprints inflated by the agent radius, rasterized over the
// room; wall cells occupied. The OpenMP kernel and the serial reference
// produce identical rasters.
OccupancyGrid rasterize(const Layout& layout, const AssetBase& base,
                        double resolution, double agent_radius,
                        InflationMode mode = InflationMode::rounded);
OccupancyGrid rasterize_serial(const Layout& layout, const AssetBase& base,
                               double resolution, double agent_radius,
                               InflationMode mode = InflationMode::rounded);

// 8-connected A* with the octile heuristic; diagonal steps cost sqrt(2) *
// resolution and may not cut corners. Failures are statuses, not errors.
NavOutcome plan(const OccupancyGrid& grid, Vec2 start, Vec2 goal);

// Plans every pair over a shared immutable grid (OpenMP across pairs).
std::vector<NavOutcome> plan_pairs(const OccupancyGrid& grid,
                                   const std::vector<GoalPair>& pairs);
std::vector<NavOutcome> plan_pairs_serial(const OccupancyGrid& grid,
                                          const std::vector<GoalPair>& pairs);

struct ReachReport {
    int reach = 1;  // 1 iff every goal pair planned ok (vacuously 1)
    std::vector<GoalPair> pairs;
    std::vector<NavOutcome> outcomes;
};

ReachReport f_reach(const Layout& layout, const Protocol& protocol,
                    const AssetBase& base, const NavConfig& cfg);

// Goal-pair file: theta serialized in radians at 3 decimals.
std::string goal_pairs_to_json_text(const std::vector<GoalPair>& pairs,
                                    int num_targets);
std::vector<GoalPair> goal_pairs_from_json_text(const std::string& text);
void save_goal_pairs(const std::vector<GoalPair>& pairs, int num_targets,
                     const std::filesystem::path& path);

// P5 PGM, 0 = occupied, 255 = free.
void save_grid_pgm(const OccupancyGrid& grid, const std::filesystem::path& path);

}  // namespace labscene
