#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "labscene/navigation.hpp"

namespace labscene {

// Optional overlays for the top-down figure.
struct RenderExtras {
    const OccupancyGrid* grid = nullptr;
    const std::vector<GoalPair>* pairs = nullptr;
    const std::vector<NavOutcome>* outcomes = nullptr;
    // Instance-id pairs drawn with a violation highlight.
    std::vector<std::pair<std::string, std::string>> highlight_pairs;
};

// Deterministic SVG: room outline, rotated footprints labeled by asset id,
// desktop items nested, optional occupancy raster, A* polylines and
// start/goal markers with heading arrows. 100 px per meter, y flipped for
// screen convention.
std::string render_svg(const Layout& layout, const AssetBase& base,
                       const RenderExtras& extras = {});

void save_svg(const std::string& svg, const std::filesystem::path& path);

}  // namespace labscene
