#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "labscene/asset.hpp"
#include "labscene/geom.hpp"
#include "labscene/issue.hpp"

namespace labscene {

// Global pose. Origin is the front-left corner of the room floor; yaw is
// counterclockwise degrees in [0,360) about the vertical axis, 0 = facing +y.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double yaw_deg = 0.0;
};

struct Room {
    double width = 0.0;   // x extent
    double depth = 0.0;   // y extent
    double height = 0.0;
    double wall_thickness = 0.0;

    BoundsRect usable_interior() const {
        return {wall_thickness, wall_thickness, width - wall_thickness,
                depth - wall_thickness};
    }
};

inline constexpr const char* kFloorLocation = "floor";

struct PlacedObject {
    std::string instance_id;
    std::string asset_id;
    Pose pose;
    std::string initial_location = kFloorLocation;

    bool on_floor() const { return initial_location == kFloorLocation; }
};

struct Layout {
    Room room;
    std::vector<PlacedObject> objects;  // order is significant for repair
    std::map<std::string, std::string> metadata;

    const PlacedObject* find(std::string_view instance_id) const;
    PlacedObject* find(std::string_view instance_id);
    // First placed instance of the given asset, in layout order.
    const PlacedObject* find_by_asset(std::string_view asset_id) const;
};

Layout load_layout(const std::filesystem::path& path);
Layout layout_from_json_text(const std::string& text);
std::string layout_to_json_text(const Layout& layout);
void save_layout(const Layout& layout, const std::filesystem::path& path);

// Structural invariants: unique instance ids, resolvable attachments,
// single-level nesting, tabletop height consistency (when base is given).
std::vector<Issue> validate_layout(const Layout& layout, const AssetBase* base);

// Height of the work surface of a placed object: pose z plus bbox height.
double tabletop_height(const PlacedObject& parent, const AssetRecord& parent_asset);

// Front-left corner of the tabletop in global coordinates (the corner from
// which local u runs along the long side and v along the short side).
Vec2 tabletop_corner(const PlacedObject& parent, const AssetRecord& parent_asset);

// Maps tabletop-local (u, v, yaw) to a global pose. u in [0, long_side],
// v in [0, short_side]. Throws when the parent asset is not a surface.
Pose desktop_to_global(const PlacedObject& parent, const AssetRecord& parent_asset,
                       double u, double v, double yaw_local_deg);

// All objects attached to the given instance, in layout order. Throws
// std::runtime_error on unknown instance_id.
std::vector<const PlacedObject*> items_on(const Layout& layout,
                                          std::string_view instance_id);

// Rigid workspace motion: the object and everything attached to it move as
// one body. Throws std::runtime_error on unknown instance_id.
void translate_rigid(Layout& layout, std::string_view instance_id, Vec2 delta);
void rotate_rigid(Layout& layout, std::string_view instance_id, double delta_deg);

}  // namespace labscene
