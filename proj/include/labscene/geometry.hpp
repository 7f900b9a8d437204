#pragma once

#include <optional>
#include <string>
#include <vector>

#include "labscene/asset.hpp"
#include "labscene/geom.hpp"
#include "labscene/scene.hpp"

namespace labscene {

// Rotation-aware footprint of a placed object: long_side x short_side
// rectangle centered at (x, y), rotated by yaw.
Footprint footprint_of(const PlacedObject& obj, const AssetRecord& asset);

// Minimal inward correction against the room's usable interior, or nullopt
// when the footprint already fits. Throws when the object cannot fit.
std::optional<Vec2> out_of_bounds_in_room(const Footprint& fp, const Room& room);

// Out-of-bounds test at the object's own level: room interior for floor
// objects, parent tabletop bounds for desktop items.
std::optional<Vec2> out_of_bounds_for(const Layout& layout, const AssetBase& base,
                                      const PlacedObject& obj);

struct CollisionEntry {
    std::string id_a;  // earlier object in layout order
    std::string id_b;  // later object in layout order
    PenetrationResult pen;
};

// Same-level collision sweep: floor objects against floor objects, desktop
// items against items on the same surface. Parent-child pairs are exempt.
// The OpenMP kernel and the serial reference produce identical output.
std::vector<CollisionEntry> pairwise_collisions(const Layout& layout,
                                                const AssetBase& base);
std::vector<CollisionEntry> pairwise_collisions_serial(const Layout& layout,
                                                       const AssetBase& base);

// Number of pairs the collision sweep tests (the n_checks denominator).
int same_level_pair_count(const Layout& layout);

// Minimum over the item's footprint corners of the signed distance to the
// parent tabletop boundary (negative when a corner overhangs). Throws when
// the item is not attached to the given parent.
double edge_distance(const PlacedObject& item, const AssetRecord& item_asset,
                     const PlacedObject& parent, const AssetRecord& parent_asset);

}  // namespace labscene
