#include "labscene/scene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "jsonfmt.hpp"

namespace labscene {

using nlohmann::json;

const PlacedObject* Layout::find(std::string_view instance_id) const {
    for (const PlacedObject& o : objects) {
        if (o.instance_id == instance_id) return &o;
    }
    return nullptr;
}

PlacedObject* Layout::find(std::string_view instance_id) {
    for (PlacedObject& o : objects) {
        if (o.instance_id == instance_id) return &o;
    }
    return nullptr;
}

const PlacedObject* Layout::find_by_asset(std::string_view asset_id) const {
    for (const PlacedObject& o : objects) {
        if (o.asset_id == asset_id) return &o;
    }
    return nullptr;
}

Layout layout_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("layout parse error: ") + e.what());
    }
    Layout layout;
    const json& room = doc.at("room");
    layout.room.width = room.at("width").get<double>();
    layout.room.depth = room.at("depth").get<double>();
    layout.room.height = room.at("height").get<double>();
    layout.room.wall_thickness = room.value("wall_thickness", 0.0);

    std::unordered_set<std::string> seen;
    for (const json& jo : doc.at("objects")) {
        PlacedObject o;
        o.instance_id = jo.at("instance_id").get<std::string>();
        o.asset_id = jo.at("asset_id").get<std::string>();
        const json& p = jo.at("position");
        o.pose.x = p.at(0).get<double>();
        o.pose.y = p.at(1).get<double>();
        o.pose.z = p.at(2).get<double>();
        o.pose.yaw_deg = norm_deg(jo.at("yaw_deg").get<double>());
        o.initial_location = jo.value("initial_location", std::string(kFloorLocation));
        if (!seen.insert(o.instance_id).second) {
            throw std::runtime_error("duplicate instance_id: " + o.instance_id);
        }
        layout.objects.push_back(std::move(o));
    }
    for (const PlacedObject& o : layout.objects) {
        if (!o.on_floor() && layout.find(o.initial_location) == nullptr) {
            throw std::runtime_error("dangling initial_location \"" +
                                     o.initial_location + "\" on " + o.instance_id);
        }
    }
    if (doc.contains("metadata")) {
        for (auto it = doc.at("metadata").begin(); it != doc.at("metadata").end(); ++it) {
            layout.metadata[it.key()] = it.value().get<std::string>();
        }
    }
    return layout;
}

Layout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open layout: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return layout_from_json_text(ss.str());
}

std::string layout_to_json_text(const Layout& layout) {
    namespace jf = jsonfmt;
    std::ostringstream os;
    os << "{\n";
    os << "  \"room\": {\"width\": " << jf::num(layout.room.width)
       << ", \"depth\": " << jf::num(layout.room.depth)
       << ", \"height\": " << jf::num(layout.room.height)
       << ", \"wall_thickness\": " << jf::num(layout.room.wall_thickness) << "},\n";
    os << "  \"objects\": [";
    for (std::size_t i = 0; i < layout.objects.size(); ++i) {
        const PlacedObject& o = layout.objects[i];
        os << (i == 0 ? "\n" : ",\n");
        os << "    {\"instance_id\": " << jf::str(o.instance_id)
           << ", \"asset_id\": " << jf::str(o.asset_id) << ", \"position\": ["
           << jf::num(o.pose.x) << ", " << jf::num(o.pose.y) << ", "
           << jf::num(o.pose.z) << "], \"yaw_deg\": " << jf::num(o.pose.yaw_deg)
           << ", \"initial_location\": " << jf::str(o.initial_location) << "}";
    }
    os << (layout.objects.empty() ? "]" : "\n  ]") << ",\n";
    os << "  \"metadata\": {";
    bool first = true;
    for (const auto& [k, v] : layout.metadata) {
        os << (first ? "" : ", ") << jf::str(k) << ": " << jf::str(v);
        first = false;
    }
    os << "}\n}\n";
    return os.str();
}

void save_layout(const Layout& layout, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write layout: " + path.string());
    out << layout_to_json_text(layout);
}

std::vector<Issue> validate_layout(const Layout& layout, const AssetBase* base) {
    std::vector<Issue> issues;
    auto bad = [&](std::string field, std::string rule, std::string msg) {
        issues.push_back({std::move(field), std::move(rule), std::move(msg), false});
    };
    if (!(layout.room.width > 0.0) || !(layout.room.depth > 0.0) ||
        !(layout.room.height > 0.0)) {
        bad("room", "positive_dims", "room dimensions must be positive");
    }
    std::unordered_map<std::string, const PlacedObject*> by_id;
    for (const PlacedObject& o : layout.objects) {
        if (!by_id.emplace(o.instance_id, &o).second) {
            bad("objects", "unique_instance_id", "duplicate id " + o.instance_id);
        }
        if (o.initial_location == o.instance_id) {
            bad(o.instance_id + ".initial_location", "self_reference",
                "object attached to itself");
        }
        if (o.pose.z < 0.0) bad(o.instance_id + ".position", "z_nonneg", "z < 0");
    }
    for (const PlacedObject& o : layout.objects) {
        if (o.on_floor()) continue;
        auto it = by_id.find(o.initial_location);
        if (it == by_id.end()) {
            bad(o.instance_id + ".initial_location", "dangling_reference",
                "no instance named " + o.initial_location);
            continue;
        }
        const PlacedObject* parent = it->second;
        if (!parent->on_floor()) {
            bad(o.instance_id + ".initial_location", "single_level_nesting",
                "parent " + parent->instance_id + " is itself a desktop item");
        }
        if (base != nullptr) {
            const AssetRecord* pa = base->get(parent->asset_id);
            if (pa == nullptr) {
                bad(parent->instance_id + ".asset_id", "unknown_asset",
                    parent->asset_id);
            } else {
                if (!pa->provides_surface) {
                    bad(o.instance_id + ".initial_location", "parent_not_surface",
                        parent->instance_id + " does not provide a surface");
                }
                double expect_z = tabletop_height(*parent, *pa);
                if (std::abs(o.pose.z - expect_z) > 1e-6) {
                    bad(o.instance_id + ".position", "tabletop_height",
                        "z deviates from parent tabletop height");
                }
            }
        }
    }
    if (base != nullptr) {
        for (const PlacedObject& o : layout.objects) {
            if (base->get(o.asset_id) == nullptr) {
                bad(o.instance_id + ".asset_id", "unknown_asset", o.asset_id);
            }
        }
    }
    return issues;
}

double tabletop_height(const PlacedObject& parent, const AssetRecord& parent_asset) {
    return parent.pose.z + parent_asset.bbox.height;
}

Vec2 tabletop_corner(const PlacedObject& parent, const AssetRecord& parent_asset) {
    Vec2 center{parent.pose.x, parent.pose.y};
    Vec2 off{-parent_asset.bbox.long_side / 2.0, -parent_asset.bbox.short_side / 2.0};
    return center + rotate_deg(off, parent.pose.yaw_deg);
}

Pose desktop_to_global(const PlacedObject& parent, const AssetRecord& parent_asset,
                       double u, double v, double yaw_local_deg) {
    if (!parent_asset.provides_surface) {
        throw std::runtime_error(parent.instance_id + " does not provide a surface");
    }
    Vec2 corner = tabletop_corner(parent, parent_asset);
    Vec2 pos = corner + rotate_deg({u, v}, parent.pose.yaw_deg);
    Pose out;
    out.x = pos.x;
    out.y = pos.y;
    out.z = tabletop_height(parent, parent_asset);
    out.yaw_deg = norm_deg(yaw_local_deg + parent.pose.yaw_deg);
    return out;
}

std::vector<const PlacedObject*> items_on(const Layout& layout,
                                          std::string_view instance_id) {
    if (layout.find(instance_id) == nullptr) {
        throw std::runtime_error("items_on: unknown instance_id " +
                                 std::string(instance_id));
    }
    std::vector<const PlacedObject*> out;
    for (const PlacedObject& o : layout.objects) {
        if (o.initial_location == instance_id) out.push_back(&o);
    }
    return out;
}

void translate_rigid(Layout& layout, std::string_view instance_id, Vec2 delta) {
    PlacedObject* obj = layout.find(instance_id);
    if (obj == nullptr) {
        throw std::runtime_error("translate_rigid: unknown instance_id " +
                                 std::string(instance_id));
    }
    obj->pose.x += delta.x;
    obj->pose.y += delta.y;
    for (PlacedObject& o : layout.objects) {
        if (o.initial_location == instance_id) {
            o.pose.x += delta.x;
            o.pose.y += delta.y;
        }
    }
}

void rotate_rigid(Layout& layout, std::string_view instance_id, double delta_deg) {
    PlacedObject* obj = layout.find(instance_id);
    if (obj == nullptr) {
        throw std::runtime_error("rotate_rigid: unknown instance_id " +
                                 std::string(instance_id));
    }
    const Vec2 c{obj->pose.x, obj->pose.y};
    obj->pose.yaw_deg = norm_deg(obj->pose.yaw_deg + delta_deg);
    for (PlacedObject& o : layout.objects) {
        if (o.initial_location == instance_id) {
            Vec2 nd = rotate_deg({o.pose.x - c.x, o.pose.y - c.y}, delta_deg);
            o.pose.x = c.x + nd.x;
            o.pose.y = c.y + nd.y;
            o.pose.yaw_deg = norm_deg(o.pose.yaw_deg + delta_deg);
        }
    }
}

}  // namespace labscene
