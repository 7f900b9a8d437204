#include "labscene/proposer_client.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "labscene/nav_refine.hpp"

namespace labscene {

using nlohmann::json;

std::string to_string(ProposerMode m) {
    switch (m) {
        case ProposerMode::init_room: return "init_room";
        case ProposerMode::init_desktop: return "init_desktop";
        case ProposerMode::adjust: return "adjust";
    }
    return "adjust";
}

std::string catalog_digest(const AssetBase& base) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [id, rec] : base.records()) {
        for (char c : id) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= '\n';
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json proposer_request_to_json(const ProposerRequest& req) {
    json j;
    j["mode"] = to_string(req.mode);
    j["level"] = to_string(req.level);
    j["seed"] = req.seed;
    j["catalog_digest"] = req.catalog_digest;
    if (!req.surface_id.empty()) j["surface_id"] = req.surface_id;
    if (req.layout != nullptr) {
        json room;
        room["width"] = req.layout->room.width;
        room["depth"] = req.layout->room.depth;
        room["height"] = req.layout->room.height;
        room["wall_thickness"] = req.layout->room.wall_thickness;
        j["room"] = room;
        json objs = json::array();
        for (const PlacedObject& o : req.layout->objects) {
            objs.push_back({{"instance_id", o.instance_id},
                            {"asset_id", o.asset_id},
                            {"position", {o.pose.x, o.pose.y, o.pose.z}},
                            {"yaw_deg", o.pose.yaw_deg},
                            {"initial_location", o.initial_location}});
        }
        j["objects"] = objs;
    }
    if (req.violations != nullptr) {
        json v;
        json boundary = json::array();
        for (const BoundaryViolation& b : req.violations->boundary) {
            boundary.push_back({{"instance_id", b.instance_id},
                                {"correction", {b.correction.x, b.correction.y}}});
        }
        json collisions = json::array();
        for (const CollisionViolation& c : req.violations->collision) {
            collisions.push_back(
                {{"a", c.id_a}, {"b", c.id_b}, {"depth", c.pen.depth}});
        }
        json critical = json::array();
        for (const ConstraintInstance& ci : req.violations->critical_safety) {
            critical.push_back({{"kind", to_string(ci.kind)},
                                {"subject_a", ci.subject_a},
                                {"subject_b", ci.subject_b},
                                {"score", ci.score}});
        }
        v["boundary"] = boundary;
        v["collisions"] = collisions;
        v["critical_safety"] = critical;
        j["violations"] = v;
    }
    if (req.protocol != nullptr) {
        json p;
        p["protocol_id"] = req.protocol->protocol_id;
        p["name"] = req.protocol->name;
        p["reagents"] = req.protocol->reagents;
        p["instruments"] = req.protocol->instruments;
        json steps = json::array();
        for (const ProtocolStep& s : req.protocol->steps) {
            steps.push_back({{"index", s.index},
                             {"location", s.location},
                             {"assets_used", s.assets_used}});
        }
        p["steps"] = steps;
        j["protocol"] = p;
    }
    return j;
}

ProposerResponse parse_proposer_response(const std::string& body, ProposerMode mode) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ResponseRejected(std::string("response is not valid JSON: ") + e.what(),
                               body);
    }
    ProposerResponse out;
    try {
        if (mode == ProposerMode::adjust) {
            if (!doc.is_object() || !doc.contains("commands") ||
                !doc.at("commands").is_array()) {
                throw ResponseRejected("adjust response must carry a commands array",
                                       body);
            }
            for (const json& jc : doc.at("commands")) {
                if (!jc.is_object() || jc.size() != 1) {
                    throw ResponseRejected("each command must be a single-key object",
                                           body);
                }
                AdjustCommand cmd;
                if (jc.contains("move")) {
                    const json& m = jc.at("move");
                    cmd.kind = AdjustCommand::Kind::move;
                    cmd.id_a = m.at("id").get<std::string>();
                    cmd.x = m.at("pos").at(0).get<double>();
                    cmd.y = m.at("pos").at(1).get<double>();
                } else if (jc.contains("rotate")) {
                    const json& m = jc.at("rotate");
                    cmd.kind = AdjustCommand::Kind::rotate;
                    cmd.id_a = m.at("id").get<std::string>();
                    cmd.angle_deg = m.at("angle").get<double>();
                } else if (jc.contains("swap")) {
                    const json& m = jc.at("swap");
                    cmd.kind = AdjustCommand::Kind::swap;
                    cmd.id_a = m.at("a").get<std::string>();
                    cmd.id_b = m.at("b").get<std::string>();
                } else {
                    throw ResponseRejected(
                        "unknown command \"" + jc.begin().key() + "\"", body);
                }
                out.commands.push_back(std::move(cmd));
            }
        } else {
            if (!doc.is_object() || !doc.contains("placements") ||
                !doc.at("placements").is_array()) {
                throw ResponseRejected("init response must carry a placements array",
                                       body);
            }
            for (const json& jp : doc.at("placements")) {
                PlacementProposal pl;
                pl.asset_id = jp.at("asset_id").get<std::string>();
                pl.x = jp.at("position").at(0).get<double>();
                pl.y = jp.at("position").at(1).get<double>();
                pl.yaw_deg = jp.value("yaw_deg", 0.0);
                pl.initial_location = jp.value("initial_location", std::string("floor"));
                pl.local_frame = mode == ProposerMode::init_desktop;
                out.placements.push_back(std::move(pl));
            }
        }
    } catch (const ResponseRejected&) {
        throw;
    } catch (const json::exception& e) {
        throw ResponseRejected(std::string("response schema violation: ") + e.what(),
                               body);
    }
    return out;
}

namespace {

struct ParsedUrl {
    std::string scheme_host_port;  // httplib client target
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ProposerResponse propose_remote(const ProposerRequest& req,
                                const ProposerEndpoint& endpoint) {
    ParsedUrl url = split_url(endpoint.url);
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(endpoint.timeout_s, 0);
    client.set_read_timeout(endpoint.timeout_s, 0);

    httplib::Headers headers;
    if (!endpoint.auth_env.empty()) {
        if (const char* token = std::getenv(endpoint.auth_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }

    const std::string body = proposer_request_to_json(req).dump();
    std::string last_error;
    for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(100 * (1 << (attempt - 1))));
        }
        httplib::Result res =
            client.Post(url.path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        return parse_proposer_response(res->body, req.mode);
    }
    throw ProposerUnavailable("proposer endpoint unavailable after " +
                              std::to_string(endpoint.max_retries + 1) +
                              " attempts: " + last_error);
}

namespace {

struct WallSlot {
    double yaw;            // orientation with the approach side facing inward
    Vec2 along;            // cursor direction along the wall
    Vec2 inward;           // from wall toward the interior
    Vec2 corner;           // interior corner where the cursor starts
    double length;         // usable wall length
};

std::vector<WallSlot> wall_slots(const Room& room) {
    const BoundsRect in = room.usable_interior();
    return {
        // back wall (y max): long side along x, approach side toward -y
        {0.0, {1.0, 0.0}, {0.0, -1.0}, {in.min_x, in.max_y}, in.width()},
        // left wall (x min): approach side toward +x
        {270.0, {0.0, 1.0}, {1.0, 0.0}, {in.min_x, in.min_y}, in.height()},
        // right wall (x max): approach side toward -x
        {90.0, {0.0, 1.0}, {-1.0, 0.0}, {in.max_x, in.min_y}, in.height()},
        // front wall (y min): approach side toward +y
        {180.0, {1.0, 0.0}, {0.0, 1.0}, {in.min_x, in.min_y}, in.width()},
    };
}

bool protocol_is_volatile(const Protocol& protocol, const AssetBase& base) {
    for (const std::string& r : protocol.reagents) {
        const AssetRecord* rec = base.find(r);
        if (rec != nullptr && rec->safety.volatile_or_toxic) return true;
    }
    return false;
}

const AssetRecord* find_fume_hood(const AssetBase& base) {
    if (const AssetRecord* rec = base.find("FumeHood")) return rec;
    for (const auto& [id, rec] : base.records()) {
        if (rec.asset_type == AssetType::room_asset &&
            rec.category == "safety_equipment" && rec.subtype == "ventilation") {
            return &rec;
        }
    }
    return nullptr;
}

const AssetRecord* find_storage(const AssetBase& base, const SafetyConfig& cfg) {
    for (const auto& [id, rec] : base.records()) {
        if (rec.asset_type == AssetType::room_asset && is_storage_surface(rec, cfg)) {
            return &rec;
        }
    }
    return nullptr;
}

ProposerResponse heuristic_init_room(const ProposerRequest& req, const AssetBase& base,
                                     const SafetyConfig& cfg) {
    const Protocol& protocol = *req.protocol;
    const Room& room = req.layout->room;

    // Required room-level assets: step locations, room-scale instruments,
    // plus a fume hood for volatile protocols and storage for reagents.
    std::vector<const AssetRecord*> needed;
    auto want = [&](const AssetRecord* rec) {
        if (rec == nullptr || rec->asset_type != AssetType::room_asset) return;
        if (std::find(needed.begin(), needed.end(), rec) == needed.end()) {
            needed.push_back(rec);
        }
    };
    bool volatile_protocol = protocol_is_volatile(protocol, base);
    const AssetRecord* hood = volatile_protocol ? find_fume_hood(base) : nullptr;
    want(hood);
    for (const ProtocolStep& s : protocol.steps) want(base.find(s.location));
    for (const std::string& inst : protocol.instruments) want(base.find(inst));
    if (!protocol.reagents.empty()) want(find_storage(base, cfg));

    // Largest footprints first; the fume hood keeps its zoning priority.
    std::stable_sort(needed.begin(), needed.end(),
                     [&](const AssetRecord* a, const AssetRecord* b) {
                         bool fa = a == hood;
                         bool fb = b == hood;
                         if (fa != fb) return fa;
                         double aa = a->bbox.long_side * a->bbox.short_side;
                         double ab = b->bbox.long_side * b->bbox.short_side;
                         if (aa != ab) return aa > ab;
                         return a->asset_id < b->asset_id;
                     });

    const double gap = 0.4;
    ProposerResponse out;
    std::vector<std::string> overflow;
    std::vector<WallSlot> walls = wall_slots(room);
    std::size_t wall_idx = 0;
    double cursor = 0.0;
    for (const AssetRecord* rec : needed) {
        double len = rec->bbox.long_side;
        double half_depth = rec->bbox.short_side / 2.0;
        bool placed = false;
        while (wall_idx < walls.size()) {
            const WallSlot& w = walls[wall_idx];
            if (cursor + len <= w.length) {
                Vec2 center = w.corner + w.along * (cursor + len / 2.0) +
                              w.inward * half_depth;
                PlacementProposal pl;
                pl.asset_id = rec->asset_id;
                pl.x = center.x;
                pl.y = center.y;
                pl.yaw_deg = w.yaw;
                pl.initial_location = "floor";
                out.placements.push_back(pl);
                cursor += len + gap;
                placed = true;
                break;
            }
            ++wall_idx;
            cursor = 0.0;
        }
        if (!placed) overflow.push_back(rec->asset_id);
    }
    if (!overflow.empty()) {
        throw PlacementInfeasible("room walls exhausted before placing every asset",
                                  overflow);
    }
    return out;
}

ProposerResponse heuristic_init_desktop(const ProposerRequest& req,
                                        const AssetBase& base,
                                        const SafetyConfig& cfg) {
    const Protocol& protocol = *req.protocol;
    const Layout& layout = *req.layout;
    const PlacedObject* surface = layout.find(req.surface_id);
    if (surface == nullptr) {
        throw std::runtime_error("init_desktop: unknown surface " + req.surface_id);
    }
    const AssetRecord& surface_rec = base.resolve(surface->asset_id);
    bool surface_is_storage = is_storage_surface(surface_rec, cfg);
    bool surface_is_hood = surface_rec.safety.volatile_or_toxic ||
                           (surface_rec.category == "safety_equipment" &&
                            surface_rec.subtype == "ventilation");
    const AssetRecord* hood = find_fume_hood(base);
    bool hood_placed = hood != nullptr &&
                       layout.find_by_asset(hood->asset_id) != nullptr;
    bool storage_placed = false;
    if (const AssetRecord* st = find_storage(base, cfg)) {
        storage_placed = layout.find_by_asset(st->asset_id) != nullptr;
    }

    // Desktop-scale assets assigned to this surface, in step order.
    std::vector<const AssetRecord*> queue;
    auto enqueue = [&](const AssetRecord* rec) {
        if (rec == nullptr || rec->asset_type == AssetType::room_asset) return;
        if (layout.find_by_asset(rec->asset_id) != nullptr) return;  // already placed
        if (std::find(queue.begin(), queue.end(), rec) == queue.end()) {
            queue.push_back(rec);
        }
    };
    for (const ProtocolStep& s : protocol.steps) {
        const AssetRecord* loc = base.find(s.location);
        bool step_here = loc != nullptr && loc->asset_id == surface_rec.asset_id;
        for (const std::string& name : s.assets_used) {
            const AssetRecord* rec = base.find(name);
            if (rec == nullptr) continue;
            bool is_reagent = rec->asset_type == AssetType::reagent;
            if (is_reagent) {
                // Volatile/toxic reagents go to the fume hood, the rest to
                // storage; fall back to the step surface when absent.
                if (rec->safety.volatile_or_toxic && hood_placed) {
                    if (surface_is_hood) enqueue(rec);
                } else if (storage_placed) {
                    if (surface_is_storage) enqueue(rec);
                } else if (step_here) {
                    enqueue(rec);
                }
            } else if (step_here) {
                enqueue(rec);
            }
        }
    }
    // Reagents never used in a step still need a home.
    for (const std::string& r : protocol.reagents) {
        const AssetRecord* rec = base.find(r);
        if (rec == nullptr) continue;
        if (rec->safety.volatile_or_toxic && hood_placed) {
            if (surface_is_hood) enqueue(rec);
        } else if (storage_placed && surface_is_storage) {
            enqueue(rec);
        }
    }

    const double margin = 0.02;
    const double gap = 0.03;
    double u = margin, v = margin, row_depth = 0.0;
    ProposerResponse out;
    std::vector<std::string> overflow;
    for (const AssetRecord* rec : queue) {
        double w = rec->bbox.long_side;
        double d = rec->bbox.short_side;
        if (u + w + margin > surface_rec.bbox.long_side) {
            u = margin;
            v += row_depth + gap;
            row_depth = 0.0;
        }
        if (u + w + margin > surface_rec.bbox.long_side ||
            v + d + margin > surface_rec.bbox.short_side) {
            overflow.push_back(rec->asset_id);
            continue;
        }
        PlacementProposal pl;
        pl.asset_id = rec->asset_id;
        pl.x = u + w / 2.0;  // tabletop-local u
        pl.y = v + d / 2.0;  // tabletop-local v
        pl.yaw_deg = 0.0;
        pl.initial_location = surface->instance_id;
        pl.local_frame = true;
        out.placements.push_back(pl);
        u += w + gap;
        row_depth = std::max(row_depth, d);
    }
    if (!overflow.empty()) {
        throw PlacementInfeasible(
            "surface " + req.surface_id + " too small for every assigned asset",
            overflow);
    }
    return out;
}

ProposerResponse heuristic_adjust(const ProposerRequest& req, const AssetBase& base,
                                  const SafetyConfig& cfg) {
    const Layout& layout = *req.layout;
    ProposerResponse out;
    const double margin = 0.05;

    // Wall-facing surfaces rotate toward the room center (room level only).
    if (req.level == OptLevel::room) {
        for (const PlacedObject& o : layout.objects) {
            if (!o.on_floor()) continue;
            const AssetRecord* rec = base.get(o.asset_id);
            if (rec == nullptr || !rec->provides_surface) continue;
            if (is_wall_facing(o, layout.room, 30.0)) {
                double target = yaw_facing_room_center(o, layout.room);
                double delta = std::remainder(target - o.pose.yaw_deg, 360.0);
                if (std::abs(delta) < 1e-9) continue;
                AdjustCommand cmd;
                cmd.kind = AdjustCommand::Kind::rotate;
                cmd.id_a = o.instance_id;
                cmd.angle_deg = delta;
                out.commands.push_back(cmd);
            }
        }
    }

    // Worst-scored constraint instance: move the lighter subject.
    ChemReport chem = chem_report(layout, *req.protocol, base, cfg);
    const ConstraintInstance* worst = nullptr;
    for (const ConstraintInstance& ci : chem.instances) {
        if (ci.kind == ConstraintKind::reagent_storage) continue;  // needs re-homing
        if (ci.score >= 1.0) continue;
        const PlacedObject* mover = layout.find(ci.subject_a);
        if (mover == nullptr) continue;
        bool desktop_mover = !mover->on_floor();
        if (!ci.subject_b.empty()) {
            const PlacedObject* a = layout.find(ci.subject_a);
            const PlacedObject* b = layout.find(ci.subject_b);
            const AssetRecord* ra = base.get(a->asset_id);
            const AssetRecord* rb = base.get(b->asset_id);
            const PlacedObject* lighter =
                ra->bbox.long_side * ra->bbox.short_side <=
                        rb->bbox.long_side * rb->bbox.short_side
                    ? a
                    : b;
            desktop_mover = !lighter->on_floor();
        }
        bool level_match = (req.level == OptLevel::desktop) == desktop_mover;
        if (!level_match) continue;
        if (worst == nullptr || ci.score < worst->score) worst = &ci;
    }
    if (worst != nullptr) {
        if (worst->kind == ConstraintKind::glass_edge) {
            const PlacedObject* item = layout.find(worst->subject_a);
            const PlacedObject* parent = layout.find(item->initial_location);
            Vec2 pos{item->pose.x, item->pose.y};
            Vec2 dir = (Vec2{parent->pose.x, parent->pose.y} - pos).normalized();
            double needed = cfg.d_safe_glass + margin - worst->measured_d;
            if (needed > 0.0 && (dir.x != 0.0 || dir.y != 0.0)) {
                Vec2 target = pos + dir * needed;
                AdjustCommand cmd;
                cmd.kind = AdjustCommand::Kind::move;
                cmd.id_a = item->instance_id;
                cmd.x = target.x;
                cmd.y = target.y;
                out.commands.push_back(cmd);
            }
        } else {
            const PlacedObject* a = layout.find(worst->subject_a);
            const PlacedObject* b = layout.find(worst->subject_b);
            const AssetRecord* ra = base.get(a->asset_id);
            const AssetRecord* rb = base.get(b->asset_id);
            const PlacedObject* mover = a;
            const PlacedObject* anchor = b;
            if (ra->bbox.long_side * ra->bbox.short_side >
                rb->bbox.long_side * rb->bbox.short_side) {
                mover = b;
                anchor = a;
            }
            Vec2 mp{mover->pose.x, mover->pose.y};
            Vec2 ap{anchor->pose.x, anchor->pose.y};
            Vec2 dir = (mp - ap).normalized();
            if (dir.x == 0.0 && dir.y == 0.0) dir = {1.0, 0.0};
            Vec2 target = ap + dir * (worst->d_min + margin);
            if (!mover->on_floor()) {
                // Keep desktop movers on their tabletop.
                const PlacedObject* parent = layout.find(mover->initial_location);
                const AssetRecord* prec = base.get(parent->asset_id);
                const AssetRecord* mrec = base.get(mover->asset_id);
                Footprint table = footprint_of(*parent, *prec);
                Vec2 local = table.to_local(target);
                double keep_l = std::max(table.half_long - mrec->bbox.long_side / 2.0, 0.0);
                double keep_s = std::max(table.half_short - mrec->bbox.short_side / 2.0, 0.0);
                local.x = std::clamp(local.x, -keep_l, keep_l);
                local.y = std::clamp(local.y, -keep_s, keep_s);
                target = table.center + rotate_deg(local, table.yaw_deg);
            }
            AdjustCommand cmd;
            cmd.kind = AdjustCommand::Kind::move;
            cmd.id_a = mover->instance_id;
            cmd.x = target.x;
            cmd.y = target.y;
            out.commands.push_back(cmd);
        }
    }
    return out;
}

}  // namespace

ProposerResponse propose_heuristic(const ProposerRequest& req, const AssetBase& base,
                                   const SafetyConfig& cfg) {
    switch (req.mode) {
        case ProposerMode::init_room: return heuristic_init_room(req, base, cfg);
        case ProposerMode::init_desktop: return heuristic_init_desktop(req, base, cfg);
        case ProposerMode::adjust: return heuristic_adjust(req, base, cfg);
    }
    return {};
}

std::vector<AdjustCommand> HeuristicProposer::propose(const Layout& layout,
                                                      const ViolationReport& violations,
                                                      OptLevel level,
                                                      const Protocol& protocol) {
    ProposerRequest req;
    req.mode = ProposerMode::adjust;
    req.layout = &layout;
    req.violations = &violations;
    req.protocol = &protocol;
    req.level = level;
    req.seed = seed_;
    req.catalog_digest = catalog_digest(base_);
    return propose_heuristic(req, base_, cfg_).commands;
}

std::vector<AdjustCommand> RemoteProposer::propose(const Layout& layout,
                                                   const ViolationReport& violations,
                                                   OptLevel level,
                                                   const Protocol& protocol) {
    ProposerRequest req;
    req.mode = ProposerMode::adjust;
    req.layout = &layout;
    req.violations = &violations;
    req.protocol = &protocol;
    req.level = level;
    req.catalog_digest = catalog_digest(base_);
    return propose_remote(req, endpoint_).commands;
}

}  // namespace labscene
