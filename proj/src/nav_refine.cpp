#include "labscene/nav_refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jsonfmt.hpp"

namespace labscene {

namespace {

struct Wall {
    char axis;      // axis the wall bounds
    double sign;    // +1: wall at the max side, -1: at the min side
    Vec2 outward;   // direction from interior toward the wall
    double distance;
};

Wall nearest_wall(Vec2 p, const Room& room) {
    const BoundsRect in = room.usable_interior();
    Wall best{'x', -1.0, {-1.0, 0.0}, p.x - in.min_x};
    auto consider = [&](char axis, double sign, Vec2 outward, double d) {
        if (d < best.distance) best = {axis, sign, outward, d};
    };
    consider('x', +1.0, {1.0, 0.0}, in.max_x - p.x);
    consider('y', -1.0, {0.0, -1.0}, p.y - in.min_y);
    consider('y', +1.0, {0.0, 1.0}, in.max_y - p.y);
    return best;
}

}  // namespace

bool is_wall_facing(const PlacedObject& obj, const Room& room, double threshold_deg) {
    Vec2 approach = nav_offset_direction(obj.pose.yaw_deg);
    Wall wall = nearest_wall({obj.pose.x, obj.pose.y}, room);
    double cosang = approach.dot(wall.outward);
    return cosang >= std::cos(deg_to_rad(threshold_deg));
}

double yaw_facing_room_center(const PlacedObject& obj, const Room& room) {
    Vec2 to_center{room.width / 2.0 - obj.pose.x, room.depth / 2.0 - obj.pose.y};
    Vec2 v = to_center.normalized();
    if (v.x == 0.0 && v.y == 0.0) return obj.pose.yaw_deg;
    // Solve (-sin t, -cos t) = v.
    return norm_deg(rad_to_deg(std::atan2(-v.x, -v.y)));
}

namespace {

// Distance, in grid steps along +dir, from the endpoint cell to the first
// free cell; infinity when the march leaves the raster without finding one.
double march_clearance(const OccupancyGrid& grid, int gx, int gy, int dx, int dy) {
    int steps = 0;
    int x = gx, y = gy;
    while (true) {
        x += dx;
        y += dy;
        ++steps;
        if (!grid.in_bounds(x, y)) return std::numeric_limits<double>::infinity();
        if (!grid.occupied(x, y)) return steps * grid.resolution;
    }
}

const PlacedObject* blocking_object(const Layout& layout, const AssetBase& base,
                                    Vec2 p, const NavConfig& nav) {
    for (const PlacedObject& o : layout.objects) {
        if (!o.on_floor()) continue;
        const AssetRecord* rec = base.get(o.asset_id);
        if (rec == nullptr) continue;
        Footprint fp = footprint_of(o, *rec);
        bool covers = nav.inflation == InflationMode::rounded
                          ? fp.distance_to(p) <= nav.agent_radius
                          : (std::abs(fp.to_local(p).x) <= fp.half_long + nav.agent_radius &&
                             std::abs(fp.to_local(p).y) <= fp.half_short + nav.agent_radius);
        if (covers) return &o;
    }
    return nullptr;
}

// Smallest translation along +axis*sign that lifts the inflated footprint
// off the chord, found by bisection on the separation function.
double chord_escape_distance(const Footprint& fp, Vec2 p0, Vec2 p1, Vec2 dir,
                             double agent_radius, double limit) {
    auto separation = [&](double t) {
        Footprint moved = fp;
        moved.center = fp.center + dir * t;
        return segment_footprint_distance(p0, p1, moved) - agent_radius;
    };
    if (separation(limit) <= 0.0) return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = limit;
    for (int i = 0; i < 80; ++i) {
        double mid = (lo + hi) / 2.0;
        if (separation(mid) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

void suggest_endpoint_fix(std::vector<AdjustmentSuggestion>& out, const Layout& layout,
                          const AssetBase& base, const OccupancyGrid& grid,
                          const NavTarget& endpoint, int pair_index,
                          const RefineConfig& cfg) {
    const Vec2 p{endpoint.x, endpoint.y};
    const BoundsRect interior = layout.room.usable_interior();

    if (!interior.contains(p)) {
        const PlacedObject* target = layout.find(endpoint.target_instance);
        if (target == nullptr) return;
        if (is_wall_facing(*target, layout.room, cfg.facing_threshold_deg)) {
            AdjustmentSuggestion s;
            s.kind = AdjustmentSuggestion::Kind::rotation;
            s.object = target->instance_id;
            s.target_theta = yaw_facing_room_center(*target, layout.room);
            s.delta = std::remainder(s.target_theta - target->pose.yaw_deg, 360.0);
            s.provoking_pair = pair_index;
            out.push_back(s);
            return;
        }
        // Pull the target surface inward until its navigation point enters
        // the interior.
        auto push = [&](char axis, double delta) {
            if (delta == 0.0) return;
            AdjustmentSuggestion s;
            s.kind = AdjustmentSuggestion::Kind::translation;
            s.object = target->instance_id;
            s.axis = axis;
            s.delta = delta;
            s.provoking_pair = pair_index;
            out.push_back(s);
        };
        if (p.x < interior.min_x) push('x', interior.min_x - p.x + cfg.clearance_margin);
        if (p.x > interior.max_x) push('x', interior.max_x - p.x - cfg.clearance_margin);
        if (p.y < interior.min_y) push('y', interior.min_y - p.y + cfg.clearance_margin);
        if (p.y > interior.max_y) push('y', interior.max_y - p.y - cfg.clearance_margin);
        return;
    }

    const PlacedObject* blocker = blocking_object(layout, base, p, cfg.nav);
    if (blocker == nullptr) return;
    if (blocker->instance_id == endpoint.target_instance &&
        is_wall_facing(*blocker, layout.room, cfg.facing_threshold_deg)) {
        AdjustmentSuggestion s;
        s.kind = AdjustmentSuggestion::Kind::rotation;
        s.object = blocker->instance_id;
        s.target_theta = yaw_facing_room_center(*blocker, layout.room);
        s.delta = std::remainder(s.target_theta - blocker->pose.yaw_deg, 360.0);
        s.provoking_pair = pair_index;
        out.push_back(s);
        return;
    }

    int gx, gy;
    if (!grid.locate(p, gx, gy)) return;
    struct March {
        int dx, dy;
        char axis;
        double move_sign;  // blocker moves opposite the march direction
    };
    static const March marches[4] = {
        {1, 0, 'x', -1.0}, {-1, 0, 'x', 1.0}, {0, 1, 'y', -1.0}, {0, -1, 'y', 1.0}};
    double best = std::numeric_limits<double>::infinity();
    const March* pick = nullptr;
    for (const March& m : marches) {
        double d = march_clearance(grid, gx, gy, m.dx, m.dy);
        if (d < best) {
            best = d;
            pick = &m;
        }
    }
    if (pick == nullptr || !std::isfinite(best)) return;
    AdjustmentSuggestion s;
    s.kind = AdjustmentSuggestion::Kind::translation;
    s.object = blocker->instance_id;
    s.axis = pick->axis;
    s.delta = pick->move_sign * (best + cfg.clearance_margin);
    s.provoking_pair = pair_index;
    out.push_back(s);
}

void suggest_corridor_fix(std::vector<AdjustmentSuggestion>& out, const Layout& layout,
                          const AssetBase& base, const GoalPair& pair, int pair_index,
                          const RefineConfig& cfg) {
    const Vec2 p0{pair.start.x, pair.start.y};
    const Vec2 p1{pair.end.x, pair.end.y};

    const PlacedObject* pick = nullptr;
    const AssetRecord* pick_rec = nullptr;
    double pick_area = std::numeric_limits<double>::infinity();
    bool pick_on_chord = false;
    double pick_dist = std::numeric_limits<double>::infinity();
    for (const PlacedObject& o : layout.objects) {
        if (!o.on_floor()) continue;
        if (o.instance_id == pair.start.target_instance ||
            o.instance_id == pair.end.target_instance) {
            continue;  // do not shove the operation surfaces themselves
        }
        const AssetRecord* rec = base.get(o.asset_id);
        if (rec == nullptr) continue;
        Footprint fp = footprint_of(o, *rec);
        double dist = segment_footprint_distance(p0, p1, fp);
        bool on_chord = dist <= cfg.nav.agent_radius;
        double area = fp.area();
        bool better;
        if (on_chord != pick_on_chord) {
            better = on_chord;
        } else if (on_chord) {
            better = area < pick_area;
        } else {
            better = dist < pick_dist;
        }
        if (pick == nullptr || better) {
            pick = &o;
            pick_rec = rec;
            pick_area = area;
            pick_on_chord = on_chord;
            pick_dist = dist;
        }
    }
    if (pick == nullptr) return;

    Vec2 chord = (p1 - p0).normalized();
    Vec2 perp = chord.perp();
    char axis = std::abs(perp.x) >= std::abs(perp.y) ? 'x' : 'y';
    Vec2 axis_dir = axis == 'x' ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};

    // Push the obstacle off the chord on the side it already leans toward.
    Vec2 mid = (p0 + p1) * 0.5;
    double side = (Vec2{pick->pose.x, pick->pose.y} - mid).dot(axis_dir);
    double sign = side >= 0.0 ? 1.0 : -1.0;

    Footprint fp = footprint_of(*pick, *pick_rec);
    double limit = layout.room.width + layout.room.depth;
    double dist = chord_escape_distance(fp, p0, p1, axis_dir * sign,
                                        cfg.nav.agent_radius, limit);
    if (!std::isfinite(dist)) {
        sign = -sign;
        dist = chord_escape_distance(fp, p0, p1, axis_dir * sign,
                                     cfg.nav.agent_radius, limit);
        if (!std::isfinite(dist)) return;
    }
    AdjustmentSuggestion s;
    s.kind = AdjustmentSuggestion::Kind::translation;
    s.object = pick->instance_id;
    s.axis = axis;
    s.delta = sign * (dist + cfg.clearance_margin);
    s.provoking_pair = pair_index;
    out.push_back(s);
}

}  // namespace

std::vector<AdjustmentSuggestion> analyze(const Layout& layout, const Protocol& protocol,
                                          const AssetBase& base,
                                          const RefineConfig& cfg) {
    std::vector<AdjustmentSuggestion> out;
    ReachReport report = f_reach(layout, protocol, base, cfg.nav);
    if (report.reach == 1) return out;
    OccupancyGrid grid = rasterize(layout, base, cfg.nav.resolution,
                                   cfg.nav.agent_radius, cfg.nav.inflation);
    for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
        const NavOutcome& outcome = report.outcomes[i];
        const GoalPair& pair = report.pairs[i];
        switch (outcome.status) {
            case NavStatus::ok:
                break;
            case NavStatus::start_blocked:
                suggest_endpoint_fix(out, layout, base, grid, pair.start,
                                     static_cast<int>(i), cfg);
                break;
            case NavStatus::end_blocked:
                suggest_endpoint_fix(out, layout, base, grid, pair.end,
                                     static_cast<int>(i), cfg);
                break;
            case NavStatus::path_blocked:
                suggest_corridor_fix(out, layout, base, pair, static_cast<int>(i), cfg);
                break;
        }
    }
    return out;
}

std::vector<AdjustmentSuggestion> dedup(const std::vector<AdjustmentSuggestion>& in) {
    std::vector<AdjustmentSuggestion> translations;
    std::vector<AdjustmentSuggestion> rotations;
    for (const AdjustmentSuggestion& s : in) {
        if (s.kind == AdjustmentSuggestion::Kind::translation) {
            auto it = std::find_if(translations.begin(), translations.end(),
                                   [&](const AdjustmentSuggestion& t) {
                                       return t.object == s.object && t.axis == s.axis;
                                   });
            if (it == translations.end()) {
                translations.push_back(s);
            } else if (std::abs(s.delta) > std::abs(it->delta)) {
                *it = s;
            }
        } else {
            auto it = std::find_if(rotations.begin(), rotations.end(),
                                   [&](const AdjustmentSuggestion& t) {
                                       return t.object == s.object;
                                   });
            if (it == rotations.end()) {
                rotations.push_back(s);
            } else if (std::abs(s.delta) > std::abs(it->delta)) {
                *it = s;
            }
        }
    }
    auto by_object_axis = [](const AdjustmentSuggestion& a,
                             const AdjustmentSuggestion& b) {
        if (a.object != b.object) return a.object < b.object;
        return a.axis < b.axis;
    };
    std::sort(translations.begin(), translations.end(), by_object_axis);
    std::sort(rotations.begin(), rotations.end(), by_object_axis);
    translations.insert(translations.end(), rotations.begin(), rotations.end());
    return translations;
}

Layout apply_translation(Layout layout, const std::string& object, char axis,
                         double delta) {
    Vec2 d = axis == 'x' ? Vec2{delta, 0.0} : Vec2{0.0, delta};
    translate_rigid(layout, object, d);
    return layout;
}

Layout apply_rotation(Layout layout, const std::string& object, double target_theta) {
    PlacedObject* obj = layout.find(object);
    if (obj == nullptr) {
        throw std::runtime_error("apply_rotation: unknown instance_id " + object);
    }
    double delta = target_theta - obj->pose.yaw_deg;
    rotate_rigid(layout, object, delta);
    obj->pose.yaw_deg = norm_deg(target_theta);
    return layout;
}

double unreachable_rate(int unreachable, int total) {
    return total > 0 ? 100.0 * unreachable / total : 0.0;
}

std::string refine_history_to_jsonl(const RefineHistory& history) {
    namespace jf = jsonfmt;
    std::ostringstream os;
    for (const RefineIteration& it : history.iterations) {
        os << "{\"iteration\": " << it.t << ", \"U\": " << it.unreachable
           << ", \"N\": " << it.total << ", \"r\": " << jf::num(it.rate)
           << ", \"applied\": " << it.applied << "}\n";
    }
    return os.str();
}

std::pair<Layout, RefineHistory> refine_loop(const Layout& layout,
                                             const Protocol& protocol,
                                             const AssetBase& base,
                                             const RefineConfig& cfg) {
    Layout current = layout;
    RefineHistory history;
    double prev_rate = -1.0;
    int stalled = 0;
    int prev_unreachable = std::numeric_limits<int>::max();

    for (int t = 1; t <= cfg.max_iterations; ++t) {
        ReachReport report = f_reach(current, protocol, base, cfg.nav);
        int total = static_cast<int>(report.outcomes.size());
        int unreachable = 0;
        for (const NavOutcome& o : report.outcomes) {
            if (o.status != NavStatus::ok) ++unreachable;
        }
        double rate = unreachable_rate(unreachable, total);

        RefineIteration iter{t, unreachable, total, rate, 0};
        if (unreachable == 0) {
            history.iterations.push_back(iter);
            history.converged = true;
            return {current, history};
        }

        std::vector<AdjustmentSuggestion> suggestions =
            dedup(analyze(current, protocol, base, cfg));
        iter.applied = static_cast<int>(suggestions.size());
        history.iterations.push_back(iter);
        if (suggestions.empty()) return {current, history};

        for (const AdjustmentSuggestion& s : suggestions) {
            if (s.kind == AdjustmentSuggestion::Kind::translation) {
                current = apply_translation(std::move(current), s.object, s.axis,
                                            s.delta);
            }
        }
        for (const AdjustmentSuggestion& s : suggestions) {
            if (s.kind == AdjustmentSuggestion::Kind::rotation) {
                current = apply_rotation(std::move(current), s.object, s.target_theta);
            }
        }

        // Repair any geometric damage the updates introduced.
        bool geo_dirty = !pairwise_collisions(current, base).empty();
        if (!geo_dirty) {
            for (const PlacedObject& o : current.objects) {
                if (base.get(o.asset_id) == nullptr) continue;
                try {
                    if (out_of_bounds_for(current, base, o)) {
                        geo_dirty = true;
                        break;
                    }
                } catch (const std::runtime_error&) {
                    geo_dirty = true;
                    break;
                }
            }
        }
        if (geo_dirty) current = fast_repair(current, base, cfg.repair).layout;

        if (unreachable < prev_unreachable) {
            stalled = 0;
        } else {
            ++stalled;
        }
        prev_unreachable = unreachable;
        if (stalled >= cfg.stall_limit) break;
        if (prev_rate >= 0.0 && std::abs(rate - prev_rate) < cfg.epsilon_pp) break;
        prev_rate = rate;
    }

    // Terminal analysis so the history always ends with fresh metrics.
    ReachReport report = f_reach(current, protocol, base, cfg.nav);
    int total = static_cast<int>(report.outcomes.size());
    int unreachable = 0;
    for (const NavOutcome& o : report.outcomes) {
        if (o.status != NavStatus::ok) ++unreachable;
    }
    double rate = unreachable_rate(unreachable, total);
    history.iterations.push_back({static_cast<int>(history.iterations.size()) + 1,
                                  unreachable, total, rate, 0});
    history.converged = unreachable == 0;
    return {current, history};
}

}  // namespace labscene
