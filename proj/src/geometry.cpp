#include "labscene/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace labscene {

namespace {

struct Projection {
    double lo, hi;
};

Projection project(const std::array<Vec2, 4>& corners, Vec2 axis) {
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (const Vec2& c : corners) {
        double d = c.dot(axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    if (len2 == 0.0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    // Proper intersection means distance zero.
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
        return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    };
    double d1 = orient(a0, a1, b0);
    double d2 = orient(a0, a1, b1);
    double d3 = orient(b0, b1, a0);
    double d4 = orient(b0, b1, a1);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
    return std::min(std::min(point_segment_distance(a0, b0, b1),
                             point_segment_distance(a1, b0, b1)),
                    std::min(point_segment_distance(b0, a0, a1),
                             point_segment_distance(b1, a0, a1)));
}

}  // namespace

PenetrationResult overlap(const Footprint& a, const Footprint& b) {
    const std::array<Vec2, 4> ca = a.corners();
    const std::array<Vec2, 4> cb = b.corners();
    const std::array<Vec2, 4> axes = {
        rotate_deg({1.0, 0.0}, a.yaw_deg), rotate_deg({0.0, 1.0}, a.yaw_deg),
        rotate_deg({1.0, 0.0}, b.yaw_deg), rotate_deg({0.0, 1.0}, b.yaw_deg)};

    PenetrationResult res;
    double best = std::numeric_limits<double>::max();
    Vec2 best_dir;
    for (const Vec2& axis : axes) {
        Projection pa = project(ca, axis);
        Projection pb = project(cb, axis);
        // Minimal push of b along +/-axis that separates the projections.
        // Handles nested intervals, where the raw interval overlap is not a
        // valid translation distance.
        double push_pos = pa.hi - pb.lo;  // move b toward +axis
        double push_neg = pb.hi - pa.lo;  // move b toward -axis
        double p = std::min(push_pos, push_neg);
        if (p <= 0.0) return res;  // separated or touching
        if (p < best) {
            best = p;
            best_dir = push_pos <= push_neg ? axis : -axis;
        }
    }
    res.overlapping = true;
    res.depth = best;
    res.direction = best_dir;
    return res;
}

std::vector<SeparationOption> separation_options(const Footprint& a,
                                                 const Footprint& b) {
    const std::array<Vec2, 4> ca = a.corners();
    const std::array<Vec2, 4> cb = b.corners();
    const std::array<Vec2, 4> axes = {
        rotate_deg({1.0, 0.0}, a.yaw_deg), rotate_deg({0.0, 1.0}, a.yaw_deg),
        rotate_deg({1.0, 0.0}, b.yaw_deg), rotate_deg({0.0, 1.0}, b.yaw_deg)};
    std::vector<SeparationOption> out;
    for (const Vec2& axis : axes) {
        Projection pa = project(ca, axis);
        Projection pb = project(cb, axis);
        double push_pos = pa.hi - pb.lo;
        double push_neg = pb.hi - pa.lo;
        if (std::min(push_pos, push_neg) <= 0.0) return {};  // not overlapping
        out.push_back({axis, push_pos});
        out.push_back({-axis, push_neg});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SeparationOption& x, const SeparationOption& y) {
                         return x.distance < y.distance;
                     });
    return out;
}

std::optional<Vec2> out_of_bounds(const Footprint& fp, const BoundsRect& bounds) {
    const std::array<Vec2, 4> corners = fp.corners();
    double min_x = corners[0].x, max_x = corners[0].x;
    double min_y = corners[0].y, max_y = corners[0].y;
    for (const Vec2& c : corners) {
        min_x = std::min(min_x, c.x);
        max_x = std::max(max_x, c.x);
        min_y = std::min(min_y, c.y);
        max_y = std::max(max_y, c.y);
    }
    if (max_x - min_x > bounds.width() || max_y - min_y > bounds.height()) {
        throw std::runtime_error("out_of_bounds: footprint larger than usable bounds");
    }
    Vec2 corr{0.0, 0.0};
    if (min_x < bounds.min_x - kGeomEps) corr.x = bounds.min_x - min_x;
    if (max_x > bounds.max_x + kGeomEps) corr.x = bounds.max_x - max_x;
    if (min_y < bounds.min_y - kGeomEps) corr.y = bounds.min_y - min_y;
    if (max_y > bounds.max_y + kGeomEps) corr.y = bounds.max_y - max_y;
    if (corr.x == 0.0 && corr.y == 0.0) return std::nullopt;
    return corr;
}

double segment_footprint_distance(Vec2 p0, Vec2 p1, const Footprint& fp) {
    if (fp.contains(p0) || fp.contains(p1)) return 0.0;
    const std::array<Vec2, 4> c = fp.corners();
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < 4; ++i) {
        best = std::min(best, segment_segment_distance(p0, p1, c[i], c[(i + 1) % 4]));
    }
    return best;
}

Footprint footprint_of(const PlacedObject& obj, const AssetRecord& asset) {
    Footprint fp;
    fp.center = {obj.pose.x, obj.pose.y};
    fp.half_long = asset.bbox.long_side / 2.0;
    fp.half_short = asset.bbox.short_side / 2.0;
    fp.yaw_deg = obj.pose.yaw_deg;
    return fp;
}

std::optional<Vec2> out_of_bounds_in_room(const Footprint& fp, const Room& room) {
    return out_of_bounds(fp, room.usable_interior());
}

std::optional<Vec2> out_of_bounds_for(const Layout& layout, const AssetBase& base,
                                      const PlacedObject& obj) {
    const AssetRecord* asset = base.get(obj.asset_id);
    if (asset == nullptr) throw std::runtime_error("unknown asset: " + obj.asset_id);
    Footprint fp = footprint_of(obj, *asset);
    if (obj.on_floor()) return out_of_bounds_in_room(fp, layout.room);

    const PlacedObject* parent = layout.find(obj.initial_location);
    if (parent == nullptr) {
        throw std::runtime_error("dangling initial_location: " + obj.initial_location);
    }
    const AssetRecord* parent_asset = base.get(parent->asset_id);
    if (parent_asset == nullptr) {
        throw std::runtime_error("unknown asset: " + parent->asset_id);
    }
    Footprint table = footprint_of(*parent, *parent_asset);
    // Tabletop bounds are rotation-aware: test in the parent's local frame.
    Footprint local_fp = fp;
    local_fp.center = table.to_local(fp.center);
    local_fp.yaw_deg = fp.yaw_deg - table.yaw_deg;
    BoundsRect bounds{-table.half_long, -table.half_short, table.half_long,
                      table.half_short};
    std::optional<Vec2> corr = out_of_bounds(local_fp, bounds);
    if (!corr) return std::nullopt;
    return rotate_deg(*corr, table.yaw_deg);
}

namespace {

struct PairCandidate {
    int ia, ib;
};

std::vector<PairCandidate> same_level_pairs(const Layout& layout) {
    std::vector<PairCandidate> pairs;
    const int n = static_cast<int>(layout.objects.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (layout.objects[i].initial_location == layout.objects[j].initial_location) {
                pairs.push_back({i, j});
            }
        }
    }
    return pairs;
}

}  // namespace

std::vector<CollisionEntry> pairwise_collisions_serial(const Layout& layout,
                                                       const AssetBase& base) {
    std::vector<CollisionEntry> out;
    for (const PairCandidate& pc : same_level_pairs(layout)) {
        const PlacedObject& a = layout.objects[pc.ia];
        const PlacedObject& b = layout.objects[pc.ib];
        PenetrationResult pen =
            overlap(footprint_of(a, base.resolve(a.asset_id)),
                    footprint_of(b, base.resolve(b.asset_id)));
        if (pen.overlapping) out.push_back({a.instance_id, b.instance_id, pen});
    }
    return out;
}

std::vector<CollisionEntry> pairwise_collisions(const Layout& layout,
                                                const AssetBase& base) {
    const std::vector<PairCandidate> pairs = same_level_pairs(layout);
    const int n = static_cast<int>(pairs.size());
    std::vector<PenetrationResult> results(pairs.size());

#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        const PlacedObject& a = layout.objects[pairs[k].ia];
        const PlacedObject& b = layout.objects[pairs[k].ib];
        results[k] = overlap(footprint_of(a, base.resolve(a.asset_id)),
                             footprint_of(b, base.resolve(b.asset_id)));
    }

    // Compact in pair order so output is independent of the thread count.
    std::vector<CollisionEntry> out;
    for (int k = 0; k < n; ++k) {
        if (results[k].overlapping) {
            out.push_back({layout.objects[pairs[k].ia].instance_id,
                           layout.objects[pairs[k].ib].instance_id, results[k]});
        }
    }
    return out;
}

int same_level_pair_count(const Layout& layout) {
    return static_cast<int>(same_level_pairs(layout).size());
}

double edge_distance(const PlacedObject& item, const AssetRecord& item_asset,
                     const PlacedObject& parent, const AssetRecord& parent_asset) {
    if (item.initial_location != parent.instance_id) {
        throw std::runtime_error("edge_distance: item " + item.instance_id +
                                 " is not attached to " + parent.instance_id);
    }
    Footprint table = footprint_of(parent, parent_asset);
    Footprint fp = footprint_of(item, item_asset);
    double best = std::numeric_limits<double>::max();
    for (const Vec2& c : fp.corners()) {
        best = std::min(best, table.signed_inside_distance(c));
    }
    return best;
}

}  // namespace labscene
