#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "labscene/geometry.hpp"

using namespace labscene;

namespace {

Footprint box(double cx, double cy, double long_side, double short_side, double yaw) {
    return Footprint{{cx, cy}, long_side / 2.0, short_side / 2.0, yaw};
}

// Dense point-sampling overlap oracle: sample points of b, test containment
// in a, and vice versa. Slow but independent of the SAT path.
bool sampling_overlap(const Footprint& a, const Footprint& b, int per_axis = 100) {
    auto covers = [&](const Footprint& inner, const Footprint& outer) {
        for (int i = 0; i < per_axis; ++i) {
            for (int j = 0; j < per_axis; ++j) {
                double u = (i + 0.5) / per_axis * 2.0 - 1.0;
                double v = (j + 0.5) / per_axis * 2.0 - 1.0;
                Vec2 local{u * inner.half_long, v * inner.half_short};
                Vec2 p = inner.center + rotate_deg(local, inner.yaw_deg);
                if (outer.contains(p)) return true;
            }
        }
        return false;
    };
    return covers(a, b) || covers(b, a);
}

}  // namespace

TEST_CASE("footprint corners") {
    SUBCASE("unit box at origin") {
        auto c = box(0, 0, 1, 1, 0).corners();
        CHECK(c[0].x == doctest::Approx(-0.5));
        CHECK(c[0].y == doctest::Approx(-0.5));
        CHECK(c[2].x == doctest::Approx(0.5));
        CHECK(c[2].y == doctest::Approx(0.5));
    }
    SUBCASE("unit box rotated 45 has corners on the axes") {
        auto c = box(0, 0, 1, 1, 45).corners();
        double r = std::sqrt(2.0) / 2.0;
        for (const Vec2& p : c) {
            bool on_x = std::abs(std::abs(p.x) - r) < 1e-12 && std::abs(p.y) < 1e-12;
            bool on_y = std::abs(std::abs(p.y) - r) < 1e-12 && std::abs(p.x) < 1e-12;
            CHECK((on_x || on_y));
        }
    }
    SUBCASE("2x1 box at (3,4) rotated 90") {
        // Hand oracle: long side swings onto the y axis.
        auto c = box(3, 4, 2, 1, 90).corners();
        double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
        for (const Vec2& p : c) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        CHECK(min_x == doctest::Approx(2.5));
        CHECK(max_x == doctest::Approx(3.5));
        CHECK(min_y == doctest::Approx(3.0));
        CHECK(max_y == doctest::Approx(5.0));
    }
}

TEST_CASE("overlap basics") {
    SUBCASE("separated squares") {
        auto r = overlap(box(0, 0, 1, 1, 0), box(2, 0, 1, 1, 0));
        CHECK_FALSE(r.overlapping);
        CHECK(r.depth == 0.0);
    }
    SUBCASE("axis-aligned penetration depth and direction") {
        auto r = overlap(box(0, 0, 1, 1, 0), box(0.6, 0, 1, 1, 0));
        CHECK(r.overlapping);
        CHECK(r.depth == doctest::Approx(0.4));
        CHECK(r.direction.x == doctest::Approx(1.0));
        CHECK(r.direction.y == doctest::Approx(0.0));
    }
    SUBCASE("touching boundaries do not overlap") {
        auto r = overlap(box(0, 0, 1, 1, 0), box(1.0, 0, 1, 1, 0));
        CHECK_FALSE(r.overlapping);
    }
    SUBCASE("rotated square near tangency matches sampling oracle") {
        Footprint a = box(0, 0, 1, 1, 0);
        Footprint b = box(0.9, 0, 1, 1, 45);
        CHECK(overlap(a, b).overlapping == sampling_overlap(a, b));
    }
    SUBCASE("boolean result is symmetric") {
        Footprint a = box(0.3, -0.2, 2.0, 0.7, 33);
        Footprint b = box(1.0, 0.4, 1.1, 0.9, 190);
        CHECK(overlap(a, b).overlapping == overlap(b, a).overlapping);
    }
}

TEST_CASE("overlap minimal translation separates") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-2.0, 2.0);
    std::uniform_real_distribution<double> dim(0.2, 2.0);
    std::uniform_real_distribution<double> ang(0.0, 360.0);
    int overlapping = 0;
    for (int i = 0; i < 500; ++i) {
        double la = dim(rng), sa = dim(rng);
        double lb = dim(rng), sb = dim(rng);
        Footprint a = box(pos(rng), pos(rng), std::max(la, sa), std::min(la, sa), ang(rng));
        Footprint b = box(pos(rng), pos(rng), std::max(lb, sb), std::min(lb, sb), ang(rng));
        auto r = overlap(a, b);
        if (!r.overlapping) continue;
        ++overlapping;
        Footprint moved = b;
        moved.center = b.center + r.direction * (r.depth + 1e-9);
        CHECK_FALSE(overlap(a, moved).overlapping);
    }
    CHECK(overlapping > 50);  // the distribution must actually exercise the branch
}

TEST_CASE("random overlap agrees with interval arithmetic when axis-aligned") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> dim(0.2, 2.5);
    for (int i = 0; i < 300; ++i) {
        double l1 = dim(rng), s1 = dim(rng), l2 = dim(rng), s2 = dim(rng);
        Footprint a = box(pos(rng), pos(rng), std::max(l1, s1), std::min(l1, s1), 0);
        Footprint b = box(pos(rng), pos(rng), std::max(l2, s2), std::min(l2, s2), 0);
        double ax0 = a.center.x - a.half_long, ax1 = a.center.x + a.half_long;
        double bx0 = b.center.x - b.half_long, bx1 = b.center.x + b.half_long;
        double ay0 = a.center.y - a.half_short, ay1 = a.center.y + a.half_short;
        double by0 = b.center.y - b.half_short, by1 = b.center.y + b.half_short;
        double px = std::min(ax1 - bx0, bx1 - ax0);
        double py = std::min(ay1 - by0, by1 - ay0);
        bool expect = px > 0.0 && py > 0.0;
        auto r = overlap(a, b);
        CHECK(r.overlapping == expect);
        if (expect) CHECK(r.depth == doctest::Approx(std::min(px, py)));
    }
}

TEST_CASE("out_of_bounds") {
    Room room{10, 10, 3, 0};
    SUBCASE("corner sticking out gets the minimal inward correction") {
        auto corr = out_of_bounds(box(0.2, 2, 1, 1, 0), room.usable_interior());
        REQUIRE(corr.has_value());
        CHECK(corr->x == doctest::Approx(0.3));
        CHECK(corr->y == doctest::Approx(0.0));
    }
    SUBCASE("fully interior footprint needs nothing") {
        CHECK_FALSE(out_of_bounds(box(5, 5, 1, 1, 30), room.usable_interior()));
    }
    SUBCASE("footprint larger than the room is unrepairable") {
        CHECK_THROWS(out_of_bounds(box(5, 5, 12, 12, 0), room.usable_interior()));
    }
    SUBCASE("applying the correction is a fixpoint") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> pos(-1.0, 11.0);
        std::uniform_real_distribution<double> dim(0.3, 3.0);
        std::uniform_real_distribution<double> ang(0.0, 360.0);
        for (int i = 0; i < 200; ++i) {
            double l = dim(rng), s = dim(rng);
            Footprint fp = box(pos(rng), pos(rng), std::max(l, s), std::min(l, s), ang(rng));
            auto corr = out_of_bounds(fp, room.usable_interior());
            if (!corr) continue;
            fp.center = fp.center + *corr;
            CHECK_FALSE(out_of_bounds(fp, room.usable_interior()).has_value());
        }
    }
    SUBCASE("wall thickness shrinks the interior") {
        Room walled{10, 10, 3, 0.5};
        auto corr = out_of_bounds(box(0.8, 5, 1, 1, 0), walled.usable_interior());
        REQUIRE(corr.has_value());
        CHECK(corr->x == doctest::Approx(0.2));
    }
}

TEST_CASE("pairwise collisions and exemptions") {
    AssetBase base;
    AssetRecord bench;
    bench.asset_id = "Bench";
    bench.asset_type = AssetType::room_asset;
    bench.category = "furniture";
    bench.bbox = {1.0, 2.0, 0.9};
    bench.provides_surface = true;
    base.insert(bench);
    AssetRecord beaker;
    beaker.asset_id = "Beaker";
    beaker.asset_type = AssetType::instrument;
    beaker.category = "glassware";
    beaker.bbox = {0.08, 0.08, 0.12};
    base.insert(beaker);

    Layout layout;
    layout.room = {10, 10, 3, 0};
    layout.objects.push_back({"b1", "Bench", {3, 3, 0, 0}, "floor"});
    layout.objects.push_back({"b2", "Bench", {8, 8, 0, 0}, "floor"});
    layout.objects.push_back({"k1", "Beaker", {3, 3, 0.9, 0}, "b1"});
    layout.objects.push_back({"k2", "Beaker", {8, 8, 0.9, 0}, "b2"});

    SUBCASE("separated benches collide with nothing") {
        CHECK(pairwise_collisions(layout, base).empty());
    }
    SUBCASE("parent-child and cross-surface pairs are exempt") {
        // k1 sits inside b1's footprint and k2 inside b2's; neither counts.
        CHECK(pairwise_collisions(layout, base).empty());
        CHECK(same_level_pair_count(layout) == 1);  // only b1-b2
    }
    SUBCASE("overlapping benches are reported once with the depth") {
        layout.find("b2")->pose.x = 3.0;
        layout.find("b2")->pose.y = 3.6;
        auto hits = pairwise_collisions(layout, base);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].id_a == "b1");
        CHECK(hits[0].id_b == "b2");
        CHECK(hits[0].pen.depth == doctest::Approx(0.4));
    }
    SUBCASE("co-surface items are tested") {
        layout.find("k2")->initial_location = "b1";
        layout.find("k2")->pose.x = 3.0;
        layout.find("k2")->pose.y = 3.0;
        auto hits = pairwise_collisions(layout, base);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].id_a == "k1");
        CHECK(hits[0].id_b == "k2");
    }
}

TEST_CASE("edge distance") {
    AssetRecord bench;
    bench.asset_id = "Bench";
    bench.bbox = {1.0, 1.0, 0.9};
    bench.provides_surface = true;
    AssetRecord item;
    item.asset_id = "Vial";
    item.bbox = {0.04, 0.04, 0.1};

    PlacedObject parent{"b1", "Bench", {5, 5, 0, 0}, "floor"};

    SUBCASE("centered point-sized item sees half the table") {
        AssetRecord point = item;
        point.bbox = {1e-9, 1e-9, 0.1};
        PlacedObject it{"v", "Vial", {5, 5, 0.9, 0}, "b1"};
        CHECK(edge_distance(it, point, parent, bench) == doctest::Approx(0.5));
    }
    SUBCASE("item near an edge measures from its corner") {
        // center 0.10 from the nearest edge, item 0.04 wide -> 0.08
        PlacedObject it{"v", "Vial", {5.5 - 0.10, 5, 0.9, 0}, "b1"};
        CHECK(edge_distance(it, item, parent, bench) == doctest::Approx(0.08));
    }
    SUBCASE("flush corner gives zero") {
        PlacedObject it{"v", "Vial", {5.5 - 0.02, 5, 0.9, 0}, "b1"};
        CHECK(edge_distance(it, item, parent, bench) == doctest::Approx(0.0));
    }
    SUBCASE("overhang goes negative") {
        PlacedObject it{"v", "Vial", {5.55, 5, 0.9, 0}, "b1"};
        CHECK(edge_distance(it, item, parent, bench) < 0.0);
    }
    SUBCASE("detached item throws") {
        PlacedObject it{"v", "Vial", {5, 5, 0.9, 0}, "other"};
        CHECK_THROWS(edge_distance(it, item, parent, bench));
    }
}

TEST_CASE("segment to footprint distance") {
    Footprint fp = box(5, 5, 2, 1, 0);
    CHECK(segment_footprint_distance({0, 5}, {10, 5}, fp) == doctest::Approx(0.0));
    CHECK(segment_footprint_distance({0, 7}, {10, 7}, fp) == doctest::Approx(1.5));
    CHECK(segment_footprint_distance({5, 5}, {5, 5.1}, fp) == doctest::Approx(0.0));
}
