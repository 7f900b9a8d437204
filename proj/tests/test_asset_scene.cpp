#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "labscene/scene.hpp"

using namespace labscene;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FIXTURE_DIR;

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

AssetRecord minimal_record(const std::string& id) {
    AssetRecord r;
    r.asset_id = id;
    r.asset_type = AssetType::instrument;
    r.bbox = {0.1, 0.2, 0.3};
    return r;
}

}  // namespace

TEST_CASE("loading the bundled asset base") {
    AssetLoadResult res = load_asset_base(kFixtures / "assets.json");
    const AssetBase& base = res.base;
    CHECK(base.size() == 24);

    SUBCASE("the TestTube case carries its annotated geometry and flags") {
        const AssetRecord* tt = base.get("TestTube");
        REQUIRE(tt != nullptr);
        CHECK(tt->bbox.short_side == doctest::Approx(9.996e-4));
        CHECK(tt->bbox.long_side == doctest::Approx(2.414e-3));
        CHECK(tt->bbox.height == doctest::Approx(2.351e-3));
        CHECK(tt->safety.glass_container);
        CHECK_FALSE(tt->safety.flammable);
        CHECK_FALSE(tt->safety.heat_source);
        CHECK(tt->front_direction == std::array<double, 3>{0, 1, 0});
        CHECK(tt->coordinate_system == "z_up");
    }
    SUBCASE("provides_surface defaults") {
        CHECK(base.get("ExperimentTable")->provides_surface);  // furniture, 0.9 m
        CHECK(base.get("FumeHood")->provides_surface);
        CHECK(base.get("ReagentCabinet")->provides_surface);   // explicit
        CHECK_FALSE(base.get("Beaker")->provides_surface);
    }
}

TEST_CASE("asset resolution") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;

    SUBCASE("synonym lookup") {
        CHECK(base.resolve("ethyl alcohol").asset_id == "Ethanol");
        CHECK(base.resolve("C2H5OH").asset_id == "Ethanol");
    }
    SUBCASE("exact id") {
        CHECK(base.resolve("Ethanol").asset_id == "Ethanol");
    }
    SUBCASE("case and whitespace insensitive") {
        CHECK(base.resolve("  ETHYL   Alcohol ").asset_id == "Ethanol");
        CHECK(base.resolve("ETHANOL").asset_id == "Ethanol");
    }
    SUBCASE("not found") {
        CHECK(base.find("unobtainium") == nullptr);
        CHECK_THROWS(base.resolve("unobtainium"));
    }
    SUBCASE("resolution is idempotent") {
        for (const auto& [id, rec] : base.records()) {
            CHECK(base.resolve(base.resolve(id).asset_id).asset_id == id);
            for (const std::string& syn : rec.synonyms) {
                CHECK(base.resolve(syn).asset_id == id);
            }
        }
    }
}

TEST_CASE("load errors") {
    SUBCASE("empty record list loads as empty base") {
        AssetLoadResult res = asset_base_from_json(nlohmann::json::array());
        CHECK(res.base.size() == 0);
        CHECK(res.base.find("anything") == nullptr);
    }
    SUBCASE("synonym collision names both asset ids") {
        nlohmann::json two = nlohmann::json::array();
        for (const char* id : {"Ethanol", "Isopropanol"}) {
            nlohmann::json j;
            j["asset_id"] = id;
            j["asset_type"] = "reagent";
            j["bbox"] = {{"short_side", 0.1}, {"long_side", 0.1}, {"height", 0.1}};
            j["synonyms"] = {"alcohol"};
            two.push_back(j);
        }
        try {
            asset_base_from_json(two);
            FAIL("expected collision error");
        } catch (const std::runtime_error& e) {
            std::string msg = e.what();
            CHECK(msg.find("Ethanol") != std::string::npos);
            CHECK(msg.find("Isopropanol") != std::string::npos);
        }
    }
    SUBCASE("duplicate asset_id") {
        nlohmann::json j;
        j["asset_id"] = "X";
        j["asset_type"] = "reagent";
        j["bbox"] = {{"short_side", 0.1}, {"long_side", 0.1}, {"height", 0.1}};
        nlohmann::json two = nlohmann::json::array({j, j});
        CHECK_THROWS_WITH_AS(asset_base_from_json(two),
                             doctest::Contains("duplicate asset_id"),
                             std::runtime_error);
    }
    SUBCASE("non-positive bbox dimension is a load error naming the asset") {
        nlohmann::json j;
        j["asset_id"] = "Flat";
        j["asset_type"] = "instrument";
        j["bbox"] = {{"short_side", 0.1}, {"long_side", 0.1}, {"height", 0.0}};
        CHECK_THROWS_WITH_AS(asset_base_from_json(nlohmann::json::array({j})),
                             doctest::Contains("Flat"), std::runtime_error);
    }
    SUBCASE("swapped bbox sides load with a warning") {
        nlohmann::json j;
        j["asset_id"] = "Wide";
        j["asset_type"] = "instrument";
        j["bbox"] = {{"short_side", 0.5}, {"long_side", 0.2}, {"height", 0.1}};
        AssetLoadResult res = asset_base_from_json(nlohmann::json::array({j}));
        CHECK(res.warnings.size() == 1);
        CHECK(res.base.get("Wide")->bbox.short_side == doctest::Approx(0.2));
        CHECK(res.base.get("Wide")->bbox.long_side == doctest::Approx(0.5));
    }
}

TEST_CASE("validate_asset_record") {
    SUBCASE("clean record") {
        AssetRecord r = minimal_record("Ok");
        CHECK(validate_asset_record(r).empty());
    }
    SUBCASE("zero height") {
        AssetRecord r = minimal_record("Bad");
        r.bbox.height = 0.0;
        auto issues = validate_asset_record(r);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].field == "bbox.height");
    }
    SUBCASE("non-canonical front direction") {
        AssetRecord r = minimal_record("Bad");
        r.front_direction = {1, 0, 0};
        auto issues = validate_asset_record(r);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].field == "front_direction");
    }
}

TEST_CASE("asset base round-trip keeps structure and unknown keys") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;
    fs::path tmp = temp_file("labscene_assets_rt.json");
    save_asset_base(base, tmp);
    AssetBase again = load_asset_base(tmp).base;
    REQUIRE(again.size() == base.size());
    for (const auto& [id, rec] : base.records()) {
        const AssetRecord* r2 = again.get(id);
        REQUIRE(r2 != nullptr);
        CHECK(r2->asset_type == rec.asset_type);
        CHECK(r2->category == rec.category);
        CHECK(r2->subtype == rec.subtype);
        CHECK(r2->synonyms == rec.synonyms);
        CHECK(r2->bbox.short_side == rec.bbox.short_side);
        CHECK(r2->bbox.long_side == rec.bbox.long_side);
        CHECK(r2->bbox.height == rec.bbox.height);
        CHECK(r2->provides_surface == rec.provides_surface);
        CHECK(r2->safety.flammable == rec.safety.flammable);
        CHECK(r2->safety.glass_container == rec.safety.glass_container);
        CHECK(r2->usd_path == rec.usd_path);
    }

    // Unknown keys survive a save/load cycle.
    nlohmann::json doc = nlohmann::json::array();
    nlohmann::json j;
    j["asset_id"] = "Spare";
    j["asset_type"] = "instrument";
    j["bbox"] = {{"short_side", 0.1}, {"long_side", 0.1}, {"height", 0.1}};
    j["vendor_note"] = {{"sku", "A-7"}, {"batch", 3}};
    doc.push_back(j);
    AssetBase spare = asset_base_from_json(doc).base;
    nlohmann::ordered_json out = asset_base_to_json(spare);
    CHECK(out[0].contains("vendor_note"));
    CHECK(out[0]["vendor_note"]["sku"] == "A-7");
    fs::remove(tmp);
}

TEST_CASE("layout attachment semantics") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;
    Layout layout;
    layout.room = {10, 8, 3, 0.1};
    layout.objects.push_back({"B", "ExperimentTable", {3, 3, 0, 0}, "floor"});
    layout.objects.push_back({"beaker", "Beaker", {3, 3, 0.9, 0}, "B"});

    SUBCASE("items_on returns attached objects in order") {
        auto items = items_on(layout, "B");
        REQUIRE(items.size() == 1);
        CHECK(items[0]->instance_id == "beaker");
        CHECK(items_on(layout, "beaker").empty());
    }
    SUBCASE("unknown instance throws") {
        CHECK_THROWS(items_on(layout, "nope"));
    }
    SUBCASE("dangling reference is a load error") {
        std::string text = layout_to_json_text(layout);
        std::string broken = text;
        auto pos = broken.find("\"B\"}");
        REQUIRE(pos != std::string::npos);
        broken.replace(pos, 4, "\"B2\"}");
        CHECK_THROWS_WITH_AS(layout_from_json_text(broken),
                             doctest::Contains("dangling"), std::runtime_error);
    }
    SUBCASE("duplicate instance id is a load error") {
        Layout dup = layout;
        dup.objects.push_back({"B", "ExperimentTable", {6, 3, 0, 0}, "floor"});
        CHECK_THROWS_WITH_AS(layout_from_json_text(layout_to_json_text(dup)),
                             doctest::Contains("duplicate"), std::runtime_error);
    }
    SUBCASE("validation catches bad tabletop height and deep nesting") {
        Layout bad = layout;
        bad.objects[1].pose.z = 0.5;
        auto issues = validate_layout(bad, &base);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].rule == "tabletop_height");

        Layout deep = layout;
        deep.objects.push_back({"vial", "TestTube", {3, 3, 1.0, 0}, "beaker"});
        bool found = false;
        for (const Issue& is : validate_layout(deep, &base)) {
            if (is.rule == "single_level_nesting") found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("layout save/load round-trip is field-identical") {
    Layout layout = load_layout(kFixtures / "cluttered_bench.json");
    REQUIRE(layout.objects.size() == 12);
    fs::path tmp = temp_file("labscene_layout_rt.json");
    save_layout(layout, tmp);
    Layout again = load_layout(tmp);
    REQUIRE(again.objects.size() == layout.objects.size());
    CHECK(again.room.width == layout.room.width);
    CHECK(again.room.depth == layout.room.depth);
    CHECK(again.room.height == layout.room.height);
    CHECK(again.room.wall_thickness == layout.room.wall_thickness);
    for (std::size_t i = 0; i < layout.objects.size(); ++i) {
        const PlacedObject& a = layout.objects[i];
        const PlacedObject& b = again.objects[i];
        CHECK(a.instance_id == b.instance_id);
        CHECK(a.asset_id == b.asset_id);
        CHECK(a.pose.x == b.pose.x);
        CHECK(a.pose.y == b.pose.y);
        CHECK(a.pose.z == b.pose.z);
        CHECK(a.pose.yaw_deg == b.pose.yaw_deg);
        CHECK(a.initial_location == b.initial_location);
    }
    CHECK(again.metadata == layout.metadata);

    // Saving twice is byte-identical.
    CHECK(layout_to_json_text(layout) == layout_to_json_text(again));
    fs::remove(tmp);
}

TEST_CASE("desktop_to_global") {
    AssetRecord bench;
    bench.asset_id = "Bench";
    bench.bbox = {0.6, 1.0, 0.9};
    bench.provides_surface = true;
    PlacedObject parent{"b", "Bench", {2, 3, 0, 0}, "floor"};

    SUBCASE("hand geometry at yaw 0") {
        Pose p = desktop_to_global(parent, bench, 0.5, 0.3, 0.0);
        CHECK(p.x == doctest::Approx(2.0));
        CHECK(p.y == doctest::Approx(3.0));
        CHECK(p.z == doctest::Approx(0.9));
        CHECK(p.yaw_deg == doctest::Approx(0.0));
        Vec2 corner = tabletop_corner(parent, bench);
        CHECK(corner.x == doctest::Approx(1.5));
        CHECK(corner.y == doctest::Approx(2.7));
    }
    SUBCASE("frame origin maps to the corner") {
        Pose p = desktop_to_global(parent, bench, 0.0, 0.0, 0.0);
        CHECK(p.x == doctest::Approx(1.5));
        CHECK(p.y == doctest::Approx(2.7));
        CHECK(p.z == doctest::Approx(0.9));
    }
    SUBCASE("parent yaw rotates the local offset") {
        PlacedObject turned = parent;
        turned.pose.yaw_deg = 90.0;
        Pose p0 = desktop_to_global(turned, bench, 0.0, 0.0, 0.0);
        Pose p = desktop_to_global(turned, bench, 0.5, 0.0, 0.0);
        CHECK(p.x - p0.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(p.y - p0.y == doctest::Approx(0.5));
        CHECK(p.yaw_deg == doctest::Approx(90.0));
    }
    SUBCASE("non-surface parent throws") {
        AssetRecord flat = bench;
        flat.provides_surface = false;
        CHECK_THROWS(desktop_to_global(parent, flat, 0.1, 0.1, 0.0));
    }
    SUBCASE("equivariance under parent translation") {
        PlacedObject moved = parent;
        moved.pose.x += 1.25;
        moved.pose.y -= 0.5;
        Pose a = desktop_to_global(parent, bench, 0.3, 0.2, 15.0);
        Pose b = desktop_to_global(moved, bench, 0.3, 0.2, 15.0);
        CHECK(b.x - a.x == doctest::Approx(1.25));
        CHECK(b.y - a.y == doctest::Approx(-0.5));
        CHECK(b.yaw_deg == a.yaw_deg);
    }
    SUBCASE("equivariance under parent rotation matches the rotation matrix") {
        PlacedObject turned = parent;
        turned.pose.yaw_deg = 37.0;
        Pose a = desktop_to_global(parent, bench, 0.3, 0.2, 0.0);
        Pose b = desktop_to_global(turned, bench, 0.3, 0.2, 0.0);
        Vec2 rel{a.x - parent.pose.x, a.y - parent.pose.y};
        Vec2 expect = rotate_deg(rel, 37.0);
        CHECK(b.x - parent.pose.x == doctest::Approx(expect.x));
        CHECK(b.y - parent.pose.y == doctest::Approx(expect.y));
    }
}

TEST_CASE("rigid motion helpers") {
    Layout layout;
    layout.room = {10, 10, 3, 0};
    layout.objects.push_back({"bench", "B", {2, 3, 0, 0}, "floor"});
    layout.objects.push_back({"item", "I", {2.1, 3.2, 0.9, 0}, "bench"});

    SUBCASE("translation carries items") {
        translate_rigid(layout, "bench", {1.0, 0.0});
        CHECK(layout.find("bench")->pose.x == doctest::Approx(3.0));
        CHECK(layout.find("item")->pose.x == doctest::Approx(3.1));
        CHECK(layout.find("item")->pose.y == doctest::Approx(3.2));
    }
    SUBCASE("rotation swings items about the parent center") {
        Layout l2 = layout;
        l2.find("item")->pose.x = 3.0;  // offset (1, 0)
        l2.find("item")->pose.y = 3.0;
        rotate_rigid(l2, "bench", 90.0);
        CHECK(l2.find("item")->pose.x == doctest::Approx(2.0));
        CHECK(l2.find("item")->pose.y == doctest::Approx(4.0));
        CHECK(l2.find("item")->pose.yaw_deg == doctest::Approx(90.0));
    }
    SUBCASE("unknown instance throws") {
        CHECK_THROWS(translate_rigid(layout, "ghost", {1, 0}));
    }
}
