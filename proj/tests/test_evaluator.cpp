#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "labscene/pipeline.hpp"
#include "labscene/render.hpp"

using namespace labscene;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FIXTURE_DIR;

Layout storage_clean_layout() {
    Layout layout;
    layout.room = {10, 8, 3, 0.1};
    layout.objects.push_back({"cab", "ReagentCabinet", {5, 4, 0, 0}, "floor"});
    layout.objects.push_back({"eth", "Ethanol", {5, 4, 1.8, 0}, "cab"});
    return layout;
}

}  // namespace

TEST_CASE("geometry_metrics") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;

    SUBCASE("clean scene counts objects only") {
        Layout layout = storage_clean_layout();
        GeometryMetrics m = geometry_metrics(layout, base);
        CHECK(m.obj == 2);
        CHECK(m.ob == 0);
        CHECK(m.cn == 0);
    }
    SUBCASE("empty layout") {
        Layout layout;
        layout.room = {10, 8, 3, 0.1};
        GeometryMetrics m = geometry_metrics(layout, base);
        CHECK(m.obj == 0);
        CHECK(m.ob == 0);
        CHECK(m.cn == 0);
    }
    SUBCASE("one out, two overlapping pairs") {
        Layout layout;
        layout.room = {10, 8, 3, 0.1};
        layout.objects.push_back({"a", "ExperimentTable", {-0.3, 6, 0, 0}, "floor"});
        layout.objects.push_back({"b", "ExperimentTable", {5, 4, 0, 0}, "floor"});
        layout.objects.push_back({"c", "ExperimentTable", {5.2, 4.1, 0, 0}, "floor"});
        layout.objects.push_back({"d", "ExperimentTable", {5.4, 3.9, 0, 0}, "floor"});
        GeometryMetrics m = geometry_metrics(layout, base);
        CHECK(m.ob == 1);
        CHECK(m.cn == 3);  // b-c, b-d, c-d
    }
    SUBCASE("desktop items count against tabletop bounds") {
        Layout layout = storage_clean_layout();
        layout.find("eth")->pose.x = 6.0;  // way off the cabinet top
        GeometryMetrics m = geometry_metrics(layout, base);
        CHECK(m.ob == 1);
    }
}

TEST_CASE("asset availability and fsr") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;
    Protocol protocol = load_protocol(kFixtures / "nav_demo.json");
    Layout reachable = load_layout(kFixtures / "blocked_corridor.json");
    reachable.objects.erase(reachable.objects.begin() + 4);  // drop w3
    Layout blocked = load_layout(kFixtures / "blocked_corridor.json");

    SUBCASE("availability needs every reagent and instrument placed") {
        CHECK(asset_availability(reachable, protocol, base));
        Layout missing = reachable;
        for (std::size_t i = 0; i < missing.objects.size(); ++i) {
            if (missing.objects[i].asset_id == "Ethanol") {
                missing.objects.erase(missing.objects.begin() + i);
                break;
            }
        }
        CHECK_FALSE(asset_availability(missing, protocol, base));
    }
    SUBCASE("fsr pools transitions and scores scenes") {
        std::vector<SceneInput> scenes{{&reachable, &protocol}, {&blocked, &protocol}};
        FsrResult f = fsr(scenes, base, {});
        CHECK(f.asset == doctest::Approx(1.0));
        CHECK(f.step_nav == doctest::Approx(0.5));      // 1 of 2 transitions
        CHECK(f.protocol_nav == doctest::Approx(0.5));  // 1 of 2 scenes
    }
    SUBCASE("fsr rejects an empty scene list") {
        CHECK_THROWS(fsr({}, base, {}));
    }
}

TEST_CASE("weighted_chem") {
    CHECK(weighted_chem({1, 0, 1}, {0.8, 0.9, 0.4}) == doctest::Approx(0.4));
    CHECK(weighted_chem({0, 0}, {1.0, 1.0}) == 0.0);
    CHECK(weighted_chem({1, 1, 1}, {0.3, 0.6, 0.9}) == doctest::Approx(0.6));
    CHECK_THROWS(weighted_chem({}, {}));
    CHECK_THROWS(weighted_chem({1}, {0.5, 0.5}));

    SUBCASE("gating never raises the unweighted mean") {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            int n = 1 + static_cast<int>(rng() % 10);
            std::vector<int> g;
            std::vector<double> s;
            double mean = 0.0;
            for (int i = 0; i < n; ++i) {
                g.push_back(rng() % 2 ? 1 : 0);
                s.push_back(u(rng));
                mean += s.back();
            }
            CHECK(weighted_chem(g, s) <= mean / n + 1e-12);
        }
    }
}

TEST_CASE("compose_scores") {
    SUBCASE("perfect inputs reach exactly 100") {
        ScoreComposition c = compose_scores(1.0, 1.0, 30.0);
        CHECK(c.s_phys == 35.0);
        CHECK(c.s_chem == 35.0);
        CHECK(c.s_consist == 30.0);
        CHECK(c.overall == 100.0);
    }
    SUBCASE("worked example") {
        ScoreComposition c = compose_scores(1.0, 0.6, 24.0);
        CHECK(c.overall == doctest::Approx(35 + 21 + 24));
    }
    SUBCASE("bounded and exact under random inputs") {
        std::mt19937_64 rng(4242);
        std::uniform_real_distribution<double> u(-0.5, 1.5);
        std::uniform_real_distribution<double> sem(-5.0, 40.0);
        for (int i = 0; i < 2000; ++i) {
            ScoreComposition c = compose_scores(u(rng), u(rng), sem(rng));
            CHECK(c.overall >= 0.0);
            CHECK(c.overall <= 100.0);
            CHECK(c.overall == c.s_phys + c.s_chem + c.s_consist);
        }
    }
}

TEST_CASE("nav_benchmark") {
    SUBCASE("single successful episode") {
        NavBench b = nav_benchmark({{true, 5.0, 10.0}});
        CHECK(b.sr == doctest::Approx(1.0));
        CHECK(b.spl == doctest::Approx(0.5));
    }
    SUBCASE("failures contribute zero") {
        NavBench b = nav_benchmark({{false, 5.0, 5.0}, {true, 4.0, 4.0}});
        CHECK(b.sr == doctest::Approx(0.5));
        CHECK(b.spl == doctest::Approx(0.5));
    }
    SUBCASE("optimal path earns a full credit") {
        NavBench b = nav_benchmark({{true, 7.0, 7.0}});
        CHECK(b.spl == doctest::Approx(1.0));
    }
    SUBCASE("spl never exceeds sr") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> len(0.5, 20.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<EpisodeResult> eps;
            int n = 1 + static_cast<int>(rng() % 12);
            for (int i = 0; i < n; ++i) {
                double l = len(rng);
                eps.push_back({rng() % 2 == 0, l, l + len(rng)});
            }
            NavBench b = nav_benchmark(eps);
            CHECK(b.spl <= b.sr + 1e-12);
        }
    }
    SUBCASE("empty episode list throws") {
        CHECK_THROWS(nav_benchmark({}));
    }
}

TEST_CASE("semantic scorers") {
    Layout layout = storage_clean_layout();
    SUBCASE("stub returns the configured triple") {
        StubSemanticScorer stub(8, 9, 9);
        SemanticScore s = stub.score(layout, nullptr, SemanticMode::medium);
        CHECK(s.realism == 8);
        CHECK(s.layout == 9);
        CHECK(s.completion == 9);
        CHECK(s.total == 26);
        CHECK(s.available);
    }
    SUBCASE("out-of-range scores clamp with a warning") {
        StubSemanticScorer stub(11, -2, 5);
        SemanticScore s = stub.score(layout, nullptr, SemanticMode::medium);
        CHECK(s.realism == 10);
        CHECK(s.layout == 0);
        CHECK(s.reasons.size() == 2);
    }
    SUBCASE("empty-bench hard rule zeroes completion") {
        StubSemanticScorer stub(8, 8, 8, true);
        Layout empty;
        empty.room = {10, 8, 3, 0.1};
        empty.objects.push_back({"t", "ExperimentTable", {5, 4, 0, 0}, "floor"});
        SemanticScore s = stub.score(empty, nullptr, SemanticMode::strict);
        CHECK(s.completion == 0);
        CHECK(s.total == 16);
    }
}

TEST_CASE("evaluate_scene and report round-trip") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;
    Protocol protocol = load_protocol(kFixtures / "nav_demo.json");
    Layout layout = load_layout(kFixtures / "blocked_corridor.json");
    layout.objects.erase(layout.objects.begin() + 4);  // reachable variant

    StubSemanticScorer stub(8, 9, 9);
    EvaluationReport rep = evaluate_scene(layout, protocol, base, {}, stub);

    SUBCASE("scores compose and stay in range") {
        CHECK(rep.overall == rep.s_phys + rep.s_chem + rep.s_consist);
        CHECK(rep.overall >= 0.0);
        CHECK(rep.overall <= 100.0);
        CHECK(rep.s_phys == doctest::Approx(35.0));  // geometrically clean
        CHECK(rep.fsr_asset == 1.0);
        CHECK(rep.fsr_protocol_nav == 1.0);
        CHECK(rep.semantic.total == 26);
    }
    SUBCASE("ethanol on the open bench is a storage violation with a suggestion") {
        REQUIRE(rep.chemistry.store.has_value());
        CHECK(*rep.chemistry.store == 0.0);
        bool suggested = false;
        for (const std::string& s : rep.suggestions) {
            if (s.find("cabinet") != std::string::npos) suggested = true;
        }
        CHECK(suggested);
    }
    SUBCASE("report JSON round-trips losslessly") {
        std::string text = report_to_json_text(rep);
        EvaluationReport again = report_from_json_text(text);
        CHECK(report_to_json_text(again) == text);
    }
    SUBCASE("csv summary has the table columns") {
        std::string csv = reports_to_csv({rep});
        CHECK(csv.find("Obj,OB,CN,Asset,StepNav,ProtNav,Flam,Store,Incomp,Glass,"
                       "Real,Lay,Comp") == 0);
        CHECK(csv.find("\n") != std::string::npos);
    }
    SUBCASE("missing assets gate the chemistry sub-score to zero") {
        Layout missing = layout;
        for (std::size_t i = 0; i < missing.objects.size(); ++i) {
            if (missing.objects[i].asset_id == "Ethanol") {
                missing.objects.erase(missing.objects.begin() + i);
                break;
            }
        }
        EvaluationReport rep2 = evaluate_scene(missing, protocol, base, {}, stub);
        CHECK(rep2.fsr_asset == 0.0);
        CHECK(rep2.s_chem == 0.0);
    }
}

TEST_CASE("config parsing") {
    SUBCASE("key = value text with sections and comments") {
        PipelineConfig cfg = config_from_text(
            "# tuning\n"
            "[weights]\n"
            "w_geo = 0.7\n"
            "w_chem = 0.3\n"
            "d_min_flammable = 1.5  # meters\n"
            "grid_resolution = 0.1\n"
            "proposer = heuristic\n"
            "semantic_mode = strict\n"
            "storage_classes = cabinet, safety_equipment:storage\n"
            "seed = 31\n");
        CHECK(cfg.weights.w_geo == doctest::Approx(0.7));
        CHECK(cfg.safety.d_min_flammable == doctest::Approx(1.5));
        CHECK(cfg.nav.resolution == doctest::Approx(0.1));
        CHECK(cfg.semantic_mode == SemanticMode::strict);
        CHECK(cfg.safety.storage_classes.size() == 2);
        CHECK(cfg.seed == 31);
    }
    SUBCASE("weights normalize on load") {
        PipelineConfig cfg = config_from_text("w_geo = 2\nw_chem = 2\n");
        CHECK(cfg.weights.w_geo == doctest::Approx(0.5));
    }
    SUBCASE("unknown keys fail loudly") {
        CHECK_THROWS(config_from_text("w_geoo = 0.5\n"));
    }
    SUBCASE("bad values fail loudly") {
        CHECK_THROWS(config_from_text("w_geo = fast\n"));
    }
}

TEST_CASE("svg rendering") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;

    SUBCASE("empty room renders just the outline") {
        Layout layout;
        layout.room = {4, 3, 3, 0};
        std::string svg = render_svg(layout, base);
        CHECK(svg.find("<svg") == 0);
        CHECK(svg.find("width=\"400.00\"") != std::string::npos);
        CHECK(svg.find("height=\"300.00\"") != std::string::npos);
        CHECK(svg.find("<polygon") == std::string::npos);
    }
    SUBCASE("a rotated bench polygon matches its footprint corners") {
        Layout layout;
        layout.room = {10, 8, 3, 0};
        layout.objects.push_back({"t", "ExperimentTable", {5, 4, 0, 45}, "floor"});
        std::string svg = render_svg(layout, base);
        Footprint fp = footprint_of(*layout.find("t"),
                                    base.resolve("ExperimentTable"));
        auto pos = svg.find("<polygon points=\"");
        REQUIRE(pos != std::string::npos);
        pos += std::string("<polygon points=\"").size();
        auto end = svg.find('"', pos);
        std::string points = svg.substr(pos, end - pos);
        // parse "x,y x,y x,y x,y" and compare with the mapped corners
        std::istringstream ss(points);
        for (const Vec2& c : fp.corners()) {
            std::string tok;
            REQUIRE((ss >> tok));
            auto comma = tok.find(',');
            double px = std::stod(tok.substr(0, comma));
            double py = std::stod(tok.substr(comma + 1));
            CHECK(px == doctest::Approx(c.x * 100.0).epsilon(1e-4));
            CHECK(py == doctest::Approx((8.0 - c.y) * 100.0).epsilon(1e-4));
        }
    }
    SUBCASE("identical inputs give byte-identical output") {
        Layout layout = load_layout(kFixtures / "cluttered_bench.json");
        CHECK(render_svg(layout, base) == render_svg(layout, base));
    }
}

TEST_CASE("pipeline end to end with the heuristic proposer") {
    AssetBase base = load_asset_base(kFixtures / "assets.json").base;
    Protocol protocol = load_protocol(kFixtures / "exp_003.json");
    PipelineConfig cfg;
    cfg.seed = 7;

    fs::path out_dir = fs::temp_directory_path() / "labscene_pipeline_test";
    fs::remove_all(out_dir);
    PipelineArtifacts art = run_pipeline(protocol, base, cfg, out_dir);

    SUBCASE("all artifacts exist") {
        CHECK(fs::exists(out_dir / "layout.json"));
        CHECK(fs::exists(out_dir / "trace.jsonl"));
        CHECK(fs::exists(out_dir / "refine.jsonl"));
        CHECK(fs::exists(out_dir / "goal_pairs.json"));
        CHECK(fs::exists(out_dir / "report.json"));
        CHECK(fs::exists(out_dir / "scene.svg"));
    }
    SUBCASE("the report is in range and geometry is clean") {
        CHECK(art.report.overall >= 0.0);
        CHECK(art.report.overall <= 100.0);
        CHECK(art.report.geometry.ob == 0);
        CHECK(art.report.geometry.cn == 0);
        CHECK(art.report.fsr_asset == 1.0);
    }
    SUBCASE("stage outputs equal the single-shot pipeline") {
        // generate -> optimize -> refine -> evaluate, run stage by stage
        Layout init = generate_layout(protocol, base, cfg);
        HeuristicProposer proposer(base, cfg.safety, cfg.seed);
        OptimizeResult opt =
            optimize(init, protocol, base, proposer, make_optimize_config(cfg));
        auto [refined, history] =
            refine_loop(opt.layout, protocol, base, make_refine_config(cfg));
        refined.metadata["stage"] = "final";
        StubSemanticScorer stub(cfg.stub_realism, cfg.stub_layout, cfg.stub_completion);
        EvaluationReport rep =
            evaluate_scene(refined, protocol, base, make_eval_config(cfg), stub);
        CHECK(layout_to_json_text(refined) == layout_to_json_text(art.layout));
        CHECK(report_to_json_text(rep) == report_to_json_text(art.report));
    }
    fs::remove_all(out_dir);
}
