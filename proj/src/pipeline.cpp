#include "labscene/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "labscene/render.hpp"

namespace labscene {

namespace {

std::string make_instance_id(const std::string& asset_id,
                             std::map<std::string, int>& counters) {
    int n = ++counters[asset_id];
    std::string lower;
    for (char c : asset_id) lower.push_back(static_cast<char>(std::tolower(
        static_cast<unsigned char>(c))));
    return lower + "_" + std::to_string(n);
}

ProposerResponse call_proposer(const ProposerRequest& req, const AssetBase& base,
                               const PipelineConfig& cfg) {
    if (cfg.proposer == "remote") {
        try {
            return propose_remote(req, cfg.proposer_endpoint);
        } catch (const ProposerUnavailable&) {
            // fall through to the offline heuristic
        } catch (const ResponseRejected&) {
        }
    }
    return propose_heuristic(req, base, cfg.safety);
}

}  // namespace

Layout generate_layout(const Protocol& protocol, const AssetBase& base,
                       const PipelineConfig& cfg) {
    Layout layout;
    layout.room = make_room(cfg);
    layout.metadata["protocol_id"] = protocol.protocol_id;
    layout.metadata["stage"] = "init";

    std::map<std::string, int> counters;

    ProposerRequest room_req;
    room_req.mode = ProposerMode::init_room;
    room_req.layout = &layout;
    room_req.protocol = &protocol;
    room_req.level = OptLevel::room;
    room_req.seed = cfg.seed;
    room_req.catalog_digest = catalog_digest(base);
    ProposerResponse room_resp = call_proposer(room_req, base, cfg);
    for (const PlacementProposal& pl : room_resp.placements) {
        PlacedObject o;
        o.instance_id = make_instance_id(pl.asset_id, counters);
        o.asset_id = pl.asset_id;
        o.pose = {pl.x, pl.y, 0.0, norm_deg(pl.yaw_deg)};
        o.initial_location = kFloorLocation;
        layout.objects.push_back(std::move(o));
    }

    // Desktop organization, one request per placed surface in layout order.
    std::vector<std::string> surfaces;
    for (const PlacedObject& o : layout.objects) {
        const AssetRecord* rec = base.get(o.asset_id);
        if (rec != nullptr && rec->provides_surface) surfaces.push_back(o.instance_id);
    }
    for (const std::string& sid : surfaces) {
        ProposerRequest desk_req;
        desk_req.mode = ProposerMode::init_desktop;
        desk_req.layout = &layout;
        desk_req.protocol = &protocol;
        desk_req.level = OptLevel::desktop;
        desk_req.surface_id = sid;
        desk_req.seed = cfg.seed;
        desk_req.catalog_digest = catalog_digest(base);
        ProposerResponse desk_resp;
        try {
            desk_resp = call_proposer(desk_req, base, cfg);
        } catch (const PlacementInfeasible&) {
            continue;  // overloaded surface; remaining assets stay unplaced
        }
        const PlacedObject* parent = layout.find(sid);
        const AssetRecord& parent_rec = base.resolve(parent->asset_id);
        for (const PlacementProposal& pl : desk_resp.placements) {
            PlacedObject o;
            o.instance_id = make_instance_id(pl.asset_id, counters);
            o.asset_id = pl.asset_id;
            if (pl.local_frame) {
                o.pose = desktop_to_global(*parent, parent_rec, pl.x, pl.y, pl.yaw_deg);
            } else {
                o.pose = {pl.x, pl.y, tabletop_height(*parent, parent_rec),
                          norm_deg(pl.yaw_deg)};
            }
            o.initial_location = pl.initial_location == "floor" ? sid
                                                                : pl.initial_location;
            layout.objects.push_back(std::move(o));
        }
    }
    return layout;
}

PipelineArtifacts run_pipeline(const Protocol& protocol, const AssetBase& base,
                               const PipelineConfig& cfg,
                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    PipelineArtifacts art;

    // Phase 1: hierarchical initialization.
    art.layout = generate_layout(protocol, base, cfg);

    // Phase 2: geometric and chemical optimization.
    OptimizeConfig opt_cfg = make_optimize_config(cfg);
    HeuristicProposer heuristic(base, cfg.safety, cfg.seed);
    RemoteProposer remote(base, cfg.proposer_endpoint);
    Proposer& proposer =
        cfg.proposer == "remote" ? static_cast<Proposer&>(remote)
                                 : static_cast<Proposer&>(heuristic);
    OptimizeResult opt = optimize(art.layout, protocol, base, proposer, opt_cfg);
    art.layout = opt.layout;
    art.optimize_trace = opt.trace;

    // Phase 3: navigation-aware refinement.
    RefineConfig ref_cfg = make_refine_config(cfg);
    auto [refined, history] = refine_loop(art.layout, protocol, base, ref_cfg);
    art.layout = refined;
    art.refine_history = history;
    art.layout.metadata["stage"] = "final";

    art.pairs = goal_pairs(protocol, art.layout, base, cfg.nav.offset_radius);
    art.num_targets = static_cast<int>(protocol.steps.size());

    StubSemanticScorer stub(cfg.stub_realism, cfg.stub_layout, cfg.stub_completion);
    RemoteSemanticScorer remote_scorer(cfg.scorer_endpoint);
    SemanticScorer& scorer =
        cfg.semantic_scorer == "remote" ? static_cast<SemanticScorer&>(remote_scorer)
                                        : static_cast<SemanticScorer&>(stub);
    art.report = evaluate_scene(art.layout, protocol, base, make_eval_config(cfg),
                                scorer);

    save_layout(art.layout, out_dir / "layout.json");
    {
        std::ofstream out(out_dir / "trace.jsonl", std::ios::binary);
        out << trace_to_jsonl(art.optimize_trace);
    }
    {
        std::ofstream out(out_dir / "refine.jsonl", std::ios::binary);
        out << refine_history_to_jsonl(art.refine_history);
    }
    save_goal_pairs(art.pairs, art.num_targets, out_dir / "goal_pairs.json");
    {
        std::ofstream out(out_dir / "report.json", std::ios::binary);
        out << report_to_json_text(art.report);
    }
    {
        OccupancyGrid grid = rasterize(art.layout, base, cfg.nav.resolution,
                                       cfg.nav.agent_radius, cfg.nav.inflation);
        std::vector<NavOutcome> outcomes = plan_pairs(grid, art.pairs);
        RenderExtras extras;
        extras.grid = &grid;
        extras.pairs = &art.pairs;
        extras.outcomes = &outcomes;
        for (const ConstraintInstance& ci : art.report.chemistry.instances) {
            if (ci.score < 1.0 && !ci.subject_b.empty()) {
                extras.highlight_pairs.emplace_back(ci.subject_a, ci.subject_b);
            }
        }
        save_svg(render_svg(art.layout, base, extras), out_dir / "scene.svg");
    }
    return art;
}

}  // namespace labscene
