// Command-line pipeline: validate inputs, generate/optimize/refine layouts,
// check reachability, evaluate, and render figures.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "labscene/pipeline.hpp"
#include "labscene/render.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace labscene;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitOperational = 2;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

PipelineConfig resolve_config(const CommonArgs& common) {
    PipelineConfig cfg;
    if (!common.config_path.empty()) cfg = load_config(common.config_path);
    if (common.seed_set) cfg.seed = common.seed;
    if (common.jobs > 0) cfg.jobs = common.jobs;
    return cfg;
}

int print_issues_and_exit(const std::vector<Issue>& issues) {
    bool any_error = false;
    for (const Issue& is : issues) {
        if (!is.warning) any_error = true;
    }
    std::cout << format_issues(issues);
    return any_error ? kExitValidation : kExitOk;
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"protocol-grounded laboratory layout generation and scoring"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "config file (key = value lines)");
    auto* seed_opt = app.add_option("--seed", common.seed, "RNG seed");
    app.add_option("--jobs", common.jobs, "parallel scenes in batch evaluation");

    std::string assets_path, protocol_path, layout_path, out_path, out_dir;
    std::string trace_path, history_path, csv_path, pairs_path, grid_path;
    std::vector<std::string> layout_paths;
    bool with_grid = false, with_paths = false;

    auto* c_va = app.add_subcommand("validate-assets", "check an asset knowledge base");
    c_va->add_option("--assets", assets_path)->required();

    auto* c_vp = app.add_subcommand("validate-protocol", "check a protocol file");
    c_vp->add_option("--assets", assets_path)->required();
    c_vp->add_option("--protocol", protocol_path)->required();

    auto* c_stats = app.add_subcommand("stats", "protocol corpus statistics");
    c_stats->add_option("--protocols", out_dir, "directory of protocol JSON files")
        ->required();
    c_stats->add_option("--json", out_path, "also write machine-readable stats");

    auto* c_gen = app.add_subcommand("generate", "initialize a layout from a protocol");
    c_gen->add_option("--assets", assets_path)->required();
    c_gen->add_option("--protocol", protocol_path)->required();
    c_gen->add_option("--out", out_path)->required();

    auto* c_opt = app.add_subcommand("optimize", "geometric and chemical optimization");
    c_opt->add_option("--assets", assets_path)->required();
    c_opt->add_option("--protocol", protocol_path)->required();
    c_opt->add_option("--layout", layout_path)->required();
    c_opt->add_option("--out", out_path)->required();
    c_opt->add_option("--trace", trace_path, "JSON-lines iteration trace");

    auto* c_nav = app.add_subcommand("navcheck", "protocol reachability check");
    c_nav->add_option("--assets", assets_path)->required();
    c_nav->add_option("--protocol", protocol_path)->required();
    c_nav->add_option("--layout", layout_path)->required();
    c_nav->add_option("--pairs", pairs_path, "write the goal-pair file");
    c_nav->add_option("--grid", grid_path, "write the occupancy grid as PGM");

    auto* c_ref = app.add_subcommand("refine", "navigation-aware refinement");
    c_ref->add_option("--assets", assets_path)->required();
    c_ref->add_option("--protocol", protocol_path)->required();
    c_ref->add_option("--layout", layout_path)->required();
    c_ref->add_option("--out", out_path)->required();
    c_ref->add_option("--history", history_path, "JSON-lines refinement history");

    auto* c_eval = app.add_subcommand("evaluate", "score one or more layouts");
    c_eval->add_option("--assets", assets_path)->required();
    c_eval->add_option("--protocol", protocol_path)->required();
    c_eval->add_option("--layout", layout_paths, "layout file (repeatable)")->required();
    c_eval->add_option("--out", out_path, "report file (single) or directory (batch)")
        ->required();
    c_eval->add_option("--csv", csv_path, "CSV summary across scenes");

    auto* c_render = app.add_subcommand("render", "top-down SVG figure");
    c_render->add_option("--assets", assets_path)->required();
    c_render->add_option("--layout", layout_path)->required();
    c_render->add_option("--out", out_path)->required();
    c_render->add_option("--protocol", protocol_path,
                         "overlay goal pairs and planned paths");
    c_render->add_flag("--with-grid", with_grid, "overlay the occupancy raster");
    c_render->add_flag("--with-paths", with_paths, "overlay planned paths");

    auto* c_pipe = app.add_subcommand("pipeline", "generate, optimize, refine, evaluate");
    c_pipe->add_option("--assets", assets_path)->required();
    c_pipe->add_option("--protocol", protocol_path)->required();
    c_pipe->add_option("--out-dir", out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitOperational;
    }
    common.seed_set = seed_opt->count() > 0;

    try {
        PipelineConfig cfg = resolve_config(common);

        if (c_va->parsed()) {
            AssetLoadResult res;
            try {
                res = load_asset_base(assets_path);
            } catch (const std::exception& e) {
                if (!fs::exists(assets_path)) throw;
                std::cout << "invalid: " << e.what() << "\n";
                return kExitValidation;
            }
            std::cout << format_issues(res.warnings);
            std::cout << "ok: " << res.base.size() << " assets\n";
            return kExitOk;
        }

        if (c_vp->parsed()) {
            AssetBase base = load_asset_base(assets_path).base;
            Protocol protocol;
            try {
                protocol = load_protocol(protocol_path);
            } catch (const std::exception& e) {
                if (!fs::exists(protocol_path)) throw;
                std::cout << "invalid: " << e.what() << "\n";
                return kExitValidation;
            }
            std::vector<Issue> issues =
                validate_protocol(protocol, base, cfg.protocol_validation);
            if (issues.empty()) {
                std::cout << "ok: protocol " << protocol.protocol_id << " with "
                          << protocol.steps.size() << " steps\n";
            }
            return print_issues_and_exit(issues);
        }

        if (c_stats->parsed()) {
            std::vector<Protocol> corpus;
            for (const fs::path& f : sorted_json_files(out_dir)) {
                corpus.push_back(load_protocol(f));
            }
            ProtocolStats st = protocol_stats(corpus);
            std::cout << stats_table(st);
            if (!out_path.empty()) {
                std::ofstream out(out_path, std::ios::binary);
                out << stats_to_json_text(st);
            }
            return kExitOk;
        }

        AssetBase base = load_asset_base(assets_path).base;

        if (c_gen->parsed()) {
            Protocol protocol = load_protocol(protocol_path);
            Layout layout = generate_layout(protocol, base, cfg);
            save_layout(layout, out_path);
            std::cout << "generated " << layout.objects.size() << " objects -> "
                      << out_path << "\n";
            return kExitOk;
        }

        if (c_opt->parsed()) {
            Protocol protocol = load_protocol(protocol_path);
            Layout layout = load_layout(layout_path);
            HeuristicProposer heuristic(base, cfg.safety, cfg.seed);
            RemoteProposer remote(base, cfg.proposer_endpoint);
            Proposer& proposer = cfg.proposer == "remote"
                                     ? static_cast<Proposer&>(remote)
                                     : static_cast<Proposer&>(heuristic);
            OptimizeResult res =
                optimize(layout, protocol, base, proposer, make_optimize_config(cfg));
            save_layout(res.layout, out_path);
            if (!trace_path.empty()) {
                std::ofstream out(trace_path, std::ios::binary);
                out << trace_to_jsonl(res.trace);
            }
            int v = count_violations(res.layout, protocol, base, cfg.safety).count();
            std::cout << "optimized: v=" << v << " after " << res.trace.size()
                      << " iterations -> " << out_path << "\n";
            return kExitOk;
        }

        if (c_nav->parsed()) {
            Protocol protocol = load_protocol(protocol_path);
            Layout layout = load_layout(layout_path);
            ReachReport rep = f_reach(layout, protocol, base, cfg.nav);
            for (std::size_t i = 0; i < rep.outcomes.size(); ++i) {
                std::cout << "pair " << i << ": " << to_string(rep.outcomes[i].status)
                          << "\n";
            }
            std::cout << "f_reach=" << rep.reach << "\n";
            if (!pairs_path.empty()) {
                save_goal_pairs(rep.pairs, static_cast<int>(protocol.steps.size()),
                                pairs_path);
            }
            if (!grid_path.empty()) {
                save_grid_pgm(rasterize(layout, base, cfg.nav.resolution,
                                        cfg.nav.agent_radius, cfg.nav.inflation),
                              grid_path);
            }
            return rep.reach == 1 ? kExitOk : kExitValidation;
        }

        if (c_ref->parsed()) {
            Protocol protocol = load_protocol(protocol_path);
            Layout layout = load_layout(layout_path);
            auto [refined, history] =
                refine_loop(layout, protocol, base, make_refine_config(cfg));
            save_layout(refined, out_path);
            if (!history_path.empty()) {
                std::ofstream out(history_path, std::ios::binary);
                out << refine_history_to_jsonl(history);
            }
            std::cout << "refined: converged=" << (history.converged ? 1 : 0) << " in "
                      << history.iterations.size() << " iterations -> " << out_path
                      << "\n";
            return kExitOk;
        }

        if (c_eval->parsed()) {
            Protocol protocol = load_protocol(protocol_path);
            std::vector<Layout> layouts;
            for (const std::string& lp : layout_paths) layouts.push_back(load_layout(lp));
            StubSemanticScorer stub(cfg.stub_realism, cfg.stub_layout,
                                    cfg.stub_completion);
            RemoteSemanticScorer remote_scorer(cfg.scorer_endpoint);
            SemanticScorer& scorer =
                cfg.semantic_scorer == "remote"
                    ? static_cast<SemanticScorer&>(remote_scorer)
                    : static_cast<SemanticScorer&>(stub);
            EvalConfig ecfg = make_eval_config(cfg);

            std::vector<EvaluationReport> reports(layouts.size());
            const int n = static_cast<int>(layouts.size());
#if defined(_OPENMP)
            if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#endif
#pragma omp parallel for schedule(dynamic) if (n > 1 && cfg.semantic_scorer != "remote")
            for (int i = 0; i < n; ++i) {
                reports[i] = evaluate_scene(layouts[i], protocol, base, ecfg, scorer);
            }

            if (layouts.size() == 1) {
                std::ofstream out(out_path, std::ios::binary);
                out << report_to_json_text(reports[0]);
            } else {
                fs::create_directories(out_path);
                for (std::size_t i = 0; i < reports.size(); ++i) {
                    std::ofstream out(
                        fs::path(out_path) / ("report_" + std::to_string(i) + ".json"),
                        std::ios::binary);
                    out << report_to_json_text(reports[i]);
                }
            }
            if (!csv_path.empty()) {
                std::ofstream out(csv_path, std::ios::binary);
                out << reports_to_csv(reports);
            }
            for (const EvaluationReport& r : reports) {
                std::cout << "overall=" << r.overall << " (phys=" << r.s_phys
                          << " chem=" << r.s_chem << " consist=" << r.s_consist
                          << ")\n";
            }
            return kExitOk;
        }

        if (c_render->parsed()) {
            Layout layout = load_layout(layout_path);
            RenderExtras extras;
            OccupancyGrid grid;
            std::vector<GoalPair> pairs;
            std::vector<NavOutcome> outcomes;
            if (with_grid || with_paths) {
                grid = rasterize(layout, base, cfg.nav.resolution, cfg.nav.agent_radius,
                                 cfg.nav.inflation);
                extras.grid = &grid;
            }
            if (with_paths && !protocol_path.empty()) {
                Protocol protocol = load_protocol(protocol_path);
                pairs = goal_pairs(protocol, layout, base, cfg.nav.offset_radius);
                outcomes = plan_pairs(grid, pairs);
                extras.pairs = &pairs;
                extras.outcomes = &outcomes;
            }
            save_svg(render_svg(layout, base, extras), out_path);
            std::cout << "rendered -> " << out_path << "\n";
            return kExitOk;
        }

        if (c_pipe->parsed()) {
            Protocol protocol = load_protocol(protocol_path);
            std::vector<Issue> issues =
                validate_protocol(protocol, base, cfg.protocol_validation);
            bool hard = std::any_of(issues.begin(), issues.end(),
                                    [](const Issue& i) { return !i.warning; });
            if (hard) {
                std::cout << format_issues(issues);
                return kExitValidation;
            }
            PipelineArtifacts art = run_pipeline(protocol, base, cfg, out_dir);
            std::cout << "pipeline complete: overall=" << art.report.overall
                      << " f_reach=" << art.report.fsr_protocol_nav << " -> " << out_dir
                      << "\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOperational;
    }
    return kExitOperational;
}
