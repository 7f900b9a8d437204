#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "labscene/evaluator.hpp"
#include "labscene/nav_refine.hpp"
#include "labscene/optimizer.hpp"
#include "labscene/proposer_client.hpp"

namespace labscene {

// Every hyper-parameter in one place. Loaded from a flat key = value config
// file; command-line flags override the file, the file overrides defaults.
struct PipelineConfig {
    RewardWeights weights;
    SafetyConfig safety;
    NavConfig nav;
    FastRepairOptions repair;

    int optimizer_room_iters = 20;
    int optimizer_desktop_iters = 20;
    int plateau_window = 3;

    int refine_max_iters = 10;
    double refine_epsilon_pp = 0.5;
    int refine_stall_limit = 3;
    double clearance_margin = 0.1;
    double facing_threshold_deg = 30.0;

    std::string proposer = "heuristic";  // heuristic | remote
    ProposerEndpoint proposer_endpoint;

    std::string semantic_scorer = "stub";  // stub | remote
    SemanticEndpoint scorer_endpoint;
    int stub_realism = 8;
    int stub_layout = 8;
    int stub_completion = 8;
    SemanticMode semantic_mode = SemanticMode::medium;

    ProtocolValidationOptions protocol_validation;

    double room_width = 10.0;
    double room_depth = 8.0;
    double room_height = 3.0;
    double room_wall_thickness = 0.1;

    std::uint64_t seed = 0;
    int jobs = 1;
};

// Applies one key = value assignment. Throws on unknown keys or unparseable
// values so typos fail loudly.
void apply_config_kv(PipelineConfig& cfg, const std::string& key,
                     const std::string& value);

// key = value lines, # comments, optional cosmetic [section] headers.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_text(const std::string& text);

OptimizeConfig make_optimize_config(const PipelineConfig& cfg);
RefineConfig make_refine_config(const PipelineConfig& cfg);
EvalConfig make_eval_config(const PipelineConfig& cfg);
Room make_room(const PipelineConfig& cfg);

}  // namespace labscene
