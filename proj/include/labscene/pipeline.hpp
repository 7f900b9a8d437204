#pragma once

#include <filesystem>
#include <string>

#include "labscene/config.hpp"

namespace labscene {

// Materialized initial scene: room-level zoning followed by per-surface
// desktop organization, both through the configured proposer.
Layout generate_layout(const Protocol& protocol, const AssetBase& base,
                       const PipelineConfig& cfg);

struct PipelineArtifacts {
    Layout layout;
    std::vector<TraceEntry> optimize_trace;
    RefineHistory refine_history;
    std::vector<GoalPair> pairs;
    int num_targets = 0;
    EvaluationReport report;
};

// generate -> optimize -> refine -> evaluate. Writes layout.json,
// trace.jsonl, refine.jsonl, goal_pairs.json, report.json and scene.svg
// into out_dir; identical inputs and seed produce byte-identical files.
PipelineArtifacts run_pipeline(const Protocol& protocol, const AssetBase& base,
                               const PipelineConfig& cfg,
                               const std::filesystem::path& out_dir);

}  // namespace labscene
