#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "labscene/asset.hpp"
#include "labscene/issue.hpp"

namespace labscene {

struct ProtocolStep {
    int index = 0;
    std::string description;
    std::string location;                 // instance-class token, e.g. "FumeHood"
    std::vector<std::string> assets_used; // asset ids, first entry is primary
};

struct MoveAction {
    int from_step = 0;
    int to_step = 0;
};

enum class ConstraintKind {
    flammable_heat_separation,
    reagent_storage,
    incompatible_separation,
    glass_edge,
};

std::string to_string(ConstraintKind k);
ConstraintKind constraint_kind_from_string(std::string_view s);

struct ChemicalConstraintSpec {
    ConstraintKind kind = ConstraintKind::flammable_heat_separation;
    std::vector<std::string> subjects;  // one id, or a pair for distance kinds
    double min_distance = 0.0;          // meters, distance kinds only
};

struct Protocol {
    std::string protocol_id;
    std::string name;
    std::vector<std::string> reagents;
    std::vector<std::string> instruments;
    std::vector<ProtocolStep> steps;
    std::vector<MoveAction> moves;
    std::vector<ChemicalConstraintSpec> constraints;
};

Protocol load_protocol(const std::filesystem::path& path);
Protocol protocol_from_json_text(const std::string& text);
std::string protocol_to_json_text(const Protocol& p);
void save_protocol(const Protocol& p, const std::filesystem::path& path);

struct ProtocolValidationOptions {
    // Location-class tokens considered legal operation locations.
    std::vector<std::string> location_classes = {
        "FumeHood", "ExperimentTable", "ValidationPlatform",
        "RotaryEvaporatorStation"};
};

// Appendix-style validation suite: asset resolvability, step schema
// completeness, location legality, constraint subject validity, and the
// preparation-first hard rule.
std::vector<Issue> validate_protocol(const Protocol& p, const AssetBase& base,
                                     const ProtocolValidationOptions& opts = {});

struct StatRow {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std_dev = 0.0;  // population
};

struct ProtocolStats {
    StatRow reagents, instruments, steps, moves;
};

// Per-protocol count statistics over a corpus. Throws on an empty corpus.
ProtocolStats protocol_stats(const std::vector<Protocol>& corpus);

// Plain-text table, values rounded to 2 decimals for display.
std::string stats_table(const ProtocolStats& stats);
std::string stats_to_json_text(const ProtocolStats& stats);

}  // namespace labscene
