#pragma once

#include <string>
#include <vector>

#include "labscene/navigation.hpp"
#include "labscene/optimizer.hpp"

namespace labscene {

struct AdjustmentSuggestion {
    enum class Kind { translation, rotation };
    Kind kind = Kind::translation;
    std::string object;        // instance id
    char axis = 'x';           // translation: 'x' or 'y'
    double delta = 0.0;        // meters for translations, signed degree
                               // increment for rotations
    double target_theta = 0.0; // rotation: absolute yaw, degrees
    int provoking_pair = -1;   // index into the goal-pair list
};

struct RefineConfig {
    int max_iterations = 10;       // T
    double epsilon_pp = 0.5;       // stop when |r_t - r_{t-1}| falls below
    int stall_limit = 3;           // iterations without a U decrease
    double clearance_margin = 0.1; // meters added on top of each deficit
    double facing_threshold_deg = 30.0;
    NavConfig nav;
    FastRepairOptions repair;
};

// True when the object's navigation-approach side points at the nearest wall
// within the facing threshold.
bool is_wall_facing(const PlacedObject& obj, const Room& room,
                    double threshold_deg);

// Absolute yaw whose approach side points from the object toward the room
// center.
double yaw_facing_room_center(const PlacedObject& obj, const Room& room);

// Converts navigation failures into translation/rotation suggestions:
// blocked endpoints move the blocking (or target) surface along the axis of
// smallest clearance deficit, wall-facing platforms get a rotation toward
// the room center, and severed corridors nudge the smallest obstacle off the
// start-goal chord. Empty when every pair is reachable.
std::vector<AdjustmentSuggestion> analyze(const Layout& layout,
                                          const Protocol& protocol,
                                          const AssetBase& base,
                                          const RefineConfig& cfg);

// Keeps, per (object, axis), only the suggestion with the largest absolute
// translation; rotations dedupe to one per object by largest |delta theta|.
// Output is ordered by object id then axis, rotations after translations.
std::vector<AdjustmentSuggestion> dedup(const std::vector<AdjustmentSuggestion>& in);

// Rigid single-axis translation / absolute rotation with workspace
// synchronization. Throws on unknown object.
Layout apply_translation(Layout layout, const std::string& object, char axis,
                         double delta);
Layout apply_rotation(Layout layout, const std::string& object, double target_theta);

// Unreachable rate in percent: 100 * U / N, or 0 when N = 0.
double unreachable_rate(int unreachable, int total);

struct RefineIteration {
    int t = 0;
    int unreachable = 0;  // U_t
    int total = 0;        // N_t
    double rate = 0.0;    // r_t, percent
    int applied = 0;      // suggestions applied this iteration
};

struct RefineHistory {
    std::vector<RefineIteration> iterations;
    bool converged = false;  // terminal U = 0
};

std::string refine_history_to_jsonl(const RefineHistory& history);

// Navigation-aware refinement loop: analyze failures, dedup and apply the
// updates (translations then rotations), run fast_repair when the updates
// introduced geometric violations, and repeat until all pairs are reachable
// or a stop rule fires. Non-convergence is a history outcome, not an error.
std::pair<Layout, RefineHistory> refine_loop(const Layout& layout,
                                             const Protocol& protocol,
                                             const AssetBase& base,
                                             const RefineConfig& cfg);

}  // namespace labscene
