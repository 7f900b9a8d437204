#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "labscene/geometry.hpp"
#include "labscene/safety.hpp"

namespace labscene {

struct BoundaryViolation {
    std::string instance_id;
    Vec2 correction;  // minimal inward translation
};

struct CollisionViolation {
    std::string id_a;
    std::string id_b;
    PenetrationResult pen;
};

// Hard-constraint census: boundary + collision + zero-score safety instances.
struct ViolationReport {
    std::vector<BoundaryViolation> boundary;
    std::vector<CollisionViolation> collision;
    std::vector<ConstraintInstance> critical_safety;

    int count() const {
        return static_cast<int>(boundary.size() + collision.size() +
                                critical_safety.size());
    }
};

struct RewardWeights {
    double w_geo = 0.5;
    double w_chem = 0.5;

    RewardWeights normalized() const {
        double s = w_geo + w_chem;
        if (s <= 0.0) return {0.5, 0.5};
        return {w_geo / s, w_chem / s};
    }
};

struct AdjustCommand {
    enum class Kind { move, rotate, swap };
    Kind kind = Kind::move;
    std::string id_a;
    std::string id_b;       // swap only
    double x = 0.0, y = 0.0;  // move target
    double angle_deg = 0.0;   // rotate increment
};

enum class OptLevel { room, desktop };
std::string to_string(OptLevel level);

// Pose-adjustment source: either the bundled deterministic heuristic or an
// external service. Implementations must not mutate the layout.
class Proposer {
public:
    virtual ~Proposer() = default;
    virtual std::vector<AdjustCommand> propose(const Layout& layout,
                                               const ViolationReport& violations,
                                               OptLevel level,
                                               const Protocol& protocol) = 0;
};

ViolationReport count_violations(const Layout& layout, const Protocol& protocol,
                                 const AssetBase& base, const SafetyConfig& cfg);

// f_geo = 1 - min(1, v_geo / n_checks), with n_checks = objects + tested pairs.
double geo_score(const Layout& layout, const AssetBase& base);

// Weighted reward: w_geo * f_geo + w_chem * f_chem.
double reward(const Layout& layout, const Protocol& protocol, const AssetBase& base,
              const RewardWeights& weights, const SafetyConfig& cfg);

struct FastRepairOptions {
    int max_rounds = 20;
    double margin = 0.02;  // post-separation safety margin
};

struct FastRepairResult {
    Layout layout;
    bool converged = false;
    int rounds_used = 0;
    std::vector<BoundaryViolation> residual_boundary;
    std::vector<CollisionViolation> residual_collision;
};

// Deterministic rule-based geometric repair: boundary corrections, collision
// separation (moving the later object in layout order), and rigid workspace
// synchronization of desktop items, iterated until clean or out of rounds.
// Throws when an object cannot fit in the room at all.
FastRepairResult fast_repair(const Layout& layout, const AssetBase& base,
                             const FastRepairOptions& opts = {});

// Applies commands to a candidate copy in order; the candidate is rejected
// wholesale when its violation count exceeds the input's. Throws on unknown
// instance ids.
std::pair<Layout, bool> apply_commands(const Layout& layout,
                                       const std::vector<AdjustCommand>& commands,
                                       const Protocol& protocol, const AssetBase& base,
                                       const SafetyConfig& cfg);

// Violation-prioritized acceptance: strictly fewer violations, or equal
// violations and strictly higher reward.
bool accept(const Layout& candidate, const Layout& incumbent, const Protocol& protocol,
            const AssetBase& base, const RewardWeights& weights,
            const SafetyConfig& cfg);

struct TraceEntry {
    int iteration = 0;
    OptLevel level = OptLevel::room;
    int violations = 0;
    double reward = 0.0;
    bool accepted = false;
    bool proposer_fallback = false;
};

std::string trace_to_jsonl(const std::vector<TraceEntry>& trace);

struct OptimizeConfig {
    int room_iterations = 20;
    int desktop_iterations = 20;
    int plateau_window = 3;
    RewardWeights weights;
    FastRepairOptions repair;
    SafetyConfig safety;
    std::uint64_t seed = 0;
};

struct OptimizeResult {
    Layout layout;
    std::vector<TraceEntry> trace;
};

// Two-level (room then desktop) optimization loop. Each iteration runs
// fast_repair, asks the proposer for commands, validates them, and applies
// the violation-prioritized acceptance rule. The level switches early when
// violations stop decreasing and the reward plateaus.
OptimizeResult optimize(const Layout& layout, const Protocol& protocol,
                        const AssetBase& base, Proposer& proposer,
                        const OptimizeConfig& cfg);

}  // namespace labscene
