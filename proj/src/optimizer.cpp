#include "labscene/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "labscene/proposer_client.hpp"
#include "jsonfmt.hpp"

namespace labscene {

std::string to_string(OptLevel level) {
    return level == OptLevel::room ? "room" : "desktop";
}

ViolationReport count_violations(const Layout& layout, const Protocol& protocol,
                                 const AssetBase& base, const SafetyConfig& cfg) {
    ViolationReport report;
    for (const PlacedObject& o : layout.objects) {
        if (base.get(o.asset_id) == nullptr) continue;
        if (auto corr = out_of_bounds_for(layout, base, o)) {
            report.boundary.push_back({o.instance_id, *corr});
        }
    }
    for (const CollisionEntry& ce : pairwise_collisions(layout, base)) {
        report.collision.push_back({ce.id_a, ce.id_b, ce.pen});
    }
    for (const ConstraintInstance& ci : chem_report(layout, protocol, base, cfg).instances) {
        if (ci.score == 0.0) report.critical_safety.push_back(ci);
    }
    return report;
}

double geo_score(const Layout& layout, const AssetBase& base) {
    int v_geo = 0;
    for (const PlacedObject& o : layout.objects) {
        if (base.get(o.asset_id) == nullptr) continue;
        try {
            if (out_of_bounds_for(layout, base, o)) ++v_geo;
        } catch (const std::runtime_error&) {
            ++v_geo;  // cannot fit at all
        }
    }
    v_geo += static_cast<int>(pairwise_collisions(layout, base).size());
    int n_checks = static_cast<int>(layout.objects.size()) + same_level_pair_count(layout);
    if (n_checks == 0) return 1.0;
    return 1.0 - std::min(1.0, static_cast<double>(v_geo) / n_checks);
}

double reward(const Layout& layout, const Protocol& protocol, const AssetBase& base,
              const RewardWeights& weights, const SafetyConfig& cfg) {
    RewardWeights w = weights.normalized();
    double f_geo = geo_score(layout, base);
    double f_chem = chem_report(layout, protocol, base, cfg).f_chem;
    return w.w_geo * f_geo + w.w_chem * f_chem;
}

FastRepairResult fast_repair(const Layout& layout, const AssetBase& base,
                             const FastRepairOptions& opts) {
    FastRepairResult result;
    result.layout = layout;
    Layout& cur = result.layout;

    for (int round = 0; round < opts.max_rounds; ++round) {
        result.rounds_used = round + 1;
        bool touched = false;

        // Boundary repair. Floor objects drag their desktop items; desktop
        // items are clamped to the tabletop on their own.
        for (PlacedObject& o : cur.objects) {
            if (base.get(o.asset_id) == nullptr) continue;
            std::optional<Vec2> corr;
            if (o.on_floor()) {
                corr = out_of_bounds_for(cur, base, o);  // may throw: unrepairable
            } else {
                try {
                    corr = out_of_bounds_for(cur, base, o);
                } catch (const std::runtime_error&) {
                    continue;  // larger than its tabletop; left as residual
                }
            }
            if (corr) {
                translate_rigid(cur, o.instance_id, *corr);
                touched = true;
            }
        }

        // Collision repair: move the later object of each colliding pair
        // apart with a safety margin, preferring the smallest push that
        // keeps it inside its bounds (otherwise repair oscillates against
        // walls in tight corners).
        for (const CollisionEntry& ce : pairwise_collisions(cur, base)) {
            const PlacedObject* oa = cur.find(ce.id_a);
            const PlacedObject* ob = cur.find(ce.id_b);
            Footprint fa = footprint_of(*oa, base.resolve(oa->asset_id));
            Footprint fb = footprint_of(*ob, base.resolve(ob->asset_id));
            std::vector<SeparationOption> options = separation_options(fa, fb);
            if (options.empty()) continue;  // stale entry, already separated
            Vec2 delta = options.front().direction *
                         (options.front().distance + opts.margin);
            for (const SeparationOption& opt : options) {
                Footprint moved_fp = fb;
                Vec2 candidate = opt.direction * (opt.distance + opts.margin);
                moved_fp.center = fb.center + candidate;
                bool fits = true;
                try {
                    if (ob->on_floor()) {
                        fits = !out_of_bounds_in_room(moved_fp, cur.room).has_value();
                    }
                } catch (const std::runtime_error&) {
                    fits = false;
                }
                if (fits) {
                    delta = candidate;
                    break;
                }
            }
            translate_rigid(cur, ce.id_b, delta);
            PlacedObject* moved = cur.find(ce.id_b);
            if (!moved->on_floor()) {
                // Keep desktop items on their surface.
                try {
                    if (auto corr = out_of_bounds_for(cur, base, *moved)) {
                        translate_rigid(cur, ce.id_b, *corr);
                    }
                } catch (const std::runtime_error&) {
                }
            }
            touched = true;
        }

        // Convergence check on the geometric violations only.
        result.residual_boundary.clear();
        result.residual_collision.clear();
        for (const PlacedObject& o : cur.objects) {
            if (base.get(o.asset_id) == nullptr) continue;
            try {
                if (auto corr = out_of_bounds_for(cur, base, o)) {
                    result.residual_boundary.push_back({o.instance_id, *corr});
                }
            } catch (const std::runtime_error&) {
                result.residual_boundary.push_back({o.instance_id, Vec2{}});
            }
        }
        for (const CollisionEntry& ce : pairwise_collisions(cur, base)) {
            result.residual_collision.push_back({ce.id_a, ce.id_b, ce.pen});
        }
        if (result.residual_boundary.empty() && result.residual_collision.empty()) {
            result.converged = true;
            return result;
        }
        if (!touched) break;  // stuck; avoid burning rounds on a fixpoint
    }
    return result;
}

std::pair<Layout, bool> apply_commands(const Layout& layout,
                                       const std::vector<AdjustCommand>& commands,
                                       const Protocol& protocol, const AssetBase& base,
                                       const SafetyConfig& cfg) {
    Layout candidate = layout;
    for (const AdjustCommand& cmd : commands) {
        if (candidate.find(cmd.id_a) == nullptr) {
            throw std::runtime_error("apply_commands: unknown instance " + cmd.id_a);
        }
        switch (cmd.kind) {
            case AdjustCommand::Kind::move: {
                PlacedObject* obj = candidate.find(cmd.id_a);
                Vec2 delta{cmd.x - obj->pose.x, cmd.y - obj->pose.y};
                translate_rigid(candidate, cmd.id_a, delta);
                break;
            }
            case AdjustCommand::Kind::rotate:
                rotate_rigid(candidate, cmd.id_a, cmd.angle_deg);
                break;
            case AdjustCommand::Kind::swap: {
                if (candidate.find(cmd.id_b) == nullptr) {
                    throw std::runtime_error("apply_commands: unknown instance " +
                                             cmd.id_b);
                }
                PlacedObject* a = candidate.find(cmd.id_a);
                PlacedObject* b = candidate.find(cmd.id_b);
                Pose pa = a->pose;
                Pose pb = b->pose;
                rotate_rigid(candidate, cmd.id_a, pb.yaw_deg - pa.yaw_deg);
                rotate_rigid(candidate, cmd.id_b, pa.yaw_deg - pb.yaw_deg);
                translate_rigid(candidate, cmd.id_a, {pb.x - pa.x, pb.y - pa.y});
                translate_rigid(candidate, cmd.id_b, {pa.x - pb.x, pa.y - pb.y});
                a = candidate.find(cmd.id_a);
                b = candidate.find(cmd.id_b);
                std::swap(a->pose.z, b->pose.z);
                std::swap(a->initial_location, b->initial_location);
                break;
            }
        }
    }
    int v_before = count_violations(layout, protocol, base, cfg).count();
    int v_after = count_violations(candidate, protocol, base, cfg).count();
    if (v_after > v_before) return {layout, false};
    return {candidate, true};
}

bool accept(const Layout& candidate, const Layout& incumbent, const Protocol& protocol,
            const AssetBase& base, const RewardWeights& weights,
            const SafetyConfig& cfg) {
    int v_cand = count_violations(candidate, protocol, base, cfg).count();
    int v_inc = count_violations(incumbent, protocol, base, cfg).count();
    if (v_cand < v_inc) return true;
    if (v_cand > v_inc) return false;
    return reward(candidate, protocol, base, weights, cfg) >
           reward(incumbent, protocol, base, weights, cfg);
}

std::string trace_to_jsonl(const std::vector<TraceEntry>& trace) {
    namespace jf = jsonfmt;
    std::ostringstream os;
    for (const TraceEntry& e : trace) {
        os << "{\"iteration\": " << e.iteration << ", \"level\": \""
           << to_string(e.level) << "\", \"v\": " << e.violations
           << ", \"F\": " << jf::num(e.reward)
           << ", \"accepted\": " << (e.accepted ? "true" : "false")
           << ", \"fallback\": " << (e.proposer_fallback ? "true" : "false") << "}\n";
    }
    return os.str();
}

OptimizeResult optimize(const Layout& layout, const Protocol& protocol,
                        const AssetBase& base, Proposer& proposer,
                        const OptimizeConfig& cfg) {
    OptimizeResult result;
    result.layout = layout;
    HeuristicProposer fallback(base, cfg.safety, cfg.seed);

    int iteration = 0;
    for (OptLevel level : {OptLevel::room, OptLevel::desktop}) {
        int budget = level == OptLevel::room ? cfg.room_iterations
                                             : cfg.desktop_iterations;
        int stalled = 0;
        int v_prev = count_violations(result.layout, protocol, base, cfg.safety).count();
        double f_prev = reward(result.layout, protocol, base, cfg.weights, cfg.safety);

        for (int t = 0; t < budget; ++t) {
            ++iteration;
            FastRepairResult repaired = fast_repair(result.layout, base, cfg.repair);
            ViolationReport vi = count_violations(repaired.layout, protocol, base,
                                                  cfg.safety);
            bool used_fallback = false;
            std::vector<AdjustCommand> commands;
            try {
                commands = proposer.propose(repaired.layout, vi, level, protocol);
            } catch (const std::exception&) {
                used_fallback = true;
                commands = fallback.propose(repaired.layout, vi, level, protocol);
            }
            auto [candidate, ok] =
                apply_commands(repaired.layout, commands, protocol, base, cfg.safety);
            (void)ok;
            bool accepted =
                accept(candidate, result.layout, protocol, base, cfg.weights, cfg.safety);
            if (accepted) result.layout = std::move(candidate);

            int v_now = count_violations(result.layout, protocol, base, cfg.safety).count();
            double f_now = reward(result.layout, protocol, base, cfg.weights, cfg.safety);
            result.trace.push_back({iteration, level, v_now, f_now, accepted,
                                    used_fallback});

            if (v_now < v_prev || f_now > f_prev) {
                stalled = 0;
            } else {
                ++stalled;
            }
            v_prev = v_now;
            f_prev = f_now;
            if (stalled >= cfg.plateau_window) break;
        }
    }
    return result;
}

}  // namespace labscene
