#pragma once

#include <optional>
#include <string>
#include <vector>

#include "labscene/asset.hpp"
#include "labscene/protocol.hpp"
#include "labscene/scene.hpp"

namespace labscene {

// Tunables the formulas leave open. Defaults are documented in the README.
struct SafetyConfig {
    double d_min_flammable = 1.0;
    double d_min_incompatible = 0.5;
    double d_low_factor = 0.25;  // d_low = factor * d_min
    double d_safe_glass = 0.10;
    // Storage-class tokens: "category" or "category:subtype".
    std::vector<std::string> storage_classes = {"cabinet", "safety_equipment:storage"};
};

// Attribute pairs whose co-placement requires spatial separation.
struct IncompatibilityRule {
    bool SafetyAttributes::*first;
    bool SafetyAttributes::*second;
    const char* label;
};
const std::vector<IncompatibilityRule>& incompatibility_table();

struct ConstraintInstance {
    ConstraintKind kind = ConstraintKind::flammable_heat_separation;
    std::string subject_a;  // instance id
    std::string subject_b;  // instance id (empty for storage/glass kinds)
    double d_min = 0.0;
    double d_low = 0.0;
    double measured_d = 0.0;
    bool geo_ok = true;
    double score = 0.0;
};

// Exactly the piecewise satisfaction: 1 above d_min, d/d_min in [d_low,
// d_min), 0 below d_low; a geometry violation forces 0. Throws unless
// 0 <= d_low < d_min.
double satisfaction_distance(double d, double d_min, double d_low, bool geo_ok);

// min(1, d / d_safe), clamped to 0 for negative (overhanging) distances.
double satisfaction_glass(double d, double d_safe);

// Mean of the min(n, k) smallest scores. Throws on empty input.
double worst_k_average(std::vector<double> scores, int k = 3);

bool is_storage_surface(const AssetRecord& rec, const SafetyConfig& cfg);

// Materializes constraint instances for the placed scene: one flammable/heat
// instance per placed cross pair, one storage instance per placed reagent,
// one incompatibility instance per matched pair, one glass-edge instance per
// glass desktop item. Protocol constraint specs override thresholds for
// matching subjects. Distances and scores are left unfilled.
std::vector<ConstraintInstance> instantiate_constraints(const Layout& layout,
                                                        const Protocol& protocol,
                                                        const AssetBase& base,
                                                        const SafetyConfig& cfg);

struct ChemReport {
    std::optional<double> flam;    // worst-3 average
    std::optional<double> store;   // plain average
    std::optional<double> incomp;  // worst-3 average
    std::optional<double> glass;   // plain average
    double f_chem = 1.0;           // mean of defined metrics; 1 when none defined
    std::vector<ConstraintInstance> instances;
};

// Evaluates every instance against the current placement. geo_ok for an
// instance means none of its subjects has a boundary or collision violation.
ChemReport chem_report(const Layout& layout, const Protocol& protocol,
                       const AssetBase& base, const SafetyConfig& cfg);

}  // namespace labscene
