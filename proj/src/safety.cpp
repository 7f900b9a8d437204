#include "labscene/safety.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "labscene/geometry.hpp"

namespace labscene {

double satisfaction_distance(double d, double d_min, double d_low, bool geo_ok) {
    if (!(d_low >= 0.0) || !(d_low < d_min)) {
        throw std::runtime_error("satisfaction_distance: require 0 <= d_low < d_min");
    }
    if (!geo_ok) return 0.0;
    if (d >= d_min) return 1.0;
    if (d >= d_low) return d / d_min;
    return 0.0;
}

double satisfaction_glass(double d, double d_safe) {
    if (!(d_safe > 0.0)) throw std::runtime_error("satisfaction_glass: d_safe must be positive");
    if (d <= 0.0) return 0.0;
    return std::min(1.0, d / d_safe);
}

double worst_k_average(std::vector<double> scores, int k) {
    if (scores.empty()) throw std::runtime_error("worst_k_average: empty input");
    std::sort(scores.begin(), scores.end());
    std::size_t n = std::min(scores.size(), static_cast<std::size_t>(k));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += scores[i];
    return sum / static_cast<double>(n);
}

const std::vector<IncompatibilityRule>& incompatibility_table() {
    static const std::vector<IncompatibilityRule> table = {
        {&SafetyAttributes::acid, &SafetyAttributes::base, "acid_x_base"},
        {&SafetyAttributes::oxidizer, &SafetyAttributes::flammable, "oxidizer_x_flammable"},
        {&SafetyAttributes::oxidizer, &SafetyAttributes::reactive_metal, "oxidizer_x_reactive_metal"},
        {&SafetyAttributes::acid, &SafetyAttributes::reactive_metal, "acid_x_reactive_metal"},
        {&SafetyAttributes::acid, &SafetyAttributes::oxidizer, "acid_x_oxidizer"},
    };
    return table;
}

bool is_storage_surface(const AssetRecord& rec, const SafetyConfig& cfg) {
    for (const std::string& cls : cfg.storage_classes) {
        auto colon = cls.find(':');
        if (colon == std::string::npos) {
            if (rec.category == cls) return true;
        } else if (rec.category == cls.substr(0, colon) &&
                   rec.subtype == cls.substr(colon + 1)) {
            return true;
        }
    }
    return false;
}

namespace {

// Threshold overrides from protocol constraint specs, matched on asset ids.
double override_d_min(const Protocol& protocol, const AssetBase& base,
                      ConstraintKind kind, const std::string& asset_a,
                      const std::string& asset_b, double fallback) {
    for (const ChemicalConstraintSpec& spec : protocol.constraints) {
        if (spec.kind != kind || !(spec.min_distance > 0.0)) continue;
        std::set<std::string> want;
        for (const std::string& s : spec.subjects) {
            const AssetRecord* rec = base.find(s);
            want.insert(rec != nullptr ? rec->asset_id : s);
        }
        if (spec.subjects.size() >= 2) {
            if (want.count(asset_a) && want.count(asset_b)) return spec.min_distance;
        } else if (want.count(asset_a) || want.count(asset_b)) {
            return spec.min_distance;
        }
    }
    return fallback;
}

}  // namespace

std::vector<ConstraintInstance> instantiate_constraints(const Layout& layout,
                                                        const Protocol& protocol,
                                                        const AssetBase& base,
                                                        const SafetyConfig& cfg) {
    std::vector<ConstraintInstance> out;

    struct Placed {
        const PlacedObject* obj;
        const AssetRecord* rec;
    };
    std::vector<Placed> placed;
    for (const PlacedObject& o : layout.objects) {
        const AssetRecord* rec = base.get(o.asset_id);
        if (rec == nullptr) continue;
        placed.push_back({&o, rec});
    }

    // (a) flammable vs heat source, over all placed cross pairs.
    for (const Placed& a : placed) {
        if (!a.rec->safety.flammable) continue;
        for (const Placed& b : placed) {
            if (!b.rec->safety.heat_source || a.obj == b.obj) continue;
            ConstraintInstance ci;
            ci.kind = ConstraintKind::flammable_heat_separation;
            ci.subject_a = a.obj->instance_id;
            ci.subject_b = b.obj->instance_id;
            ci.d_min = override_d_min(protocol, base, ci.kind, a.rec->asset_id,
                                      b.rec->asset_id, cfg.d_min_flammable);
            ci.d_low = cfg.d_low_factor * ci.d_min;
            out.push_back(std::move(ci));
        }
    }

    // (b) storage, one per placed reagent.
    for (const Placed& a : placed) {
        if (a.rec->asset_type != AssetType::reagent) continue;
        ConstraintInstance ci;
        ci.kind = ConstraintKind::reagent_storage;
        ci.subject_a = a.obj->instance_id;
        out.push_back(std::move(ci));
    }

    // (c) incompatible pairs from the attribute table.
    for (std::size_t i = 0; i < placed.size(); ++i) {
        for (std::size_t j = i + 1; j < placed.size(); ++j) {
            const SafetyAttributes& sa = placed[i].rec->safety;
            const SafetyAttributes& sb = placed[j].rec->safety;
            bool incompatible = false;
            for (const IncompatibilityRule& rule : incompatibility_table()) {
                if ((sa.*rule.first && sb.*rule.second) ||
                    (sb.*rule.first && sa.*rule.second)) {
                    incompatible = true;
                    break;
                }
            }
            if (!incompatible) continue;
            ConstraintInstance ci;
            ci.kind = ConstraintKind::incompatible_separation;
            ci.subject_a = placed[i].obj->instance_id;
            ci.subject_b = placed[j].obj->instance_id;
            ci.d_min = override_d_min(protocol, base, ci.kind, placed[i].rec->asset_id,
                                      placed[j].rec->asset_id, cfg.d_min_incompatible);
            ci.d_low = cfg.d_low_factor * ci.d_min;
            out.push_back(std::move(ci));
        }
    }

    // (d) glass edge, one per glass desktop item.
    for (const Placed& a : placed) {
        if (!a.rec->safety.glass_container || a.obj->on_floor()) continue;
        ConstraintInstance ci;
        ci.kind = ConstraintKind::glass_edge;
        ci.subject_a = a.obj->instance_id;
        ci.d_min = override_d_min(protocol, base, ci.kind, a.rec->asset_id, "",
                                  cfg.d_safe_glass);
        out.push_back(std::move(ci));
    }
    return out;
}

ChemReport chem_report(const Layout& layout, const Protocol& protocol,
                       const AssetBase& base, const SafetyConfig& cfg) {
    ChemReport report;
    report.instances = instantiate_constraints(layout, protocol, base, cfg);

    // Objects touched by any boundary or collision violation lose geo_ok.
    std::set<std::string> geo_bad;
    for (const PlacedObject& o : layout.objects) {
        if (base.get(o.asset_id) == nullptr) continue;
        if (out_of_bounds_for(layout, base, o)) geo_bad.insert(o.instance_id);
    }
    for (const CollisionEntry& ce : pairwise_collisions(layout, base)) {
        geo_bad.insert(ce.id_a);
        geo_bad.insert(ce.id_b);
    }

    auto centroid_distance = [&](const std::string& ia, const std::string& ib) {
        const PlacedObject* a = layout.find(ia);
        const PlacedObject* b = layout.find(ib);
        return std::hypot(a->pose.x - b->pose.x, a->pose.y - b->pose.y);
    };

    std::vector<double> flam, store, incomp, glass;
    for (ConstraintInstance& ci : report.instances) {
        ci.geo_ok = geo_bad.count(ci.subject_a) == 0 &&
                    (ci.subject_b.empty() || geo_bad.count(ci.subject_b) == 0);
        switch (ci.kind) {
            case ConstraintKind::flammable_heat_separation: {
                ci.measured_d = centroid_distance(ci.subject_a, ci.subject_b);
                ci.score = satisfaction_distance(ci.measured_d, ci.d_min, ci.d_low,
                                                 ci.geo_ok);
                flam.push_back(ci.score);
                break;
            }
            case ConstraintKind::incompatible_separation: {
                ci.measured_d = centroid_distance(ci.subject_a, ci.subject_b);
                ci.score = satisfaction_distance(ci.measured_d, ci.d_min, ci.d_low,
                                                 ci.geo_ok);
                incomp.push_back(ci.score);
                break;
            }
            case ConstraintKind::reagent_storage: {
                const PlacedObject* obj = layout.find(ci.subject_a);
                bool inside = false;
                if (!obj->on_floor()) {
                    const PlacedObject* parent = layout.find(obj->initial_location);
                    if (parent != nullptr) {
                        const AssetRecord* prec = base.get(parent->asset_id);
                        inside = prec != nullptr && is_storage_surface(*prec, cfg);
                    }
                }
                ci.score = (ci.geo_ok && inside) ? 1.0 : 0.0;
                store.push_back(ci.score);
                break;
            }
            case ConstraintKind::glass_edge: {
                const PlacedObject* obj = layout.find(ci.subject_a);
                const PlacedObject* parent = layout.find(obj->initial_location);
                const AssetRecord* orec = base.get(obj->asset_id);
                const AssetRecord* prec = base.get(parent->asset_id);
                ci.measured_d = edge_distance(*obj, *orec, *parent, *prec);
                double d_safe = ci.d_min > 0.0 ? ci.d_min : cfg.d_safe_glass;
                ci.score = ci.geo_ok ? satisfaction_glass(ci.measured_d, d_safe) : 0.0;
                glass.push_back(ci.score);
                break;
            }
        }
    }

    double sum = 0.0;
    int defined = 0;
    auto fill = [&](std::optional<double>& slot, const std::vector<double>& xs,
                    bool worst3) {
        if (xs.empty()) return;
        double v;
        if (worst3) {
            v = worst_k_average(xs, 3);
        } else {
            v = 0.0;
            for (double x : xs) v += x;
            v /= static_cast<double>(xs.size());
        }
        slot = v;
        sum += v;
        ++defined;
    };
    fill(report.flam, flam, true);
    fill(report.store, store, false);
    fill(report.incomp, incomp, true);
    fill(report.glass, glass, false);
    report.f_chem = defined > 0 ? sum / defined : 1.0;
    return report;
}

}  // namespace labscene
