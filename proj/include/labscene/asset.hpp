#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labscene/issue.hpp"

namespace labscene {

// Canonical axis-aligned bounding box in meters. short_side <= long_side is
// enforced at load (violations are swapped and reported as a warning Issue).
struct BoundingBox {
    double short_side = 0.0;
    double long_side = 0.0;
    double height = 0.0;
};

struct SafetyAttributes {
    bool flammable = false;
    bool explosive = false;
    bool volatile_or_toxic = false;
    bool glass_container = false;
    bool heat_source = false;
    bool acid = false;
    bool base = false;
    bool oxidizer = false;
    bool reactive_metal = false;
};

enum class AssetType { instrument, reagent, room_asset };

std::string to_string(AssetType t);
AssetType asset_type_from_string(std::string_view s);

// One annotated laboratory entity: canonical geometry, semantic tuple and
// the nine boolean safety attributes.
struct AssetRecord {
    std::string asset_id;
    AssetType asset_type = AssetType::instrument;
    std::string category;
    std::string subtype;
    std::vector<std::string> synonyms;
    std::string description;
    BoundingBox bbox;
    double scale_factor = 1.0;
    std::array<double, 3> front_direction{0.0, 1.0, 0.0};
    std::string coordinate_system = "z_up";
    std::string usd_path;
    SafetyAttributes safety;
    bool provides_surface = false;
    // Unknown JSON keys, carried through save so external tooling metadata
    // survives a round-trip.
    std::map<std::string, std::string> extra_json;
};

// Lowercase, trimmed, internal whitespace collapsed to single spaces.
std::string normalize_name(std::string_view raw);

class AssetBase {
public:
    // Builds the synonym index; throws std::runtime_error on duplicate id or
    // synonym collision, naming the offending asset ids.
    void insert(AssetRecord rec);

    const std::map<std::string, AssetRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    // Lookup by exact asset_id. Returns nullptr when absent.
    const AssetRecord* get(std::string_view asset_id) const;

    // Normalized lookup over ids and synonyms. Returns nullptr when absent;
    // never fuzzy-matches.
    const AssetRecord* find(std::string_view name) const;

    // Throwing variant of find; the error names the query.
    const AssetRecord& resolve(std::string_view name) const;

private:
    std::map<std::string, AssetRecord> records_;
    std::unordered_map<std::string, std::string> synonym_index_;
};

struct AssetLoadResult {
    AssetBase base;
    std::vector<Issue> warnings;  // e.g. swapped bbox sides
};

AssetLoadResult load_asset_base(const std::filesystem::path& path);
AssetLoadResult asset_base_from_json(const nlohmann::json& doc);
nlohmann::ordered_json asset_base_to_json(const AssetBase& base);
void save_asset_base(const AssetBase& base, const std::filesystem::path& path);

// Empty list iff every AssetRecord invariant holds.
std::vector<Issue> validate_asset_record(const AssetRecord& rec);

// Default rule for the provides_surface annotation when the field is absent:
// room assets of category furniture/safety_equipment at least 0.5 m tall.
bool default_provides_surface(const AssetRecord& rec);

}  // namespace labscene
