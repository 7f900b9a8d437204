#include "labscene/asset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace labscene {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_issues(const std::vector<Issue>& issues) {
    std::ostringstream os;
    for (const Issue& is : issues) {
        os << (is.warning ? "warning" : "error") << " [" << is.rule << "] "
           << is.field << ": " << is.message << "\n";
    }
    return os.str();
}

std::string to_string(AssetType t) {
    switch (t) {
        case AssetType::instrument: return "instrument";
        case AssetType::reagent: return "reagent";
        case AssetType::room_asset: return "room_asset";
    }
    return "instrument";
}

AssetType asset_type_from_string(std::string_view s) {
    if (s == "instrument") return AssetType::instrument;
    if (s == "reagent") return AssetType::reagent;
    if (s == "room_asset") return AssetType::room_asset;
    throw std::runtime_error("unknown asset_type: " + std::string(s));
}

std::string normalize_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char ch : raw) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

void AssetBase::insert(AssetRecord rec) {
    if (records_.count(rec.asset_id) > 0) {
        throw std::runtime_error("duplicate asset_id: " + rec.asset_id);
    }
    auto index = [&](const std::string& name) {
        std::string key = normalize_name(name);
        if (key.empty()) return;
        auto it = synonym_index_.find(key);
        if (it != synonym_index_.end() && it->second != rec.asset_id) {
            throw std::runtime_error("synonym collision on \"" + key + "\" between " +
                                     it->second + " and " + rec.asset_id);
        }
        synonym_index_.emplace(key, rec.asset_id);
    };
    index(rec.asset_id);
    for (const std::string& s : rec.synonyms) index(s);
    records_.emplace(rec.asset_id, std::move(rec));
}

const AssetRecord* AssetBase::get(std::string_view asset_id) const {
    auto it = records_.find(std::string(asset_id));
    return it == records_.end() ? nullptr : &it->second;
}

const AssetRecord* AssetBase::find(std::string_view name) const {
    auto it = synonym_index_.find(normalize_name(name));
    if (it == synonym_index_.end()) return nullptr;
    return get(it->second);
}

const AssetRecord& AssetBase::resolve(std::string_view name) const {
    const AssetRecord* rec = find(name);
    if (rec == nullptr) {
        throw std::runtime_error("asset not found: \"" + std::string(name) + "\"");
    }
    return *rec;
}

bool default_provides_surface(const AssetRecord& rec) {
    return rec.asset_type == AssetType::room_asset &&
           (rec.category == "furniture" || rec.category == "safety_equipment") &&
           rec.bbox.height >= 0.5;
}

std::vector<Issue> validate_asset_record(const AssetRecord& rec) {
    std::vector<Issue> issues;
    auto bad = [&](std::string field, std::string rule, std::string msg) {
        issues.push_back({std::move(field), std::move(rule), std::move(msg), false});
    };
    if (rec.asset_id.empty()) bad("asset_id", "nonempty", "asset_id is empty");
    if (!(rec.bbox.short_side > 0.0))
        bad("bbox.short_side", "positive", "must be strictly positive");
    if (!(rec.bbox.long_side > 0.0))
        bad("bbox.long_side", "positive", "must be strictly positive");
    if (!(rec.bbox.height > 0.0))
        bad("bbox.height", "positive", "must be strictly positive");
    if (rec.bbox.short_side > rec.bbox.long_side)
        bad("bbox", "short_le_long", "short_side exceeds long_side");
    if (rec.front_direction != std::array<double, 3>{0.0, 1.0, 0.0})
        bad("front_direction", "canonical_front",
            "must be (0,1,0) after canonicalization");
    if (rec.coordinate_system != "z_up")
        bad("coordinate_system", "z_up", "must be the token \"z_up\"");
    if (!(rec.scale_factor > 0.0))
        bad("scale_factor", "positive", "must be strictly positive");
    return issues;
}

namespace {

SafetyAttributes safety_from_json(const json& j) {
    SafetyAttributes s;
    auto flag = [&](const char* key, bool& out) {
        if (j.contains(key)) out = j.at(key).get<bool>();
    };
    flag("flammable", s.flammable);
    flag("explosive", s.explosive);
    flag("volatile_or_toxic", s.volatile_or_toxic);
    flag("glass_container", s.glass_container);
    flag("heat_source", s.heat_source);
    flag("acid", s.acid);
    flag("base", s.base);
    flag("oxidizer", s.oxidizer);
    flag("reactive_metal", s.reactive_metal);
    return s;
}

ordered_json safety_to_json(const SafetyAttributes& s) {
    ordered_json j;
    j["flammable"] = s.flammable;
    j["explosive"] = s.explosive;
    j["volatile_or_toxic"] = s.volatile_or_toxic;
    j["glass_container"] = s.glass_container;
    j["heat_source"] = s.heat_source;
    j["acid"] = s.acid;
    j["base"] = s.base;
    j["oxidizer"] = s.oxidizer;
    j["reactive_metal"] = s.reactive_metal;
    return j;
}

const char* kKnownKeys[] = {
    "asset_id", "asset_type", "category",    "subtype",
    "synonyms", "description", "bbox",        "scale_factor",
    "front_direction", "coordinate_system", "usd_path", "safety",
    "provides_surface"};

AssetRecord record_from_json(const json& j, std::vector<Issue>& warnings) {
    AssetRecord rec;
    rec.asset_id = j.at("asset_id").get<std::string>();
    rec.asset_type = asset_type_from_string(j.at("asset_type").get<std::string>());
    rec.category = j.value("category", "");
    rec.subtype = j.value("subtype", "");
    if (j.contains("synonyms")) rec.synonyms = j.at("synonyms").get<std::vector<std::string>>();
    rec.description = j.value("description", "");

    const json& bb = j.at("bbox");
    rec.bbox.short_side = bb.at("short_side").get<double>();
    rec.bbox.long_side = bb.at("long_side").get<double>();
    rec.bbox.height = bb.at("height").get<double>();
    if (rec.bbox.short_side > rec.bbox.long_side) {
        std::swap(rec.bbox.short_side, rec.bbox.long_side);
        warnings.push_back({"bbox", "short_le_long",
                            rec.asset_id + ": swapped short/long to restore ordering",
                            true});
    }

    rec.scale_factor = j.value("scale_factor", 1.0);
    if (j.contains("front_direction")) {
        auto fd = j.at("front_direction").get<std::vector<double>>();
        if (fd.size() != 3) throw std::runtime_error(rec.asset_id + ": front_direction must have 3 entries");
        rec.front_direction = {fd[0], fd[1], fd[2]};
    }
    rec.coordinate_system = j.value("coordinate_system", "z_up");
    rec.usd_path = j.value("usd_path", "");
    if (j.contains("safety")) rec.safety = safety_from_json(j.at("safety"));
    if (j.contains("provides_surface")) {
        rec.provides_surface = j.at("provides_surface").get<bool>();
    } else {
        rec.provides_surface = default_provides_surface(rec);
    }

    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : kKnownKeys) {
            if (it.key() == k) { known = true; break; }
        }
        if (!known) rec.extra_json[it.key()] = it.value().dump();
    }

    std::vector<Issue> issues = validate_asset_record(rec);
    if (!issues.empty()) {
        throw std::runtime_error("invalid asset record " + rec.asset_id + ":\n" +
                                 format_issues(issues));
    }
    return rec;
}

}  // namespace

AssetLoadResult asset_base_from_json(const json& doc) {
    AssetLoadResult out;
    const json* arr = &doc;
    if (doc.is_object() && doc.contains("assets")) arr = &doc.at("assets");
    if (!arr->is_array()) {
        throw std::runtime_error("asset base must be a JSON array (or {\"assets\": [...]})");
    }
    for (const json& rec : *arr) {
        out.base.insert(record_from_json(rec, out.warnings));
    }
    return out;
}

AssetLoadResult load_asset_base(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open asset base: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("asset base parse error in " + path.string() + ": " +
                                 e.what());
    }
    return asset_base_from_json(doc);
}

nlohmann::ordered_json asset_base_to_json(const AssetBase& base) {
    ordered_json arr = ordered_json::array();
    for (const auto& [id, rec] : base.records()) {
        ordered_json j;
        j["asset_id"] = rec.asset_id;
        j["asset_type"] = to_string(rec.asset_type);
        j["category"] = rec.category;
        j["subtype"] = rec.subtype;
        j["synonyms"] = rec.synonyms;
        j["description"] = rec.description;
        j["bbox"] = {{"short_side", rec.bbox.short_side},
                     {"long_side", rec.bbox.long_side},
                     {"height", rec.bbox.height}};
        j["scale_factor"] = rec.scale_factor;
        j["front_direction"] = rec.front_direction;
        j["coordinate_system"] = rec.coordinate_system;
        j["usd_path"] = rec.usd_path;
        j["safety"] = safety_to_json(rec.safety);
        j["provides_surface"] = rec.provides_surface;
        for (const auto& [key, dumped] : rec.extra_json) {
            j[key] = ordered_json::parse(dumped);
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

void save_asset_base(const AssetBase& base, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write asset base: " + path.string());
    out << asset_base_to_json(base).dump(2) << "\n";
}

}  // namespace labscene
