#include "labscene/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jsonfmt.hpp"

namespace labscene {

using nlohmann::json;

std::string to_string(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::flammable_heat_separation: return "flammable_heat_separation";
        case ConstraintKind::reagent_storage: return "reagent_storage";
        case ConstraintKind::incompatible_separation: return "incompatible_separation";
        case ConstraintKind::glass_edge: return "glass_edge";
    }
    return "flammable_heat_separation";
}

ConstraintKind constraint_kind_from_string(std::string_view s) {
    if (s == "flammable_heat_separation") return ConstraintKind::flammable_heat_separation;
    if (s == "reagent_storage") return ConstraintKind::reagent_storage;
    if (s == "incompatible_separation") return ConstraintKind::incompatible_separation;
    if (s == "glass_edge") return ConstraintKind::glass_edge;
    throw std::runtime_error("unknown constraint kind: " + std::string(s));
}

Protocol protocol_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("protocol parse error: ") + e.what());
    }
    Protocol p;
    p.protocol_id = doc.at("protocol_id").get<std::string>();
    p.name = doc.value("name", "");
    p.reagents = doc.at("reagents").get<std::vector<std::string>>();
    p.instruments = doc.at("instruments").get<std::vector<std::string>>();

    int auto_index = 1;
    for (const json& js : doc.at("steps")) {
        ProtocolStep s;
        s.index = js.value("index", auto_index);
        s.description = js.value("description", "");
        if (!js.contains("location")) {
            throw std::runtime_error("steps[" + std::to_string(auto_index - 1) +
                                     "].location missing");
        }
        s.location = js.at("location").get<std::string>();
        if (js.contains("assets_used")) {
            s.assets_used = js.at("assets_used").get<std::vector<std::string>>();
        }
        p.steps.push_back(std::move(s));
        ++auto_index;
    }
    if (p.steps.empty()) throw std::runtime_error("protocol has no steps");
    if (p.reagents.empty()) throw std::runtime_error("protocol has no reagents");
    if (p.instruments.empty()) throw std::runtime_error("protocol has no instruments");

    if (doc.contains("moves")) {
        int mi = 0;
        for (const json& jm : doc.at("moves")) {
            MoveAction m{jm.at("from_step").get<int>(), jm.at("to_step").get<int>()};
            if (m.from_step >= m.to_step) {
                throw std::runtime_error("moves[" + std::to_string(mi) +
                                         "]: from_step must precede to_step");
            }
            auto exists = [&](int idx) {
                return std::any_of(p.steps.begin(), p.steps.end(),
                                   [&](const ProtocolStep& s) { return s.index == idx; });
            };
            if (!exists(m.from_step) || !exists(m.to_step)) {
                throw std::runtime_error("moves[" + std::to_string(mi) +
                                         "]: references a nonexistent step");
            }
            p.moves.push_back(m);
            ++mi;
        }
    }
    if (doc.contains("constraints")) {
        for (const json& jc : doc.at("constraints")) {
            ChemicalConstraintSpec c;
            c.kind = constraint_kind_from_string(jc.at("kind").get<std::string>());
            c.subjects = jc.at("subjects").get<std::vector<std::string>>();
            c.min_distance = jc.value("min_distance", 0.0);
            bool distance_kind = c.kind == ConstraintKind::flammable_heat_separation ||
                                 c.kind == ConstraintKind::incompatible_separation;
            if (distance_kind && !(c.min_distance > 0.0)) {
                throw std::runtime_error("constraint of kind " + to_string(c.kind) +
                                         ": min_distance must be positive");
            }
            p.constraints.push_back(std::move(c));
        }
    }

    std::set<std::string> uniq(p.reagents.begin(), p.reagents.end());
    if (uniq.size() != p.reagents.size()) throw std::runtime_error("duplicate reagent ids");
    uniq.clear();
    uniq.insert(p.instruments.begin(), p.instruments.end());
    if (uniq.size() != p.instruments.size()) throw std::runtime_error("duplicate instrument ids");
    return p;
}

Protocol load_protocol(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open protocol: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return protocol_from_json_text(ss.str());
}

std::string protocol_to_json_text(const Protocol& p) {
    namespace jf = jsonfmt;
    std::ostringstream os;
    auto str_list = [&](const std::vector<std::string>& v) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            out += (i ? ", " : "") + jf::str(v[i]);
        }
        return out + "]";
    };
    os << "{\n";
    os << "  \"protocol_id\": " << jf::str(p.protocol_id) << ",\n";
    os << "  \"name\": " << jf::str(p.name) << ",\n";
    os << "  \"reagents\": " << str_list(p.reagents) << ",\n";
    os << "  \"instruments\": " << str_list(p.instruments) << ",\n";
    os << "  \"steps\": [";
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        const ProtocolStep& s = p.steps[i];
        os << (i == 0 ? "\n" : ",\n");
        os << "    {\"index\": " << s.index << ", \"description\": "
           << jf::str(s.description) << ", \"location\": " << jf::str(s.location)
           << ", \"assets_used\": " << str_list(s.assets_used) << "}";
    }
    os << (p.steps.empty() ? "]" : "\n  ]") << ",\n";
    os << "  \"moves\": [";
    for (std::size_t i = 0; i < p.moves.size(); ++i) {
        os << (i ? ", " : "") << "{\"from_step\": " << p.moves[i].from_step
           << ", \"to_step\": " << p.moves[i].to_step << "}";
    }
    os << "],\n";
    os << "  \"constraints\": [";
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const ChemicalConstraintSpec& c = p.constraints[i];
        os << (i == 0 ? "\n" : ",\n");
        os << "    {\"kind\": " << jf::str(to_string(c.kind))
           << ", \"subjects\": " << str_list(c.subjects)
           << ", \"min_distance\": " << jf::num(c.min_distance) << "}";
    }
    os << (p.constraints.empty() ? "]" : "\n  ]") << "\n}\n";
    return os.str();
}

void save_protocol(const Protocol& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write protocol: " + path.string());
    out << protocol_to_json_text(p);
}

namespace {

bool is_preparation_step(const ProtocolStep& s) {
    std::string d = normalize_name(s.description);
    return d.find("prepar") != std::string::npos;
}

}  // namespace

std::vector<Issue> validate_protocol(const Protocol& p, const AssetBase& base,
                                     const ProtocolValidationOptions& opts) {
    std::vector<Issue> issues;
    auto bad = [&](std::string field, std::string rule, std::string msg) {
        issues.push_back({std::move(field), std::move(rule), std::move(msg), false});
    };

    auto check_resolvable = [&](const std::string& name, const std::string& field) {
        if (base.find(name) == nullptr) {
            bad(field, "unresolvable_asset", "\"" + name + "\" not in asset base");
        }
    };
    for (std::size_t i = 0; i < p.reagents.size(); ++i) {
        check_resolvable(p.reagents[i], "reagents[" + std::to_string(i) + "]");
    }
    for (std::size_t i = 0; i < p.instruments.size(); ++i) {
        check_resolvable(p.instruments[i], "instruments[" + std::to_string(i) + "]");
    }

    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        const ProtocolStep& s = p.steps[i];
        std::string prefix = "steps[" + std::to_string(i) + "]";
        if (s.location.empty()) {
            bad(prefix + ".location", "schema_complete", "location is empty");
        }
        if (s.description.empty()) {
            bad(prefix + ".description", "schema_complete", "description is empty");
        }
        for (std::size_t k = 0; k < s.assets_used.size(); ++k) {
            check_resolvable(s.assets_used[k],
                             prefix + ".assets_used[" + std::to_string(k) + "]");
        }
        if (!s.location.empty()) {
            std::string want = normalize_name(s.location);
            bool legal = std::any_of(
                opts.location_classes.begin(), opts.location_classes.end(),
                [&](const std::string& cls) { return normalize_name(cls) == want; });
            if (!legal) {
                // A location may also name a surface-providing or room asset.
                const AssetRecord* rec = base.find(s.location);
                legal = rec != nullptr && (rec->provides_surface ||
                                           rec->asset_type == AssetType::room_asset);
            }
            if (!legal) {
                bad(prefix + ".location", "illegal_location",
                    "\"" + s.location + "\" is not a legal operation location");
            }
        }
    }

    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const ChemicalConstraintSpec& c = p.constraints[i];
        for (std::size_t k = 0; k < c.subjects.size(); ++k) {
            check_resolvable(c.subjects[k], "constraints[" + std::to_string(i) +
                                                "].subjects[" + std::to_string(k) + "]");
        }
    }

    bool any_prep = std::any_of(p.steps.begin(), p.steps.end(), is_preparation_step);
    if (any_prep && !p.steps.empty() && !is_preparation_step(p.steps.front())) {
        bad("steps[0]", "preparation_first",
            "a preparation step exists but is not the first step");
    }
    return issues;
}

namespace {

StatRow stat_row(const std::vector<double>& xs) {
    StatRow r;
    r.min = xs[0];
    r.max = xs[0];
    double sum = 0.0;
    for (double x : xs) {
        r.min = std::min(r.min, x);
        r.max = std::max(r.max, x);
        sum += x;
    }
    r.mean = sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double acc = 0.0;
        for (double x : xs) acc += (x - r.mean) * (x - r.mean);
        r.std_dev = std::sqrt(acc / static_cast<double>(xs.size()));
    }
    return r;
}

}  // namespace

ProtocolStats protocol_stats(const std::vector<Protocol>& corpus) {
    if (corpus.empty()) throw std::runtime_error("protocol_stats: empty corpus");
    std::vector<double> r, i, s, m;
    for (const Protocol& p : corpus) {
        r.push_back(static_cast<double>(p.reagents.size()));
        i.push_back(static_cast<double>(p.instruments.size()));
        s.push_back(static_cast<double>(p.steps.size()));
        m.push_back(static_cast<double>(p.moves.size()));
    }
    return {stat_row(r), stat_row(i), stat_row(s), stat_row(m)};
}

namespace {

std::string round2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string int_or_round2(double v) {
    if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    return round2(v);
}

}  // namespace

std::string stats_table(const ProtocolStats& st) {
    std::ostringstream os;
    os << "Count type   Mean   Min  Max  Std\n";
    auto row = [&](const char* name, const StatRow& r) {
        os << name << "  " << round2(r.mean) << "  " << int_or_round2(r.min) << "  "
           << int_or_round2(r.max) << "  " << round2(r.std_dev) << "\n";
    };
    row("Reagents   ", st.reagents);
    row("Instruments", st.instruments);
    row("Steps      ", st.steps);
    row("Moves      ", st.moves);
    return os.str();
}

std::string stats_to_json_text(const ProtocolStats& st) {
    namespace jf = jsonfmt;
    std::ostringstream os;
    auto row = [&](const char* name, const StatRow& r, bool last) {
        os << "  \"" << name << "\": {\"mean\": " << jf::num(r.mean)
           << ", \"min\": " << jf::num(r.min) << ", \"max\": " << jf::num(r.max)
           << ", \"std\": " << jf::num(r.std_dev) << "}" << (last ? "\n" : ",\n");
    };
    os << "{\n";
    row("reagents", st.reagents, false);
    row("instruments", st.instruments, false);
    row("steps", st.steps, false);
    row("moves", st.moves, true);
    os << "}\n";
    return os.str();
}

}  // namespace labscene
