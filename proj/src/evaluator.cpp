#include "labscene/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "jsonfmt.hpp"

namespace labscene {

using nlohmann::json;

GeometryMetrics geometry_metrics(const Layout& layout, const AssetBase& base) {
    GeometryMetrics m;
    m.obj = static_cast<int>(layout.objects.size());
    for (const PlacedObject& o : layout.objects) {
        if (base.get(o.asset_id) == nullptr) continue;
        try {
            if (out_of_bounds_for(layout, base, o)) ++m.ob;
        } catch (const std::runtime_error&) {
            ++m.ob;
        }
    }
    m.cn = static_cast<int>(pairwise_collisions(layout, base).size());
    return m;
}

bool asset_availability(const Layout& layout, const Protocol& protocol,
                        const AssetBase& base) {
    auto placed = [&](const std::string& name) {
        const AssetRecord* rec = base.find(name);
        if (rec == nullptr) return false;
        return layout.find_by_asset(rec->asset_id) != nullptr;
    };
    for (const std::string& r : protocol.reagents) {
        if (!placed(r)) return false;
    }
    for (const std::string& i : protocol.instruments) {
        if (!placed(i)) return false;
    }
    return true;
}

FsrResult fsr(const std::vector<SceneInput>& scenes, const AssetBase& base,
              const NavConfig& nav) {
    if (scenes.empty()) throw std::runtime_error("fsr: empty scene list");
    FsrResult out;
    int ok_transitions = 0, all_transitions = 0, full_scenes = 0;
    for (const SceneInput& sc : scenes) {
        if (asset_availability(*sc.layout, *sc.protocol, base)) out.asset += 1.0;
        ReachReport rep = f_reach(*sc.layout, *sc.protocol, base, nav);
        all_transitions += static_cast<int>(rep.outcomes.size());
        for (const NavOutcome& o : rep.outcomes) {
            if (o.status == NavStatus::ok) ++ok_transitions;
        }
        if (rep.reach == 1) ++full_scenes;
    }
    out.asset /= static_cast<double>(scenes.size());
    out.step_nav = all_transitions > 0
                       ? static_cast<double>(ok_transitions) / all_transitions
                       : 1.0;
    out.protocol_nav = static_cast<double>(full_scenes) / scenes.size();
    return out;
}

double weighted_chem(const std::vector<int>& g, const std::vector<double>& s) {
    if (g.size() != s.size()) throw std::runtime_error("weighted_chem: size mismatch");
    if (g.empty()) throw std::runtime_error("weighted_chem: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        sum += (g[i] != 0 ? 1.0 : 0.0) * s[i];
    }
    return sum / static_cast<double>(g.size());
}

ScoreComposition compose_scores(double f_geo, double f_chem, double semantic_total) {
    ScoreComposition c;
    c.s_phys = std::clamp(35.0 * f_geo, 0.0, 35.0);
    c.s_chem = std::clamp(35.0 * f_chem, 0.0, 35.0);
    c.s_consist = std::clamp(semantic_total, 0.0, 30.0);
    c.overall = c.s_phys + c.s_chem + c.s_consist;
    return c;
}

NavBench nav_benchmark(const std::vector<EpisodeResult>& episodes) {
    if (episodes.empty()) throw std::runtime_error("nav_benchmark: empty episode list");
    NavBench b;
    for (const EpisodeResult& e : episodes) {
        if (!e.success) continue;
        b.sr += 1.0;
        b.spl += e.shortest_length / std::max(e.agent_length, e.shortest_length);
    }
    b.sr /= static_cast<double>(episodes.size());
    b.spl /= static_cast<double>(episodes.size());
    return b;
}

std::string to_string(SemanticMode m) {
    switch (m) {
        case SemanticMode::strict: return "strict";
        case SemanticMode::medium: return "medium";
        case SemanticMode::lenient: return "lenient";
    }
    return "medium";
}

SemanticMode semantic_mode_from_string(std::string_view s) {
    if (s == "strict") return SemanticMode::strict;
    if (s == "medium") return SemanticMode::medium;
    if (s == "lenient") return SemanticMode::lenient;
    throw std::runtime_error("unknown semantic mode: " + std::string(s));
}

namespace {

int clamp_score(int v, std::vector<std::string>& reasons, const char* name) {
    if (v < 0 || v > 10) {
        reasons.push_back(std::string("warning: ") + name + " score " +
                          std::to_string(v) + " clamped to [0,10]");
        return std::clamp(v, 0, 10);
    }
    return v;
}

}  // namespace

SemanticScore StubSemanticScorer::score(const Layout& layout, const Protocol* protocol,
                                        SemanticMode mode) {
    (void)protocol;
    (void)mode;
    SemanticScore s;
    s.realism = clamp_score(realism_, s.reasons, "realism");
    s.layout = clamp_score(layout_, s.reasons, "layout");
    s.completion = clamp_score(completion_, s.reasons, "completion");
    if (empty_scene_rule_) {
        // Hard rule: a nearly empty scene zeroes completion.
        bool any_desktop = std::any_of(layout.objects.begin(), layout.objects.end(),
                                       [](const PlacedObject& o) { return !o.on_floor(); });
        if (!any_desktop) {
            s.completion = 0;
            s.reasons.push_back("hard rule: workbenches empty, completion forced to 0");
        }
    }
    s.total = s.realism + s.layout + s.completion;
    return s;
}

namespace {

struct ParsedUrl {
    std::string host;
    std::string path;
};

ParsedUrl scorer_split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

SemanticScore RemoteSemanticScorer::score(const Layout& layout,
                                          const Protocol* protocol,
                                          SemanticMode mode) {
    SemanticScore out;
    ParsedUrl url = scorer_split_url(endpoint_.url);
    httplib::Client client(url.host);
    client.set_connection_timeout(endpoint_.timeout_s, 0);
    client.set_read_timeout(endpoint_.timeout_s, 0);
    httplib::Headers headers;
    if (!endpoint_.auth_env.empty()) {
        if (const char* token = std::getenv(endpoint_.auth_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    json body;
    body["mode"] = to_string(mode);
    body["layout"] = json::parse(layout_to_json_text(layout));
    if (protocol != nullptr) {
        body["protocol_id"] = protocol->protocol_id;
        body["protocol_name"] = protocol->name;
    }
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        httplib::Result res =
            client.Post(url.path, headers, body.dump(), "application/json");
        if (!res || res->status != 200) continue;
        try {
            json doc = json::parse(res->body);
            auto dim = [&](const char* key, int& slot) {
                const json& d = doc.at(key);
                slot = clamp_score(d.at("score").get<int>(), out.reasons, key);
                if (d.contains("reason")) {
                    out.reasons.push_back(std::string(key) + ": " +
                                          d.at("reason").get<std::string>());
                }
            };
            dim("realism", out.realism);
            dim("layout", out.layout);
            dim("completion", out.completion);
            out.total = out.realism + out.layout + out.completion;
            return out;
        } catch (const json::exception&) {
            break;  // malformed reply; do not retry
        }
    }
    out.available = false;
    out.reasons.push_back("semantic scorer unavailable");
    return out;
}

EvaluationReport evaluate_scene(const Layout& layout, const Protocol& protocol,
                                const AssetBase& base, const EvalConfig& cfg,
                                SemanticScorer& scorer) {
    EvaluationReport rep;
    rep.geometry = geometry_metrics(layout, base);
    rep.chemistry = chem_report(layout, protocol, base, cfg.safety);

    bool available = asset_availability(layout, protocol, base);
    rep.fsr_asset = available ? 1.0 : 0.0;
    ReachReport reach = f_reach(layout, protocol, base, cfg.nav);
    int ok = 0;
    for (const NavOutcome& o : reach.outcomes) {
        if (o.status == NavStatus::ok) ++ok;
    }
    rep.fsr_step_nav = reach.outcomes.empty()
                           ? 1.0
                           : static_cast<double>(ok) / reach.outcomes.size();
    rep.fsr_protocol_nav = reach.reach;

    rep.semantic = scorer.score(layout, &protocol, cfg.mode);

    double f_geo = geo_score(layout, base);
    double f_chem_gated = available ? rep.chemistry.f_chem : 0.0;
    ScoreComposition comp = compose_scores(
        f_geo, f_chem_gated, rep.semantic.available ? rep.semantic.total : 0.0);
    rep.s_phys = comp.s_phys;
    rep.s_chem = comp.s_chem;
    rep.s_consist = rep.semantic.available ? comp.s_consist : 0.0;
    rep.overall = rep.s_phys + rep.s_chem + rep.s_consist;

    // Violation list with quantitative diagnostics plus blunt suggestions.
    for (const PlacedObject& o : layout.objects) {
        if (base.get(o.asset_id) == nullptr) continue;
        std::optional<Vec2> corr;
        try {
            corr = out_of_bounds_for(layout, base, o);
        } catch (const std::runtime_error&) {
            corr = Vec2{0.0, 0.0};
        }
        if (corr) {
            ViolationRecord v;
            v.kind = "boundary";
            v.subject_a = o.instance_id;
            v.magnitude = corr->norm();
            std::ostringstream d;
            d << "correction (" << jsonfmt::num(corr->x) << ", "
              << jsonfmt::num(corr->y) << ")";
            v.detail = d.str();
            rep.violations.push_back(std::move(v));
            rep.suggestions.push_back("move " + o.instance_id +
                                      " back inside its bounds");
        }
    }
    for (const CollisionEntry& ce : pairwise_collisions(layout, base)) {
        ViolationRecord v;
        v.kind = "collision";
        v.subject_a = ce.id_a;
        v.subject_b = ce.id_b;
        v.magnitude = ce.pen.depth;
        std::ostringstream d;
        d << "overlap depth " << jsonfmt::num(ce.pen.depth);
        v.detail = d.str();
        rep.violations.push_back(std::move(v));
        rep.suggestions.push_back("separate " + ce.id_a + " and " + ce.id_b);
    }
    for (const ConstraintInstance& ci : rep.chemistry.instances) {
        if (ci.score >= 1.0) continue;
        ViolationRecord v;
        v.kind = "chemistry";
        v.subject_a = ci.subject_a;
        v.subject_b = ci.subject_b;
        v.magnitude = ci.score;
        std::ostringstream d;
        d << to_string(ci.kind) << " score " << jsonfmt::num(ci.score) << " (d="
          << jsonfmt::num(ci.measured_d) << ")";
        v.detail = d.str();
        rep.violations.push_back(std::move(v));
        switch (ci.kind) {
            case ConstraintKind::flammable_heat_separation:
            case ConstraintKind::incompatible_separation:
                rep.suggestions.push_back("increase separation between " +
                                          ci.subject_a + " and " + ci.subject_b);
                break;
            case ConstraintKind::reagent_storage:
                rep.suggestions.push_back("store " + ci.subject_a + " in a cabinet");
                break;
            case ConstraintKind::glass_edge:
                rep.suggestions.push_back("move " + ci.subject_a +
                                          " away from the tabletop edge");
                break;
        }
    }
    return rep;
}

namespace {

std::string opt_metric(const std::optional<double>& v) {
    return v ? jsonfmt::num(*v) : std::string("null");
}

}  // namespace

std::string report_to_json_text(const EvaluationReport& rep) {
    namespace jf = jsonfmt;
    std::ostringstream os;
    os << "{\n";
    os << "  \"overall\": " << jf::num(rep.overall) << ",\n";
    os << "  \"s_phys\": " << jf::num(rep.s_phys) << ",\n";
    os << "  \"s_chem\": " << jf::num(rep.s_chem) << ",\n";
    os << "  \"s_consist\": " << jf::num(rep.s_consist) << ",\n";
    os << "  \"geometry\": {\"obj_count\": " << rep.geometry.obj
       << ", \"ob\": " << rep.geometry.ob << ", \"cn\": " << rep.geometry.cn << "},\n";
    os << "  \"fsr\": {\"asset_availability\": " << jf::num(rep.fsr_asset)
       << ", \"step_nav\": " << jf::num(rep.fsr_step_nav)
       << ", \"protocol_nav\": " << jf::num(rep.fsr_protocol_nav) << "},\n";
    os << "  \"chemistry\": {\"flam\": " << opt_metric(rep.chemistry.flam)
       << ", \"store\": " << opt_metric(rep.chemistry.store)
       << ", \"incomp\": " << opt_metric(rep.chemistry.incomp)
       << ", \"glass\": " << opt_metric(rep.chemistry.glass)
       << ", \"f_chem\": " << jf::num(rep.chemistry.f_chem) << "},\n";
    os << "  \"semantic\": {\"realism\": " << rep.semantic.realism
       << ", \"layout\": " << rep.semantic.layout
       << ", \"completion\": " << rep.semantic.completion
       << ", \"total\": " << rep.semantic.total
       << ", \"available\": " << (rep.semantic.available ? "true" : "false") << "},\n";
    os << "  \"violations\": [";
    for (std::size_t i = 0; i < rep.violations.size(); ++i) {
        const ViolationRecord& v = rep.violations[i];
        os << (i == 0 ? "\n" : ",\n");
        os << "    {\"kind\": " << jf::str(v.kind) << ", \"subject_a\": "
           << jf::str(v.subject_a) << ", \"subject_b\": " << jf::str(v.subject_b)
           << ", \"magnitude\": " << jf::num(v.magnitude)
           << ", \"detail\": " << jf::str(v.detail) << "}";
    }
    os << (rep.violations.empty() ? "]" : "\n  ]") << ",\n";
    os << "  \"suggestions\": [";
    for (std::size_t i = 0; i < rep.suggestions.size(); ++i) {
        os << (i ? ", " : "") << jf::str(rep.suggestions[i]);
    }
    os << "]\n}\n";
    return os.str();
}

EvaluationReport report_from_json_text(const std::string& text) {
    json doc = json::parse(text);
    EvaluationReport rep;
    rep.overall = doc.at("overall").get<double>();
    rep.s_phys = doc.at("s_phys").get<double>();
    rep.s_chem = doc.at("s_chem").get<double>();
    rep.s_consist = doc.at("s_consist").get<double>();
    const json& g = doc.at("geometry");
    rep.geometry.obj = g.at("obj_count").get<int>();
    rep.geometry.ob = g.at("ob").get<int>();
    rep.geometry.cn = g.at("cn").get<int>();
    const json& f = doc.at("fsr");
    rep.fsr_asset = f.at("asset_availability").get<double>();
    rep.fsr_step_nav = f.at("step_nav").get<double>();
    rep.fsr_protocol_nav = f.at("protocol_nav").get<double>();
    const json& c = doc.at("chemistry");
    auto opt = [](const json& j) -> std::optional<double> {
        if (j.is_null()) return std::nullopt;
        return j.get<double>();
    };
    rep.chemistry.flam = opt(c.at("flam"));
    rep.chemistry.store = opt(c.at("store"));
    rep.chemistry.incomp = opt(c.at("incomp"));
    rep.chemistry.glass = opt(c.at("glass"));
    rep.chemistry.f_chem = c.at("f_chem").get<double>();
    const json& s = doc.at("semantic");
    rep.semantic.realism = s.at("realism").get<int>();
    rep.semantic.layout = s.at("layout").get<int>();
    rep.semantic.completion = s.at("completion").get<int>();
    rep.semantic.total = s.at("total").get<int>();
    rep.semantic.available = s.at("available").get<bool>();
    for (const json& jv : doc.at("violations")) {
        ViolationRecord v;
        v.kind = jv.at("kind").get<std::string>();
        v.subject_a = jv.at("subject_a").get<std::string>();
        v.subject_b = jv.at("subject_b").get<std::string>();
        v.magnitude = jv.at("magnitude").get<double>();
        v.detail = jv.at("detail").get<std::string>();
        rep.violations.push_back(std::move(v));
    }
    for (const json& js : doc.at("suggestions")) {
        rep.suggestions.push_back(js.get<std::string>());
    }
    return rep;
}

std::string reports_to_csv(const std::vector<EvaluationReport>& reports) {
    std::ostringstream os;
    os << "Obj,OB,CN,Asset,StepNav,ProtNav,Flam,Store,Incomp,Glass,Real,Lay,Comp\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? jsonfmt::num(*v) : std::string("-");
    };
    for (const EvaluationReport& r : reports) {
        os << r.geometry.obj << "," << r.geometry.ob << "," << r.geometry.cn << ","
           << jsonfmt::num(r.fsr_asset) << "," << jsonfmt::num(r.fsr_step_nav) << ","
           << jsonfmt::num(r.fsr_protocol_nav) << "," << cell(r.chemistry.flam) << ","
           << cell(r.chemistry.store) << "," << cell(r.chemistry.incomp) << ","
           << cell(r.chemistry.glass) << "," << r.semantic.realism << ","
           << r.semantic.layout << "," << r.semantic.completion << "\n";
    }
    return os.str();
}

}  // namespace labscene
