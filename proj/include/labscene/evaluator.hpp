#pragma once

#include <memory>
#include <string>
#include <vector>

#include "labscene/navigation.hpp"
#include "labscene/optimizer.hpp"
#include "labscene/safety.hpp"

namespace labscene {

struct GeometryMetrics {
    int obj = 0;  // object count
    int ob = 0;   // objects out of bounds at their own level
    int cn = 0;   // colliding same-level pairs
};

GeometryMetrics geometry_metrics(const Layout& layout, const AssetBase& base);

// True when every asset the protocol requires has a placed instance.
bool asset_availability(const Layout& layout, const Protocol& protocol,
                        const AssetBase& base);

struct SceneInput {
    const Layout* layout;
    const Protocol* protocol;
};

struct FsrResult {
    double asset = 0.0;         // mean availability bit over scenes
    double step_nav = 0.0;      // ok transitions / all transitions, pooled
    double protocol_nav = 0.0;  // scenes whose every transition is ok
};

FsrResult fsr(const std::vector<SceneInput>& scenes, const AssetBase& base,
              const NavConfig& nav);

// Asset-availability-weighted mean: (1/N) * sum g_i * s_i.
double weighted_chem(const std::vector<int>& g, const std::vector<double>& s);

struct ScoreComposition {
    double s_phys = 0.0;    // capped at 35
    double s_chem = 0.0;    // capped at 35
    double s_consist = 0.0; // capped at 30
    double overall = 0.0;   // exact sum of the three
};

ScoreComposition compose_scores(double f_geo, double f_chem, double semantic_total);

struct EpisodeResult {
    bool success = false;
    double shortest_length = 0.0;  // l, meters
    double agent_length = 0.0;     // p, meters
};

struct NavBench {
    double sr = 0.0;
    double spl = 0.0;
};

// SR and SPL over an episode set; SPL term is success * l / max(p, l).
NavBench nav_benchmark(const std::vector<EpisodeResult>& episodes);

enum class SemanticMode { strict, medium, lenient };
std::string to_string(SemanticMode m);
SemanticMode semantic_mode_from_string(std::string_view s);

struct SemanticScore {
    int realism = 0;     // 0-10
    int layout = 0;      // 0-10
    int completion = 0;  // 0-10
    int total = 0;
    bool available = true;
    std::vector<std::string> reasons;
};

class SemanticScorer {
public:
    virtual ~SemanticScorer() = default;
    virtual SemanticScore score(const Layout& layout, const Protocol* protocol,
                                SemanticMode mode) = 0;
};

// Deterministic scorer returning configured values; keeps evaluation fully
// offline. Out-of-range inputs are clamped with a warning reason, and the
// hard-constraint zeros are honored when flagged.
class StubSemanticScorer : public SemanticScorer {
public:
    StubSemanticScorer(int realism, int layout, int completion,
                       bool empty_scene_rule = false)
        : realism_(realism), layout_(layout), completion_(completion),
          empty_scene_rule_(empty_scene_rule) {}

    SemanticScore score(const Layout& layout, const Protocol* protocol,
                        SemanticMode mode) override;

private:
    int realism_, layout_, completion_;
    bool empty_scene_rule_;
};

struct SemanticEndpoint {
    std::string url;
    int timeout_s = 60;
    int max_retries = 2;
    std::string auth_env = "LABSCENE_SCORER_TOKEN";
};

// External VLM judge over HTTP. Transport failure marks the result
// unavailable instead of throwing.
class RemoteSemanticScorer : public SemanticScorer {
public:
    explicit RemoteSemanticScorer(SemanticEndpoint endpoint)
        : endpoint_(std::move(endpoint)) {}

    SemanticScore score(const Layout& layout, const Protocol* protocol,
                        SemanticMode mode) override;

private:
    SemanticEndpoint endpoint_;
};

struct ViolationRecord {
    std::string kind;       // boundary | collision | chemistry
    std::string subject_a;
    std::string subject_b;
    double magnitude = 0.0; // correction length, overlap depth, or score
    std::string detail;
};

struct EvaluationReport {
    double overall = 0.0;
    double s_phys = 0.0;
    double s_chem = 0.0;
    double s_consist = 0.0;
    GeometryMetrics geometry;
    double fsr_asset = 0.0;
    double fsr_step_nav = 0.0;
    double fsr_protocol_nav = 0.0;
    ChemReport chemistry;
    SemanticScore semantic;
    std::vector<ViolationRecord> violations;
    std::vector<std::string> suggestions;
};

struct EvalConfig {
    NavConfig nav;
    SafetyConfig safety;
    SemanticMode mode = SemanticMode::medium;
};

EvaluationReport evaluate_scene(const Layout& layout, const Protocol& protocol,
                                const AssetBase& base, const EvalConfig& cfg,
                                SemanticScorer& scorer);

std::string report_to_json_text(const EvaluationReport& report);
EvaluationReport report_from_json_text(const std::string& text);

// One row per report, Table-style columns:
// Obj,OB,CN,Asset,StepNav,ProtNav,Flam,Store,Incomp,Glass,Real,Lay,Comp
std::string reports_to_csv(const std::vector<EvaluationReport>& reports);

}  // namespace labscene
