#include "labscene/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace labscene {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad numeric value for " + key + ": " + v);
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer value for " + key + ": " + v);
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

void apply_config_kv(PipelineConfig& cfg, const std::string& key,
                     const std::string& raw_value) {
    const std::string value = unquote(trim(raw_value));
    if (key == "w_geo") cfg.weights.w_geo = to_double(key, value);
    else if (key == "w_chem") cfg.weights.w_chem = to_double(key, value);
    else if (key == "d_min_flammable") cfg.safety.d_min_flammable = to_double(key, value);
    else if (key == "d_min_incompatible") cfg.safety.d_min_incompatible = to_double(key, value);
    else if (key == "d_low_factor") cfg.safety.d_low_factor = to_double(key, value);
    else if (key == "d_safe_glass") cfg.safety.d_safe_glass = to_double(key, value);
    else if (key == "storage_classes") cfg.safety.storage_classes = split_list(value);
    else if (key == "location_classes") cfg.protocol_validation.location_classes = split_list(value);
    else if (key == "grid_resolution") cfg.nav.resolution = to_double(key, value);
    else if (key == "agent_radius") cfg.nav.agent_radius = to_double(key, value);
    else if (key == "offset_radius") cfg.nav.offset_radius = to_double(key, value);
    else if (key == "inflation_mode") {
        if (value == "rounded") cfg.nav.inflation = InflationMode::rounded;
        else if (value == "bbox") cfg.nav.inflation = InflationMode::bbox;
        else throw std::runtime_error("config: inflation_mode must be rounded or bbox");
    }
    else if (key == "repair_max_rounds") cfg.repair.max_rounds = to_int(key, value);
    else if (key == "collision_margin") cfg.repair.margin = to_double(key, value);
    else if (key == "optimizer_room_iters") cfg.optimizer_room_iters = to_int(key, value);
    else if (key == "optimizer_desktop_iters") cfg.optimizer_desktop_iters = to_int(key, value);
    else if (key == "plateau_window") cfg.plateau_window = to_int(key, value);
    else if (key == "refine_max_iters") cfg.refine_max_iters = to_int(key, value);
    else if (key == "refine_epsilon_pp") cfg.refine_epsilon_pp = to_double(key, value);
    else if (key == "refine_stall_limit") cfg.refine_stall_limit = to_int(key, value);
    else if (key == "clearance_margin") cfg.clearance_margin = to_double(key, value);
    else if (key == "facing_threshold_deg") cfg.facing_threshold_deg = to_double(key, value);
    else if (key == "proposer") {
        if (value != "heuristic" && value != "remote") {
            throw std::runtime_error("config: proposer must be heuristic or remote");
        }
        cfg.proposer = value;
    }
    else if (key == "proposer_endpoint") cfg.proposer_endpoint.url = value;
    else if (key == "proposer_timeout_s") cfg.proposer_endpoint.timeout_s = to_int(key, value);
    else if (key == "proposer_max_retries") cfg.proposer_endpoint.max_retries = to_int(key, value);
    else if (key == "proposer_auth_env") cfg.proposer_endpoint.auth_env = value;
    else if (key == "semantic_scorer") {
        if (value != "stub" && value != "remote") {
            throw std::runtime_error("config: semantic_scorer must be stub or remote");
        }
        cfg.semantic_scorer = value;
    }
    else if (key == "scorer_endpoint") cfg.scorer_endpoint.url = value;
    else if (key == "scorer_timeout_s") cfg.scorer_endpoint.timeout_s = to_int(key, value);
    else if (key == "scorer_max_retries") cfg.scorer_endpoint.max_retries = to_int(key, value);
    else if (key == "scorer_auth_env") cfg.scorer_endpoint.auth_env = value;
    else if (key == "stub_realism") cfg.stub_realism = to_int(key, value);
    else if (key == "stub_layout") cfg.stub_layout = to_int(key, value);
    else if (key == "stub_completion") cfg.stub_completion = to_int(key, value);
    else if (key == "semantic_mode") cfg.semantic_mode = semantic_mode_from_string(value);
    else if (key == "room_width") cfg.room_width = to_double(key, value);
    else if (key == "room_depth") cfg.room_depth = to_double(key, value);
    else if (key == "room_height") cfg.room_height = to_double(key, value);
    else if (key == "room_wall_thickness") cfg.room_wall_thickness = to_double(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "jobs") cfg.jobs = to_int(key, value);
    else throw std::runtime_error("config: unknown key \"" + key + "\"");
}

PipelineConfig config_from_text(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;  // cosmetic section
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: line " + std::to_string(lineno) +
                                     " is not key = value");
        }
        apply_config_kv(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    cfg.weights = cfg.weights.normalized();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_text(ss.str());
}

OptimizeConfig make_optimize_config(const PipelineConfig& cfg) {
    OptimizeConfig out;
    out.room_iterations = cfg.optimizer_room_iters;
    out.desktop_iterations = cfg.optimizer_desktop_iters;
    out.plateau_window = cfg.plateau_window;
    out.weights = cfg.weights.normalized();
    out.repair = cfg.repair;
    out.safety = cfg.safety;
    out.seed = cfg.seed;
    return out;
}

RefineConfig make_refine_config(const PipelineConfig& cfg) {
    RefineConfig out;
    out.max_iterations = cfg.refine_max_iters;
    out.epsilon_pp = cfg.refine_epsilon_pp;
    out.stall_limit = cfg.refine_stall_limit;
    out.clearance_margin = cfg.clearance_margin;
    out.facing_threshold_deg = cfg.facing_threshold_deg;
    out.nav = cfg.nav;
    out.repair = cfg.repair;
    return out;
}

EvalConfig make_eval_config(const PipelineConfig& cfg) {
    EvalConfig out;
    out.nav = cfg.nav;
    out.safety = cfg.safety;
    out.mode = cfg.semantic_mode;
    return out;
}

Room make_room(const PipelineConfig& cfg) {
    return {cfg.room_width, cfg.room_depth, cfg.room_height, cfg.room_wall_thickness};
}

}  // namespace labscene
