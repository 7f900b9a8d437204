#include "labscene/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jsonfmt.hpp"

namespace labscene {

std::string to_string(NavStatus s) {
    switch (s) {
        case NavStatus::ok: return "ok";
        case NavStatus::start_blocked: return "start_blocked";
        case NavStatus::end_blocked: return "end_blocked";
        case NavStatus::path_blocked: return "path_blocked";
    }
    return "ok";
}

bool OccupancyGrid::locate(Vec2 p, int& gx, int& gy) const {
    gx = static_cast<int>(std::floor((p.x - origin.x) / resolution));
    gy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
    return in_bounds(gx, gy);
}

Vec2 nav_offset_direction(double yaw_deg) {
    double a = deg_to_rad(yaw_deg);
    return {-std::sin(a), -std::cos(a)};
}

NavTarget nav_target_for(const ProtocolStep& step, const Layout& layout,
                         const AssetBase& base, double offset_radius) {
    const PlacedObject* target = nullptr;
    for (const std::string& name : step.assets_used) {
        const AssetRecord* rec = base.find(name);
        if (rec == nullptr) continue;
        if (const PlacedObject* obj = layout.find_by_asset(rec->asset_id)) {
            target = obj;
            break;
        }
    }
    if (target == nullptr) {
        throw std::runtime_error("nav_target_for: step " + std::to_string(step.index) +
                                 " has no placed asset");
    }

    // A desktop item retargets to its parent when the parent footprint is
    // larger; the robot should drive to the bench edge, not into the bench.
    if (!target->on_floor()) {
        const PlacedObject* parent = layout.find(target->initial_location);
        if (parent == nullptr) {
            throw std::runtime_error("nav_target_for: unresolvable parent " +
                                     target->initial_location);
        }
        const AssetRecord& child_rec = base.resolve(target->asset_id);
        const AssetRecord& parent_rec = base.resolve(parent->asset_id);
        double child_area = child_rec.bbox.short_side * child_rec.bbox.long_side;
        double parent_area = parent_rec.bbox.short_side * parent_rec.bbox.long_side;
        if (parent_area > child_area) target = parent;
    }

    const AssetRecord& rec = base.resolve(target->asset_id);
    double dist = rec.bbox.short_side / 2.0 + 2.0 * offset_radius;
    double rz = target->pose.yaw_deg;
    Vec2 off = nav_offset_direction(rz) * dist;

    NavTarget out;
    out.x = target->pose.x + off.x;
    out.y = target->pose.y + off.y;
    out.theta_deg = norm_deg(rz + 180.0);
    out.step_index = step.index;
    out.target_instance = target->instance_id;
    return out;
}

std::vector<GoalPair> goal_pairs(const Protocol& protocol, const Layout& layout,
                                 const AssetBase& base, double offset_radius) {
    std::vector<NavTarget> targets;
    for (const ProtocolStep& step : protocol.steps) {
        targets.push_back(nav_target_for(step, layout, base, offset_radius));
    }
    std::vector<GoalPair> pairs;
    for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
        const NavTarget& a = targets[i];
        const NavTarget& b = targets[i + 1];
        bool coincident = std::abs(a.x - b.x) <= 1e-6 && std::abs(a.y - b.y) <= 1e-6 &&
                          a.theta_deg == b.theta_deg;
        if (coincident) continue;
        pairs.push_back({a, b});
    }
    return pairs;
}

namespace {

struct InflatedRect {
    Footprint fp;
    double radius;
    InflationMode mode;

    bool covers(Vec2 p) const {
        if (mode == InflationMode::rounded) return fp.distance_to(p) <= radius;
        Vec2 l = fp.to_local(p);
        return std::abs(l.x) <= fp.half_long + radius &&
               std::abs(l.y) <= fp.half_short + radius;
    }
};

std::vector<InflatedRect> floor_obstacles(const Layout& layout, const AssetBase& base,
                                          double agent_radius, InflationMode mode) {
    std::vector<InflatedRect> out;
    for (const PlacedObject& o : layout.objects) {
        if (!o.on_floor()) continue;  // desktop items sit above traversal height
        const AssetRecord* rec = base.get(o.asset_id);
        if (rec == nullptr) continue;
        out.push_back({footprint_of(o, *rec), agent_radius, mode});
    }
    return out;
}

OccupancyGrid make_grid(const Layout& layout, double resolution) {
    OccupancyGrid grid;
    grid.resolution = resolution;
    grid.origin = {0.0, 0.0};
    grid.width = std::max(1, static_cast<int>(std::ceil(layout.room.width / resolution - 1e-9)));
    grid.height = std::max(1, static_cast<int>(std::ceil(layout.room.depth / resolution - 1e-9)));
    grid.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);
    return grid;
}

std::uint8_t cell_value(const OccupancyGrid& grid, const BoundsRect& interior,
                        const std::vector<InflatedRect>& obstacles, int gx, int gy) {
    Vec2 c = grid.cell_center(gx, gy);
    if (!interior.contains(c)) return 1;  // wall band
    for (const InflatedRect& ob : obstacles) {
        if (ob.covers(c)) return 1;
    }
    return 0;
}

}  // namespace

OccupancyGrid rasterize_serial(const Layout& layout, const AssetBase& base,
                               double resolution, double agent_radius,
                               InflationMode mode) {
    if (!(resolution > 0.0)) throw std::runtime_error("rasterize: resolution must be positive");
    OccupancyGrid grid = make_grid(layout, resolution);
    const BoundsRect interior = layout.room.usable_interior();
    const auto obstacles = floor_obstacles(layout, base, agent_radius, mode);
    for (int gy = 0; gy < grid.height; ++gy) {
        for (int gx = 0; gx < grid.width; ++gx) {
            grid.cells[static_cast<std::size_t>(gy) * grid.width + gx] =
                cell_value(grid, interior, obstacles, gx, gy);
        }
    }
    return grid;
}

OccupancyGrid rasterize(const Layout& layout, const AssetBase& base,
                        double resolution, double agent_radius, InflationMode mode) {
    if (!(resolution > 0.0)) throw std::runtime_error("rasterize: resolution must be positive");
    OccupancyGrid grid = make_grid(layout, resolution);
    const BoundsRect interior = layout.room.usable_interior();
    const auto obstacles = floor_obstacles(layout, base, agent_radius, mode);

#pragma omp parallel for schedule(static)
    for (int gy = 0; gy < grid.height; ++gy) {
        for (int gx = 0; gx < grid.width; ++gx) {
            grid.cells[static_cast<std::size_t>(gy) * grid.width + gx] =
                cell_value(grid, interior, obstacles, gx, gy);
        }
    }
    return grid;
}

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

struct OpenNode {
    double f;
    double g;
    int idx;
    bool operator>(const OpenNode& o) const {
        if (f != o.f) return f > o.f;
        if (g != o.g) return g > o.g;
        return idx > o.idx;
    }
};

double octile(int dx, int dy, double res) {
    int adx = std::abs(dx), ady = std::abs(dy);
    int lo = std::min(adx, ady), hi = std::max(adx, ady);
    return res * (hi + (kSqrt2 - 1.0) * lo);
}

}  // namespace

NavOutcome plan(const OccupancyGrid& grid, Vec2 start, Vec2 goal) {
    NavOutcome out;
    int sx, sy, gx, gy;
    bool s_in = grid.locate(start, sx, sy);
    bool g_in = grid.locate(goal, gx, gy);
    if (!s_in || grid.occupied(sx, sy)) {
        out.status = NavStatus::start_blocked;
        return out;
    }
    if (!g_in || grid.occupied(gx, gy)) {
        out.status = NavStatus::end_blocked;
        return out;
    }

    const int w = grid.width, h = grid.height;
    const int n = w * h;
    const double res = grid.resolution;
    std::vector<double> g_cost(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);
    auto id = [w](int x, int y) { return y * w + x; };

    std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<OpenNode>> open;
    g_cost[id(sx, sy)] = 0.0;
    open.push({octile(gx - sx, gy - sy, res), 0.0, id(sx, sy)});

    static const int dx8[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy8[8] = {0, 0, 1, -1, 1, -1, 1, -1};

    int goal_id = id(gx, gy);
    bool found = false;
    while (!open.empty()) {
        OpenNode node = open.top();
        open.pop();
        if (closed[node.idx]) continue;
        closed[node.idx] = 1;
        if (node.idx == goal_id) {
            found = true;
            break;
        }
        int cx = node.idx % w, cy = node.idx / w;
        for (int k = 0; k < 8; ++k) {
            int nx = cx + dx8[k], ny = cy + dy8[k];
            if (!grid.in_bounds(nx, ny) || grid.occupied(nx, ny)) continue;
            bool diagonal = dx8[k] != 0 && dy8[k] != 0;
            if (diagonal &&
                (grid.occupied(cx + dx8[k], cy) || grid.occupied(cx, cy + dy8[k]))) {
                continue;  // no corner cutting
            }
            double step = diagonal ? kSqrt2 * res : res;
            double ng = g_cost[node.idx] + step;
            int nid = id(nx, ny);
            if (ng < g_cost[nid]) {
                g_cost[nid] = ng;
                parent[nid] = node.idx;
                open.push({ng + octile(gx - nx, gy - ny, res), ng, nid});
            }
        }
    }

    if (!found) {
        out.status = NavStatus::path_blocked;
        return out;
    }
    out.status = NavStatus::ok;
    for (int cur = goal_id; cur != -1; cur = parent[cur]) {
        out.path.emplace_back(cur % w, cur / w);
    }
    std::reverse(out.path.begin(), out.path.end());
    // Length from step counts, so equal paths produce identical doubles
    // regardless of the order costs were accumulated in.
    int cardinal = 0, diagonal = 0;
    for (std::size_t i = 1; i < out.path.size(); ++i) {
        bool diag = out.path[i].first != out.path[i - 1].first &&
                    out.path[i].second != out.path[i - 1].second;
        (diag ? diagonal : cardinal) += 1;
    }
    out.length = cardinal * res + diagonal * (kSqrt2 * res);
    return out;
}

std::vector<NavOutcome> plan_pairs_serial(const OccupancyGrid& grid,
                                          const std::vector<GoalPair>& pairs) {
    std::vector<NavOutcome> out;
    out.reserve(pairs.size());
    for (const GoalPair& p : pairs) {
        out.push_back(plan(grid, {p.start.x, p.start.y}, {p.end.x, p.end.y}));
    }
    return out;
}

std::vector<NavOutcome> plan_pairs(const OccupancyGrid& grid,
                                   const std::vector<GoalPair>& pairs) {
    std::vector<NavOutcome> out(pairs.size());
    const int n = static_cast<int>(pairs.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        out[i] = plan(grid, {pairs[i].start.x, pairs[i].start.y},
                      {pairs[i].end.x, pairs[i].end.y});
    }
    return out;
}

ReachReport f_reach(const Layout& layout, const Protocol& protocol,
                    const AssetBase& base, const NavConfig& cfg) {
    ReachReport report;
    report.pairs = goal_pairs(protocol, layout, base, cfg.offset_radius);
    OccupancyGrid grid =
        rasterize(layout, base, cfg.resolution, cfg.agent_radius, cfg.inflation);
    report.outcomes = plan_pairs(grid, report.pairs);
    report.reach = 1;
    for (const NavOutcome& o : report.outcomes) {
        if (o.status != NavStatus::ok) {
            report.reach = 0;
            break;
        }
    }
    return report;
}

std::string goal_pairs_to_json_text(const std::vector<GoalPair>& pairs,
                                    int num_targets) {
    namespace jf = jsonfmt;
    std::ostringstream os;
    auto pose = [&](const NavTarget& t) {
        return "[" + jf::num3(t.x) + "," + jf::num3(t.y) + "," +
               jf::num3(deg_to_rad(t.theta_deg)) + "]";
    };
    os << "{\"goal_pairs\":[";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        os << (i ? "," : "") << "{\"start\":" << pose(pairs[i].start)
           << ",\"end\":" << pose(pairs[i].end) << "}";
    }
    os << "],\"num_targets\":" << num_targets
       << ",\"num_goal_pairs\":" << pairs.size() << "}";
    return os.str();
}

std::vector<GoalPair> goal_pairs_from_json_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    std::vector<GoalPair> pairs;
    for (const nlohmann::json& jp : doc.at("goal_pairs")) {
        GoalPair p;
        auto read = [](const nlohmann::json& arr, NavTarget& t) {
            t.x = arr.at(0).get<double>();
            t.y = arr.at(1).get<double>();
            t.theta_deg = norm_deg(rad_to_deg(arr.at(2).get<double>()));
        };
        read(jp.at("start"), p.start);
        read(jp.at("end"), p.end);
        pairs.push_back(p);
    }
    return pairs;
}

void save_goal_pairs(const std::vector<GoalPair>& pairs, int num_targets,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write goal pairs: " + path.string());
    out << goal_pairs_to_json_text(pairs, num_targets) << "\n";
}

void save_grid_pgm(const OccupancyGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write grid: " + path.string());
    out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    for (int gy = 0; gy < grid.height; ++gy) {
        for (int gx = 0; gx < grid.width; ++gx) {
            out.put(grid.occupied(gx, gy) ? '\0' : static_cast<char>(255));
        }
    }
}

}  // namespace labscene
