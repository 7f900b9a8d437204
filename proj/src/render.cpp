#include "labscene/render.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace labscene {

namespace {

constexpr double kScale = 100.0;  // px per meter

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Mapper {
    double depth;
    double sx(double x) const { return x * kScale; }
    double sy(double y) const { return (depth - y) * kScale; }
};

void footprint_polygon(std::ostringstream& os, const Footprint& fp, const Mapper& m,
                       const char* fill, const char* stroke, double stroke_w) {
    os << "<polygon points=\"";
    bool first = true;
    for (const Vec2& c : fp.corners()) {
        os << (first ? "" : " ") << px(m.sx(c.x)) << "," << px(m.sy(c.y));
        first = false;
    }
    os << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\""
       << px(stroke_w) << "\"/>\n";
}

}  // namespace

std::string render_svg(const Layout& layout, const AssetBase& base,
                       const RenderExtras& extras) {
    const Mapper m{layout.room.depth};
    const double w = layout.room.width * kScale;
    const double h = layout.room.depth * kScale;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(w)
       << "\" height=\"" << px(h) << "\" viewBox=\"0 0 " << px(w) << " " << px(h)
       << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << px(w) << "\" height=\"" << px(h)
       << "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"2.00\"/>\n";

    // Occupancy raster as merged horizontal runs.
    if (extras.grid != nullptr) {
        const OccupancyGrid& g = *extras.grid;
        for (int gy = 0; gy < g.height; ++gy) {
            int gx = 0;
            while (gx < g.width) {
                if (!g.occupied(gx, gy)) {
                    ++gx;
                    continue;
                }
                int run = gx;
                while (run < g.width && g.occupied(run, gy)) ++run;
                double x0 = g.origin.x + gx * g.resolution;
                double x1 = g.origin.x + run * g.resolution;
                double y0 = g.origin.y + gy * g.resolution;
                double y1 = y0 + g.resolution;
                os << "<rect x=\"" << px(m.sx(x0)) << "\" y=\"" << px(m.sy(y1))
                   << "\" width=\"" << px((x1 - x0) * kScale) << "\" height=\""
                   << px((y1 - y0) * kScale) << "\" fill=\"#e5e7eb\"/>\n";
                gx = run;
            }
        }
    }

    // Usable interior outline.
    {
        const BoundsRect in = layout.room.usable_interior();
        os << "<rect x=\"" << px(m.sx(in.min_x)) << "\" y=\"" << px(m.sy(in.max_y))
           << "\" width=\"" << px(in.width() * kScale) << "\" height=\""
           << px(in.height() * kScale)
           << "\" fill=\"none\" stroke=\"#9ca3af\" stroke-width=\"1.00\" "
              "stroke-dasharray=\"6,4\"/>\n";
    }

    auto highlighted = [&](const std::string& id) {
        for (const auto& [a, b] : extras.highlight_pairs) {
            if (a == id || b == id) return true;
        }
        return false;
    };

    // Floor objects first, then desktop items on top.
    for (int pass = 0; pass < 2; ++pass) {
        for (const PlacedObject& o : layout.objects) {
            if ((pass == 0) != o.on_floor()) continue;
            const AssetRecord* rec = base.get(o.asset_id);
            if (rec == nullptr) continue;
            Footprint fp = footprint_of(o, *rec);
            bool hot = highlighted(o.instance_id);
            const char* fill = o.on_floor() ? "#cbd5e1" : "#93c5fd";
            footprint_polygon(os, fp, m, fill, hot ? "#dc2626" : "#1f2937",
                              hot ? 3.0 : 1.0);
            if (o.on_floor()) {
                os << "<text x=\"" << px(m.sx(o.pose.x)) << "\" y=\""
                   << px(m.sy(o.pose.y)) << "\" font-size=\"12\" "
                      "text-anchor=\"middle\" fill=\"#111827\">" << o.asset_id
                   << "</text>\n";
            }
        }
    }

    // Planned paths and their endpoint markers.
    if (extras.outcomes != nullptr && extras.grid != nullptr) {
        const OccupancyGrid& g = *extras.grid;
        for (const NavOutcome& outcome : *extras.outcomes) {
            if (outcome.status != NavStatus::ok || outcome.path.empty()) continue;
            os << "<polyline fill=\"none\" stroke=\"#2563eb\" stroke-width=\"2.00\" "
                  "points=\"";
            bool first = true;
            for (const auto& [gx, gy] : outcome.path) {
                Vec2 c = g.cell_center(gx, gy);
                os << (first ? "" : " ") << px(m.sx(c.x)) << "," << px(m.sy(c.y));
                first = false;
            }
            os << "\"/>\n";
        }
    }
    if (extras.pairs != nullptr) {
        for (const GoalPair& pair : *extras.pairs) {
            auto marker = [&](const NavTarget& t, const char* color) {
                Vec2 head = nav_offset_direction(t.theta_deg) * 0.25;
                os << "<circle cx=\"" << px(m.sx(t.x)) << "\" cy=\"" << px(m.sy(t.y))
                   << "\" r=\"5.00\" fill=\"" << color << "\"/>\n";
                os << "<line x1=\"" << px(m.sx(t.x)) << "\" y1=\"" << px(m.sy(t.y))
                   << "\" x2=\"" << px(m.sx(t.x + head.x)) << "\" y2=\""
                   << px(m.sy(t.y + head.y)) << "\" stroke=\"" << color
                   << "\" stroke-width=\"2.00\"/>\n";
            };
            marker(pair.start, "#16a34a");
            marker(pair.end, "#dc2626");
        }
    }

    os << "</svg>\n";
    return os.str();
}

void save_svg(const std::string& svg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write svg: " + path.string());
    out << svg;
}

}  // namespace labscene
