#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace labscene {

inline constexpr double kPi = 3.14159265358979323846;

// Excursions below this are rounding noise, not violations; keeps repair
// corrections idempotent.
inline constexpr double kGeomEps = 1e-12;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into [0, 360).
inline double norm_deg(double deg) {
    double d = std::fmod(deg, 360.0);
    if (d < 0.0) d += 360.0;
    if (d == 360.0) d = 0.0;
    return d;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    // 90 degree counterclockwise rotation.
    Vec2 perp() const { return {-y, x}; }
};

// Counterclockwise rotation by an angle in degrees.
inline Vec2 rotate_deg(Vec2 v, double deg) {
    double a = deg_to_rad(deg);
    double c = std::cos(a), s = std::sin(a);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Rotation-aware rectangular footprint in the global xy plane.
// Local convention: the long side lies along local x, the short side along
// local y; yaw rotates counterclockwise, 0 = local frame aligned with world.
struct Footprint {
    Vec2 center;
    double half_long = 0.0;   // half extent along local x
    double half_short = 0.0;  // half extent along local y
    double yaw_deg = 0.0;

    std::array<Vec2, 4> corners() const {
        std::array<Vec2, 4> out;
        const Vec2 ex = rotate_deg({1.0, 0.0}, yaw_deg);
        const Vec2 ey = rotate_deg({0.0, 1.0}, yaw_deg);
        out[0] = center - ex * half_long - ey * half_short;
        out[1] = center + ex * half_long - ey * half_short;
        out[2] = center + ex * half_long + ey * half_short;
        out[3] = center - ex * half_long + ey * half_short;
        return out;
    }

    double area() const { return 4.0 * half_long * half_short; }

    // Transforms a world point into the local (unrotated, centered) frame.
    Vec2 to_local(Vec2 p) const { return rotate_deg(p - center, -yaw_deg); }

    bool contains(Vec2 p) const {
        Vec2 l = to_local(p);
        return std::abs(l.x) <= half_long && std::abs(l.y) <= half_short;
    }

    // Euclidean distance from p to the rectangle (0 inside).
    double distance_to(Vec2 p) const {
        Vec2 l = to_local(p);
        double dx = std::max(std::abs(l.x) - half_long, 0.0);
        double dy = std::max(std::abs(l.y) - half_short, 0.0);
        return std::hypot(dx, dy);
    }

    // Signed distance from p to the rectangle boundary: positive inside
    // (distance to the nearest edge), negative outside.
    double signed_inside_distance(Vec2 p) const {
        Vec2 l = to_local(p);
        double ix = half_long - std::abs(l.x);
        double iy = half_short - std::abs(l.y);
        if (ix >= 0.0 && iy >= 0.0) return std::min(ix, iy);
        return -distance_to(p);
    }
};

struct PenetrationResult {
    bool overlapping = false;
    double depth = 0.0;   // > 0 iff overlapping
    Vec2 direction;       // unit minimal-translation axis, moves b away from a
};

// Separating-axis test over both rectangles' edge normals. Touching
// boundaries (zero-measure contact) count as not overlapping. When the
// rectangles overlap, depth * direction is the minimal translation that
// separates b from a.
PenetrationResult overlap(const Footprint& a, const Footprint& b);

// All candidate pushes of b that separate the pair, sorted by distance
// ascending. Empty when the rectangles do not overlap.
struct SeparationOption {
    Vec2 direction;
    double distance;
};
std::vector<SeparationOption> separation_options(const Footprint& a,
                                                 const Footprint& b);

// Axis-aligned usable region, e.g. a room interior after deducting walls.
struct BoundsRect {
    double min_x = 0.0, min_y = 0.0;
    double max_x = 0.0, max_y = 0.0;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    bool contains(Vec2 p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

// Minimal inward correction that puts every corner of fp inside bounds, or
// nullopt when fp already fits. Throws std::runtime_error when fp cannot fit
// at all (extent exceeds the bounds).
std::optional<Vec2> out_of_bounds(const Footprint& fp, const BoundsRect& bounds);

// Distance between a segment [p0,p1] and the rectangle fp (0 when touching
// or intersecting).
double segment_footprint_distance(Vec2 p0, Vec2 p1, const Footprint& fp);

}  // namespace labscene
