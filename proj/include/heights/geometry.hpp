// Copyright (c) 2026 The heights authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Planar polygon geometry in CRS meters.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace heights::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;
};

// Closed ring: first vertex equals last.
using Ring = std::vector<Point>;

struct Polygon {
    Ring exterior;
    std::vector<Ring> holes;

    friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct Bounds {
    double min_x, min_y, max_x, max_y;
};

inline Bounds bounds(const Ring& ring) {
    Bounds b{ring.front().x, ring.front().y, ring.front().x, ring.front().y};
    for (const auto& p : ring) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

// Shoelace area relative to the first vertex, which keeps precision for
// large projected coordinates. Positive for counter-clockwise rings.
inline double signed_area(const Ring& ring) {
    if (ring.size() < 4)
        return 0.0;
    const Point o = ring.front();
    double twice = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const double ax = ring[i].x - o.x, ay = ring[i].y - o.y;
        const double bx = ring[i + 1].x - o.x, by = ring[i + 1].y - o.y;
        twice += ax * by - bx * ay;
    }
    return twice / 2.0;
}

inline double length(const Ring& ring) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        total += std::hypot(ring[i + 1].x - ring[i].x, ring[i + 1].y - ring[i].y);
    return total;
}

inline double area(const Polygon& poly) {
    double a = std::fabs(signed_area(poly.exterior));
    for (const auto& h : poly.holes)
        a -= std::fabs(signed_area(h));
    return a;
}

// Exterior ring length plus every interior ring length.
inline double perimeter(const Polygon& poly) {
    double p = length(poly.exterior);
    for (const auto& h : poly.holes)
        p += length(h);
    return p;
}

// Area centroid; holes contribute negatively. Falls back to the exterior
// vertex mean for degenerate (zero-area) input.
inline Point centroid(const Polygon& poly) {
    const Point o = poly.exterior.front();
    double total = 0.0, cx = 0.0, cy = 0.0;
    auto accumulate = [&](const Ring& ring, double sign) {
        const double a = signed_area(ring);
        const double orient = (a < 0.0 ? -1.0 : 1.0) * sign;
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const double ax = ring[i].x - o.x, ay = ring[i].y - o.y;
            const double bx = ring[i + 1].x - o.x, by = ring[i + 1].y - o.y;
            const double cross = (ax * by - bx * ay) * orient;
            cx += (ax + bx) * cross;
            cy += (ay + by) * cross;
        }
        total += std::fabs(a) * sign;
    };
    accumulate(poly.exterior, 1.0);
    for (const auto& h : poly.holes)
        accumulate(h, -1.0);
    if (total == 0.0) {
        double sx = 0.0, sy = 0.0;
        const std::size_t n = poly.exterior.size() - 1;
        for (std::size_t i = 0; i < n; ++i) {
            sx += poly.exterior[i].x;
            sy += poly.exterior[i].y;
        }
        return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
    }
    return {o.x + cx / (6.0 * total), o.y + cy / (6.0 * total)};
}

// x where edge (a, b) crosses the horizontal line at y. Both the scanline
// rasterizer and contains() use this exact expression so they agree bit for bit.
inline double crossing_x(const Point& a, const Point& b, double y) {
    return (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x;
}

// Half-open rule: an edge counts when exactly one endpoint is above y.
inline bool straddles(const Point& a, const Point& b, double y) {
    return (a.y > y) != (b.y > y);
}

// Even-odd point in polygon over all rings, so holes subtract.
inline bool contains(const Polygon& poly, double x, double y) {
    bool inside = false;
    auto scan = [&](const Ring& ring) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const auto& a = ring[i];
            const auto& b = ring[i + 1];
            if (straddles(a, b, y) && x < crossing_x(a, b, y))
                inside = !inside;
        }
    };
    scan(poly.exterior);
    for (const auto& h : poly.holes)
        scan(h);
    return inside;
}

namespace detail {

inline double orient(const Point& a, const Point& b, const Point& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

inline bool on_segment(const Point& a, const Point& b, const Point& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

inline bool segments_touch(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
    const int o1 = sign(orient(p1, p2, q1));
    const int o2 = sign(orient(p1, p2, q2));
    const int o3 = sign(orient(q1, q2, p1));
    const int o4 = sign(orient(q1, q2, p2));
    if (o1 != o2 && o3 != o4)
        return true;
    return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
           (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

// Ring without consecutive duplicate vertices, still closed.
inline Ring compact(const Ring& ring) {
    Ring out;
    for (const auto& p : ring)
        if (out.empty() || !(out.back() == p))
            out.push_back(p);
    return out;
}

} // namespace detail

// Reason the ring is unusable as a polygon boundary, or nullopt when valid:
// closed, at least 3 distinct finite vertices, no self-intersection, non-zero area.
inline std::optional<std::string> ring_problem(const Ring& ring) {
    for (const auto& p : ring)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            return "non-finite coordinate";
    if (ring.size() < 2 || !(ring.front() == ring.back()))
        return "ring is not closed";
    const Ring r = detail::compact(ring);
    {
        std::vector<Point> distinct(r.begin(), r.end() - 1);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < 3)
            return "ring has fewer than 3 distinct vertices";
    }
    const std::size_t edges = r.size() - 1;
    for (std::size_t i = 0; i < edges; ++i) {
        for (std::size_t j = i + 1; j < edges; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == edges - 1);
            if (adjacent) {
                // Adjacent edges share one vertex; they may only meet there.
                const Point& shared = (j == i + 1) ? r[j] : r[i];
                const Point& a = (j == i + 1) ? r[i] : r[i + 1];
                const Point& b = (j == i + 1) ? r[j + 1] : r[j];
                if (detail::sign(detail::orient(a, shared, b)) == 0 &&
                    (detail::on_segment(shared, b, a) || detail::on_segment(a, shared, b)))
                    return "ring folds back on itself";
                continue;
            }
            if (detail::segments_touch(r[i], r[i + 1], r[j], r[j + 1]))
                return "ring self-intersects";
        }
    }
    if (signed_area(r) == 0.0)
        return "ring has zero area";
    return std::nullopt;
}

} // namespace heights::geometry
