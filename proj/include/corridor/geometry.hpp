#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <span>
#include <unordered_set>
#include <vector>

#include "corridor/errors.hpp"

namespace corridor {

inline constexpr double kPi = 3.14159265358979323846;

// Absolute tolerance for length/angle comparisons at constraint boundaries.
inline constexpr double kLengthTol = 1e-9;

// Grid vertex (cell corner). Integer coordinates, x right, y up.
struct Vertex {
    int x = 0;
    int y = 0;

    friend bool operator==(const Vertex&, const Vertex&) = default;
    friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

// Grid cell addressed by its lower-left corner.
struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct VertexHash {
    size_t operator()(const Vertex& v) const {
        return std::hash<int64_t>()((int64_t(v.x) << 32) ^ uint32_t(v.y));
    }
};

struct CellHash {
    size_t operator()(const Cell& c) const {
        return std::hash<int64_t>()((int64_t(c.x) << 32) ^ uint32_t(c.y));
    }
};

using CellSet = std::unordered_set<Cell, CellHash>;
using VertexSet = std::unordered_set<Vertex, VertexHash>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct Segment {
    Point a;
    Point b;
};

inline Point to_point(const Vertex& v) { return {double(v.x), double(v.y)}; }

inline double euclid(const Point& a, const Point& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

// Vertex distance in vertex units; multiply by cell size for meters.
inline double euclid(const Vertex& a, const Vertex& b) {
    return std::hypot(double(b.x - a.x), double(b.y - a.y));
}

// Exact sign test: >0 left turn, <0 right turn, 0 collinear. No epsilon.
inline int64_t cross(const Vertex& a, const Vertex& b, const Vertex& c) {
    return int64_t(b.x - a.x) * int64_t(c.y - a.y) -
           int64_t(b.y - a.y) * int64_t(c.x - a.x);
}

inline bool is_collinear(const Vertex& a, const Vertex& b, const Vertex& c) {
    return cross(a, b, c) == 0;
}

// True when b lies strictly between a and c on a common line, same direction.
inline bool collinear_forward(const Vertex& a, const Vertex& b, const Vertex& c) {
    if (!is_collinear(a, b, c)) return false;
    int64_t dot = int64_t(b.x - a.x) * int64_t(c.x - b.x) +
                  int64_t(b.y - a.y) * int64_t(c.y - b.y);
    return dot > 0;
}

// Absolute heading change between two directed segments, wrapped to [0, 180].
inline double turn_angle(const Segment& dir_in, const Segment& dir_out) {
    const double dx1 = dir_in.b.x - dir_in.a.x;
    const double dy1 = dir_in.b.y - dir_in.a.y;
    const double dx2 = dir_out.b.x - dir_out.a.x;
    const double dy2 = dir_out.b.y - dir_out.a.y;
    if ((dx1 == 0.0 && dy1 == 0.0) || (dx2 == 0.0 && dy2 == 0.0)) {
        throw DegenerateSegment("turn_angle: zero-length segment");
    }
    double d = std::fabs(std::atan2(dy2, dx2) - std::atan2(dy1, dx1));
    if (d > kPi) d = 2.0 * kPi - d;
    return d * 180.0 / kPi;
}

inline double turn_angle(const Vertex& grand, const Vertex& parent, const Vertex& child) {
    return turn_angle(Segment{to_point(grand), to_point(parent)},
                      Segment{to_point(parent), to_point(child)});
}

inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return euclid(p, a);
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return euclid(p, Point{a.x + t * dx, a.y + t * dy});
}

// Minimum distance between two closed segments; zero when they touch or
// cross. Proper crossings need the orientation test; every other minimum is
// realised at one of the four endpoints.
inline double segment_segment_distance(const Segment& s, const Segment& t) {
    const auto orient = [](const Point& p, const Point& q, const Point& r) {
        return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    };
    const double o1 = orient(s.a, s.b, t.a);
    const double o2 = orient(s.a, s.b, t.b);
    const double o3 = orient(t.a, t.b, s.a);
    const double o4 = orient(t.a, t.b, s.b);
    if (o1 * o2 < 0.0 && o3 * o4 < 0.0) return 0.0;
    return std::min(std::min(point_segment_distance(t.a, s.a, s.b),
                             point_segment_distance(t.b, s.a, s.b)),
                    std::min(point_segment_distance(s.a, t.a, t.b),
                             point_segment_distance(s.b, t.a, t.b)));
}

// Minimum distance from p to a polyline of >= 2 points.
inline double distance_to_polyline(const Point& p, std::span<const Point> polyline) {
    if (polyline.size() < 2) {
        throw InvalidPolyline("distance_to_polyline: need at least 2 points");
    }
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < polyline.size(); ++i) {
        best = std::min(best, point_segment_distance(p, polyline[i], polyline[i + 1]));
    }
    return best;
}

// One maximal sub-span of a segment owned by a single cell.
struct CellSpan {
    double t0 = 0.0;
    double t1 = 0.0;
    Cell cell;
};

// Walks the sub-spans a segment owns, splitting at every integer grid line
// and assigning each sub-span to its owning cell. Ownership convention:
// interior points belong to the cell they fall in; a run coincident with a
// grid line belongs to the cell on the lower-coordinate side of that line.
// `visit(t0, t1, cell)` returns false to stop early; the walk returns false
// exactly when a visit did.
template <class Visit>
inline bool walk_segment_cell_spans(const Segment& s, Visit&& visit) {
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    if (dx == 0.0 && dy == 0.0) return true;

    // Grid-line crossings of one axis are monotone in t when the lines are
    // visited in travel order, so the two axes merge without a sort.
    int xk = 0, xn = 0, xs = 1;
    if (dx != 0.0) {
        const int klo = int(std::ceil(std::min(s.a.x, s.b.x)));
        const int khi = int(std::floor(std::max(s.a.x, s.b.x)));
        xn = std::max(0, khi - klo + 1);
        xs = dx > 0.0 ? 1 : -1;
        xk = dx > 0.0 ? klo : khi;
    }
    int yk = 0, yn = 0, ys = 1;
    if (dy != 0.0) {
        const int klo = int(std::ceil(std::min(s.a.y, s.b.y)));
        const int khi = int(std::floor(std::max(s.a.y, s.b.y)));
        yn = std::max(0, khi - klo + 1);
        ys = dy > 0.0 ? 1 : -1;
        yk = dy > 0.0 ? klo : khi;
    }
    const double inf = std::numeric_limits<double>::infinity();
    const auto pop_x = [&]() {
        while (xn > 0) {
            const double t = (double(xk) - s.a.x) / dx;
            xk += xs;
            --xn;
            if (t > 0.0 && t < 1.0) return t;
        }
        return inf;
    };
    const auto pop_y = [&]() {
        while (yn > 0) {
            const double t = (double(yk) - s.a.y) / dy;
            yk += ys;
            --yn;
            if (t > 0.0 && t < 1.0) return t;
        }
        return inf;
    };

    const bool on_vertical_line = dx == 0.0 && s.a.x == std::floor(s.a.x);
    const bool on_horizontal_line = dy == 0.0 && s.a.y == std::floor(s.a.y);

    double tx = pop_x();
    double ty = pop_y();
    double prev = 0.0;
    for (;;) {
        double cur = tx <= ty ? tx : ty;
        const bool last = !(cur < 1.0);
        if (last) cur = 1.0;
        if (cur - prev >= 1e-12) {
            const double mx = s.a.x + 0.5 * (prev + cur) * dx;
            const double my = s.a.y + 0.5 * (prev + cur) * dy;
            Cell c;
            c.x = on_vertical_line ? int(std::llround(s.a.x)) - 1 : int(std::floor(mx));
            c.y = on_horizontal_line ? int(std::llround(s.a.y)) - 1 : int(std::floor(my));
            if (!visit(prev, cur, c)) return false;
        }
        if (last) break;
        prev = cur;
        if (tx <= ty) {
            tx = pop_x();
        } else {
            ty = pop_y();
        }
    }
    return true;
}

// Span list variant; fills `out` (cleared first). Reuse the vector across
// calls to keep hot loops allocation-free.
inline void segment_cell_spans(const Segment& s, std::vector<CellSpan>& out) {
    out.clear();
    walk_segment_cell_spans(s, [&out](double t0, double t1, const Cell& c) {
        out.push_back({t0, t1, c});
        return true;
    });
}

inline std::vector<CellSpan> segment_cell_spans(const Segment& s) {
    std::vector<CellSpan> out;
    segment_cell_spans(s, out);
    return out;
}

// Total length of the parts of s lying inside the given cells (unit cells in
// the segment's coordinate units).
inline double clip_length_in_cells(const Segment& s, const CellSet& cells) {
    const double len = euclid(s.a, s.b);
    if (len == 0.0) return 0.0;
    double total = 0.0;
    walk_segment_cell_spans(s, [&](double t0, double t1, const Cell& c) {
        if (cells.contains(c)) total += (t1 - t0) * len;
        return true;
    });
    return total;
}

// Parameter intervals of s inside the given cells, merged across touching
// spans. Intervals are disjoint, ordered, and separated by positive gaps.
inline std::vector<std::pair<double, double>> clip_intervals_in_cells(
    const Segment& s, const CellSet& cells) {
    std::vector<std::pair<double, double>> out;
    walk_segment_cell_spans(s, [&](double t0, double t1, const Cell& c) {
        if (!cells.contains(c)) return true;
        if (!out.empty() && t0 - out.back().second < 1e-12) {
            out.back().second = t1;
        } else {
            out.push_back({t0, t1});
        }
        return true;
    });
    return out;
}

}  // namespace corridor
