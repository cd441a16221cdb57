#pragma once

#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "corridor/geometry.hpp"

namespace corridor {

struct ObstacleRect {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;
};

struct AccessPoint {
    Point center_m;
    double radius_m = 0.0;
};

// Everything needed to materialize a world. Cell coordinates are grid units,
// access points and the infrastructure polyline are meters.
struct WorldSpec {
    int width = 0;
    int height = 0;
    double cell_size_m = 1.0;
    std::vector<ObstacleRect> obstacles;
    std::vector<uint8_t> blocked_base;  // optional full mask (e.g. from a .map)
    std::vector<AccessPoint> access_points;
    std::optional<std::vector<Cell>> uncovered_cells;  // explicit coverage mode
    std::vector<Point> infrastructure_m;               // empty = no corridor
    double d_row_m = 0.0;
    double d_cfod_m = std::numeric_limits<double>::infinity();
    Vertex start;
    Vertex goal;
};

// Immutable spatial model: per-cell blocked/covered masks plus a per-vertex
// corridor mask. Vertices live on cell corners, (width+1) x (height+1) of them.
struct GridWorld {
    int width = 0;
    int height = 0;
    double cell_size_m = 1.0;
    std::vector<uint8_t> blocked;   // width * height
    std::vector<uint8_t> covered;   // width * height
    std::vector<uint8_t> corridor;  // (width+1) * (height+1)
    std::vector<AccessPoint> access_points;  // kept for rendering
    std::vector<Point> infrastructure_m;
    double d_row_m = 0.0;
    double d_cfod_m = std::numeric_limits<double>::infinity();
    Vertex start;
    Vertex goal;

    bool in_grid(const Cell& c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }
    bool in_grid(const Vertex& v) const {
        return v.x >= 0 && v.x <= width && v.y >= 0 && v.y <= height;
    }
    bool cell_blocked(const Cell& c) const { return blocked[size_t(c.y) * width + c.x]; }
    bool cell_covered(const Cell& c) const { return covered[size_t(c.y) * width + c.x]; }
    bool cell_free(int cx, int cy) const {
        return cx >= 0 && cx < width && cy >= 0 && cy < height &&
               !blocked[size_t(cy) * width + cx];
    }
    bool cell_uncovered_at(int cx, int cy) const {
        return cx >= 0 && cx < width && cy >= 0 && cy < height &&
               !covered[size_t(cy) * width + cx];
    }
    bool in_corridor(const Vertex& v) const {
        return corridor[size_t(v.y) * (width + 1) + v.x];
    }
    bool has_corridor() const { return !infrastructure_m.empty(); }
    Point vertex_m(const Vertex& v) const {
        return {v.x * cell_size_m, v.y * cell_size_m};
    }
    size_t vertex_count() const { return size_t(width + 1) * (height + 1); }
    size_t vertex_index(const Vertex& v) const {
        return size_t(v.y) * (width + 1) + v.x;
    }

    // A vertex is unusable as a waypoint when every incident in-grid cell is
    // blocked.
    bool vertex_engulfed(const Vertex& v) const {
        for (int dy = -1; dy <= 0; ++dy) {
            for (int dx = -1; dx <= 0; ++dx) {
                if (cell_free(v.x + dx, v.y + dy)) return false;
            }
        }
        return true;
    }
};

// One 8-connected component of uncovered cells.
struct CoverageHole {
    int id = 0;
    CellSet cells;
    VertexSet vertices;                  // all vertices incident to a hole cell
    VertexSet boundary;                  // subset that can reach covered space
    std::vector<Vertex> boundary_list;   // boundary, lexicographically sorted

    bool has_vertex(const Vertex& v) const { return vertices.contains(v); }
};

inline GridWorld build_world(const WorldSpec& spec) {
    if (spec.width < 1 || spec.height < 1) {
        throw InvalidConstraints("world: grid dimensions must be positive");
    }
    if (spec.cell_size_m <= 0.0) {
        throw InvalidConstraints("world: cell size must be positive");
    }
    if (!spec.infrastructure_m.empty()) {
        if (spec.infrastructure_m.size() < 2) {
            throw InvalidPolyline("world: infrastructure polyline needs 2+ points");
        }
        if (!(spec.d_row_m < spec.d_cfod_m)) {
            throw InvalidConstraints("world: require separation < loss-of-sight bound");
        }
    }

    GridWorld w;
    w.width = spec.width;
    w.height = spec.height;
    w.cell_size_m = spec.cell_size_m;
    w.access_points = spec.access_points;
    w.infrastructure_m = spec.infrastructure_m;
    w.d_row_m = spec.d_row_m;
    w.d_cfod_m = spec.d_cfod_m;
    w.start = spec.start;
    w.goal = spec.goal;

    const size_t cells = size_t(w.width) * w.height;
    w.blocked.assign(cells, 0);
    if (!spec.blocked_base.empty()) {
        if (spec.blocked_base.size() != cells) {
            throw InvalidConstraints("world: blocked mask size mismatch");
        }
        w.blocked = spec.blocked_base;
    }
    for (const ObstacleRect& r : spec.obstacles) {
        for (int y = std::max(0, r.y); y < std::min(w.height, r.y + r.h); ++y) {
            for (int x = std::max(0, r.x); x < std::min(w.width, r.x + r.w); ++x) {
                w.blocked[size_t(y) * w.width + x] = 1;
            }
        }
    }

    w.covered.assign(cells, 0);
    if (spec.uncovered_cells.has_value()) {
        std::fill(w.covered.begin(), w.covered.end(), 1);
        for (const Cell& c : *spec.uncovered_cells) {
            if (w.in_grid(c)) w.covered[size_t(c.y) * w.width + c.x] = 0;
        }
    } else if (!spec.access_points.empty()) {
        for (int y = 0; y < w.height; ++y) {
            for (int x = 0; x < w.width; ++x) {
                const Point center{(x + 0.5) * w.cell_size_m, (y + 0.5) * w.cell_size_m};
                for (const AccessPoint& ap : spec.access_points) {
                    if (euclid(center, ap.center_m) <= ap.radius_m) {
                        w.covered[size_t(y) * w.width + x] = 1;
                        break;
                    }
                }
            }
        }
    }

    w.corridor.assign(w.vertex_count(), 1);
    if (!w.infrastructure_m.empty()) {
        for (int y = 0; y <= w.height; ++y) {
            for (int x = 0; x <= w.width; ++x) {
                const double d = distance_to_polyline(
                    Point{x * w.cell_size_m, y * w.cell_size_m}, w.infrastructure_m);
                w.corridor[size_t(y) * (w.width + 1) + x] =
                    (d >= w.d_row_m - kLengthTol && d <= w.d_cfod_m + kLengthTol) ? 1 : 0;
            }
        }
    }

    for (const Vertex& v : {spec.start, spec.goal}) {
        if (!w.in_grid(v)) {
            throw InfeasibleEndpoints("world: endpoint outside grid");
        }
        if (!w.in_corridor(v)) {
            throw InfeasibleEndpoints("world: endpoint outside corridor");
        }
        if (w.vertex_engulfed(v)) {
            throw InfeasibleEndpoints("world: endpoint inside obstacle");
        }
    }
    return w;
}

// MovingAI .map format: header lines (type/height/width/map) then one row of
// cell characters per line, top row first.
inline void apply_moving_ai_map(const std::string& text, WorldSpec& spec) {
    std::istringstream in(text);
    std::string line;
    int height = -1;
    int width = -1;
    bool in_grid_section = false;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!in_grid_section) {
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "type") continue;
            if (key == "height") { ls >> height; continue; }
            if (key == "width") { ls >> width; continue; }
            if (key == "map") { in_grid_section = true; continue; }
            if (key.empty()) continue;
            throw ParseError("map", "unexpected header line: " + line);
        }
        if (!line.empty()) rows.push_back(line);
    }
    if (width < 1 || height < 1) throw ParseError("map", "missing width/height");
    if (int(rows.size()) != height) {
        throw ParseError("map", "row count does not match height");
    }
    spec.width = width;
    spec.height = height;
    spec.blocked_base.assign(size_t(width) * height, 0);
    for (int r = 0; r < height; ++r) {
        if (int(rows[r].size()) != width) {
            throw ParseError("map", "row width mismatch at row " + std::to_string(r));
        }
        const int y = height - 1 - r;  // file lists the top row first
        for (int x = 0; x < width; ++x) {
            const char ch = rows[r][x];
            bool blocked;
            switch (ch) {
                case '.': case 'G': case 'S': blocked = false; break;
                case '@': case 'O': case 'T': case 'W': blocked = true; break;
                default:
                    throw ParseError("map", std::string("unknown cell char '") + ch + "'");
            }
            spec.blocked_base[size_t(y) * width + x] = blocked ? 1 : 0;
        }
    }
}

// 8-connected components of uncovered cells, ids in scanline order of the
// first cell of each component.
inline std::vector<CoverageHole> find_holes(const GridWorld& w) {
    std::vector<CoverageHole> holes;
    std::vector<int> comp(size_t(w.width) * w.height, -1);
    static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

    for (int sy = 0; sy < w.height; ++sy) {
        for (int sx = 0; sx < w.width; ++sx) {
            const size_t si = size_t(sy) * w.width + sx;
            if (w.covered[si] || comp[si] >= 0) continue;
            CoverageHole hole;
            hole.id = int(holes.size());
            std::deque<Cell> queue{{sx, sy}};
            comp[si] = hole.id;
            while (!queue.empty()) {
                const Cell c = queue.front();
                queue.pop_front();
                hole.cells.insert(c);
                for (int d = 0; d < 8; ++d) {
                    const int nx = c.x + kDx[d];
                    const int ny = c.y + kDy[d];
                    if (!w.cell_uncovered_at(nx, ny)) continue;
                    const size_t ni = size_t(ny) * w.width + nx;
                    if (comp[ni] >= 0) continue;
                    comp[ni] = hole.id;
                    queue.push_back({nx, ny});
                }
            }
            holes.push_back(std::move(hole));
        }
    }

    for (CoverageHole& hole : holes) {
        for (const Cell& c : hole.cells) {
            for (int dy = 0; dy <= 1; ++dy) {
                for (int dx = 0; dx <= 1; ++dx) {
                    hole.vertices.insert(Vertex{c.x + dx, c.y + dy});
                }
            }
        }
        for (const Vertex& v : hole.vertices) {
            bool outside_neighbor = false;
            for (int dy = -1; dy <= 0 && !outside_neighbor; ++dy) {
                for (int dx = -1; dx <= 0; ++dx) {
                    const Cell c{v.x + dx, v.y + dy};
                    if (!w.in_grid(c) || !hole.cells.contains(c)) {
                        outside_neighbor = true;
                        break;
                    }
                }
            }
            if (outside_neighbor) hole.boundary.insert(v);
        }
        hole.boundary_list.assign(hole.boundary.begin(), hole.boundary.end());
        std::sort(hole.boundary_list.begin(), hole.boundary_list.end());
    }
    return holes;
}

// Id of the hole incident to v, if any. All uncovered cells sharing a vertex
// are 8-connected, so at most one hole touches any vertex.
inline std::optional<int> hole_at(const GridWorld& w, const std::vector<CoverageHole>& holes,
                                  const Vertex& v) {
    for (int dy = -1; dy <= 0; ++dy) {
        for (int dx = -1; dx <= 0; ++dx) {
            const Cell c{v.x + dx, v.y + dy};
            if (c.x < 0 || c.x >= w.width || c.y < 0 || c.y >= w.height) continue;
            if (w.cell_covered(c)) continue;
            for (const CoverageHole& h : holes) {
                if (h.cells.contains(c)) return h.id;
            }
        }
    }
    return std::nullopt;
}

// O(1) lookups from cells/vertices to hole ids, shared by planner and checker.
struct HoleIndex {
    int width = 0;
    int height = 0;
    std::vector<int32_t> cell_id;  // -1 for covered cells

    HoleIndex() = default;
    HoleIndex(const GridWorld& w, const std::vector<CoverageHole>& holes)
        : width(w.width), height(w.height) {
        cell_id.assign(size_t(width) * height, -1);
        for (const CoverageHole& h : holes) {
            for (const Cell& c : h.cells) cell_id[size_t(c.y) * width + c.x] = h.id;
        }
    }

    int at_cell(int cx, int cy) const {
        if (cx < 0 || cx >= width || cy < 0 || cy >= height) return -1;
        return cell_id[size_t(cy) * width + cx];
    }
    // Hole incident to a vertex, -1 when all incident cells are covered.
    int at_vertex(const Vertex& v) const {
        for (int dy = -1; dy <= 0; ++dy) {
            for (int dx = -1; dx <= 0; ++dx) {
                const int id = at_cell(v.x + dx, v.y + dy);
                if (id >= 0) return id;
            }
        }
        return -1;
    }
};

// Visibility between two vertices: the open segment must not cross a blocked
// cell, and may not pass exactly between two diagonally adjacent blocked cells.
inline bool line_of_sight(const GridWorld& w, const Vertex& a, const Vertex& b) {
    if (a == b) return true;
    const int dx = b.x - a.x;
    const int dy = b.y - a.y;

    if (dx == 0) {
        const int x = a.x;
        const int y0 = std::min(a.y, b.y);
        const int y1 = std::max(a.y, b.y);
        for (int y = y0; y < y1; ++y) {
            if (!w.cell_free(x - 1, y) && !w.cell_free(x, y)) return false;
        }
        return true;
    }
    if (dy == 0) {
        const int y = a.y;
        const int x0 = std::min(a.x, b.x);
        const int x1 = std::max(a.x, b.x);
        for (int x = x0; x < x1; ++x) {
            if (!w.cell_free(x, y - 1) && !w.cell_free(x, y)) return false;
        }
        return true;
    }

    // Interior lattice points are exactly the multiples of the primitive step.
    const int g = std::gcd(std::abs(dx), std::abs(dy));
    const int px = dx / g;
    const int py = dy / g;
    for (int i = 1; i < g; ++i) {
        const int cx = a.x + i * px;
        const int cy = a.y + i * py;
        const bool positive_slope = (dx > 0) == (dy > 0);
        // The two cells the segment does not enter at this corner.
        const Cell o1 = positive_slope ? Cell{cx - 1, cy} : Cell{cx - 1, cy - 1};
        const Cell o2 = positive_slope ? Cell{cx, cy - 1} : Cell{cx, cy};
        if (!w.cell_free(o1.x, o1.y) && !w.cell_free(o2.x, o2.y)) return false;
    }

    return walk_segment_cell_spans(
        Segment{to_point(a), to_point(b)},
        [&w](double, double, const Cell& c) { return w.cell_free(c.x, c.y); });
}

// Passability of a single king-move step; cheaper than full line_of_sight.
inline bool unit_step_free(const GridWorld& w, const Vertex& v, int dx, int dy) {
    if (dx != 0 && dy != 0) {
        return w.cell_free(dx > 0 ? v.x : v.x - 1, dy > 0 ? v.y : v.y - 1);
    }
    if (dx != 0) {
        const int cx = dx > 0 ? v.x : v.x - 1;
        return w.cell_free(cx, v.y) || w.cell_free(cx, v.y - 1);
    }
    const int cy = dy > 0 ? v.y : v.y - 1;
    return w.cell_free(v.x, cy) || w.cell_free(v.x - 1, cy);
}

}  // namespace corridor
