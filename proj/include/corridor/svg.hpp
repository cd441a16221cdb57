#pragma once

// Deterministic SVG rendering of a world and its planner results, following
// the survey-figure key: yellow coverage circles, grey obstacles, a red
// corridor region, the sight-only shortest path in white, the final path in
// green, and the visited trace in blue. Six layer groups are always emitted
// in that order so documents diff cleanly.

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace corridor {

namespace detail {

class SvgOut {
  public:
    explicit SvgOut(int height) : h_(height) {
        out_ << std::fixed << std::setprecision(3);
    }

    // World y grows upward, SVG y downward.
    double flip(double y) const { return double(h_) - y; }

    template <typename T>
    SvgOut& operator<<(const T& v) {
        out_ << v;
        return *this;
    }

    std::string str() const { return out_.str(); }

  private:
    std::ostringstream out_;
    int h_;
};

inline void svg_polyline(SvgOut& s, const std::vector<Point>& pts,
                         const char* color, double width, double opacity) {
    if (pts.size() < 2) return;
    s << "    <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
      << width << "\" stroke-opacity=\"" << opacity
      << "\" stroke-linejoin=\"round\" stroke-linecap=\"round\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s << " ";
        s << pts[i].x << "," << s.flip(pts[i].y);
    }
    s << "\"/>\n";
}

inline std::vector<Point> path_points(const std::vector<Vertex>& vs) {
    std::vector<Point> pts;
    pts.reserve(vs.size());
    for (const Vertex& v : vs) pts.push_back({double(v.x), double(v.y)});
    return pts;
}

}  // namespace detail

// Render one world plus any recorded results. The white layer shows the
// first sight-only ("theta") record, the green layer the first constrained
// record (falling back to the last non-theta one), and the blue layer that
// record's visited trace. Coordinates are cell units.
inline std::string render_svg(const GridWorld& world,
                              const std::vector<CoverageHole>& holes,
                              const std::vector<ResultRecord>& results) {
    const int W = world.width, H = world.height;
    const double cell = world.cell_size_m;
    detail::SvgOut s(H);

    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1 -1 " << (W + 2)
      << " " << (H + 2) << "\" width=\"" << (W + 2) * 8 << "\" height=\""
      << (H + 2) * 8 << "\">\n";
    s << "  <rect x=\"-1\" y=\"-1\" width=\"" << (W + 2) << "\" height=\""
      << (H + 2) << "\" fill=\"#ffffff\"/>\n";
    s << "  <rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
      << "\" fill=\"#f2efe9\" stroke=\"#333333\" stroke-width=\"0.12\"/>\n";

    // Layer 1: coverage. Access-point disks when the world keeps them;
    // otherwise the covered cells themselves, with hole boundaries traced.
    s << "  <g id=\"coverage\">\n";
    if (!world.access_points.empty()) {
        for (const AccessPoint& ap : world.access_points) {
            s << "    <circle cx=\"" << ap.center_m.x / cell << "\" cy=\""
              << s.flip(ap.center_m.y / cell) << "\" r=\"" << ap.radius_m / cell
              << "\" fill=\"#f7d843\" fill-opacity=\"0.35\" stroke=\"#d4af1f\" "
                 "stroke-width=\"0.1\"/>\n";
        }
    } else {
        for (int y = 0; y < H; ++y) {
            int run = -1;
            for (int x = 0; x <= W; ++x) {
                const bool on = x < W && world.cell_covered({x, y});
                if (on && run < 0) run = x;
                if (!on && run >= 0) {
                    s << "    <rect x=\"" << run << "\" y=\"" << s.flip(y + 1)
                      << "\" width=\"" << (x - run)
                      << "\" height=\"1\" fill=\"#f7d843\" fill-opacity=\"0.25\"/>\n";
                    run = -1;
                }
            }
        }
    }
    // Hole boundaries as vertex dots (the boundary list is unordered).
    for (const CoverageHole& hole : holes) {
        for (const Vertex& v : hole.boundary_list) {
            s << "    <circle cx=\"" << double(v.x) << "\" cy=\""
              << s.flip(double(v.y))
              << "\" r=\"0.12\" fill=\"#d4af1f\" fill-opacity=\"0.8\"/>\n";
        }
    }
    s << "  </g>\n";

    // Layer 2: obstacles as grey row runs of blocked cells.
    s << "  <g id=\"obstacles\">\n";
    for (int y = 0; y < H; ++y) {
        int run = -1;
        for (int x = 0; x <= W; ++x) {
            const bool on = x < W && !world.cell_free(x, y);
            if (on && run < 0) run = x;
            if (!on && run >= 0) {
                s << "    <rect x=\"" << run << "\" y=\"" << s.flip(y + 1)
                  << "\" width=\"" << (x - run)
                  << "\" height=\"1\" fill=\"#8d8d8d\"/>\n";
                run = -1;
            }
        }
    }
    s << "  </g>\n";

    // Layer 3: corridor band around the infrastructure line.
    s << "  <g id=\"corridor\">\n";
    if (world.has_corridor()) {
        std::vector<Point> line;
        for (const Point& p : world.infrastructure_m) {
            line.push_back({p.x / cell, p.y / cell});
        }
        if (std::isfinite(world.d_cfod_m)) {
            detail::svg_polyline(s, line, "#d84a3a", 2.0 * world.d_cfod_m / cell,
                                 0.18);
        }
        detail::svg_polyline(s, line, "#b22516", 0.25, 0.9);
    }
    s << "  </g>\n";

    const ResultRecord* base = nullptr;
    const ResultRecord* final_rec = nullptr;
    for (const ResultRecord& r : results) {
        if (base == nullptr && r.planner == "theta") base = &r;
        if (r.planner == "constrained") {
            if (final_rec == nullptr || final_rec->planner != "constrained") {
                final_rec = &r;
            }
        } else if (r.planner != "theta" &&
                   (final_rec == nullptr || final_rec->planner != "constrained")) {
            final_rec = &r;
        }
    }
    if (final_rec == nullptr && base != nullptr && results.size() == 1) {
        final_rec = base;  // a lone sight-only run is also the final path
    }

    // Layer 4: continuous sight-only shortest path, white.
    s << "  <g id=\"baseline-path\">\n";
    if (base != nullptr && base->result.found) {
        detail::svg_polyline(
            s, detail::path_points(base->result.path.turning_points), "#ffffff",
            0.3, 1.0);
    }
    s << "  </g>\n";

    // Layer 5: final constrained path, green.
    s << "  <g id=\"final-path\">\n";
    if (final_rec != nullptr && final_rec->result.found) {
        detail::svg_polyline(
            s, detail::path_points(final_rec->result.path.turning_points),
            "#2e9e46", 0.35, 1.0);
    }
    s << "  </g>\n";

    // Layer 6: visited trace of the final record, blue.
    s << "  <g id=\"visited-trace\">\n";
    if (final_rec != nullptr) {
        detail::svg_polyline(
            s, detail::path_points(final_rec->result.path.visited_trace),
            "#2b6cb0", 0.08, 0.55);
    }
    s << "  </g>\n";

    s << "</svg>\n";
    return s.str();
}

}  // namespace corridor
