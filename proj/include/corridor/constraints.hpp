#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "corridor/grid_world.hpp"

namespace corridor {

// Angle comparisons share the same absolute tolerance as lengths, in degrees.
inline constexpr double kAngleTolDeg = 1e-9;

struct ConstraintSet {
    double l_min_m = 0.0;
    double theta_bmax_deg = 180.0;
    double d_row_m = 0.0;
    double d_cfod_m = std::numeric_limits<double>::infinity();
    double d_zero_m = std::numeric_limits<double>::infinity();

    void validate() const {
        if (l_min_m < 0.0) throw InvalidConstraints("l_min must be >= 0");
        if (theta_bmax_deg <= 0.0 || theta_bmax_deg > 180.0) {
            throw InvalidConstraints("turn bound must lie in (0, 180]");
        }
        if (d_row_m < 0.0) throw InvalidConstraints("separation must be >= 0");
        if (!(d_row_m < d_cfod_m)) {
            throw InvalidConstraints("require separation < loss-of-sight bound");
        }
        if (d_zero_m < 0.0) throw InvalidConstraints("storage bound must be >= 0");
    }

    bool storage_active() const { return std::isfinite(d_zero_m); }
    bool turn_active() const { return theta_bmax_deg < 180.0; }
};

// Leg length check, applied at turns; inclusive with absolute tolerance.
inline bool check_leg(const Vertex& parent, const Vertex& child, const ConstraintSet& cs,
                      double cell_size_m) {
    return euclid(parent, child) * cell_size_m >= cs.l_min_m - kLengthTol;
}

// Turn check at `parent`; collinear triples are not turns and always pass.
inline bool check_turn(const Vertex& grand, const Vertex& parent, const Vertex& child,
                       const ConstraintSet& cs) {
    if (is_collinear(grand, parent, child)) {
        // A reversal is a 180 degree heading change even though collinear.
        const int64_t dot = int64_t(parent.x - grand.x) * (child.x - parent.x) +
                            int64_t(parent.y - grand.y) * (child.y - parent.y);
        if (dot > 0) return true;
        return 180.0 <= cs.theta_bmax_deg + kAngleTolDeg;
    }
    return turn_angle(grand, parent, child) <= cs.theta_bmax_deg + kAngleTolDeg;
}

// In-hole length added by one leg, in meters.
inline double accumulate_hole_length(double acc_m, const Segment& leg_vertex_units,
                                     const CoverageHole& hole, double cell_size_m) {
    return acc_m + clip_length_in_cells(leg_vertex_units, hole.cells) * cell_size_m;
}

// One maximal contiguous run of a path through a single hole.
struct HoleTraversal {
    int hole_id = -1;
    double length_m = 0.0;
    int start_leg = -1;  // leg index where the run begins
    int end_leg = -1;    // leg index where it ends
};

// Portion of a leg inside some hole, as a parameter interval along the leg.
struct HoleInterval {
    double t0 = 0.0;
    double t1 = 0.0;
    int hole = -1;
};

// In-hole intervals of one leg in traversal order; touching spans of the same
// hole are merged (a single cell-corner touch does not break a run). Fills
// `events` (cleared first); reuse the vector across calls in hot loops.
inline void leg_hole_intervals(const HoleIndex& index, const Segment& leg,
                               double len_m, std::vector<HoleInterval>& events) {
    events.clear();
    walk_segment_cell_spans(leg, [&](double t0, double t1, const Cell& c) {
        const int id = index.at_cell(c.x, c.y);
        if (id < 0) return true;
        if (!events.empty() && events.back().hole == id &&
            (t0 - events.back().t1) * len_m <= kLengthTol) {
            events.back().t1 = t1;
        } else {
            events.push_back({t0, t1, id});
        }
        return true;
    });
}

inline std::vector<HoleInterval> leg_hole_intervals(const HoleIndex& index,
                                                    const Segment& leg,
                                                    double len_m) {
    std::vector<HoleInterval> events;
    leg_hole_intervals(index, leg, len_m, events);
    return events;
}

// Storage accounting carried along a growing path, one leg at a time. The
// state captures the single run that still touches the path's tip (if any).
struct TraversalState {
    int hole = -1;       // hole of the active run, -1 when none touches the tip
    double acc_m = 0.0;  // length of the active run
    bool carry = false;  // the run reaches the current tip exactly

    bool operator==(const TraversalState&) const = default;
};

// Advances the accounting across one leg. Returns false when any run that
// closes during the leg, or is still active after it, exceeds d_zero_m (the
// state is then unspecified). Mirrors TraversalTracker exactly.
inline bool advance_traversal(TraversalState& st, const HoleIndex& index,
                              const Segment& leg, double cell_size_m,
                              double d_zero_m) {
    const double len_m = euclid(leg.a, leg.b) * cell_size_m;
    double reach_t = 0.0;
    bool active = st.hole >= 0;
    static thread_local std::vector<HoleInterval> events;
    leg_hole_intervals(index, leg, len_m, events);
    for (const HoleInterval& ev : events) {
        const bool contiguous = active && ev.hole == st.hole && st.carry &&
                                (ev.t0 - reach_t) * len_m <= kLengthTol;
        if (!contiguous) {
            if (active && st.acc_m > d_zero_m + kLengthTol) return false;
            st = {ev.hole, 0.0, false};
            active = true;
        }
        st.acc_m += (ev.t1 - ev.t0) * len_m;
        reach_t = ev.t1;
        st.carry = true;
    }
    if (active) {
        if (st.acc_m > d_zero_m + kLengthTol) return false;
        st.carry = st.carry && (1.0 - reach_t) * len_m <= kLengthTol;
        if (!st.carry) st = {};
    }
    return true;
}

// The single cell a unit king leg owns under the lower-side convention: the
// diagonal case crosses no interior grid line and the axis cases ride one,
// so one formula covers all eight directions.
inline Cell unit_leg_cell(const Vertex& a, const Vertex& b) {
    return {b.x > a.x ? a.x : a.x - 1, b.y > a.y ? a.y : a.y - 1};
}

// advance_traversal specialised to a unit king leg whose owned cell carries
// `cell_hole_id` (-1 when covered): the event list is empty or the single
// full-length interval, and both cases reduce to straight-line updates.
inline bool advance_unit_leg(TraversalState& st, int cell_hole_id, double len_m,
                             double d_zero_m) {
    if (cell_hole_id < 0) {
        if (st.hole >= 0) {
            if (st.acc_m > d_zero_m + kLengthTol) return false;
            st.carry = st.carry && len_m <= kLengthTol;
            if (!st.carry) st = {};
        }
        return true;
    }
    if (st.hole != cell_hole_id || !st.carry) {
        if (st.hole >= 0 && st.acc_m > d_zero_m + kLengthTol) return false;
        st = {cell_hole_id, 0.0, false};
    }
    st.acc_m += len_m;
    st.carry = true;
    return st.acc_m <= d_zero_m + kLengthTol;
}

// Interior corridor audit shared by validation and planning: samples every
// quarter cell along the open segment (vertex endpoints are covered by the
// corridor mask) and requires every sample within [d_row, d_cfod]. On
// failure writes the offending distance to `bad` when given.
//
// Fast path: along the leg the distance to one corridor segment is convex,
// so its minimum is the segment-segment distance and its maximum sits at a
// leg endpoint. A leg whose exact band bounds clear both limits by a guard
// margin passes every sample a priori; only boundary-tight legs pay for the
// sampling loop, which stays the deciding authority.
inline bool leg_in_corridor(const GridWorld& world, const Point& a,
                            const Point& b, double* bad = nullptr) {
    const double len_units = euclid(a, b);
    if (len_units > 0.0 && world.infrastructure_m.size() >= 2) {
        constexpr double kGuard = 1e-7;
        const Point am{a.x * world.cell_size_m, a.y * world.cell_size_m};
        const Point bm{b.x * world.cell_size_m, b.y * world.cell_size_m};
        const Segment leg{am, bm};
        double lo = std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < world.infrastructure_m.size(); ++i) {
            const Segment f{world.infrastructure_m[i], world.infrastructure_m[i + 1]};
            lo = std::min(lo, segment_segment_distance(leg, f));
            hi = std::min(hi, std::max(point_segment_distance(am, f.a, f.b),
                                       point_segment_distance(bm, f.a, f.b)));
        }
        const bool lo_ok = world.d_row_m <= 0.0 ||
                           lo >= world.d_row_m - kLengthTol + kGuard;
        const bool hi_ok = !std::isfinite(world.d_cfod_m) ||
                           hi <= world.d_cfod_m + kLengthTol - kGuard;
        if (lo_ok && hi_ok) return true;
    }
    const int samples = int(std::ceil(len_units / 0.25));
    for (int k = 1; k < samples; ++k) {
        const double t = double(k) / samples;
        const Point p{(a.x + t * (b.x - a.x)) * world.cell_size_m,
                      (a.y + t * (b.y - a.y)) * world.cell_size_m};
        const double d = distance_to_polyline(p, world.infrastructure_m);
        if (d < world.d_row_m - kLengthTol || d > world.d_cfod_m + kLengthTol) {
            if (bad) *bad = d;
            return false;
        }
    }
    return true;
}

// Streams path legs and splits their in-hole portions into contiguous
// traversals. A traversal continues across a leg junction only when the path
// never leaves the hole's cells (zero-length gap); any positive excursion
// outside, or a hand-off to a different hole, closes the current run.
class TraversalTracker {
public:
    TraversalTracker(const HoleIndex& index, double cell_size_m)
        : index_(&index), cell_size_m_(cell_size_m) {}

    void feed_leg(const Segment& leg) {
        const double len_m = euclid(leg.a, leg.b) * cell_size_m_;
        double reach_t = 0.0;  // param up to which the active run extends
        static thread_local std::vector<HoleInterval> events;
        leg_hole_intervals(*index_, leg, len_m, events);
        for (const HoleInterval& ev : events) {
            const bool contiguous = active_ && ev.hole == current_.hole_id &&
                                    carry_ && (ev.t0 - reach_t) * len_m <= kLengthTol;
            if (!contiguous) {
                close_run();
                current_ = {ev.hole, 0.0, leg_index_, leg_index_};
                active_ = true;
            }
            current_.length_m += (ev.t1 - ev.t0) * len_m;
            current_.end_leg = leg_index_;
            reach_t = ev.t1;
            carry_ = true;
        }
        if (active_) {
            // The run survives into the next leg only if it touches this leg's end.
            carry_ = (1.0 - reach_t) * len_m <= kLengthTol;
            if (!carry_) close_run();
        }
        ++leg_index_;
    }

    std::vector<HoleTraversal> finish() {
        close_run();
        return traversals_;
    }

private:
    void close_run() {
        if (active_) {
            traversals_.push_back(current_);
            active_ = false;
        }
    }

    const HoleIndex* index_;
    double cell_size_m_;
    std::vector<HoleTraversal> traversals_;
    HoleTraversal current_;
    bool active_ = false;
    bool carry_ = false;
    int leg_index_ = 0;
};

struct ConstraintViolation {
    std::string constraint;  // "min_leg", "turn", "corridor", "storage", "obstacle"
    int vertex_index = -1;   // first offending vertex (or leg start for legs)
    double measured = 0.0;
    double limit = 0.0;
    int hole_id = -1;
};

struct ConstraintReport {
    bool min_leg_ok = true;
    bool turn_ok = true;
    bool corridor_ok = true;
    bool storage_ok = true;
    bool obstacle_ok = true;
    std::vector<ConstraintViolation> violations;
    double min_leg_m = std::numeric_limits<double>::infinity();
    double max_turn_deg = 0.0;
    std::vector<HoleTraversal> traversals;

    bool ok() const {
        return min_leg_ok && turn_ok && corridor_ok && storage_ok && obstacle_ok;
    }
};

// Full audit of a vertex path against world and constraints. Turning points
// are derived from the path (collinear runs merge into one leg); sight is
// audited over each merged straight run, the corridor at every vertex plus
// samples every quarter cell along each raw leg.
inline ConstraintReport validate_path(const GridWorld& world,
                                      const std::vector<CoverageHole>& holes,
                                      const ConstraintSet& cs,
                                      const std::vector<Vertex>& path) {
    cs.validate();
    if (path.size() < 2) throw MalformedPath("path needs at least 2 vertices");
    for (size_t i = 0; i < path.size(); ++i) {
        if (!world.in_grid(path[i])) throw MalformedPath("path vertex outside grid");
        if (i > 0 && path[i] == path[i - 1]) {
            throw MalformedPath("duplicate consecutive vertex");
        }
    }

    ConstraintReport rep;
    const double cell = world.cell_size_m;

    // Turning point indices: endpoints plus every heading change.
    std::vector<size_t> turns{0};
    for (size_t i = 1; i + 1 < path.size(); ++i) {
        if (!collinear_forward(path[i - 1], path[i], path[i + 1])) turns.push_back(i);
    }
    turns.push_back(path.size() - 1);

    for (size_t k = 1; k < turns.size(); ++k) {
        const double leg_m = euclid(path[turns[k - 1]], path[turns[k]]) * cell;
        rep.min_leg_m = std::min(rep.min_leg_m, leg_m);
        if (leg_m < cs.l_min_m - kLengthTol) {
            if (rep.min_leg_ok) {
                rep.violations.push_back(
                    {"min_leg", int(turns[k]), leg_m, cs.l_min_m, -1});
            }
            rep.min_leg_ok = false;
        }
    }
    for (size_t k = 1; k + 1 < turns.size(); ++k) {
        const size_t i = turns[k];
        const double ang = turn_angle(path[i - 1], path[i], path[i + 1]);
        rep.max_turn_deg = std::max(rep.max_turn_deg, ang);
        if (ang > cs.theta_bmax_deg + kAngleTolDeg) {
            if (rep.turn_ok) {
                rep.violations.push_back({"turn", int(i), ang, cs.theta_bmax_deg, -1});
            }
            rep.turn_ok = false;
        }
    }

    // Sight is required over each full straight run: a pinched corner is no
    // more passable as a mid-run vertex than as a mid-leg lattice point.
    for (size_t k = 1; k < turns.size(); ++k) {
        if (!line_of_sight(world, path[turns[k - 1]], path[turns[k]])) {
            if (rep.obstacle_ok) {
                rep.violations.push_back({"obstacle", int(turns[k - 1]), 0.0, 0.0, -1});
            }
            rep.obstacle_ok = false;
        }
    }

    if (world.has_corridor()) {
        for (size_t i = 0; i < path.size(); ++i) {
            if (!world.in_corridor(path[i])) {
                if (rep.corridor_ok) {
                    const double d =
                        distance_to_polyline(world.vertex_m(path[i]), world.infrastructure_m);
                    rep.violations.push_back({"corridor", int(i), d, world.d_row_m, -1});
                }
                rep.corridor_ok = false;
            }
        }
        for (size_t i = 0; i + 1 < path.size() && rep.corridor_ok; ++i) {
            double bad = 0.0;
            if (!leg_in_corridor(world, to_point(path[i]), to_point(path[i + 1]),
                                 &bad)) {
                rep.violations.push_back({"corridor", int(i), bad, world.d_row_m, -1});
                rep.corridor_ok = false;
            }
        }
    }

    if (cs.storage_active() && !holes.empty()) {
        const HoleIndex index(world, holes);
        TraversalTracker tracker(index, cell);
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            tracker.feed_leg(Segment{to_point(path[i]), to_point(path[i + 1])});
        }
        rep.traversals = tracker.finish();
        for (const HoleTraversal& tr : rep.traversals) {
            if (tr.length_m > cs.d_zero_m + kLengthTol) {
                if (rep.storage_ok) {
                    rep.violations.push_back(
                        {"storage", tr.end_leg + 1, tr.length_m, cs.d_zero_m, tr.hole_id});
                }
                rep.storage_ok = false;
            }
        }
    }
    return rep;
}

}  // namespace corridor
