#pragma once

// Constraint-aware any-angle planner: bounded turn angle, minimum straight
// run between turns, corridor band membership, and a bounded stay inside any
// single coverage hole. The outer search runs over (vertex, run anchor)
// states so every junction test reads frozen geometry instead of a mutable
// parent record. Hole crossings are delegated to an inner exhaustive search
// whose exits rejoin the outer frontier as forced macro edges that no
// shortcut may bypass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "constraints.hpp"
#include "planner.hpp"

namespace corridor {

// Node shape reported by hole exploration and the search instrumentation.
// Costs are meters; `parent` anchors the straight run that reaches `vertex`.
struct SearchNode {
    Vertex vertex{};
    double g = 0.0;
    double h = 0.0;
    Vertex parent{};
    Vertex via_neighbor{};
    double hole_acc = 0.0;
    bool forced_parent = false;
};

// Search context handed to a hole exploration: the run anchor crossing the
// entry, the turn before it, costs at both points, and the storage
// accounting at both points. `last_turn == entry` means the path begins at
// the entry itself; `prev_turn == last_turn` means the run into the anchor
// carries no angle obligation.
struct InheritedState {
    Vertex last_turn{};
    Vertex prev_turn{};
    double g_m = 0.0;
    double g_last_turn_m = 0.0;
    TraversalState traversal{};
    TraversalState traversal_last_turn{};
};

// Distance-based rescind rule for a failed in-hole probe: measure how far the
// dead tip sits from the hole boundary, walk that arc length back along the
// evolved chain, and return the index of the nearest on-path vertex (ties go
// to the earlier vertex). Index 0 — the entry itself — means nothing of the
// probe survives.
inline std::size_t backtrack_in_hole(const std::vector<Vertex>& evolved,
                                     const CoverageHole& hole) {
    if (evolved.empty()) throw Error("backtrack: empty evolved path");
    if (evolved.size() == 1 || hole.boundary_list.empty()) return 0;

    const Vertex tip = evolved.back();
    double d_b = std::numeric_limits<double>::infinity();
    for (const Vertex& b : hole.boundary_list) d_b = std::min(d_b, euclid(tip, b));

    std::vector<double> arc(evolved.size(), 0.0);
    for (std::size_t i = 1; i < evolved.size(); ++i) {
        arc[i] = arc[i - 1] + euclid(evolved[i - 1], evolved[i]);
    }
    const double target = std::max(0.0, arc.back() - d_b);

    std::size_t leg = 0;
    while (leg + 2 < evolved.size() && arc[leg + 1] < target) ++leg;
    const double span = arc[leg + 1] - arc[leg];
    const double t = span > 0.0 ? std::clamp((target - arc[leg]) / span, 0.0, 1.0) : 0.0;
    const Point a = to_point(evolved[leg]);
    const Point b = to_point(evolved[leg + 1]);
    const Point p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};

    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < evolved.size(); ++i) {
        const double d = euclid(to_point(evolved[i]), p);
        if (d < best_d - 1e-12) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

namespace detail {

// Immutable cons cell of an evolved polyline. Records share tails, so an
// improved record swaps one pointer while stale readers keep coherent chains.
struct PathLink {
    Vertex v{};
    std::shared_ptr<const PathLink> prev;
};

inline std::shared_ptr<const PathLink> cons(const Vertex& v,
                                            std::shared_ptr<const PathLink> prev) {
    return std::make_shared<const PathLink>(PathLink{v, std::move(prev)});
}

inline std::vector<Vertex> chain_of(const PathLink* link) {
    std::vector<Vertex> out;
    for (; link; link = link->prev.get()) out.push_back(link->v);
    std::reverse(out.begin(), out.end());
    return out;
}

// One search state. The tip vertex lives in the map key; `anchor` starts the
// straight run reaching the tip. Everything a junction test needs is stored
// here, never read back from another (mutable) record.
struct RunRecord {
    double g = 0.0;          // cost to the tip, vertex units
    double g_pa = 0.0;       // cost at the anchor
    Vertex anchor{};
    Vertex pa{};             // turn before the anchor; == anchor when none
    TraversalState ts{};     // storage accounting at the tip
    TraversalState ts_pa{};  // and at the anchor
    Vertex via{};            // vertex whose expansion produced this record
    bool forced = false;     // hole exit: no shortcut may bypass this vertex
    bool closed = false;
    std::shared_ptr<const PathLink> link;         // polyline start..tip
    std::shared_ptr<const PathLink> anchor_link;  // its suffix at the anchor
};

// Total in-hole length of one leg, meters. Positive means the leg actually
// crosses uncovered cells under the lower-side ownership convention.
inline double hole_clip_m(const HoleIndex& index, const Vertex& a, const Vertex& b,
                          double cell_size_m) {
    const Segment leg{to_point(a), to_point(b)};
    const double len_m = euclid(leg.a, leg.b) * cell_size_m;
    double clip = 0.0;
    static thread_local std::vector<HoleInterval> events;
    leg_hole_intervals(index, leg, len_m, events);
    for (const HoleInterval& ev : events) {
        clip += (ev.t1 - ev.t0) * len_m;
    }
    return clip;
}

// Exhaustive constrained search over one hole's crossing subgraph: unit king
// moves between hole vertices whose legs have positive in-hole length. The
// entry's run anchor is inherited and fixed. Dead interior probes rescind via
// the distance rule, abandoned edges keep infinite weight, and the best
// (g, stay) record per boundary vertex is returned once the frontier empties.
class HoleExplorer {
  public:
    HoleExplorer(const GridWorld& world, const HoleIndex& index, const CoverageHole& hole,
                 const ConstraintSet& cs, Vertex entry, Vertex goal,
                 const RunRecord& inherited, long long& expansions, long long& backtracks,
                 std::vector<Vertex>* trace)
        : world_(world), index_(index), hole_(hole), cs_(cs), entry_(entry), goal_(goal),
          cell_(world.cell_size_m), corridor_(world.has_corridor()),
          lmin_(cs.l_min_m > 0.0), turn_(cs.turn_active()),
          budget_(8 * int(hole.vertices.size()) + 64),
          expansions_(expansions), backtracks_(backtracks), trace_(trace) {
        RunRecord seed = inherited;
        seed.forced = false;
        seed.closed = false;
        recs_.emplace(key(entry_), seed);
        heap_.push({seed.g, entry_});
    }

    // Best reachable record per exit vertex, in vertex order.
    std::vector<std::pair<Vertex, RunRecord>> run() {
        while (!heap_.empty() && !abort_) {
            const Entry e = heap_.top();
            heap_.pop();
            auto it = recs_.find(key(e.v));
            if (it == recs_.end() || it->second.closed || it->second.g != e.g) continue;
            close(e.v);
            const RunRecord rec = it->second;  // copy: expansion may rehash

            bool collected = false;
            if (e.v != entry_ &&
                (hole_.boundary.contains(e.v) || (e.v == goal_ && hole_.has_vertex(goal_)))) {
                offer_exit(e.v, rec);
                collected = true;
            }
            const int feasible = expand(e.v, rec);
            if (feasible == 0 && !collected && e.v != entry_) rescind(rec);
        }
        std::vector<std::pair<Vertex, RunRecord>> out(exits_.begin(), exits_.end());
        return out;
    }

  private:
    struct Entry {
        double g;
        Vertex v;
    };
    struct EntryLess {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.g != b.g) return a.g > b.g;  // smaller g first
            if (a.v.x != b.v.x) return a.v.x > b.v.x;
            return a.v.y > b.v.y;
        }
    };
    struct Undo {
        Vertex v;
        bool close;
        bool had;
        RunRecord prev;
    };

    std::size_t key(const Vertex& v) const { return world_.vertex_index(v); }
    Vertex vertex_of(std::size_t k) const {
        return {int(k) % (world_.width + 1), int(k) / (world_.width + 1)};
    }
    std::uint64_t edge_key(const Vertex& a, const Vertex& b) const {
        return std::uint64_t(key(a)) * world_.vertex_count() + key(b);
    }

    void close(const Vertex& v) {
        const std::size_t k = key(v);
        close_pos_[k] = log_.size();
        log_.push_back({v, true, false, {}});
        recs_[k].closed = true;
        if (trace_) trace_->push_back(v);
        ++expansions_;
    }

    void offer_exit(const Vertex& v, RunRecord rec) {
        rec.forced = true;
        rec.closed = false;
        auto [it, fresh] = exits_.try_emplace(v, rec);
        if (fresh) return;
        RunRecord& old = it->second;
        if (rec.g < old.g - 1e-12 ||
            (rec.g <= old.g + 1e-12 && rec.ts.acc_m < old.ts.acc_m - 1e-12)) {
            old = rec;
        }
    }

    int expand(const Vertex& v, const RunRecord& r) {
        int feasible = 0;
        for (const auto& [dx, dy] : king_moves()) {
            const Vertex n{v.x + dx, v.y + dy};
            if (!world_.in_grid(n)) continue;
            if (!hole_.has_vertex(n)) continue;
            if (blocked_.contains(edge_key(v, n))) continue;
            if (corridor_ && !world_.in_corridor(n)) continue;
            if (!unit_step_free(world_, v, dx, dy)) continue;
            // Zero-clip boundary edges belong to the outer world, not the
            // crossing subgraph. Unit legs own exactly one cell, so the gate
            // and the traversal advance below collapse to O(1).
            const Cell oc = unit_leg_cell(v, n);
            const int cid = index_.at_cell(oc.x, oc.y);
            const double len_m = euclid(v, n) * cell_;
            if (cid < 0 || len_m <= kLengthTol) continue;

            RunRecord c;
            const std::shared_ptr<const PathLink>* anchor_tail;
            if (r.anchor == v) {  // path begins here: first leg is unconstrained
                c.anchor = v;
                c.pa = v;
                c.ts_pa = r.ts;
                c.g_pa = r.g;
                anchor_tail = &r.link;
            } else if (collinear_forward(r.anchor, v, n)) {
                // Same king-direction split as the outer search: anchor->v is
                // free by construction and v->n was checked above.
                c.anchor = r.anchor;
                c.pa = r.pa;
                c.ts_pa = r.ts_pa;
                c.g_pa = r.g_pa;
                anchor_tail = &r.anchor_link;
            } else {
                if (lmin_ && euclid(r.anchor, v) * cell_ < cs_.l_min_m - kLengthTol) continue;
                if (turn_ && turn_angle(r.anchor, v, n) > cs_.theta_bmax_deg + kAngleTolDeg) {
                    continue;
                }
                c.anchor = v;
                c.pa = r.anchor;
                c.ts_pa = r.ts;
                c.g_pa = r.g;
                anchor_tail = &r.link;
            }
            c.ts = r.ts;
            if (!advance_unit_leg(c.ts, cid, len_m, cs_.d_zero_m)) continue;
            if (corridor_ && !leg_in_corridor(world_, to_point(v), to_point(n))) continue;
            ++feasible;
            c.g = r.g + euclid(v, n);
            c.via = v;
            upsert(n, std::move(c), r.link, *anchor_tail);
        }
        return feasible;
    }

    // Candidate links build only on acceptance, as in the outer search.
    void upsert(const Vertex& n, RunRecord&& c,
                const std::shared_ptr<const PathLink>& tail,
                const std::shared_ptr<const PathLink>& anchor_tail) {
        const std::size_t k = key(n);
        const double g = c.g;
        auto it = recs_.find(k);
        if (it != recs_.end() && g >= it->second.g) return;
        c.link = cons(n, tail);
        c.anchor_link = anchor_tail;
        if (it == recs_.end()) {
            log_.push_back({n, false, false, {}});
            recs_.emplace(k, std::move(c));
        } else {
            log_.push_back({n, false, true, it->second});
            it->second = std::move(c);  // reopens if closed
        }
        heap_.push({g, n});
    }

    // Dead interior probe: block the abandoned suffix and roll the search
    // back to the instant before the rescind vertex closed.
    void rescind(const RunRecord& r) {
        ++backtracks_;
        std::vector<Vertex> probe;
        for (const PathLink* l = r.link.get(); l; l = l->prev.get()) {
            probe.push_back(l->v);
            if (l->v == entry_) break;
        }
        std::reverse(probe.begin(), probe.end());
        if (probe.size() < 2) return;

        std::size_t idx = backtrack_in_hole(probe, hole_);
        idx = std::min(idx, probe.size() - 2);
        for (std::size_t i = idx; i + 1 < probe.size(); ++i) {
            blocked_.insert(edge_key(probe[i], probe[i + 1]));
        }
        if (--budget_ < 0) {
            abort_ = true;
            return;
        }
        auto cp = close_pos_.find(key(probe[idx]));
        if (cp == close_pos_.end()) return;  // reopened meanwhile: blocks suffice
        roll_to(cp->second);
        heap_ = {};
        for (const auto& [k, rec] : recs_) {
            if (!rec.closed) heap_.push({rec.g, vertex_of(k)});
        }
    }

    void roll_to(std::size_t cut) {
        while (log_.size() > cut) {
            Undo u = std::move(log_.back());
            log_.pop_back();
            const std::size_t k = key(u.v);
            if (u.close) {
                recs_[k].closed = false;
                close_pos_.erase(k);
                if (trace_) trace_->pop_back();
            } else if (u.had) {
                recs_[k] = std::move(u.prev);
            } else {
                recs_.erase(k);
            }
        }
    }

    const GridWorld& world_;
    const HoleIndex& index_;
    const CoverageHole& hole_;
    const ConstraintSet& cs_;
    Vertex entry_;
    Vertex goal_;
    double cell_;
    bool corridor_;
    bool lmin_;
    bool turn_;
    int budget_;
    bool abort_ = false;
    long long& expansions_;
    long long& backtracks_;
    std::vector<Vertex>* trace_;
    std::unordered_map<std::size_t, RunRecord> recs_;
    std::priority_queue<Entry, std::vector<Entry>, EntryLess> heap_;
    std::vector<Undo> log_;
    std::unordered_map<std::size_t, std::size_t> close_pos_;
    std::unordered_set<std::uint64_t> blocked_;
    std::map<Vertex, RunRecord> exits_;
};

// Outer search. States are (vertex, anchor) pairs; a popped state expands by
// a grandparent-consistent shortcut first and a parent-consistent unit step
// on its failure. Vertices touching a hole trigger an exploration whose
// exits compete on the shared frontier as forced records.
class ConstrainedSearch {
  public:
    ConstrainedSearch(const GridWorld& world, const std::vector<CoverageHole>& holes,
                      const ConstraintSet& cs, Vertex start, Vertex goal)
        : world_(world), holes_(holes), cs_(cs), start_(start), goal_(goal),
          index_(world, holes), cell_(world.cell_size_m),
          corridor_(world.has_corridor()),
          storage_(cs.storage_active() && !holes.empty()),
          lmin_(cs.l_min_m > 0.0), turn_(cs.turn_active()),
          stride_(world.vertex_count()) {
        if (!world.in_grid(start) || !world.in_grid(goal)) {
            throw InfeasibleEndpoints("constrained: endpoint off the vertex grid");
        }
        int max_id = -1;
        for (const CoverageHole& h : holes_) max_id = std::max(max_id, h.id);
        by_id_.assign(std::size_t(max_id + 1), nullptr);
        for (const CoverageHole& h : holes_) by_id_[std::size_t(h.id)] = &h;
        seen_.resize(by_id_.size());
        for (const CoverageHole& h : holes_) {
            std::array<int, 4> bb{std::numeric_limits<int>::max(),
                                  std::numeric_limits<int>::max(),
                                  std::numeric_limits<int>::min(),
                                  std::numeric_limits<int>::min()};
            for (const Cell& c : h.cells) {
                bb[0] = std::min(bb[0], c.x);
                bb[1] = std::min(bb[1], c.y);
                bb[2] = std::max(bb[2], c.x);
                bb[3] = std::max(bb[3], c.y);
            }
            if (!h.cells.empty()) hole_boxes_.push_back(bb);
        }
    }

    PlanResult run() {
        if (start_ == goal_) {
            return {true, PlannedPath{{start_}, 0.0, {}, 0, 0}};
        }
        if (corridor_ && (!world_.in_corridor(start_) || !world_.in_corridor(goal_))) {
            return {false, {}};
        }
        RunRecord seed;
        seed.anchor = start_;
        seed.pa = start_;
        seed.via = start_;
        seed.link = cons(start_, nullptr);
        seed.anchor_link = seed.link;
        recs_.emplace(key(start_, start_), seed);
        heap_.push({euclid(start_, goal_), 0.0, start_, start_});

        while (!heap_.empty()) {
            const Entry e = heap_.top();
            heap_.pop();
            const std::int64_t k = key(e.v, e.a);
            auto it = recs_.find(k);
            if (it == recs_.end() || it->second.closed || it->second.g != e.g) continue;
            it->second.closed = true;
            ++expansions_;
            trace_.push_back(e.v);
            const RunRecord rec = it->second;  // copy: merges may rehash

            if (e.v == goal_ && final_run_ok(rec)) return reconstruct(rec);

            int feasible = 0;
            if (storage_) {
                const CoverageHole* h = hole_by_id(index_.at_vertex(e.v));
                if (h != nullptr) feasible += explore(e.v, rec, *h);
            }
            feasible += expand(e.v, rec);
            // All continuations abandoned: the closed record keeps this
            // arrival at infinite weight and the frontier resumes beside the
            // via neighbour.
            if (feasible == 0 && e.v != goal_) ++backtracks_;
        }
        PlannedPath none;
        none.visited_trace = trace_;
        none.expansions = expansions_;
        none.backtracks = backtracks_;
        return {false, none};
    }

  private:
    struct Entry {
        double f;
        double g;
        Vertex v;
        Vertex a;
    };
    struct EntryLess {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.f != b.f) return a.f > b.f;  // smaller f first
            if (a.g != b.g) return a.g < b.g;  // larger g first
            if (a.v.x != b.v.x) return a.v.x > b.v.x;
            if (a.v.y != b.v.y) return a.v.y > b.v.y;
            if (a.a.x != b.a.x) return a.a.x > b.a.x;
            return a.a.y > b.a.y;
        }
    };
    using ExploreKey = std::tuple<int, int, int, int, int, int,  // entry, anchor, pa
                                  int, double, bool,             // stay at the tip
                                  int, double, bool>;            // stay at the anchor

    std::int64_t key(const Vertex& v, const Vertex& a) const {
        return std::int64_t(world_.vertex_index(v)) * std::int64_t(stride_) +
               std::int64_t(world_.vertex_index(a));
    }

    bool final_run_ok(const RunRecord& r) const {
        if (!lmin_) return true;
        return euclid(r.anchor, goal_) * cell_ >= cs_.l_min_m - kLengthTol;
    }

    const CoverageHole* hole_by_id(int hid) const {
        if (hid < 0 || std::size_t(hid) >= by_id_.size()) return nullptr;
        return by_id_[std::size_t(hid)];
    }

    bool interior(const Vertex& n) const {
        const CoverageHole* h = hole_by_id(index_.at_vertex(n));
        return h != nullptr && !h->boundary.contains(n);
    }

    // A leg of the outer search must keep zero in-hole length; the traversal
    // state still advances so touch-and-carry bookkeeping matches the audit.
    bool outer_leg_ok(const Vertex& a, const Vertex& b, const TraversalState& from,
                      TraversalState& out) const {
        out = from;
        if (!storage_) return true;
        const int dx = b.x - a.x;
        const int dy = b.y - a.y;
        if (dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1) {
            const Cell c = unit_leg_cell(a, b);
            const int cid = index_.at_cell(c.x, c.y);
            const double len_m = euclid(a, b) * cell_;
            if (cid >= 0 && len_m > kLengthTol) return false;
            return advance_unit_leg(out, cid, len_m, cs_.d_zero_m);
        }
        if (from.hole < 0 && leg_misses_every_hole(a, b)) return true;
        if (hole_clip_m(index_, a, b, cell_) > kLengthTol) return false;
        return advance_traversal(out, index_, {to_point(a), to_point(b)}, cell_,
                                 cs_.d_zero_m);
    }

    // Cells a lattice segment can own under the lower-side convention span
    // exactly [min, max-1] per axis (the min-1 column/row when the segment
    // rides a grid line). A leg whose range misses every hole box has zero
    // clip, and with no active run the traversal state advances unchanged.
    bool leg_misses_every_hole(const Vertex& a, const Vertex& b) const {
        const int xlo = a.x == b.x ? a.x - 1 : std::min(a.x, b.x);
        const int xhi = a.x == b.x ? a.x - 1 : std::max(a.x, b.x) - 1;
        const int ylo = a.y == b.y ? a.y - 1 : std::min(a.y, b.y);
        const int yhi = a.y == b.y ? a.y - 1 : std::max(a.y, b.y) - 1;
        for (const std::array<int, 4>& bb : hole_boxes_) {
            if (xhi >= bb[0] && xlo <= bb[2] && yhi >= bb[1] && ylo <= bb[3]) {
                return false;
            }
        }
        return true;
    }

    bool upsert(const Vertex& n, const Vertex& a, RunRecord c) {
        const std::int64_t k = key(n, a);
        const double g = c.g;
        auto it = recs_.find(k);
        if (it == recs_.end()) {
            recs_.emplace(k, std::move(c));
        } else if (g < it->second.g) {
            it->second = std::move(c);  // reopens if closed
        } else {
            return false;
        }
        heap_.push({g + euclid(n, goal_), g, n, a});
        return true;
    }

    // Candidate links build only on acceptance; a rejected candidate must
    // not pay for a fresh cons cell.
    bool upsert(const Vertex& n, const Vertex& a, RunRecord&& c,
                const std::shared_ptr<const PathLink>& tail,
                const std::shared_ptr<const PathLink>& anchor_tail) {
        const std::int64_t k = key(n, a);
        const double g = c.g;
        auto it = recs_.find(k);
        if (it != recs_.end() && g >= it->second.g) return false;
        c.link = cons(n, tail);
        c.anchor_link = anchor_tail;
        if (it == recs_.end()) {
            recs_.emplace(k, std::move(c));
        } else {
            it->second = std::move(c);  // reopens if closed
        }
        heap_.push({g + euclid(n, goal_), g, n, a});
        return true;
    }

    int explore(const Vertex& entry, const RunRecord& r, const CoverageHole& hole) {
        const ExploreKey ek{entry.x,      entry.y,       r.anchor.x,    r.anchor.y,
                            r.pa.x,       r.pa.y,        r.ts.hole,     r.ts.acc_m,
                            r.ts.carry,   r.ts_pa.hole,  r.ts_pa.acc_m, r.ts_pa.carry};
        auto& seen = seen_[std::size_t(hole.id)];
        auto [sit, fresh] = seen.try_emplace(ek, r.g);
        if (!fresh) {
            if (r.g >= sit->second) return 0;  // dominated: same exits, higher g
            sit->second = r.g;
        }
        HoleExplorer explorer(world_, index_, hole, cs_, entry, goal_, r, expansions_,
                              backtracks_, &trace_);
        int merged = 0;
        for (auto& [v, rec] : explorer.run()) {
            ++merged;
            upsert(v, rec.anchor, rec);
        }
        return merged;
    }

    int expand(const Vertex& v, const RunRecord& r) {
        int feasible = 0;
        for (const auto& [dx, dy] : king_moves()) {
            const Vertex n{v.x + dx, v.y + dy};
            if (!world_.in_grid(n)) continue;
            if (corridor_ && !world_.in_corridor(n)) continue;
            if (storage_ && interior(n)) continue;  // hole interiors: exploration only
            if (!unit_step_free(world_, v, dx, dy)) continue;

            // Grandparent-consistent shortcut: link n straight to the anchor.
            if (!r.forced && r.anchor != v && n != r.anchor) {
                const bool start_anchor = r.pa == r.anchor;
                const bool straight_through =
                    !start_anchor && collinear_forward(r.pa, r.anchor, n);
                if (!straight_through) {
                    // Gates run cheapest first: the O(length) sight scan only
                    // pays off for legs every constant-time test accepts.
                    bool ok = true;
                    if (!start_anchor && turn_) {
                        ok = turn_angle(r.pa, r.anchor, n) <=
                             cs_.theta_bmax_deg + kAngleTolDeg;
                    }
                    if (ok && corridor_) {
                        ok = leg_in_corridor(world_, to_point(r.anchor), to_point(n));
                    }
                    TraversalState ts;
                    if (ok) ok = outer_leg_ok(r.anchor, n, r.ts_pa, ts);
                    if (ok) ok = line_of_sight(world_, r.anchor, n);
                    if (ok) {
                        ++feasible;
                        RunRecord c;
                        c.g = r.g_pa + euclid(r.anchor, n);
                        c.g_pa = r.g_pa;
                        c.anchor = r.anchor;
                        c.pa = r.pa;
                        c.ts = ts;
                        c.ts_pa = r.ts_pa;
                        c.via = v;
                        upsert(n, c.anchor, std::move(c), r.anchor_link, r.anchor_link);
                        continue;  // unit fallback only on shortcut failure
                    }
                }
            }

            // Parent-consistent unit step.
            RunRecord c;
            const std::shared_ptr<const PathLink>* anchor_tail;
            if (r.anchor == v) {  // the start: first leg is unconstrained
                c.anchor = v;
                c.pa = v;
                c.ts_pa = r.ts;
                c.g_pa = r.g;
                anchor_tail = &r.link;
            } else if (collinear_forward(r.anchor, v, n)) {
                // Collinear runs follow a king direction, so the swept cells
                // of anchor->n are those of anchor->v (free by construction)
                // plus the unit step checked above: no fresh sight scan.
                c.anchor = r.anchor;
                c.pa = r.pa;
                c.ts_pa = r.ts_pa;
                c.g_pa = r.g_pa;
                anchor_tail = &r.anchor_link;
            } else {
                if (lmin_ && euclid(r.anchor, v) * cell_ < cs_.l_min_m - kLengthTol) continue;
                if (turn_ && turn_angle(r.anchor, v, n) > cs_.theta_bmax_deg + kAngleTolDeg) {
                    continue;
                }
                c.anchor = v;
                c.pa = r.anchor;
                c.ts_pa = r.ts;
                c.g_pa = r.g;
                anchor_tail = &r.link;
            }
            if (!outer_leg_ok(v, n, r.ts, c.ts)) continue;
            if (corridor_ && !leg_in_corridor(world_, to_point(v), to_point(n))) continue;
            ++feasible;
            c.g = r.g + euclid(v, n);
            c.via = v;
            upsert(n, c.anchor, std::move(c), r.link, *anchor_tail);
        }
        return feasible;
    }

    PlanResult reconstruct(const RunRecord& r) const {
        const std::vector<Vertex> chain = chain_of(r.link.get());
        PlannedPath p;
        p.turning_points = compress_chain(world_, chain);
        p.cost_m = chain_length(p.turning_points) * cell_;
        p.visited_trace = trace_;
        p.expansions = expansions_;
        p.backtracks = backtracks_;
        return {true, p};
    }

    const GridWorld& world_;
    const std::vector<CoverageHole>& holes_;
    const ConstraintSet& cs_;
    Vertex start_;
    Vertex goal_;
    HoleIndex index_;
    double cell_;
    bool corridor_;
    bool storage_;
    bool lmin_;
    bool turn_;
    std::size_t stride_;
    long long expansions_ = 0;
    long long backtracks_ = 0;
    std::vector<Vertex> trace_;
    std::unordered_map<std::int64_t, RunRecord> recs_;
    std::priority_queue<Entry, std::vector<Entry>, EntryLess> heap_;
    std::vector<const CoverageHole*> by_id_;
    std::vector<std::array<int, 4>> hole_boxes_;  // cell bounds per hole
    std::vector<std::map<ExploreKey, double>> seen_;
};

}  // namespace detail

// Exhaustive constrained exploration of one hole from a fixed entry. Returns
// the best exit node per boundary vertex; an empty result means the hole
// cannot be crossed from this entry under `cs`.
inline std::vector<SearchNode> explore_hole(const GridWorld& world,
                                            const std::vector<CoverageHole>& holes,
                                            int hole_id, const Vertex& entry,
                                            const ConstraintSet& cs,
                                            const InheritedState& inherited) {
    cs.validate();
    const CoverageHole* hole = nullptr;
    for (const CoverageHole& h : holes) {
        if (h.id == hole_id) hole = &h;
    }
    if (hole == nullptr) throw Error("hole exploration: unknown hole id");
    if (!hole->has_vertex(entry)) {
        throw Error("hole exploration: entry does not touch the hole");
    }

    const HoleIndex index(world, holes);
    const double cell = world.cell_size_m;
    detail::RunRecord seed;
    seed.g = inherited.g_m / cell;
    seed.anchor = inherited.last_turn;
    seed.via = entry;
    if (inherited.last_turn == entry) {
        seed.pa = entry;
        seed.g_pa = seed.g;
        seed.ts = inherited.traversal;
        seed.ts_pa = inherited.traversal;
        seed.link = detail::cons(entry, nullptr);
        seed.anchor_link = seed.link;
    } else {
        const bool has_grand = inherited.prev_turn != inherited.last_turn;
        seed.pa = has_grand ? inherited.prev_turn : inherited.last_turn;
        seed.g_pa = inherited.g_last_turn_m / cell;
        seed.ts = inherited.traversal;
        seed.ts_pa = inherited.traversal_last_turn;
        auto base = has_grand ? detail::cons(inherited.last_turn,
                                             detail::cons(inherited.prev_turn, nullptr))
                              : detail::cons(inherited.last_turn, nullptr);
        seed.link = detail::cons(entry, base);
        seed.anchor_link = base;
    }

    long long expansions = 0;
    long long backtracks = 0;
    detail::HoleExplorer explorer(world, index, *hole, cs, entry, entry, seed, expansions,
                                  backtracks, nullptr);
    std::vector<SearchNode> out;
    for (const auto& [v, rec] : explorer.run()) {
        out.push_back({v, rec.g * cell, 0.0, rec.anchor, rec.via, rec.ts.acc_m, true});
    }
    return out;
}

// Any-angle search honouring the full constraint set. Every returned path
// passes validate_path with zero violations; `found == false` means no path
// satisfies the constraints under this planner's expansion rules.
inline PlanResult constrained_theta_star(const GridWorld& world,
                                         const std::vector<CoverageHole>& holes,
                                         const ConstraintSet& cs, const Vertex& start,
                                         const Vertex& goal) {
    cs.validate();
    detail::ConstrainedSearch search(world, holes, cs, start, goal);
    return search.run();
}

inline PlanResult constrained_theta_star(const GridWorld& world,
                                         const std::vector<CoverageHole>& holes,
                                         const ConstraintSet& cs) {
    return constrained_theta_star(world, holes, cs, world.start, world.goal);
}

}  // namespace corridor
