#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corridor/errors.hpp"
#include "corridor/grid_world.hpp"

namespace corridor {

// Path produced by any planner: strictly turning points (no collinear
// interior triple), cost in meters, and the close-order trace plus search
// effort counters for diagnostics.
struct PlannedPath {
    std::vector<Vertex> turning_points;
    double cost_m = 0.0;
    std::vector<Vertex> visited_trace;
    long long expansions = 0;
    long long backtracks = 0;
};

// Planner outcome; on NoPath the path still carries the effort counters.
struct PlanResult {
    bool found = false;
    PlannedPath path;
};

struct EngineConfig {
    bool any_angle = true;         // false: parent is always the expanded vertex
    bool respect_corridor = false; // keep vertices inside the corridor mask
};

// Neighbor enumeration order is fixed (N, NE, E, SE, S, SW, W, NW) so that
// identical inputs always produce identical searches.
inline const std::array<std::pair<int, int>, 8>& king_moves() {
    static const std::array<std::pair<int, int>, 8> moves{{{0, 1},
                                                           {1, 1},
                                                           {1, 0},
                                                           {1, -1},
                                                           {0, -1},
                                                           {-1, -1},
                                                           {-1, 0},
                                                           {-1, 1}}};
    return moves;
}

// Any-angle grid search with an undo log. The search can be rolled back to
// the moment just before some closed vertex was closed and resumed under a
// larger set of blocked vertices/segments; because the open-list comparator
// is a total order, the replayed prefix is identical to a fresh search, so
// resuming is equivalent to restarting with the new blocks.
class ThetaStarEngine {
  public:
    ThetaStarEngine(const GridWorld& world, Vertex start, Vertex goal,
                    EngineConfig cfg = {})
        : world_(world),
          start_(start),
          goal_(goal),
          cfg_(cfg),
          g_(world.vertex_count(), 0.0),
          parent_(world.vertex_count(), -1),
          discovered_(world.vertex_count(), 0),
          closed_(world.vertex_count(), 0) {
        if (!world_.in_grid(start_) || !world_.in_grid(goal_)) {
            throw InfeasibleEndpoints("endpoint outside grid");
        }
        const int si = idx(start_);
        discovered_[si] = 1;
        heap_.push({heuristic(start_), 0.0, si, start_});
    }

    // Forbids closing or discovering this vertex from now on.
    void block_vertex(Vertex v) { blocked_vertices_.insert(idx(v)); }

    // Forbids any future parent edge that runs along (a, b) for a positive
    // length, including partial collinear overlaps of longer edges.
    void block_segment(Vertex a, Vertex b) {
        if (a == b) throw DegenerateSegment("blocked segment needs two vertices");
        blocked_segments_.push_back({a, b});
    }

    bool vertex_blocked(Vertex v) const {
        return blocked_vertices_.count(idx(v)) > 0;
    }

    // True when edge (p, q) overlaps some blocked segment over positive length.
    bool edge_blocked(Vertex p, Vertex q) const {
        for (const auto& [a, b] : blocked_segments_) {
            if (cross(a, b, p) != 0 || cross(a, b, q) != 0) continue;
            const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
            const std::int64_t len2 = dx * dx + dy * dy;
            std::int64_t s0 = (p.x - a.x) * dx + (p.y - a.y) * dy;
            std::int64_t s1 = (q.x - a.x) * dx + (q.y - a.y) * dy;
            if (s0 > s1) std::swap(s0, s1);
            if (std::min<std::int64_t>(s1, len2) > std::max<std::int64_t>(s0, 0)) {
                return true;
            }
        }
        return false;
    }

    // Pops until the goal closes or the frontier empties.
    bool run() {
        while (!heap_.empty()) {
            const HeapEntry e = heap_.top();
            heap_.pop();
            if (closed_[e.v] || g_[e.v] != e.g || !discovered_[e.v]) continue;
            if (blocked_vertices_.count(e.v)) continue;
            close(e.v);
            if (e.v == idx(goal_)) return true;
            expand(e.v);
        }
        return false;
    }

    bool goal_closed() const { return closed_[idx(goal_)] != 0; }

    double goal_g() const { return g_[idx(goal_)]; }

    // Parent chain start..goal; empty when the goal is not closed.
    std::vector<Vertex> chain() const {
        if (!goal_closed()) return {};
        std::vector<Vertex> out;
        int v = idx(goal_);
        const int si = idx(start_);
        while (v != si) {
            out.push_back(vertex_of(v));
            v = parent_[v];
        }
        out.push_back(start_);
        std::reverse(out.begin(), out.end());
        return out;
    }

    // Rolls the search back to the instant before `t` was closed. `t` must be
    // closed. The undo log restores records verbatim; the heap is rebuilt from
    // the surviving records, which reproduces the canonical frontier.
    void rescind_before_close(Vertex t) {
        const int ti = idx(t);
        auto it = close_pos_.find(ti);
        if (it == close_pos_.end()) throw Error("rescind target is not closed");
        const size_t cut = it->second;
        for (size_t i = log_.size(); i-- > cut;) {
            const UndoEntry& u = log_[i];
            if (u.kind == UndoEntry::Close) {
                closed_[u.v] = 0;
                close_pos_.erase(u.v);
                visited_.pop_back();
            } else {
                g_[u.v] = u.prev_g;
                parent_[u.v] = u.prev_parent;
                discovered_[u.v] = u.prev_discovered;
            }
        }
        log_.resize(cut);
        heap_ = {};
        for (size_t i = 0; i < discovered_.size(); ++i) {
            if (discovered_[i] && !closed_[i]) {
                const Vertex vv = vertex_of(int(i));
                heap_.push({g_[i] + heuristic(vv), g_[i], int(i), vv});
            }
        }
    }

    long long expansions() const { return expansions_; }
    const std::vector<Vertex>& visited() const { return visited_; }
    Vertex vertex_of(int idx) const {
        return {idx % (world_.width + 1), idx / (world_.width + 1)};
    }

  private:
    struct HeapEntry {
        double f;
        double g;
        int v;
        Vertex pos;
    };
    struct HeapLess {
        bool operator()(const HeapEntry& a, const HeapEntry& b) const {
            if (a.f != b.f) return a.f > b.f;          // smaller f first
            if (a.g != b.g) return a.g < b.g;          // larger g first
            if (a.pos.x != b.pos.x) return a.pos.x > b.pos.x;  // then lex (x, y)
            return a.pos.y > b.pos.y;
        }
    };
    struct UndoEntry {
        enum Kind : std::uint8_t { Update, Close };
        int v;
        Kind kind;
        std::uint8_t prev_discovered;
        int prev_parent;
        double prev_g;
    };

    double heuristic(Vertex v) const { return euclid(v, goal_); }

    int idx(Vertex v) const { return int(world_.vertex_index(v)); }

    void close(int v) {
        closed_[v] = 1;
        close_pos_[v] = log_.size();
        log_.push_back({v, UndoEntry::Close, 0, -1, 0.0});
        visited_.push_back(vertex_of(v));
        ++expansions_;
    }

    void expand(int vi) {
        const Vertex v = vertex_of(vi);
        for (const auto& [dx, dy] : king_moves()) {
            const Vertex n{v.x + dx, v.y + dy};
            if (!world_.in_grid(n)) continue;
            const int ni = world_.vertex_index(n);
            if (closed_[ni] || blocked_vertices_.count(ni)) continue;
            if (cfg_.respect_corridor && !world_.in_corridor(n)) continue;
            if (!unit_step_free(world_, v, dx, dy)) continue;

            int cand_parent = -1;
            double cand_g = 0.0;
            if (cfg_.any_angle && parent_[vi] >= 0) {
                const Vertex pv = vertex_of(parent_[vi]);
                bool pinch = false;
                if (parent_[parent_[vi]] >= 0) {
                    const Vertex gp = vertex_of(parent_[parent_[vi]]);
                    pinch = collinear_forward(gp, pv, n) &&
                            !line_of_sight(world_, gp, n);
                }
                if (!pinch && !edge_blocked(pv, n) && line_of_sight(world_, pv, n)) {
                    cand_parent = parent_[vi];
                    cand_g = g_[parent_[vi]] + euclid(pv, n);
                }
            }
            if (cand_parent < 0) {
                if (edge_blocked(v, n)) continue;
                // Straight continuation through this vertex must see the whole
                // merged run: a pinched corner cannot be crossed in a line.
                if (parent_[vi] >= 0) {
                    const Vertex pv = vertex_of(parent_[vi]);
                    if (collinear_forward(pv, v, n) && !line_of_sight(world_, pv, n)) {
                        continue;
                    }
                }
                cand_parent = vi;
                cand_g = g_[vi] + euclid(v, n);
            }
            if (!discovered_[ni] || cand_g < g_[ni]) {
                log_.push_back({ni, UndoEntry::Update, discovered_[ni], parent_[ni],
                                g_[ni]});
                g_[ni] = cand_g;
                parent_[ni] = cand_parent;
                discovered_[ni] = 1;
                heap_.push({cand_g + heuristic(n), cand_g, ni, n});
            }
        }
    }

    const GridWorld& world_;
    Vertex start_;
    Vertex goal_;
    EngineConfig cfg_;
    std::vector<double> g_;
    std::vector<int> parent_;
    std::vector<std::uint8_t> discovered_;
    std::vector<std::uint8_t> closed_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap_;
    std::unordered_set<int> blocked_vertices_;
    std::vector<std::pair<Vertex, Vertex>> blocked_segments_;
    std::vector<UndoEntry> log_;
    std::unordered_map<int, size_t> close_pos_;
    std::vector<Vertex> visited_;
    long long expansions_ = 0;
};

// Merges collinear forward runs, but keeps a junction whenever the merged
// leg would thread a corner without line of sight.
inline std::vector<Vertex> compress_chain(const GridWorld& world,
                                          const std::vector<Vertex>& chain) {
    if (chain.size() <= 2) return chain;
    std::vector<Vertex> out{chain[0]};
    for (size_t i = 1; i + 1 < chain.size(); ++i) {
        const Vertex& a = out.back();
        const Vertex& b = chain[i];
        const Vertex& c = chain[i + 1];
        if (collinear_forward(a, b, c) && line_of_sight(world, a, c)) continue;
        out.push_back(b);
    }
    out.push_back(chain.back());
    return out;
}

inline double chain_length(const std::vector<Vertex>& chain) {
    double s = 0.0;
    for (size_t i = 0; i + 1 < chain.size(); ++i) s += euclid(chain[i], chain[i + 1]);
    return s;
}

namespace detail {

inline PlanResult run_baseline(const GridWorld& world, bool any_angle) {
    EngineConfig cfg;
    cfg.any_angle = any_angle;
    ThetaStarEngine eng(world, world.start, world.goal, cfg);
    PlanResult res;
    res.found = eng.run();
    res.path.expansions = eng.expansions();
    res.path.visited_trace = eng.visited();
    if (res.found) {
        res.path.turning_points = compress_chain(world, eng.chain());
        res.path.cost_m = chain_length(res.path.turning_points) * world.cell_size_m;
    }
    return res;
}

}  // namespace detail

// Any-angle baseline: obstacle avoidance only, shortest-path objective.
inline PlanResult theta_star(const GridWorld& world) {
    return detail::run_baseline(world, true);
}

// Eight-connected grid search with the same expansion order, no shortcuts.
inline PlanResult a_star_8(const GridWorld& world) {
    return detail::run_baseline(world, false);
}

}  // namespace corridor
