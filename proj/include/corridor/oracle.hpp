#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "corridor/constraints.hpp"
#include "corridor/planner.hpp"

namespace corridor {

namespace detail {

// Reduced heading of b as seen from a; equal headings share an id even when
// the previous turning point sits at a different distance along the ray.
inline std::pair<int, int> primitive_dir(const Vertex& a, const Vertex& b) {
    const int dx = b.x - a.x, dy = b.y - a.y;
    const int g = std::gcd(std::abs(dx), std::abs(dy));
    return {dx / g, dy / g};
}

}  // namespace detail

// Global minimum-cost turning-point path by branch and bound over grid
// vertices, feasibility judged exactly as validate_path judges it. Small
// grids only; the answer is re-confirmed by validate_path before release.
// When the turning-point budget truncates a branch that could still have
// beaten the incumbent and nothing was found, the instance is undecided and
// OracleBoundExceeded is thrown; with an incumbent in hand the result is the
// optimum among paths within the budget.
inline PlanResult exhaustive_optimum(const GridWorld& world,
                                     const std::vector<CoverageHole>& holes,
                                     const ConstraintSet& cs, Vertex start,
                                     Vertex goal, int max_vertices = 12) {
    cs.validate();
    if (world.width > 10 || world.height > 10) {
        throw InvalidConstraints("exhaustive oracle handles grids up to 10x10");
    }
    if (max_vertices < 2) {
        throw InvalidConstraints("exhaustive oracle needs room for 2 vertices");
    }
    if (!world.in_grid(start) || !world.in_grid(goal)) {
        throw InfeasibleEndpoints("endpoint outside grid");
    }
    PlanResult res;
    if (start == goal) {
        res.found = true;
        res.path.turning_points = {start};
        return res;
    }

    const int W = world.width + 1;
    const int n = W * (world.height + 1);
    const double cell = world.cell_size_m;
    const auto vertex_at = [W](int i) { return Vertex{i % W, i / W}; };

    std::vector<std::uint8_t> usable(n, 0);
    for (int i = 0; i < n; ++i) {
        const Vertex v = vertex_at(i);
        usable[i] = !world.vertex_engulfed(v) &&
                    (!world.has_corridor() || world.in_corridor(v));
    }
    const int si = int(world.vertex_index(start));
    const int gi = int(world.vertex_index(goal));
    if (!usable[si] || !usable[gi]) return res;

    std::vector<std::uint8_t> sight(size_t(n) * n, 0);
    for (int i = 0; i < n; ++i) {
        if (!usable[i]) continue;
        for (int j = i + 1; j < n; ++j) {
            if (!usable[j]) continue;
            if (line_of_sight(world, vertex_at(i), vertex_at(j))) {
                sight[size_t(i) * n + j] = 1;
                sight[size_t(j) * n + i] = 1;
            }
        }
    }

    const bool storage = cs.storage_active() && !holes.empty();
    HoleIndex index;
    if (storage) index = HoleIndex(world, holes);

    // Relaxed edge graph as a NoPath certificate: every leg of any feasible
    // path has sight, meets l_min, stays in the corridor band, and keeps its
    // own hole crossing within budget. Unreachability here is unreachability
    // outright, independent of the turning-point budget below.
    {
        std::vector<std::uint8_t> seen(n, 0);
        std::vector<int> stack{si};
        seen[si] = 1;
        while (!stack.empty() && !seen[gi]) {
            const int vi = stack.back();
            stack.pop_back();
            const Vertex v = vertex_at(vi);
            for (int wj = 0; wj < n; ++wj) {
                if (seen[wj] || !usable[wj] || !sight[size_t(vi) * n + wj]) {
                    continue;
                }
                const Vertex w = vertex_at(wj);
                if (cs.l_min_m > 0.0 &&
                    euclid(v, w) * cell < cs.l_min_m - kLengthTol) {
                    continue;
                }
                if (world.has_corridor() &&
                    !leg_in_corridor(world, to_point(v), to_point(w))) {
                    continue;
                }
                if (storage) {
                    TraversalState fresh;
                    if (!advance_traversal(fresh, index, {to_point(v), to_point(w)},
                                           cell, cs.d_zero_m)) {
                        continue;
                    }
                }
                seen[wj] = 1;
                stack.push_back(wj);
            }
        }
        if (!seen[gi]) return res;
    }

    std::vector<Vertex> best_seq;
    double best_cost = std::numeric_limits<double>::infinity();

    // A feasible sight-only path is a legitimate incumbent and usually
    // shrinks the search dramatically.
    {
        ThetaStarEngine seed_eng(world, start, goal);
        if (seed_eng.run()) {
            const auto cand = compress_chain(world, seed_eng.chain());
            if (cand.size() >= 2 && int(cand.size()) <= max_vertices &&
                validate_path(world, holes, cs, cand).ok()) {
                best_seq = cand;
                best_cost = chain_length(cand) * cell;
            }
        }
    }

    std::map<std::pair<int, int>, int> dir_ids;
    struct Entry {
        double cost;
        double acc;
        int hole;
        bool carry;
        int depth;
    };
    std::map<std::pair<int, int>, std::vector<Entry>> fronts;

    std::vector<Vertex> seq{start};
    bool bound_hit = false;
    long long nodes = 0;

    struct Child {
        int vi;
        double leg_m;
        double bound;
        TraversalState ts;
    };

    const auto dfs = [&](auto&& self, int vi, double cost,
                         const TraversalState& ts) -> void {
        ++nodes;
        const Vertex v = vertex_at(vi);
        if (vi == gi) {
            // Ending at the first goal touch is complete: a feasible path
            // that revisits the goal has a cheaper feasible prefix.
            if (cost < best_cost - 1e-12 &&
                validate_path(world, holes, cs, seq).ok()) {
                best_cost = cost;
                best_seq = seq;
            }
            return;
        }
        const double h = euclid(v, goal) * cell;
        if (cost + h >= best_cost - 1e-12) return;
        if (int(seq.size()) >= max_vertices) {
            bound_hit = true;
            return;
        }
        if (seq.size() >= 2) {
            const auto key = std::make_pair(
                vi, dir_ids.emplace(detail::primitive_dir(seq[seq.size() - 2], v),
                                    int(dir_ids.size()))
                        .first->second);
            auto& front = fronts[key];
            const int depth = int(seq.size());
            for (const Entry& e : front) {
                if (e.cost <= cost + 1e-12 && e.depth <= depth &&
                    e.hole == ts.hole && e.carry == ts.carry &&
                    e.acc <= ts.acc_m + kLengthTol) {
                    return;
                }
            }
            std::erase_if(front, [&](const Entry& e) {
                return cost <= e.cost + 1e-12 && depth <= e.depth &&
                       e.hole == ts.hole && e.carry == ts.carry &&
                       ts.acc_m <= e.acc + kLengthTol;
            });
            front.push_back({cost, ts.acc_m, ts.hole, ts.carry, depth});
        }

        std::vector<Child> kids;
        for (int wj = 0; wj < n; ++wj) {
            if (wj == vi || !usable[wj] || !sight[size_t(vi) * n + wj]) continue;
            const Vertex w = vertex_at(wj);
            if (seq.size() >= 2 &&
                collinear_forward(seq[seq.size() - 2], v, w)) {
                continue;  // v would not be a turning point
            }
            const double leg_m = euclid(v, w) * cell;
            if (cs.l_min_m > 0.0 && leg_m < cs.l_min_m - kLengthTol) continue;
            if (cs.turn_active() && seq.size() >= 2 &&
                turn_angle(seq[seq.size() - 2], v, w) >
                    cs.theta_bmax_deg + kAngleTolDeg) {
                continue;
            }
            if (world.has_corridor() &&
                !leg_in_corridor(world, to_point(v), to_point(w))) {
                continue;
            }
            TraversalState ts2 = ts;
            if (storage && !advance_traversal(ts2, index, {to_point(v), to_point(w)},
                                              cell, cs.d_zero_m)) {
                continue;
            }
            const double bound = cost + leg_m + euclid(w, goal) * cell;
            if (bound >= best_cost - 1e-12) continue;
            kids.push_back({wj, leg_m, bound, ts2});
        }
        std::sort(kids.begin(), kids.end(), [](const Child& a, const Child& b) {
            if (a.bound != b.bound) return a.bound < b.bound;
            return a.vi < b.vi;
        });
        for (const Child& k : kids) {
            seq.push_back(vertex_at(k.vi));
            self(self, k.vi, cost + k.leg_m, k.ts);
            seq.pop_back();
        }
    };
    dfs(dfs, si, 0.0, TraversalState{});

    res.path.expansions = nodes;
    if (best_seq.empty()) {
        if (bound_hit) {
            throw OracleBoundExceeded(
                "turning-point budget truncated the search before an answer");
        }
        return res;
    }
    res.found = true;
    res.path.turning_points = best_seq;
    res.path.cost_m = best_cost;
    return res;
}

// "To be blocked" bookkeeping of the iterative fallback planner; only ever
// grows within one run.
struct BlockList {
    std::set<Vertex> vertices;
    std::set<std::pair<Vertex, Vertex>> segments;
};

struct IterationRecord {
    int iteration = 0;
    std::vector<Vertex> candidate;
    std::string failing_constraint;  // empty on the accepting entry
    Vertex failing_vertex{-1, -1};
    std::string action;
};

struct IterationLog {
    std::vector<IterationRecord> entries;
};

struct BruteOptions {
    int iteration_cap = 10000;
};

struct BruteResult {
    bool found = false;
    PlannedPath path;
    IterationLog log;
    BlockList blocks;
};

namespace detail {

// Fixed-order walk of the 8-ring around t2 looking for a substitute corner m
// that keeps both replacement legs locally feasible; t0/t4 are the path
// neighbors beyond t1/t3 when those exist.
inline bool ring_substitute_exists(const GridWorld& world,
                                   const ConstraintSet& cs, const Vertex* t0,
                                   const Vertex& t1, const Vertex& t2,
                                   const Vertex& t3, const Vertex* t4) {
    const double cell = world.cell_size_m;
    for (const auto& [dx, dy] : king_moves()) {
        const Vertex m{t2.x + dx, t2.y + dy};
        if (!world.in_grid(m) || m == t1 || m == t3) continue;
        if (world.vertex_engulfed(m)) continue;
        if (world.has_corridor() && !world.in_corridor(m)) continue;
        if (!line_of_sight(world, t1, m) || !line_of_sight(world, m, t3)) continue;
        if (!check_leg(t1, m, cs, cell) || !check_leg(m, t3, cs, cell)) continue;
        if (cs.turn_active()) {
            const double tol = cs.theta_bmax_deg + kAngleTolDeg;
            if (turn_angle(t1, m, t3) > tol) continue;
            if (t0 && *t0 != m && turn_angle(*t0, t1, m) > tol) continue;
            if (t4 && *t4 != m && turn_angle(m, t3, *t4) > tol) continue;
        }
        if (world.has_corridor() &&
            (!leg_in_corridor(world, to_point(t1), to_point(m)) ||
             !leg_in_corridor(world, to_point(m), to_point(t3)))) {
            continue;
        }
        return true;
    }
    return false;
}

}  // namespace detail

// The iterative fallback: plan with the sight-only search, audit the result,
// and on failure block the offending piece, roll the open list back to the
// rescind point, and resume — until a candidate survives the whole audit.
// Audit priority is storage, then turn angle, then leg length, then the
// corridor band. Deliberately crude; it exists to be compared against.
inline BruteResult brute_force_plan(const GridWorld& world,
                                    const std::vector<CoverageHole>& holes,
                                    const ConstraintSet& cs, Vertex start,
                                    Vertex goal, const BruteOptions& opt = {}) {
    cs.validate();
    BruteResult out;
    if (start == goal) {
        out.found = true;
        out.path.turning_points = {start};
        out.log.entries.push_back({1, {start}, "", {-1, -1}, "accept"});
        return out;
    }
    if (world.has_corridor() &&
        (!world.in_corridor(start) || !world.in_corridor(goal))) {
        out.log.entries.push_back({1, {}, "corridor", {-1, -1}, "exhausted"});
        return out;
    }

    ThetaStarEngine eng(world, start, goal);
    long long repairs = 0;
    bool have = eng.run();
    for (int iter = 1;; ++iter) {
        if (iter > opt.iteration_cap) {
            throw OracleExhausted("no clean path within the iteration cap");
        }
        if (!have) {
            out.log.entries.push_back({iter, {}, "", {-1, -1}, "exhausted"});
            out.path.visited_trace = eng.visited();
            out.path.expansions = eng.expansions();
            out.path.backtracks = repairs;
            return out;
        }
        const std::vector<Vertex> cand = compress_chain(world, eng.chain());
        const ConstraintReport rep = validate_path(world, holes, cs, cand);

        std::string failing;
        if (!rep.storage_ok) failing = "storage";
        else if (!rep.turn_ok) failing = "turn";
        else if (!rep.min_leg_ok) failing = "min_leg";
        else if (!rep.corridor_ok) failing = "corridor";
        else if (!rep.obstacle_ok) failing = "obstacle";

        if (failing.empty()) {
            out.log.entries.push_back({iter, cand, "", {-1, -1}, "accept"});
            out.found = true;
            out.path.turning_points = cand;
            out.path.cost_m = chain_length(cand) * world.cell_size_m;
            out.path.visited_trace = eng.visited();
            out.path.expansions = eng.expansions();
            out.path.backtracks = repairs;
            return out;
        }
        if (failing == "obstacle") {
            throw Error("sight-only search produced a sight-violating leg");
        }
        const ConstraintViolation* viol = nullptr;
        for (const auto& v : rep.violations) {
            if (v.constraint == failing) {
                viol = &v;
                break;
            }
        }

        IterationRecord rec;
        rec.iteration = iter;
        rec.candidate = cand;
        rec.failing_constraint = failing;
        rec.failing_vertex = cand[size_t(viol->vertex_index)];

        const auto block_seg = [&](const Vertex& a, const Vertex& b) {
            eng.block_segment(a, b);
            out.blocks.segments.insert(std::minmax(a, b));
        };

        Vertex anchor;
        if (failing == "storage") {
            const HoleTraversal* tr = nullptr;
            for (const auto& t : rep.traversals) {
                if (t.length_m > cs.d_zero_m + kLengthTol) {
                    tr = &t;
                    break;
                }
            }
            block_seg(cand[tr->end_leg], cand[tr->end_leg + 1]);
            if (tr->end_leg > tr->start_leg) {
                anchor = cand[tr->end_leg];
                rec.action = "block overrun leg, rescind to previous turn";
            } else {
                anchor = cand[tr->start_leg];
                rec.action = "block overrun leg, rescind to hole entry";
            }
        } else {
            const int i = viol->vertex_index;
            const int last = int(cand.size()) - 1;
            int p = -1;  // pivot index of t2
            if (i > 0 && i < last) p = i;
            else if (i == last && last - 1 > 0) p = last - 1;
            else if (i == 0 && last > 1) p = 1;
            if (p < 0) {
                block_seg(cand[0], cand[1]);
                anchor = cand[0];
                rec.action = "block direct leg, rescind to start";
            } else {
                const Vertex t1 = cand[p - 1], t2 = cand[p], t3 = cand[p + 1];
                const Vertex* t0 = (p >= 2) ? &cand[p - 2] : nullptr;
                const Vertex* t4 = (p + 2 <= last) ? &cand[p + 2] : nullptr;
                const bool viable =
                    detail::ring_substitute_exists(world, cs, t0, t1, t2, t3, t4);
                block_seg(t1, t2);
                block_seg(t2, t3);
                anchor = t1;
                if (!viable && t2 != start && t2 != goal) {
                    eng.block_vertex(t2);
                    out.blocks.vertices.insert(t2);
                    rec.action = "no ring substitute, block vertex, rescind to t1";
                } else {
                    rec.action = "block both legs, repair via ring of t2, rescind to t1";
                }
            }
        }
        out.log.entries.push_back(rec);
        ++repairs;
        eng.rescind_before_close(anchor);
        have = eng.run();
    }
}

// One corpus entry, fully materialized.
struct CompareInstance {
    std::string name;
    GridWorld world;
    std::vector<CoverageHole> holes;
    ConstraintSet cs;
};

// What one planner reported on one instance.
struct PlannerRun {
    bool found = false;
    double cost_m = 0.0;
    long long expansions = 0;
    long long iterations = 1;
};

using CompareFn = std::function<PlannerRun(const CompareInstance&)>;

struct CompareRow {
    std::string planner;
    int attempted = 0;
    int solved = 0;
    double success_rate = 0.0;
    double mean_relative_length = 0.0;  // vs straight start-goal, solved only
    double mean_expansions = 0.0;
    double mean_wall_s = 0.0;
    double total_wall_s = 0.0;
    double mean_iterations = 0.0;
};

// Runs every planner over every instance, sequentially and isolated, and
// aggregates success rate, relative path length against the straight
// start-goal distance, expansions, wall time, and iteration counts.
inline std::vector<CompareRow> compare_runs(
    const std::vector<CompareInstance>& corpus,
    const std::vector<std::pair<std::string, CompareFn>>& planners) {
    std::vector<CompareRow> rows;
    for (const auto& [name, fn] : planners) {
        CompareRow row;
        row.planner = name;
        double rel_sum = 0.0, exp_sum = 0.0, iter_sum = 0.0;
        for (const CompareInstance& inst : corpus) {
            ++row.attempted;
            const auto t0 = std::chrono::steady_clock::now();
            const PlannerRun run = fn(inst);
            const auto t1 = std::chrono::steady_clock::now();
            row.total_wall_s += std::chrono::duration<double>(t1 - t0).count();
            exp_sum += double(run.expansions);
            iter_sum += double(run.iterations);
            if (run.found) {
                ++row.solved;
                const double direct = euclid(inst.world.start, inst.world.goal) *
                                      inst.world.cell_size_m;
                rel_sum += direct > 0.0 ? run.cost_m / direct : 1.0;
            }
        }
        if (row.attempted > 0) {
            row.success_rate = double(row.solved) / row.attempted;
            row.mean_expansions = exp_sum / row.attempted;
            row.mean_wall_s = row.total_wall_s / row.attempted;
            row.mean_iterations = iter_sum / row.attempted;
        }
        if (row.solved > 0) row.mean_relative_length = rel_sum / row.solved;
        rows.push_back(row);
    }
    return rows;
}

inline std::string compare_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << "planner,attempted,solved,success_rate,mean_relative_length,"
           "mean_expansions,mean_wall_s,mean_iterations\n";
    out << std::fixed << std::setprecision(6);
    for (const CompareRow& r : rows) {
        out << r.planner << ',' << r.attempted << ',' << r.solved << ','
            << r.success_rate << ',' << r.mean_relative_length << ','
            << r.mean_expansions << ',' << r.mean_wall_s << ','
            << r.mean_iterations << '\n';
    }
    return out.str();
}

inline std::string compare_table(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "planner" << std::right << std::setw(10)
        << "attempted" << std::setw(8) << "solved" << std::setw(9) << "success"
        << std::setw(10) << "rel len" << std::setw(12) << "expansions"
        << std::setw(10) << "wall s" << std::setw(11) << "iterations" << '\n';
    out << std::string(84, '-') << '\n';
    out << std::fixed;
    for (const CompareRow& r : rows) {
        out << std::left << std::setw(14) << r.planner << std::right
            << std::setw(10) << r.attempted << std::setw(8) << r.solved
            << std::setw(9) << std::setprecision(3) << r.success_rate
            << std::setw(10) << std::setprecision(3) << r.mean_relative_length
            << std::setw(12) << std::setprecision(1) << r.mean_expansions
            << std::setw(10) << std::setprecision(3) << r.mean_wall_s
            << std::setw(11) << std::setprecision(1) << r.mean_iterations
            << '\n';
    }
    return out.str();
}

}  // namespace corridor
