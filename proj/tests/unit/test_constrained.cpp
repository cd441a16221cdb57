#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "corridor/constrained_planner.hpp"
#include "corridor/oracle.hpp"

using namespace corridor;

namespace {

const double kSqrt2 = std::sqrt(2.0);

WorldSpec base_spec(int w, int h) {
    WorldSpec s;
    s.width = w;
    s.height = h;
    s.start = {0, 0};
    s.goal = {w, h};
    s.uncovered_cells = std::vector<Cell>{};
    return s;
}

// Random rectangular obstacles, never creating a diagonal squeeze and never
// swallowing the corner cells. Comparison fixtures use these because a pinch
// corner legitimately separates unit-step planners from any-angle ones.
GridWorld rect_world(std::mt19937_64& rng, int w, int h, int rects) {
    WorldSpec s = base_spec(w, h);
    std::vector<uint8_t> mask(size_t(w) * h, 0);
    auto at = [&](int x, int y) { return mask[size_t(y) * w + x] != 0; };
    auto squeezed = [&]() {
        for (int y = 0; y + 1 < h; ++y) {
            for (int x = 0; x + 1 < w; ++x) {
                const bool a = at(x, y), b = at(x + 1, y);
                const bool c = at(x, y + 1), d = at(x + 1, y + 1);
                if ((a && d && !b && !c) || (b && c && !a && !d)) return true;
            }
        }
        return false;
    };
    std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1), side(1, 3);
    int placed = 0;
    for (int tries = 0; placed < rects && tries < 200; ++tries) {
        ObstacleRect r{ux(rng), uy(rng), side(rng), side(rng)};
        r.w = std::min(r.w, w - r.x);
        r.h = std::min(r.h, h - r.y);
        const auto saved = mask;
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x) mask[size_t(y) * w + x] = 1;
        if (at(0, 0) || at(w - 1, h - 1) || squeezed()) {
            mask = saved;
            continue;
        }
        s.obstacles.push_back(r);
        ++placed;
    }
    return build_world(s);
}

// Full-height uncovered band over x in {3,4} whose bottom row is also
// blocked: edge runs clip against the lower-side cell, so the band's seam
// along y = 0 would otherwise be a free ride past the storage bound.
GridWorld band_world() {
    WorldSpec s = base_spec(8, 6);
    s.start = {0, 3};
    s.goal = {8, 3};
    std::vector<Cell> open;
    for (int y = 0; y < 6; ++y) {
        open.push_back({3, y});
        open.push_back({4, y});
    }
    s.uncovered_cells = open;
    s.obstacles.push_back({3, 0, 2, 1});
    return build_world(s);
}

InheritedState arriving(const Vertex& last_turn, double g_m) {
    InheritedState inh;
    inh.last_turn = last_turn;
    inh.prev_turn = last_turn;
    inh.g_m = g_m;
    inh.g_last_turn_m = 0.0;
    return inh;
}

const SearchNode* exit_at(const std::vector<SearchNode>& exits, const Vertex& v) {
    for (const SearchNode& n : exits) {
        if (n.vertex == v) return &n;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("inactive constraints reproduce the sight-only baseline",
          "[constrained]") {
    const ConstraintSet cs;  // every limit at its inert default

    SECTION("empty grids give the exact straight-line cost") {
        for (const auto& [w, h] : {std::pair{6, 6}, std::pair{9, 5}}) {
            const GridWorld world = build_world(base_spec(w, h));
            const PlanResult c = constrained_theta_star(world, {}, cs);
            const PlanResult t = theta_star(world);
            REQUIRE(c.found);
            REQUIRE(t.found);
            CHECK(c.path.cost_m == Catch::Approx(t.path.cost_m));
            CHECK(c.path.cost_m ==
                  Catch::Approx(std::hypot(double(w), double(h))));
            CHECK(c.path.turning_points.size() == 2);
        }
    }

    SECTION("obstacle fields stay within a few percent of the baseline") {
        std::mt19937_64 rng(411);
        int found = 0;
        for (int trial = 0; trial < 30; ++trial) {
            const GridWorld world = rect_world(rng, 10, 8, 1 + trial % 3);
            const PlanResult c = constrained_theta_star(world, {}, cs);
            const PlanResult t = theta_star(world);
            REQUIRE(c.found == t.found);
            if (!c.found) continue;
            ++found;
            const auto rep =
                validate_path(world, {}, cs, c.path.turning_points);
            REQUIRE(rep.ok());
            CHECK(c.path.cost_m <= t.path.cost_m * 1.05 + 1e-9);
            CHECK(c.path.cost_m >= t.path.cost_m * 0.95 - 1e-9);
        }
        REQUIRE(found >= 25);
    }

    SECTION("an unbounded stay budget ignores coverage holes entirely") {
        WorldSpec s = base_spec(9, 7);
        s.start = {0, 3};
        s.goal = {9, 4};
        s.uncovered_cells = std::vector<Cell>{{4, 2}, {4, 3}, {5, 3}, {2, 5}};
        const GridWorld world = build_world(s);
        const auto holes = find_holes(world);
        REQUIRE_FALSE(holes.empty());
        const PlanResult c = constrained_theta_star(world, holes, cs);
        const PlanResult t = theta_star(world);
        REQUIRE(c.found);
        CHECK(c.path.cost_m == Catch::Approx(t.path.cost_m));
    }
}

TEST_CASE("degenerate endpoints are handled up front", "[constrained]") {
    const GridWorld world = build_world(base_spec(5, 5));
    const ConstraintSet cs;
    const PlanResult same =
        constrained_theta_star(world, {}, cs, {2, 2}, {2, 2});
    REQUIRE(same.found);
    CHECK(same.path.turning_points == std::vector<Vertex>{{2, 2}});
    CHECK(same.path.cost_m == 0.0);
    CHECK_THROWS_AS(constrained_theta_star(world, {}, cs, {0, 0}, {6, 2}),
                    InfeasibleEndpoints);
}

TEST_CASE("straight corridor run under a tight turn budget", "[constrained]") {
    WorldSpec s = base_spec(12, 3);
    s.start = {0, 1};
    s.goal = {12, 1};
    const GridWorld world = build_world(s);
    ConstraintSet cs;
    cs.theta_bmax_deg = 20.0;
    cs.l_min_m = 1.0;

    const PlanResult r = constrained_theta_star(world, {}, cs);
    REQUIRE(r.found);
    CHECK(r.path.cost_m == Catch::Approx(12.0));
    CHECK(r.path.turning_points ==
          std::vector<Vertex>{{0, 1}, {12, 1}});
    const auto rep = validate_path(world, {}, cs, r.path.turning_points);
    REQUIRE(rep.ok());
    CHECK(rep.max_turn_deg == 0.0);
}

TEST_CASE("detours around obstacles match the exhaustive reference",
          "[constrained][reference]") {
    std::mt19937_64 rng(1723);
    ConstraintSet cs;
    cs.l_min_m = 1.2;
    cs.theta_bmax_deg = 60.0;

    int both = 0;
    int undecided = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const GridWorld world = rect_world(rng, 7, 6, 1 + trial % 3);
        const PlanResult c = constrained_theta_star(world, {}, cs);
        PlanResult e;
        try {
            e = exhaustive_optimum(world, {}, cs, world.start, world.goal);
        } catch (const OracleBoundExceeded&) {
            ++undecided;
            continue;
        }
        REQUIRE(c.found == e.found);
        if (!c.found) continue;
        ++both;
        const auto rep = validate_path(world, {}, cs, c.path.turning_points);
        REQUIRE(rep.ok());
        CHECK(c.path.cost_m >= e.path.cost_m - 1e-9);
        CHECK(c.path.cost_m <= e.path.cost_m * 1.15 + 1e-9);
    }
    REQUIRE(both >= 25);
    REQUIRE(undecided <= 5);
}

TEST_CASE("a coverage gap is crossed within the stay budget and refused beyond it",
          "[constrained][storage]") {
    const GridWorld world = band_world();
    const auto holes = find_holes(world);
    REQUIRE(holes.size() == 1);

    SECTION("budget above the crossing width finds the straight route") {
        ConstraintSet cs;
        cs.d_zero_m = 2.5;
        const PlanResult r = constrained_theta_star(world, holes, cs);
        REQUIRE(r.found);
        CHECK(r.path.cost_m == Catch::Approx(8.0));
        const auto rep = validate_path(world, holes, cs, r.path.turning_points);
        REQUIRE(rep.ok());
        REQUIRE_FALSE(rep.traversals.empty());
        for (const auto& t : rep.traversals) CHECK(t.length_m <= 2.5 + 1e-9);

        const PlanResult e =
            exhaustive_optimum(world, holes, cs, world.start, world.goal);
        REQUIRE(e.found);
        CHECK(r.path.cost_m == Catch::Approx(e.path.cost_m));
    }

    SECTION("budget below the crossing width leaves no route") {
        ConstraintSet cs;
        cs.d_zero_m = 1.5;
        const PlanResult r = constrained_theta_star(world, holes, cs);
        REQUIRE_FALSE(r.found);
        CHECK(r.path.expansions > 0);
    }
}

TEST_CASE("single cell hole exits follow the stay budget",
          "[constrained][storage]") {
    WorldSpec s = base_spec(6, 6);
    s.uncovered_cells = std::vector<Cell>{{2, 2}};
    const GridWorld world = build_world(s);
    const auto holes = find_holes(world);
    REQUIRE(holes.size() == 1);
    const int id = holes[0].id;
    const InheritedState inh = arriving({0, 2}, 2.0);

    SECTION("a diagonal plus one edge fits a 2.5 budget: all far corners") {
        ConstraintSet cs;
        cs.d_zero_m = 2.5;
        const auto exits = explore_hole(world, holes, id, {2, 2}, cs, inh);
        REQUIRE(exits.size() == 3);
        CHECK(exits[0].vertex == Vertex{2, 3});
        CHECK(exits[1].vertex == Vertex{3, 2});
        CHECK(exits[2].vertex == Vertex{3, 3});
        for (const SearchNode& n : exits) {
            CHECK(n.forced_parent);
            CHECK(n.hole_acc <= 2.5 + 1e-9);
        }
        const SearchNode* far = exit_at(exits, {3, 3});
        REQUIRE(far != nullptr);
        CHECK(far->g == Catch::Approx(2.0 + kSqrt2));
        CHECK(far->hole_acc == Catch::Approx(kSqrt2));
        CHECK(far->parent == Vertex{2, 2});
        const SearchNode* side = exit_at(exits, {3, 2});
        REQUIRE(side != nullptr);
        CHECK(side->g == Catch::Approx(3.0 + kSqrt2));
        CHECK(side->hole_acc == Catch::Approx(1.0 + kSqrt2));
    }

    SECTION("a budget between the diagonal and the corner walk keeps one exit") {
        ConstraintSet cs;
        cs.d_zero_m = 1.5;
        const auto exits = explore_hole(world, holes, id, {2, 2}, cs, inh);
        REQUIRE(exits.size() == 1);
        CHECK(exits[0].vertex == Vertex{3, 3});
        CHECK(exits[0].hole_acc == Catch::Approx(kSqrt2));
    }

    SECTION("a budget below the diagonal leaves no exits") {
        ConstraintSet cs;
        cs.d_zero_m = 1.0;
        CHECK(explore_hole(world, holes, id, {2, 2}, cs, inh).empty());
    }

    SECTION("a tight turn budget blocks the inherited heading") {
        ConstraintSet cs;
        cs.d_zero_m = 2.5;
        cs.theta_bmax_deg = 20.0;
        CHECK(explore_hole(world, holes, id, {2, 2}, cs, inh).empty());
        // A run starting at the entry itself owes no turn at the entry.
        const InheritedState fresh = arriving({2, 2}, 0.0);
        const auto exits = explore_hole(world, holes, id, {2, 2}, cs, fresh);
        const SearchNode* far = exit_at(exits, {3, 3});
        REQUIRE(far != nullptr);
        CHECK(far->hole_acc == Catch::Approx(kSqrt2));
    }

    SECTION("bad arguments are rejected") {
        ConstraintSet cs;
        CHECK_THROWS_AS(explore_hole(world, holes, id + 7, {2, 2}, cs, inh),
                        Error);
        CHECK_THROWS_AS(explore_hole(world, holes, id, {0, 0}, cs, inh), Error);
    }
}

TEST_CASE("a two cell crossing defeats a unit stay budget",
          "[constrained][storage]") {
    WorldSpec s = base_spec(8, 6);
    std::vector<Cell> open;
    for (int y = 1; y <= 4; ++y) {
        open.push_back({3, y});
        open.push_back({4, y});
    }
    s.uncovered_cells = open;
    const GridWorld world = build_world(s);
    const auto holes = find_holes(world);
    REQUIRE(holes.size() == 1);
    const int id = holes[0].id;
    const InheritedState inh = arriving({1, 2}, 2.0);

    SECTION("a unit budget strands the mid-band vertex and rescinds to empty") {
        ConstraintSet cs;
        cs.d_zero_m = 1.0;
        CHECK(explore_hole(world, holes, id, {3, 2}, cs, inh).empty());
    }

    SECTION("a 2.5 budget reaches the far side") {
        ConstraintSet cs;
        cs.d_zero_m = 2.5;
        const auto exits = explore_hole(world, holes, id, {3, 2}, cs, inh);
        const SearchNode* across = exit_at(exits, {5, 2});
        REQUIRE(across != nullptr);
        CHECK(across->hole_acc == Catch::Approx(2.0));
        const SearchNode* corner = exit_at(exits, {4, 1});
        REQUIRE(corner != nullptr);
        CHECK(corner->hole_acc == Catch::Approx(kSqrt2));
        CHECK(exit_at(exits, {5, 5}) == nullptr);
        for (const SearchNode& n : exits) CHECK(n.hole_acc <= 2.5 + 1e-9);
    }
}

TEST_CASE("an L shaped hole is crossed by turning where straight runs die",
          "[constrained][storage]") {
    WorldSpec s = base_spec(8, 8);
    std::vector<Cell> open;
    for (int x = 3; x <= 4; ++x)
        for (int y = 1; y <= 5; ++y) open.push_back({x, y});
    for (int x = 5; x <= 6; ++x)
        for (int y = 1; y <= 2; ++y) open.push_back({x, y});
    s.uncovered_cells = open;
    const GridWorld world = build_world(s);
    const auto holes = find_holes(world);
    REQUIRE(holes.size() == 1);
    const int id = holes[0].id;

    ConstraintSet cs;
    cs.l_min_m = 1.0;
    cs.theta_bmax_deg = 110.0;
    cs.d_zero_m = 3.5;
    const InheritedState inh = arriving({4, 7}, 1.0);

    const auto exits = explore_hole(world, holes, id, {4, 6}, cs, inh);
    REQUIRE_FALSE(exits.empty());
    for (const SearchNode& n : exits) CHECK(n.hole_acc <= 3.5 + 1e-9);

    // The straight probe down the arm dies at depth 3; the crossing that
    // turns east inside the arm is reachable and reported.
    const SearchNode* shoulder = exit_at(exits, {5, 5});
    REQUIRE(shoulder != nullptr);
    CHECK(shoulder->g == Catch::Approx(1.0 + kSqrt2));
    CHECK(shoulder->hole_acc == Catch::Approx(kSqrt2));
    const SearchNode* east = exit_at(exits, {5, 4});
    REQUIRE(east != nullptr);
    CHECK(east->g == Catch::Approx(2.0 + kSqrt2));
    CHECK(east->hole_acc == Catch::Approx(1.0 + kSqrt2));
    const SearchNode* deep = exit_at(exits, {5, 3});
    REQUIRE(deep != nullptr);
    CHECK(deep->hole_acc == Catch::Approx(2.0 + kSqrt2));

    // The bottom of either arm sits beyond the stay budget.
    CHECK(exit_at(exits, {4, 1}) == nullptr);
    CHECK(exit_at(exits, {5, 1}) == nullptr);
    CHECK(exit_at(exits, {6, 1}) == nullptr);

    const auto again = explore_hole(world, holes, id, {4, 6}, cs, inh);
    REQUIRE(again.size() == exits.size());
    for (size_t i = 0; i < exits.size(); ++i) {
        CHECK(again[i].vertex == exits[i].vertex);
        CHECK(again[i].g == exits[i].g);
        CHECK(again[i].hole_acc == exits[i].hole_acc);
    }
}

TEST_CASE("the rescind rule walks the boundary distance back along the probe",
          "[constrained][storage]") {
    WorldSpec s = base_spec(10, 8);
    std::vector<Cell> open;
    for (int x = 2; x <= 6; ++x)
        for (int y = 1; y <= 5; ++y) open.push_back({x, y});
    s.uncovered_cells = open;
    const GridWorld world = build_world(s);
    const auto holes = find_holes(world);
    REQUIRE(holes.size() == 1);
    const CoverageHole& hole = holes[0];

    CHECK_THROWS_AS(backtrack_in_hole({}, hole), Error);
    CHECK(backtrack_in_hole({{4, 6}}, hole) == 0);

    // Straight probe: the tip sits 2 from the nearest boundary vertex, so the
    // rule walks 2 of the 3 accumulated units back.
    CHECK(backtrack_in_hole({{4, 6}, {4, 5}, {4, 4}, {4, 3}}, hole) == 1);

    // Bent probe: the walk-back point lands inside the diagonal leg and the
    // nearest on-path vertex to it is the second one.
    CHECK(backtrack_in_hole({{4, 6}, {4, 5}, {5, 4}, {5, 3}}, hole) == 1);

    // A first-step failure rescinds to the entry itself.
    CHECK(backtrack_in_hole({{2, 3}, {3, 3}}, hole) == 0);
}

TEST_CASE("endpoints inside a hole are planned through exploration",
          "[constrained][storage]") {
    WorldSpec s = base_spec(8, 6);
    s.uncovered_cells = std::vector<Cell>{{3, 2}, {3, 3}, {4, 2}, {4, 3}};
    const GridWorld world = build_world(s);
    const auto holes = find_holes(world);
    REQUIRE(holes.size() == 1);
    REQUIRE_FALSE(holes[0].boundary.contains({4, 3}));

    SECTION("interior start escapes under a workable budget") {
        ConstraintSet cs;
        cs.d_zero_m = 2.5;
        const PlanResult r = constrained_theta_star(world, holes, cs, {4, 3}, {7, 3});
        REQUIRE(r.found);
        REQUIRE(validate_path(world, holes, cs, r.path.turning_points).ok());
    }

    SECTION("interior start is trapped by a tiny budget") {
        ConstraintSet cs;
        cs.d_zero_m = 0.4;
        const PlanResult r = constrained_theta_star(world, holes, cs, {4, 3}, {7, 3});
        REQUIRE_FALSE(r.found);
    }

    SECTION("interior goal is reached the same way") {
        ConstraintSet cs;
        cs.d_zero_m = 2.5;
        const PlanResult r = constrained_theta_star(world, holes, cs, {0, 3}, {4, 3});
        REQUIRE(r.found);
        REQUIRE(validate_path(world, holes, cs, r.path.turning_points).ok());
        ConstraintSet tight;
        tight.d_zero_m = 0.4;
        REQUIRE_FALSE(
            constrained_theta_star(world, holes, tight, {0, 3}, {4, 3}).found);
    }
}

TEST_CASE("every found path survives the full audit", "[constrained][prop]") {
    std::mt19937_64 rng(20260822);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lmins[] = {0.0, 1.0, 1.5};
    const double thetas[] = {180.0, 90.0, 60.0, 25.0};
    const double dzeros[] = {std::numeric_limits<double>::infinity(), 3.0, 1.5};

    int found = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int w = 6 + int(rng() % 6);
        const int h = 5 + int(rng() % 5);
        WorldSpec s = base_spec(w, h);
        s.start = {0, int(rng() % (h + 1))};
        s.goal = {w, int(rng() % (h + 1))};
        for (int y = 0; y < h; ++y) {
            for (int x = 1; x + 1 < w; ++x) {
                if (u(rng) < 0.10) s.obstacles.push_back({x, y, 1, 1});
            }
        }
        std::vector<Cell> open;
        const int patches = int(rng() % 3);
        for (int p = 0; p < patches; ++p) {
            const int pw = 1 + int(rng() % 3), ph = 1 + int(rng() % 2);
            const int px = int(rng() % std::max(1, w - pw));
            const int py = int(rng() % std::max(1, h - ph));
            for (int y = py; y < py + ph; ++y)
                for (int x = px; x < px + pw; ++x) open.push_back({x, y});
        }
        s.uncovered_cells = open;
        if (trial % 5 == 4) {
            const double mid = h / 2.0;
            s.infrastructure_m = {{0.0, mid}, {double(w), mid}};
            s.d_row_m = 0.0;
            s.d_cfod_m = mid + 1.0;
            s.start.y = std::clamp(s.start.y, 1, h - 1);
            s.goal.y = std::clamp(s.goal.y, 1, h - 1);
        }

        const GridWorld world = build_world(s);
        const auto holes = find_holes(world);
        ConstraintSet cs;
        cs.l_min_m = lmins[rng() % 3];
        cs.theta_bmax_deg = thetas[rng() % 4];
        cs.d_zero_m = dzeros[rng() % 3];

        const PlanResult r = constrained_theta_star(world, holes, cs);
        if (!r.found) continue;
        ++found;
        const auto rep = validate_path(world, holes, cs, r.path.turning_points);
        if (!rep.ok()) {
            CAPTURE(trial, w, h, cs.l_min_m, cs.theta_bmax_deg, cs.d_zero_m);
            for (const auto& v : rep.violations) {
                UNSCOPED_INFO(v.constraint << " at vertex " << v.vertex_index
                                           << " measured " << v.measured
                                           << " limit " << v.limit);
            }
        }
        REQUIRE(rep.ok());
        // Cost accounting: reported cost equals the turning-point polyline.
        CHECK(r.path.cost_m ==
              Catch::Approx(chain_length(r.path.turning_points) *
                            world.cell_size_m));
        for (size_t i = 1; i + 1 < r.path.turning_points.size(); ++i) {
            CHECK_FALSE(collinear_forward(r.path.turning_points[i - 1],
                                          r.path.turning_points[i],
                                          r.path.turning_points[i + 1]));
        }
    }
    REQUIRE(found >= 300);
}

TEST_CASE("repeated runs are bit-for-bit identical", "[constrained]") {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 340; ++trial) {
        WorldSpec s = base_spec(9, 7);
        s.start = {0, 3};
        s.goal = {9, 3};
        std::vector<Cell> open;
        for (int y = 1; y <= 5; ++y) open.push_back({4, y});
        s.uncovered_cells = open;
        for (int k = 0; k < 4; ++k) {
            s.obstacles.push_back({1 + int(rng() % 7), int(rng() % 7), 1, 1});
        }
        const GridWorld world = build_world(s);
        const auto holes = find_holes(world);
        ConstraintSet cs;
        cs.l_min_m = 1.0;
        cs.theta_bmax_deg = 90.0;
        cs.d_zero_m = 1.5 + 0.5 * double(trial % 3);

        const PlanResult a = constrained_theta_star(world, holes, cs);
        const PlanResult b = constrained_theta_star(world, holes, cs);
        const PlanResult c = constrained_theta_star(world, holes, cs);
        REQUIRE(a.found == b.found);
        REQUIRE(a.found == c.found);
        CHECK(a.path.turning_points == b.path.turning_points);
        CHECK(a.path.cost_m == b.path.cost_m);
        CHECK(a.path.expansions == b.path.expansions);
        CHECK(a.path.backtracks == b.path.backtracks);
        CHECK(a.path.visited_trace == b.path.visited_trace);
        CHECK(b.path.turning_points == c.path.turning_points);
        CHECK(b.path.visited_trace == c.path.visited_trace);
    }
}

TEST_CASE("relaxing one constraint never hurts", "[constrained][prop]") {
    std::mt19937_64 rng(5507);
    int comparisons = 0;
    for (int trial = 0; trial < 350; ++trial) {
        GridWorld world = [&] {
            WorldSpec s = base_spec(8, 7);
            s.start = {0, 3};
            s.goal = {8, 3};
            std::vector<uint8_t> mask(size_t(8) * 7, 0);
            for (int k = 0; k < 2 + int(rng() % 2); ++k) {
                const int x = 1 + int(rng() % 6), y = int(rng() % 7);
                if ((x == 0 && y == 3)) continue;
                mask[size_t(y) * 8 + x] = 1;
            }
            for (int y = 0; y < 7; ++y)
                for (int x = 0; x < 8; ++x)
                    if (mask[size_t(y) * 8 + x]) s.obstacles.push_back({x, y, 1, 1});
            std::vector<Cell> open;
            const int px = 2 + int(rng() % 4), py = 1 + int(rng() % 4);
            open.push_back({px, py});
            open.push_back({px + 1, py});
            s.uncovered_cells = open;
            return build_world(s);
        }();
        const auto holes = find_holes(world);

        const auto run = [&](double theta, double dz) {
            ConstraintSet cs;
            cs.l_min_m = 1.0;
            cs.theta_bmax_deg = theta;
            cs.d_zero_m = dz;
            return constrained_theta_star(world, holes, cs);
        };

        const double dzs[] = {1.5, 3.0, std::numeric_limits<double>::infinity()};
        for (int i = 0; i + 1 < 3; ++i) {
            const PlanResult tight = run(90.0, dzs[i]);
            const PlanResult loose = run(90.0, dzs[i + 1]);
            if (tight.found) {
                ++comparisons;
                CAPTURE(trial, i, tight.path.cost_m, loose.path.cost_m);
                REQUIRE(loose.found);
                REQUIRE(loose.path.cost_m <= tight.path.cost_m + 1e-9);
            }
        }
        const double angles[] = {45.0, 90.0, 180.0};
        for (int i = 0; i + 1 < 3; ++i) {
            const PlanResult tight = run(angles[i], 2.5);
            const PlanResult loose = run(angles[i + 1], 2.5);
            if (tight.found) {
                ++comparisons;
                CAPTURE(trial, i, tight.path.cost_m, loose.path.cost_m);
                REQUIRE(loose.found);
                REQUIRE(loose.path.cost_m <= tight.path.cost_m + 1e-9);
            }
        }
    }
    REQUIRE(comparisons >= 1000);
}
