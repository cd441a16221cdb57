#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corridor/scenario.hpp"
#include "corridor/svg.hpp"

namespace {

using namespace corridor;

std::string minimal_text() {
    return R"({"schema": 1, "grid": {"width": 9, "height": 9},
               "start": [0, 0], "goal": [9, 9]})";
}

// Parse and return the field path of the ParseError it must raise.
std::string failing_field(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ParseError& e) {
        return e.field();
    }
    return "<no error>";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Random scenario in one of the two explicit coverage modes; every value is
// drawn from sets that survive constraint validation.
ScenarioConfig sample_config(std::mt19937_64& rng, int index) {
    const auto pick = [&](int n) { return int(rng() % std::uint64_t(n)); };
    ScenarioConfig cfg;
    if (pick(3) != 0) cfg.id = "case-" + std::to_string(index);
    cfg.world.width = 3 + pick(12);
    cfg.world.height = 3 + pick(10);
    const double cells[] = {1.0, 2.0, 2.5};
    cfg.world.cell_size_m = cells[pick(3)];
    const int n_obs = pick(3);
    for (int i = 0; i < n_obs; ++i) {
        const int x = pick(cfg.world.width);
        const int y = pick(cfg.world.height);
        cfg.world.obstacles.push_back(
            {x, y, 1 + pick(std::max(1, cfg.world.width - x)),
             1 + pick(std::max(1, cfg.world.height - y))});
    }
    if (pick(2) == 0) {
        std::vector<Cell> open;
        const int n_open = pick(4);
        for (int i = 0; i < n_open; ++i) {
            open.push_back({pick(cfg.world.width), pick(cfg.world.height)});
        }
        cfg.world.uncovered_cells = open;
    } else {
        const int n_ap = 1 + pick(3);
        for (int i = 0; i < n_ap; ++i) {
            cfg.world.access_points.push_back(
                {{rng() % 1000 / 31.0, rng() % 1000 / 37.0},
                 rng() % 1000 / 41.0});
        }
    }
    if (pick(3) == 0) {
        const double w_m = cfg.world.width * cfg.world.cell_size_m;
        const double mid = cfg.world.height * cfg.world.cell_size_m / 2.0;
        cfg.world.infrastructure_m = {{0.0, mid}, {w_m, mid}};
        if (pick(2) == 0) cfg.world.infrastructure_m.push_back({w_m, mid + 1.0});
        const double rows[] = {0.0, 1.5, 4.25};
        cfg.world.d_row_m = rows[pick(3)];
        cfg.world.d_cfod_m = pick(2) == 0 ? cfg.world.d_row_m + 3.5 : 60.0;
    }
    const double lmins[] = {0.0, 1.25};
    const double thetas[] = {180.0, 91.5, 33.3};
    const double dzeros[] = {std::numeric_limits<double>::infinity(), 2.75, 9.125};
    cfg.constraints.l_min_m = lmins[pick(2)];
    cfg.constraints.theta_bmax_deg = thetas[pick(3)];
    cfg.constraints.d_zero_m = dzeros[pick(3)];
    cfg.world.start = {pick(cfg.world.width + 1), pick(cfg.world.height + 1)};
    do {
        cfg.world.goal = {pick(cfg.world.width + 1), pick(cfg.world.height + 1)};
    } while (cfg.world.goal == cfg.world.start);
    cfg.seed = rng();
    return cfg;
}

}  // namespace

TEST_CASE("a minimal document parses with inert defaults") {
    const ScenarioConfig cfg = parse_scenario(minimal_text());
    CHECK(cfg.id.empty());
    CHECK(cfg.world.width == 9);
    CHECK(cfg.world.height == 9);
    CHECK(cfg.world.cell_size_m == 1.0);
    CHECK(cfg.world.obstacles.empty());
    CHECK(cfg.world.infrastructure_m.empty());
    CHECK(cfg.constraints.l_min_m == 0.0);
    CHECK(cfg.constraints.theta_bmax_deg == 180.0);
    CHECK(std::isinf(cfg.constraints.d_zero_m));
    CHECK_FALSE(cfg.constraints.turn_active());
    CHECK_FALSE(cfg.constraints.storage_active());
    CHECK(cfg.seed == 0);

    // No coverage block means fully covered: no holes anywhere.
    REQUIRE(cfg.world.uncovered_cells.has_value());
    CHECK(cfg.world.uncovered_cells->empty());
    const GridWorld world = scenario_world(cfg);
    CHECK(find_holes(world).empty());
    CHECK_FALSE(world.has_corridor());
}

TEST_CASE("schema violations name the offending field") {
    CHECK(failing_field("not json") == "$");
    CHECK(failing_field("[1, 2]") == "$");
    CHECK(failing_field(R"({"grid": {"width": 3, "height": 3},
                            "start": [0,0], "goal": [1,1]})") == "schema");
    CHECK(failing_field(R"({"schema": 2, "grid": {"width": 3, "height": 3},
                            "start": [0,0], "goal": [1,1]})") == "schema");
    CHECK(failing_field(R"({"schema": 1, "start": [0,0], "goal": [1,1]})") ==
          "grid");
    CHECK(failing_field(R"({"schema": 1, "grid": {"height": 3},
                            "start": [0,0], "goal": [1,1]})") == "grid.width");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": "nine", "height": 3},
                            "start": [0,0], "goal": [1,1]})") == "grid.width");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 0, "height": 3},
                            "start": [0,0], "goal": [1,1]})") == "grid");
    CHECK(failing_field(R"({"schema": 1,
                            "grid": {"width": 3, "height": 3, "cell_size_m": -1},
                            "start": [0,0], "goal": [1,1]})") ==
          "grid.cell_size_m");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "obstacles": [[1, 1, 1]],
                            "start": [0,0], "goal": [1,1]})") == "obstacles[0]");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "uncovered_cells": [[0, 0]],
                            "access_points": [],
                            "start": [0,0], "goal": [1,1]})") ==
          "uncovered_cells");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "access_points": [{"center_m": [1, 1]}],
                            "start": [0,0], "goal": [1,1]})") ==
          "access_points[0].radius_m");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "access_points": [{"center_m": [1, 1],
                                               "radius_m": -2}],
                            "start": [0,0], "goal": [1,1]})") ==
          "access_points[0].radius_m");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "infrastructure_m": [[0, 0]],
                            "start": [0,0], "goal": [1,1]})") ==
          "infrastructure_m");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "infrastructure_m": [[0, 0], [3, 0]],
                            "start": [0,0], "goal": [1,1]})") == "d_row_m");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "goal": [1,1]})") == "start");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "start": [1], "goal": [1,1]})") == "start");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "start": [1,1], "goal": [1,1]})") == "goal");
    CHECK(failing_field(R"({"schema": 1, "grid": {"width": 3, "height": 3},
                            "start": [0,0], "goal": [1,1], "seed": 1.5})") ==
          "seed");
}

TEST_CASE("corridor separation must stay inside sight range") {
    const auto with_corridor = [](double d_row, double d_cfod) {
        std::ostringstream text;
        text << R"({"schema": 1, "grid": {"width": 6, "height": 6},
                    "infrastructure_m": [[0, 3], [6, 3]],
                    "d_row_m": )"
             << d_row << R"(, "d_cfod_m": )" << d_cfod
             << R"(, "start": [0,0], "goal": [6,6]})";
        return text.str();
    };
    CHECK_THROWS_AS(parse_scenario(with_corridor(50.0, 30.0)),
                    InvalidConstraints);
    CHECK_THROWS_AS(parse_scenario(with_corridor(2.0, 2.0)),
                    InvalidConstraints);
    CHECK_NOTHROW(parse_scenario(with_corridor(2.0, 30.0)));
}

TEST_CASE("serialization round trips byte for byte") {
    std::mt19937_64 rng(0xC0FFEEuLL);
    for (int trial = 0; trial < 1100; ++trial) {
        const ScenarioConfig cfg = sample_config(rng, trial);
        const std::string once = serialize_scenario(cfg);
        ScenarioConfig back;
        try {
            back = parse_scenario(once);
        } catch (const Error& e) {
            CAPTURE(trial, once);
            FAIL("round trip rejected its own output: " << e.what());
        }
        const std::string twice = serialize_scenario(back);
        if (once != twice) {
            CAPTURE(trial, once, twice);
            FAIL("serialization is not stable");
        }
        CHECK(back.id == cfg.id);
        CHECK(back.world.width == cfg.world.width);
        CHECK(back.world.height == cfg.world.height);
        CHECK(back.world.start == cfg.world.start);
        CHECK(back.world.goal == cfg.world.goal);
        CHECK(back.world.obstacles.size() == cfg.world.obstacles.size());
        CHECK(back.world.access_points.size() == cfg.world.access_points.size());
        CHECK(back.world.uncovered_cells.has_value() ==
              cfg.world.uncovered_cells.has_value());
        CHECK(back.seed == cfg.seed);
        CHECK(std::isfinite(back.constraints.d_zero_m) ==
              std::isfinite(cfg.constraints.d_zero_m));
    }

    // A parsed minimal document is already in canonical form after one pass.
    const std::string canon = serialize_scenario(parse_scenario(minimal_text()));
    CHECK(serialize_scenario(parse_scenario(canon)) == canon);
}

TEST_CASE("configs loaded from disk resolve their map reference") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "corridor_io_test";
    fs::create_directories(dir);

    std::ofstream(dir / "tiny.map") << "type octile\nheight 3\nwidth 4\nmap\n"
                                       "....\n.@..\n....\n";
    std::ofstream(dir / "mapped.json")
        << R"({"schema": 1, "grid": {"width": 9, "height": 9},
               "map_file": "tiny.map", "start": [0, 0], "goal": [4, 3]})";
    const ScenarioConfig cfg = load_scenario((dir / "mapped.json").string());
    CHECK(cfg.id == "mapped");  // falls back to the file stem
    REQUIRE_FALSE(cfg.map_text.empty());

    // The map raster overrides the declared grid dimensions.
    const GridWorld world = scenario_world(cfg);
    CHECK(world.width == 4);
    CHECK(world.height == 3);
    CHECK_FALSE(world.cell_free(1, 1));
    CHECK(world.cell_free(0, 0));

    std::ofstream(dir / "dangling.json")
        << R"({"schema": 1, "grid": {"width": 3, "height": 3},
               "map_file": "missing.map", "start": [0, 0], "goal": [1, 1]})";
    try {
        load_scenario((dir / "dangling.json").string());
        FAIL("expected a missing-map parse error");
    } catch (const ParseError& e) {
        CHECK(e.field() == "map_file");
    }
    CHECK_THROWS_AS(load_scenario((dir / "nonexistent.json").string()),
                    ParseError);
    fs::remove_all(dir);
}

TEST_CASE("the corpus generator is seed stable") {
    CorpusParams p;
    p.fragments = 4;
    p.width = 90;
    p.height = 40;
    p.obstacle_count = 3;
    p.access_point_count = 8;
    p.ap_radius_m = 40.0;
    p.min_los_cells = 80.0;

    const std::vector<ScenarioConfig> first = generate_corpus(p, 99);
    const std::vector<ScenarioConfig> second = generate_corpus(p, 99);
    REQUIRE(first.size() == 4);
    REQUIRE(second.size() == 4);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(serialize_scenario(first[i]) == serialize_scenario(second[i]));
    }
    const std::vector<ScenarioConfig> other = generate_corpus(p, 100);
    CHECK(serialize_scenario(first[0]) != serialize_scenario(other[0]));

    for (std::size_t i = 0; i < first.size(); ++i) {
        const ScenarioConfig& cfg = first[i];
        std::ostringstream want;
        want << "frag-00" << i;
        CHECK(cfg.id == want.str());
        CHECK(cfg.world.width == 90);
        CHECK(cfg.world.height == 40);
        CHECK(euclid(to_point(cfg.world.start), to_point(cfg.world.goal)) >=
              p.min_los_cells);

        // Every fragment keeps at least one coverage hole, and its own
        // serialization parses back into an identical world.
        const ScenarioConfig reread = parse_scenario(serialize_scenario(cfg));
        const GridWorld world = scenario_world(reread);
        CHECK_FALSE(find_holes(world).empty());
        CHECK(world.has_corridor());
    }

    // Defaults produce the survey geometry.
    CorpusParams defaults;
    defaults.fragments = 1;
    const std::vector<ScenarioConfig> survey = generate_corpus(defaults, 1);
    REQUIRE(survey.size() == 1);
    CHECK(survey[0].world.width == 650);
    CHECK(survey[0].world.height == 105);
    CHECK(survey[0].world.cell_size_m == 3.0);
    CHECK(survey[0].constraints.theta_bmax_deg == 20.0);
    CHECK_FALSE(std::isfinite(survey[0].constraints.d_zero_m));
    CHECK(euclid(to_point(survey[0].world.start),
                 to_point(survey[0].world.goal)) >= 500.0);

    // No obstacles plus a blanket access radius yields free instances.
    CorpusParams free_p = p;
    free_p.obstacle_count = 0;
    free_p.ap_radius_m = 1e6;
    for (const ScenarioConfig& cfg : generate_corpus(free_p, 5)) {
        CHECK(cfg.world.obstacles.empty());
        CHECK(find_holes(scenario_world(cfg)).empty());
    }

    CorpusParams bad = p;
    bad.width = 4;
    CHECK_THROWS_AS(generate_corpus(bad, 1), InvalidConstraints);
}

TEST_CASE("planner executions serialize to a stable record") {
    WorldSpec spec;
    spec.width = 9;
    spec.height = 9;
    spec.uncovered_cells = std::vector<Cell>{};
    spec.start = {0, 0};
    spec.goal = {9, 9};
    const GridWorld world = build_world(spec);
    const std::vector<CoverageHole> holes = find_holes(world);
    const ConstraintSet cs;

    ResultRecord rec = execute_planner("theta", "diag", world, holes, cs);
    REQUIRE(rec.result.found);
    REQUIRE(rec.audited);
    rec.wall_time_s = 0.25;  // pin the only nondeterministic field
    const nlohmann::ordered_json j = result_json(rec);
    CHECK(j["schema"] == 1);
    CHECK(j["scenario"] == "diag");
    CHECK(j["planner"] == "theta");
    CHECK(j["found"] == true);
    CHECK(j["path"].size() == rec.result.path.turning_points.size());
    CHECK(j["path"][0] == nlohmann::ordered_json({0, 0}));
    CHECK(j["cost_m"].get<double>() ==
          Catch::Approx(9.0 * std::sqrt(2.0)).margin(1e-9));
    CHECK(j["iterations"] == 1);
    CHECK(j["report"]["ok"] == true);
    CHECK(j["report"]["violations"].empty());
    CHECK(j["report"]["traversals"].empty());
    CHECK(result_json(rec).dump() == j.dump());  // rendering is stable

    // Nine-digit rounding happens before serialization.
    rec.result.path.cost_m = 1.0 / 3.0;
    CHECK(result_json(rec).dump().find("0.333333333") != std::string::npos);
    CHECK(result_json(rec).dump().find("0.3333333333") == std::string::npos);

    // A failed search keeps the path fields out entirely.
    WorldSpec walled = spec;
    walled.obstacles.push_back({4, 0, 1, 9});
    const ResultRecord miss =
        execute_planner("theta", "walled", build_world(walled), {}, cs);
    const nlohmann::ordered_json mj = result_json(miss);
    CHECK(mj["found"] == false);
    CHECK_FALSE(mj.contains("path"));
    CHECK_FALSE(mj.contains("cost_m"));
    CHECK_FALSE(mj.contains("report"));

    CHECK_THROWS_AS(execute_planner("warp", "x", world, holes, cs), Error);
}

TEST_CASE("rendered views keep the six layer contract") {
    WorldSpec spec;
    spec.width = 6;
    spec.height = 4;
    spec.uncovered_cells = std::vector<Cell>{{2, 1}};
    spec.obstacles.push_back({4, 0, 1, 2});
    spec.start = {0, 0};
    spec.goal = {6, 4};
    const GridWorld world = build_world(spec);
    const std::vector<CoverageHole> holes = find_holes(world);

    const std::string empty_view = render_svg(world, holes, {});
    const char* layers[] = {"id=\"coverage\"",      "id=\"obstacles\"",
                            "id=\"corridor\"",      "id=\"baseline-path\"",
                            "id=\"final-path\"",    "id=\"visited-trace\""};
    std::size_t at = 0;
    for (const char* layer : layers) {
        const std::size_t pos = empty_view.find(layer, at);
        REQUIRE(pos != std::string::npos);
        at = pos;
    }
    CHECK(empty_view.find("<polyline") == std::string::npos);
    CHECK(render_svg(world, holes, {}) == empty_view);

    // A planned record paints the final path through its turning points.
    const ConstraintSet cs;
    const ResultRecord run =
        execute_planner("constrained", "view", world, holes, cs);
    REQUIRE(run.result.found);
    const std::string view = render_svg(world, holes, {run});
    CHECK(view.find("#2e9e46") != std::string::npos);
    CHECK(view.find("#2b6cb0") != std::string::npos);
    const Vertex last = run.result.path.turning_points.back();
    std::ostringstream coord;
    coord << std::fixed << std::setprecision(3) << double(last.x) << ","
          << double(world.height - last.y);
    CHECK(view.find(coord.str()) != std::string::npos);
}

TEST_CASE("a fixture scenario renders to the frozen view") {
    const ScenarioConfig cfg =
        load_scenario(std::string(CORRIDOR_SCENARIO_DIR) + "/banded.json");
    const GridWorld world = scenario_world(cfg);
    const std::vector<CoverageHole> holes = find_holes(world);
    const ResultRecord base =
        execute_planner("theta", cfg.id, world, holes, cfg.constraints);
    const ResultRecord final_rec =
        execute_planner("constrained", cfg.id, world, holes, cfg.constraints);
    const std::string view = render_svg(world, holes, {base, final_rec});
    const std::string golden =
        read_file(std::string(CORRIDOR_GOLDEN_DIR) + "/banded_view.svg");
    if (view != golden) {
        CAPTURE(view.size(), golden.size());
        FAIL("rendered view drifted from the frozen golden file");
    }
}
