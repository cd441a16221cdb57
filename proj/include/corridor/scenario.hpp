#pragma once

// Scenario ingestion and result plumbing: versioned JSON configs, the
// deterministic corridor-fragment corpus generator, and recorded planner
// executions ready for serialization. Doubles are rounded to 9 decimal
// digits on the way out so repeated serialization is byte-stable.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "constrained_planner.hpp"
#include "oracle.hpp"

namespace corridor {

struct ScenarioConfig {
    std::string id;
    WorldSpec world;
    std::string map_file;  // optional MovingAI reference, scenario-relative
    std::string map_text;  // loaded contents when resolved from disk
    ConstraintSet constraints;
    std::uint64_t seed = 0;
};

namespace detail {

inline double round9(double v) {
    if (!std::isfinite(v)) return v;
    return std::round(v * 1e9) / 1e9;
}

using Json = nlohmann::ordered_json;

inline const Json& field(const Json& j, const char* key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(path, "missing required field");
    return *it;
}

inline int int_of(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
    return j.get<int>();
}

inline double num_of(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

inline Vertex vertex_of(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ParseError(path, "expected [x, y]");
    return {int_of(j[0], path + "[0]"), int_of(j[1], path + "[1]")};
}

inline Point point_of(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ParseError(path, "expected [x, y]");
    return {num_of(j[0], path + "[0]"), num_of(j[1], path + "[1]")};
}

}  // namespace detail

// Strict parse of a scenario document. Defaults: inert constraints, full
// coverage, no corridor, seed 0. `d_zero_m` accepts null for "unbounded".
inline ScenarioConfig parse_scenario(const std::string& text) {
    using detail::field;
    using detail::Json;
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("$", e.what());
    }
    if (!j.is_object()) throw ParseError("$", "expected a JSON object");
    if (detail::int_of(field(j, "schema", "schema"), "schema") != 1) {
        throw ParseError("schema", "unsupported schema version");
    }

    ScenarioConfig cfg;
    if (j.contains("id")) {
        if (!j["id"].is_string()) throw ParseError("id", "expected a string");
        cfg.id = j["id"].get<std::string>();
    }

    const Json& grid = field(j, "grid", "grid");
    if (!grid.is_object()) throw ParseError("grid", "expected an object");
    cfg.world.width = detail::int_of(field(grid, "width", "grid.width"), "grid.width");
    cfg.world.height =
        detail::int_of(field(grid, "height", "grid.height"), "grid.height");
    if (cfg.world.width < 1 || cfg.world.height < 1) {
        throw ParseError("grid", "dimensions must be positive");
    }
    if (grid.contains("cell_size_m")) {
        cfg.world.cell_size_m = detail::num_of(grid["cell_size_m"], "grid.cell_size_m");
        if (cfg.world.cell_size_m <= 0.0) {
            throw ParseError("grid.cell_size_m", "must be positive");
        }
    }

    if (j.contains("map_file")) {
        if (!j["map_file"].is_string()) throw ParseError("map_file", "expected a string");
        cfg.map_file = j["map_file"].get<std::string>();
    }

    if (j.contains("obstacles")) {
        const Json& obs = j["obstacles"];
        if (!obs.is_array()) throw ParseError("obstacles", "expected an array");
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const std::string path = "obstacles[" + std::to_string(i) + "]";
            const Json& r = obs[i];
            if (!r.is_array() || r.size() != 4) {
                throw ParseError(path, "expected [x, y, w, h]");
            }
            cfg.world.obstacles.push_back(
                {detail::int_of(r[0], path), detail::int_of(r[1], path),
                 detail::int_of(r[2], path), detail::int_of(r[3], path)});
        }
    }

    const bool has_open = j.contains("uncovered_cells");
    const bool has_aps = j.contains("access_points");
    if (has_open && has_aps) {
        throw ParseError("uncovered_cells",
                         "choose explicit cells or access points, not both");
    }
    if (has_open) {
        const Json& open = j["uncovered_cells"];
        if (!open.is_array()) throw ParseError("uncovered_cells", "expected an array");
        std::vector<Cell> cells;
        for (std::size_t i = 0; i < open.size(); ++i) {
            const std::string path = "uncovered_cells[" + std::to_string(i) + "]";
            const Vertex v = detail::vertex_of(open[i], path);
            cells.push_back({v.x, v.y});
        }
        cfg.world.uncovered_cells = cells;
    } else if (has_aps) {
        const Json& aps = j["access_points"];
        if (!aps.is_array()) throw ParseError("access_points", "expected an array");
        for (std::size_t i = 0; i < aps.size(); ++i) {
            const std::string path = "access_points[" + std::to_string(i) + "]";
            const Json& ap = aps[i];
            if (!ap.is_object()) throw ParseError(path, "expected an object");
            AccessPoint a;
            a.center_m =
                detail::point_of(field(ap, "center_m", path + ".center_m"),
                                 path + ".center_m");
            a.radius_m = detail::num_of(field(ap, "radius_m", path + ".radius_m"),
                                        path + ".radius_m");
            if (a.radius_m < 0.0) throw ParseError(path + ".radius_m", "must be >= 0");
            cfg.world.access_points.push_back(a);
        }
    } else {
        cfg.world.uncovered_cells = std::vector<Cell>{};  // fully covered
    }

    if (j.contains("infrastructure_m")) {
        const Json& infra = j["infrastructure_m"];
        if (!infra.is_array() || infra.size() < 2) {
            throw ParseError("infrastructure_m", "expected an array of 2+ points");
        }
        for (std::size_t i = 0; i < infra.size(); ++i) {
            const std::string path = "infrastructure_m[" + std::to_string(i) + "]";
            cfg.world.infrastructure_m.push_back(detail::point_of(infra[i], path));
        }
        cfg.world.d_row_m =
            detail::num_of(field(j, "d_row_m", "d_row_m"), "d_row_m");
        cfg.world.d_cfod_m =
            detail::num_of(field(j, "d_cfod_m", "d_cfod_m"), "d_cfod_m");
        if (!(cfg.world.d_row_m < cfg.world.d_cfod_m)) {
            throw InvalidConstraints("corridor: require d_row < d_cfod");
        }
    }

    if (j.contains("constraints")) {
        const Json& cs = j["constraints"];
        if (!cs.is_object()) throw ParseError("constraints", "expected an object");
        if (cs.contains("l_min_m")) {
            cfg.constraints.l_min_m =
                detail::num_of(cs["l_min_m"], "constraints.l_min_m");
        }
        if (cs.contains("theta_bmax_deg")) {
            cfg.constraints.theta_bmax_deg =
                detail::num_of(cs["theta_bmax_deg"], "constraints.theta_bmax_deg");
        }
        if (cs.contains("d_zero_m") && !cs["d_zero_m"].is_null()) {
            cfg.constraints.d_zero_m =
                detail::num_of(cs["d_zero_m"], "constraints.d_zero_m");
        }
        cfg.constraints.validate();
    }

    cfg.world.start = detail::vertex_of(field(j, "start", "start"), "start");
    cfg.world.goal = detail::vertex_of(field(j, "goal", "goal"), "goal");
    if (cfg.world.start == cfg.world.goal) {
        throw ParseError("goal", "start and goal must differ");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            throw ParseError("seed", "expected an integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    return cfg;
}

inline std::string serialize_scenario(const ScenarioConfig& cfg) {
    using detail::Json;
    using detail::round9;
    Json j;
    j["schema"] = 1;
    if (!cfg.id.empty()) j["id"] = cfg.id;
    j["grid"] = {{"width", cfg.world.width},
                 {"height", cfg.world.height},
                 {"cell_size_m", round9(cfg.world.cell_size_m)}};
    if (!cfg.map_file.empty()) j["map_file"] = cfg.map_file;
    Json obs = Json::array();
    for (const ObstacleRect& r : cfg.world.obstacles) {
        obs.push_back({r.x, r.y, r.w, r.h});
    }
    j["obstacles"] = std::move(obs);
    if (cfg.world.uncovered_cells.has_value()) {
        Json open = Json::array();
        for (const Cell& c : *cfg.world.uncovered_cells) open.push_back({c.x, c.y});
        j["uncovered_cells"] = std::move(open);
    } else if (!cfg.world.access_points.empty()) {
        Json aps = Json::array();
        for (const AccessPoint& a : cfg.world.access_points) {
            aps.push_back({{"center_m", {round9(a.center_m.x), round9(a.center_m.y)}},
                           {"radius_m", round9(a.radius_m)}});
        }
        j["access_points"] = std::move(aps);
    }
    if (!cfg.world.infrastructure_m.empty()) {
        Json infra = Json::array();
        for (const Point& p : cfg.world.infrastructure_m) {
            infra.push_back({round9(p.x), round9(p.y)});
        }
        j["infrastructure_m"] = std::move(infra);
        j["d_row_m"] = round9(cfg.world.d_row_m);
        j["d_cfod_m"] = round9(cfg.world.d_cfod_m);
    }
    Json cs;
    cs["l_min_m"] = round9(cfg.constraints.l_min_m);
    cs["theta_bmax_deg"] = round9(cfg.constraints.theta_bmax_deg);
    if (std::isfinite(cfg.constraints.d_zero_m)) {
        cs["d_zero_m"] = round9(cfg.constraints.d_zero_m);
    } else {
        cs["d_zero_m"] = nullptr;
    }
    j["constraints"] = std::move(cs);
    j["start"] = {cfg.world.start.x, cfg.world.start.y};
    j["goal"] = {cfg.world.goal.x, cfg.world.goal.y};
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

// Parse a scenario file and resolve its map reference against the file's
// directory, loading the map text so the config is self-contained.
inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("$", "cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ScenarioConfig cfg = parse_scenario(buf.str());
    if (cfg.id.empty()) {
        const std::size_t slash = path.find_last_of('/');
        std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
        const std::size_t dot = stem.find_last_of('.');
        cfg.id = dot == std::string::npos ? stem : stem.substr(0, dot);
    }
    if (!cfg.map_file.empty()) {
        std::string map_path = cfg.map_file;
        if (!map_path.empty() && map_path.front() != '/') {
            const std::size_t slash = path.find_last_of('/');
            if (slash != std::string::npos) {
                map_path = path.substr(0, slash + 1) + map_path;
            }
        }
        std::ifstream map_in(map_path, std::ios::binary);
        if (!map_in) {
            throw ParseError("map_file", "referenced map does not exist: " + map_path);
        }
        std::ostringstream map_buf;
        map_buf << map_in.rdbuf();
        cfg.map_text = map_buf.str();
    }
    return cfg;
}

// Materialize the world: a loaded map replaces the grid mask (its dimensions
// win), then rectangles, coverage, and the corridor apply on top.
inline GridWorld scenario_world(const ScenarioConfig& cfg) {
    WorldSpec spec = cfg.world;
    if (!cfg.map_text.empty()) apply_moving_ai_map(cfg.map_text, spec);
    return build_world(spec);
}

// One recorded planner execution; `report` is filled from a full audit of
// the returned path whenever one exists.
struct ResultRecord {
    std::string scenario_id;
    std::string planner;
    PlanResult result;
    ConstraintReport report;
    bool audited = false;
    double wall_time_s = 0.0;
    long long iterations = 0;
};

inline ResultRecord execute_planner(const std::string& planner,
                                    const std::string& scenario_id,
                                    const GridWorld& world,
                                    const std::vector<CoverageHole>& holes,
                                    const ConstraintSet& cs) {
    ResultRecord rec;
    rec.scenario_id = scenario_id;
    rec.planner = planner;
    const auto t0 = std::chrono::steady_clock::now();
    if (planner == "theta") {
        rec.result = theta_star(world);
        rec.iterations = 1;
    } else if (planner == "astar8") {
        rec.result = a_star_8(world);
        rec.iterations = 1;
    } else if (planner == "constrained") {
        rec.result = constrained_theta_star(world, holes, cs);
        rec.iterations = 1;
    } else if (planner == "brute") {
        const BruteResult b =
            brute_force_plan(world, holes, cs, world.start, world.goal);
        rec.result = {b.found, b.path};
        rec.iterations = b.log.entries.empty() ? 0 : b.log.entries.back().iteration;
    } else if (planner == "exhaustive") {
        rec.result = exhaustive_optimum(world, holes, cs, world.start, world.goal);
        rec.iterations = 1;
    } else {
        throw Error("unknown planner: " + planner);
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    if (rec.result.found && rec.result.path.turning_points.size() >= 2) {
        rec.report = validate_path(world, holes, cs, rec.result.path.turning_points);
        rec.audited = true;
    }
    return rec;
}

inline nlohmann::ordered_json result_json(const ResultRecord& rec) {
    using detail::Json;
    using detail::round9;
    Json j;
    j["schema"] = 1;
    j["scenario"] = rec.scenario_id;
    j["planner"] = rec.planner;
    j["found"] = rec.result.found;
    if (rec.result.found) {
        Json path = Json::array();
        for (const Vertex& v : rec.result.path.turning_points) {
            path.push_back({v.x, v.y});
        }
        j["path"] = std::move(path);
        j["cost_m"] = round9(rec.result.path.cost_m);
    }
    j["expansions"] = rec.result.path.expansions;
    j["backtracks"] = rec.result.path.backtracks;
    j["iterations"] = rec.iterations;
    j["wall_time_s"] = round9(rec.wall_time_s);
    if (rec.audited) {
        Json rep;
        rep["ok"] = rec.report.ok();
        rep["max_turn_deg"] = round9(rec.report.max_turn_deg);
        if (std::isfinite(rec.report.min_leg_m)) {
            rep["min_leg_m"] = round9(rec.report.min_leg_m);
        } else {
            rep["min_leg_m"] = nullptr;
        }
        Json viols = Json::array();
        for (const ConstraintViolation& v : rec.report.violations) {
            viols.push_back({{"constraint", v.constraint},
                             {"vertex_index", v.vertex_index},
                             {"measured", round9(v.measured)},
                             {"limit", round9(v.limit)},
                             {"hole_id", v.hole_id}});
        }
        rep["violations"] = std::move(viols);
        Json ts = Json::array();
        for (const HoleTraversal& t : rec.report.traversals) {
            ts.push_back({{"hole_id", t.hole_id},
                          {"length_m", round9(t.length_m)},
                          {"start_leg", t.start_leg},
                          {"end_leg", t.end_leg}});
        }
        rep["traversals"] = std::move(ts);
        j["report"] = std::move(rep);
    }
    return j;
}

// Corridor-fragment corpus in the survey geometry: long narrow grids, an
// infrastructure line along the long axis, vertical-wall obstacles spaced so
// gentle slaloms stay inside a tight turn budget, and access points strung
// along the flight strip leaving at least one coverage hole.
struct CorpusParams {
    int fragments = 30;
    int width = 650;
    int height = 105;
    double cell_size_m = 3.0;
    int obstacle_count = 8;
    int obstacle_max_cells = 22;  // wall height bound
    int access_point_count = 30;
    double ap_radius_m = 90.0;
    double min_los_cells = 500.0;
    bool corridor = true;
    double d_row_m = 9.0;
    double d_cfod_m = 150.0;
    ConstraintSet constraints = ConstraintSet{.theta_bmax_deg = 20.0};
};

inline std::vector<ScenarioConfig> generate_corpus(const CorpusParams& params,
                                                   std::uint64_t seed) {
    if (params.fragments < 1 || params.width < 8 || params.height < 8) {
        throw InvalidConstraints("corpus: need >= 1 fragment and an 8x8 grid");
    }
    params.constraints.validate();
    std::vector<ScenarioConfig> out;
    for (int frag = 0; frag < params.fragments; ++frag) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(frag) + 1);
        const int W = params.width, H = params.height;
        const double cell = params.cell_size_m;

        ScenarioConfig cfg;
        {
            std::ostringstream name;
            name << "frag-";
            name.width(3);
            name.fill('0');
            name << frag;
            cfg.id = name.str();
        }
        cfg.seed = rng();
        cfg.constraints = params.constraints;
        cfg.world.width = W;
        cfg.world.height = H;
        cfg.world.cell_size_m = cell;

        // Flight strip: vertex rows strictly between the separation and
        // sight bounds on the upper side of the infrastructure line.
        int y_lo = 2, y_hi = H - 2;
        if (params.corridor) {
            const double mid_m = (H / 2.0) * cell;
            cfg.world.infrastructure_m = {{0.0, mid_m}, {W * cell, mid_m}};
            cfg.world.d_row_m = params.d_row_m;
            cfg.world.d_cfod_m = params.d_cfod_m;
            y_lo = int(std::ceil((mid_m + params.d_row_m) / cell)) + 2;
            y_hi = std::min(H - 1, int(std::floor((mid_m + params.d_cfod_m) / cell)) - 2);
            if (y_hi - y_lo < 6) {
                throw InvalidConstraints("corpus: corridor strip too narrow");
            }
        }

        const auto strip_y = [&](int margin) {
            return y_lo + margin +
                   int(rng() % std::uint64_t(std::max(1, y_hi - y_lo - 2 * margin + 1)));
        };
        cfg.world.start = {0, strip_y(2)};
        cfg.world.goal = {W, strip_y(2)};

        // Evenly slotted vertical walls with jitter; a wall never reaches a
        // strip edge, so a slalom within the turn budget always exists.
        const int n_obs = params.obstacle_count;
        for (int k = 0; k < n_obs; ++k) {
            const double slot = double(W - 80) / std::max(1, n_obs);
            const int cx = 40 + int(slot * k + slot / 2.0) + int(rng() % 17) - 8;
            const int ow = 2 + int(rng() % 3);
            const int oh =
                std::min(params.obstacle_max_cells, 8 + int(rng() % 15));
            const int strip_cells = y_hi - y_lo - 2;
            const int capped = std::min(oh, std::max(4, strip_cells - 10));
            const int cy = y_lo + 1 +
                           int(rng() % std::uint64_t(
                                           std::max(1, strip_cells - capped)));
            cfg.world.obstacles.push_back({cx, cy, ow, capped});
        }

        // Access points along the strip. Re-deal the y offsets a few times
        // if the union accidentally blankets every cell: each fragment
        // should keep at least one zero-coverage zone.
        for (int attempt = 0; attempt < 4; ++attempt) {
            cfg.world.access_points.clear();
            const int n_ap = params.access_point_count;
            for (int k = 0; k < n_ap; ++k) {
                const double ax = (double(k) + 0.5) * W / n_ap * cell;
                const double ay =
                    (y_lo + 2 + double(rng() % std::uint64_t(
                                           std::max(1, y_hi - y_lo - 4)))) *
                    cell;
                cfg.world.access_points.push_back({{ax, ay}, params.ap_radius_m});
            }
            const GridWorld world = build_world(cfg.world);
            if (!find_holes(world).empty()) break;
        }
        out.push_back(std::move(cfg));
    }
    return out;
}

}  // namespace corridor
