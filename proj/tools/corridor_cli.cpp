// Command-line surface: plan / validate / oracle / bench / gen over JSON
// scenario files. Exit codes: 0 success, 1 error, 2 no path exists,
// 3 validation found violations.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "corridor/scenario.hpp"
#include "corridor/svg.hpp"

namespace {

using namespace corridor;
using detail::round9;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoPath = 2;
constexpr int kExitViolations = 3;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << text;
}

std::string json_line(const Json& j) { return j.dump(2) + "\n"; }

int run_plan(const std::string& scenario_path, const std::string& planner,
             const std::string& out_path, const std::string& svg_path) {
    const ScenarioConfig cfg = load_scenario(scenario_path);
    const GridWorld world = scenario_world(cfg);
    const auto holes = find_holes(world);
    const ResultRecord rec =
        execute_planner(planner, cfg.id, world, holes, cfg.constraints);
    write_text(out_path, json_line(result_json(rec)));

    if (!svg_path.empty()) {
        std::vector<ResultRecord> layers;
        if (planner != "theta") {
            layers.push_back(
                execute_planner("theta", cfg.id, world, holes, cfg.constraints));
        }
        layers.push_back(rec);
        write_text(svg_path, render_svg(world, holes, layers));
    }
    if (!rec.result.found) return kExitNoPath;
    if (rec.audited && !rec.report.ok()) return kExitViolations;
    return kExitOk;
}

std::vector<Vertex> read_path_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open path file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("$", e.what());
    }
    const Json* arr = nullptr;
    if (j.is_array()) {
        arr = &j;
    } else if (j.is_object() && j.contains("path") && j["path"].is_array()) {
        arr = &j["path"];
    } else {
        throw ParseError("path", "expected a vertex array or a result with one");
    }
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        out.push_back(
            corridor::detail::vertex_of((*arr)[i], "path[" + std::to_string(i) + "]"));
    }
    return out;
}

int run_validate(const std::string& scenario_path, const std::string& path_file,
                 const std::string& out_path) {
    const ScenarioConfig cfg = load_scenario(scenario_path);
    const GridWorld world = scenario_world(cfg);
    const auto holes = find_holes(world);
    const std::vector<Vertex> path = read_path_file(path_file);
    const ConstraintReport rep = validate_path(world, holes, cfg.constraints, path);

    ResultRecord rec;
    rec.scenario_id = cfg.id;
    rec.planner = "validate";
    rec.result.found = true;
    rec.result.path.turning_points = path;
    rec.result.path.cost_m = chain_length(path) * world.cell_size_m;
    rec.report = rep;
    rec.audited = true;
    write_text(out_path, json_line(result_json(rec)));
    return rep.ok() ? kExitOk : kExitViolations;
}

int run_oracle(const std::string& scenario_path, const std::string& planner,
               const std::string& out_path) {
    const ScenarioConfig cfg = load_scenario(scenario_path);
    const GridWorld world = scenario_world(cfg);
    const auto holes = find_holes(world);
    const ResultRecord rec =
        execute_planner(planner, cfg.id, world, holes, cfg.constraints);
    write_text(out_path, json_line(result_json(rec)));
    return rec.result.found ? kExitOk : kExitNoPath;
}

unsigned bench_threads(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CORRIDOR_THETA_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, unsigned(cap));
    }
    return std::min<unsigned>(n, unsigned(std::max<std::size_t>(1, jobs)));
}

int run_bench(const std::string& corpus_dir, std::vector<std::string> planners,
              const std::string& format, const std::string& out_path) {
    namespace fs = std::filesystem;
    if (planners.empty()) planners = {"theta", "constrained"};
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("no .json scenarios in " + corpus_dir);

    struct Row {
        ResultRecord rec;
        double relative = 0.0;
    };
    std::vector<Row> rows(files.size() * planners.size());

    const unsigned threads = bench_threads(files.size());
    std::vector<std::thread> pool;
    std::mutex fail_mu;
    std::string first_error;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < files.size(); i += threads) {
                try {
                    const ScenarioConfig cfg = load_scenario(files[i]);
                    const GridWorld world = scenario_world(cfg);
                    const auto holes = find_holes(world);
                    const double straight =
                        euclid(world.start, world.goal) * world.cell_size_m;
                    for (std::size_t p = 0; p < planners.size(); ++p) {
                        Row& row = rows[i * planners.size() + p];
                        row.rec = execute_planner(planners[p], cfg.id, world, holes,
                                                  cfg.constraints);
                        row.relative = row.rec.result.found && straight > 0.0
                                           ? row.rec.result.path.cost_m / straight
                                           : 0.0;
                    }
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(fail_mu);
                    if (first_error.empty()) {
                        first_error = files[i] + ": " + e.what();
                    }
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (!first_error.empty()) throw Error("bench: " + first_error);

    std::ostringstream out;
    if (format == "csv") {
        out << "scenario,planner,found,cost_m,relative_length,wall_time_s,"
               "expansions,backtracks,iterations,audit_ok\n";
        out << std::fixed << std::setprecision(9);
        for (const Row& row : rows) {
            const ResultRecord& r = row.rec;
            out << r.scenario_id << ',' << r.planner << ','
                << (r.result.found ? 1 : 0) << ',' << r.result.path.cost_m << ','
                << row.relative << ',' << r.wall_time_s << ','
                << r.result.path.expansions << ',' << r.result.path.backtracks
                << ',' << r.iterations << ','
                << (r.audited ? (r.report.ok() ? 1 : 0) : (r.result.found ? 0 : 1))
                << '\n';
        }
    } else {
        Json arr = Json::array();
        for (const Row& row : rows) {
            Json j = result_json(row.rec);
            j["relative_length"] = round9(row.relative);
            arr.push_back(std::move(j));
        }
        out << arr.dump(2) << "\n";
    }
    write_text(out_path, out.str());
    return kExitOk;
}

int run_gen(const std::string& out_dir, std::uint64_t seed, CorpusParams params) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto corpus = generate_corpus(params, seed);
    for (const ScenarioConfig& cfg : corpus) {
        write_text(out_dir + "/" + cfg.id + ".json", serialize_scenario(cfg));
    }
    std::cout << "wrote " << corpus.size() << " scenarios to " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corridor surveillance route planner"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, svg_path, path_file, corpus_dir;
    std::string planner = "constrained";
    std::string format = "csv";
    std::vector<std::string> planners;
    std::uint64_t seed = 1;
    CorpusParams params;

    const auto planner_check =
        CLI::IsMember({"theta", "astar8", "constrained", "brute", "exhaustive"});

    CLI::App* plan = app.add_subcommand("plan", "Plan a route for one scenario");
    plan->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    plan->add_option("--planner", planner, "Planner to run")->check(planner_check);
    plan->add_option("--out", out_path, "Result JSON path ('-' = stdout)");
    plan->add_option("--svg", svg_path, "Also render the world and paths");

    CLI::App* validate =
        app.add_subcommand("validate", "Audit a path against a scenario");
    validate->add_option("--scenario", scenario_path, "Scenario JSON file")
        ->required();
    validate->add_option("--path", path_file, "Path JSON (array or result file)")
        ->required();
    validate->add_option("--out", out_path, "Report JSON path ('-' = stdout)");

    CLI::App* oracle =
        app.add_subcommand("oracle", "Run a reference planner on a scenario");
    oracle->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    oracle->add_option("--planner", planner, "brute or exhaustive")
        ->check(CLI::IsMember({"brute", "exhaustive"}));
    oracle->add_option("--out", out_path, "Result JSON path ('-' = stdout)");

    CLI::App* bench = app.add_subcommand("bench", "Run planners over a corpus");
    bench->add_option("--corpus", corpus_dir, "Directory of scenario JSON files")
        ->required();
    bench->add_option("--planner", planners, "Planners (repeatable)")
        ->check(planner_check);
    bench->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    bench->add_option("--out", out_path, "Output path ('-' = stdout)");

    CLI::App* gen = app.add_subcommand("gen", "Generate a scenario corpus");
    gen->add_option("--out", out_path, "Output directory")->required();
    gen->add_option("--seed", seed, "Master seed");
    gen->add_option("--fragments", params.fragments, "Fragment count");
    gen->add_option("--width", params.width, "Grid width in cells");
    gen->add_option("--height", params.height, "Grid height in cells");
    gen->add_option("--cell-size", params.cell_size_m, "Cell size in meters");
    gen->add_option("--obstacles", params.obstacle_count, "Obstacles per fragment");
    gen->add_option("--access-points", params.access_point_count,
                    "Access points per fragment");
    gen->add_option("--ap-radius", params.ap_radius_m, "Access point radius (m)");
    gen->add_option("--theta", params.constraints.theta_bmax_deg,
                    "Turn bound written into each scenario");
    gen->add_option("--l-min", params.constraints.l_min_m,
                    "Minimum leg length written into each scenario");
    gen->add_option("--d-zero", params.constraints.d_zero_m,
                    "Storage bound written into each scenario");
    gen->add_flag_callback(
        "--no-corridor", [&params] { params.corridor = false; },
        "Generate without an infrastructure corridor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Collapse the library's exit-code range: anything but help is 1.
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (plan->parsed()) return run_plan(scenario_path, planner, out_path, svg_path);
        if (validate->parsed()) {
            return run_validate(scenario_path, path_file, out_path);
        }
        if (oracle->parsed()) {
            if (planner == "constrained") planner = "brute";  // oracle default
            return run_oracle(scenario_path, planner, out_path);
        }
        if (bench->parsed()) return run_bench(corpus_dir, planners, format, out_path);
        if (gen->parsed()) return run_gen(out_path, seed, params);
    } catch (const std::exception& e) {
        Json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return kExitError;
    }
    return kExitError;
}
