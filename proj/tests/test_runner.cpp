#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ktri/errors.hpp"
#include "ktri/runner.hpp"

using namespace ktri;
namespace fs = std::filesystem;

namespace {

Trajectory moving_traj(Poly x, Poly y, const Rat& t0, const Rat& t1) {
    Trajectory tr;
    tr.pieces.push_back(TrajectoryPiece{t0, t1, std::move(x), std::move(y)});
    return tr;
}

Trajectory constant_traj(const Rat& x, const Rat& y, const Rat& t0, const Rat& t1) {
    return moving_traj(Poly::constant(x), Poly::constant(y), t0, t1);
}

Scenario crossing_pair() {
    Scenario s;
    s.n = 2;
    s.t0 = 0;
    s.t1 = 1;
    s.label = "crossing pair";
    s.points.push_back(moving_traj(Poly{{make_rat(0), make_rat(1)}}, Poly::constant(make_rat(0)),
                                   s.t0, s.t1));
    s.points.push_back(moving_traj(Poly{{make_rat(1), make_rat(-1)}}, Poly::constant(make_rat(1)),
                                   s.t0, s.t1));
    return s;
}

Scenario parked_points() {
    Scenario s;
    s.n = 5;
    s.t0 = 0;
    s.t1 = 1;
    s.label = "parked points";
    const long coords[5][2] = {{0, 0}, {2, 3}, {5, 1}, {7, 4}, {9, 0}};
    for (const auto& c : coords) {
        s.points.push_back(constant_traj(make_rat(c[0]), make_rat(c[1]), s.t0, s.t1));
    }
    return s;
}

fs::path test_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ktri_runner_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_scenario_file(const fs::path& dir, const Scenario& s) {
    const fs::path file = dir / "scenario.json";
    std::ofstream out(file);
    out << save_scenario(s);
    REQUIRE(out.good());
    return file.string();
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::map<std::string, std::string> read_kv_file(const fs::path& file) {
    std::ifstream in(file);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_kv(buf.str());
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
    std::ifstream in(file);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

TEST_CASE("a parked scenario runs to zero events") {
    const fs::path dir = test_dir("parked");
    RunConfig cfg;
    cfg.scenario_file = write_scenario_file(dir, parked_points());
    std::ostringstream out, err;
    CHECK(run_command(cfg, out, err) == 0);
    const auto kv = parse_kv(out.str());
    CHECK(kv.at("events_total") == "0");
    CHECK(kv.at("swap_events") == "0");
    CHECK(kv.at("discrete_changes") == "0");
    CHECK(err.str().empty());
}

TEST_CASE("a crossing pair reports exactly one swap event") {
    const fs::path dir = test_dir("pair");
    RunConfig cfg;
    cfg.scenario_file = write_scenario_file(dir, crossing_pair());
    cfg.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    CHECK(run_command(cfg, out, err) == 0);
    const auto kv = parse_kv(out.str());
    CHECK(kv.at("swap_events") == "1");
    CHECK(kv.at("events_total") == "1");

    const auto rows = read_csv(fs::path(cfg.out_dir) / "events.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"event", "time", "exact", "kind", "side", "ids",
                                              "chords_removed", "chords_added", "wall_ns"});
    CHECK(rows[1][1] == "0.5");
    CHECK(rows[1][2] == "1");  // the crossing time is rendered with nothing cut
    CHECK(rows[1][3] == "swap");
    CHECK(rows[1][5] == "0;1");
}

TEST_CASE("stats equal the re-aggregated event log") {
    const fs::path dir = test_dir("aggregate");
    RunConfig cfg;
    cfg.gen_n = 64;
    cfg.gen_seed = 1;
    cfg.gen_model = MotionModel::kLinear;
    cfg.out_dir = dir.string();
    std::ostringstream out, err;
    REQUIRE(run_command(cfg, out, err) == 0);

    const auto kv = read_kv_file(dir / "stats.txt");
    const auto rows = read_csv(dir / "events.csv");
    REQUIRE(rows.size() > 1);
    long long swaps = 0, bridges = 0, vis = 0, removed = 0, added = 0, max_delta = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 9);
        if (rows[i][3] == "swap") ++swaps;
        if (rows[i][3] == "bridge") ++bridges;
        if (rows[i][3] == "vis") ++vis;
        const long long r = std::stoll(rows[i][6]);
        const long long a = std::stoll(rows[i][7]);
        removed += r;
        added += a;
        max_delta = std::max(max_delta, r + a);
    }
    const long long events = swaps + bridges + vis;
    CHECK(std::stoll(kv.at("swap_events")) == swaps);
    CHECK(std::stoll(kv.at("bridge_events")) == bridges);
    CHECK(std::stoll(kv.at("vis_events")) == vis);
    CHECK(std::stoll(kv.at("events_total")) == events);
    CHECK(std::stoll(kv.at("chords_removed")) == removed);
    CHECK(std::stoll(kv.at("chords_added")) == added);
    CHECK(std::stoll(kv.at("discrete_changes")) == events + removed + added);
    CHECK(std::stoll(kv.at("max_changes_per_event")) == max_delta);
}

TEST_CASE("reruns are byte-identical apart from wall clocks") {
    const fs::path d1 = test_dir("rerun1");
    const fs::path d2 = test_dir("rerun2");
    RunConfig cfg;
    cfg.gen_n = 12;
    cfg.gen_seed = 5;
    cfg.gen_model = MotionModel::kQuadratic;
    std::ostringstream out1, out2, err;
    cfg.out_dir = d1.string();
    REQUIRE(run_command(cfg, out1, err) == 0);
    cfg.out_dir = d2.string();
    REQUIRE(run_command(cfg, out2, err) == 0);

    const auto rows1 = read_csv(d1 / "events.csv");
    const auto rows2 = read_csv(d2 / "events.csv");
    REQUIRE(rows1.size() == rows2.size());
    for (std::size_t i = 0; i < rows1.size(); ++i) {
        // Identical except the wall-clock column.
        CHECK(std::vector<std::string>(rows1[i].begin(), rows1[i].end() - 1) ==
              std::vector<std::string>(rows2[i].begin(), rows2[i].end() - 1));
    }
    auto kv1 = read_kv_file(d1 / "stats.txt");
    auto kv2 = read_kv_file(d2 / "stats.txt");
    kv1.erase("wall_ns");
    kv2.erase("wall_ns");
    CHECK(kv1 == kv2);
}

TEST_CASE("verify passes on small generated scenarios") {
    RunConfig cfg;
    cfg.mode = RunMode::kVerify;
    cfg.gen_n = 8;
    cfg.gen_model = MotionModel::kLinear;
    cfg.seeds = {1, 2};
    cfg.samples = 8;
    std::ostringstream out, err;
    CHECK(run_command(cfg, out, err) == 0);
    CHECK(out.str().find("verify passed") != std::string::npos);
    CHECK(out.str().find("FAIL") == std::string::npos);
    CHECK(err.str().empty());
}

TEST_CASE("a corrupted structure cannot pass the verify comparison") {
    RunConfig cfg;
    cfg.gen_n = 10;
    cfg.gen_seed = 4;
    cfg.gen_model = MotionModel::kQuadratic;
    const Scenario gen = config_scenario(cfg);
    const PriorityAssignment pr = draw_priorities(gen.n, 1);
    RunOutcome oc = run_window(gen, pr, gen.t0, make_rat(1, 2), false);

    // Tampering with a hull chain shows up against the reference...
    REQUIRE(extract_snapshot(oc.state) == reference_snapshot(gen, pr, oc.state.now));
    std::vector<PointId>& hull = oc.state.tree[0].at(oc.state.tree[0].root).hull;
    REQUIRE(hull.size() >= 2);
    std::swap(hull.front(), hull.back());
    CHECK(extract_snapshot(oc.state) != reference_snapshot(gen, pr, oc.state.now));

    // ...and a flipped certificate condition trips the engine's own check
    // instead of silently drifting on.
    const Scenario pair = crossing_pair();
    RunOutcome before = run_window(pair, draw_priorities(2, 1), pair.t0, make_rat(1, 4), false);
    REQUIRE(before.stats.events_total == 0);
    REQUIRE(before.state.swap_certs[0]->queued);
    SubPred& pred = before.state.swap_certs[0]->preds[0];
    pred.want = pred.want == kPos ? kNeg : kPos;
    CHECK_THROWS_AS(advance_to(before.state, pair.t1), InternalError);
}

TEST_CASE("the reproducer command replays the failing configuration") {
    RunConfig cfg;
    cfg.gen_n = 8;
    cfg.gen_seed = 3;
    cfg.gen_model = MotionModel::kLinear;
    cfg.priority_seed = 5;
    cfg.samples = 20;
    CHECK(reproducer_command(cfg, make_rat(0), make_rat(1), make_rat(1, 3)) ==
          "reproduce: ktri --mode verify --gen 8,3,linear --priority-seed 5 --samples 20"
          " --window 0,1   # fails at t=1/3");
    cfg.scenario_file = "points.json";
    CHECK(reproducer_command(cfg, make_rat(1, 4), make_rat(1), make_rat(7, 8)) ==
          "reproduce: ktri --mode verify --scenario points.json --priority-seed 5 --samples 20"
          " --window 1/4,1   # fails at t=7/8");
}

TEST_CASE("scale reports growing means and fitted slopes") {
    const fs::path dir = test_dir("scale");
    RunConfig cfg;
    cfg.mode = RunMode::kScale;
    cfg.sizes = {32, 64};
    for (std::uint64_t k = 1; k <= 10; ++k) cfg.seeds.push_back(k);
    cfg.out_dir = dir.string();
    std::ostringstream out, err;
    REQUIRE(run_command(cfg, out, err) == 0);

    double mean32 = -1, mean64 = -1;
    std::istringstream lines(out.str());
    std::string line;
    while (std::getline(lines, line)) {
        const std::size_t at = line.find("mean_events=");
        if (at == std::string::npos) continue;
        const double mean = std::atof(line.substr(at + 12).c_str());
        if (line.rfind("n=32 ", 0) == 0) mean32 = mean;
        if (line.rfind("n=64 ", 0) == 0) mean64 = mean;
    }
    REQUIRE(mean32 > 0);
    REQUIRE(mean64 > 0);
    CHECK(mean64 > mean32);  // event totals grow with the point count
    CHECK(out.str().find("slope_events_vs_n=") != std::string::npos);
    CHECK(out.str().find("slope_events_vs_n=n/a") == std::string::npos);

    const auto rows = read_csv(dir / "scale.csv");
    REQUIRE(rows.size() == 21);  // header plus 2 sizes x 10 seeds
    CHECK(rows[0][0] == "n");
}

TEST_CASE("a single scale size reports no slope") {
    RunConfig cfg;
    cfg.mode = RunMode::kScale;
    cfg.sizes = {16};
    cfg.seeds = {1, 2};
    std::ostringstream out, err;
    CHECK(run_command(cfg, out, err) == 0);
    CHECK(out.str().find("slope_events_vs_n=n/a") != std::string::npos);
    CHECK(out.str().find("slope_discrete_changes_vs_n=n/a") != std::string::npos);
}

TEST_CASE("census reports the storage breakdown") {
    RunConfig cfg;
    cfg.mode = RunMode::kCensus;
    cfg.gen_n = 16;
    cfg.gen_seed = 2;
    cfg.gen_model = MotionModel::kLinear;
    std::ostringstream out, err;
    REQUIRE(run_command(cfg, out, err) == 0);
    const auto kv = parse_kv(out.str());
    CHECK(std::stoll(kv.at("census_nodes")) == 32);  // one node per point and side
    CHECK(std::stoll(kv.at("entities_peak")) >= std::stoll(kv.at("entities_initial")));
    CHECK(std::stoll(kv.at("storage_entities")) > 0);
    CHECK(kv.count("entities_peak_per_point") == 1);
    CHECK(std::stoll(kv.at("max_point_vis_roles")) <= 3);
}

TEST_CASE("a narrowed window reports only its own events") {
    const fs::path dir = test_dir("window");
    const std::string file = write_scenario_file(dir, crossing_pair());

    RunConfig cfg;
    cfg.scenario_file = file;
    cfg.has_window = true;
    cfg.window_a = make_rat(0);
    cfg.window_b = make_rat(1, 4);
    std::ostringstream out1, err;
    REQUIRE(run_command(cfg, out1, err) == 0);
    CHECK(parse_kv(out1.str()).at("events_total") == "0");

    cfg.window_a = make_rat(1, 4);
    cfg.window_b = make_rat(3, 4);
    std::ostringstream out2;
    REQUIRE(run_command(cfg, out2, err) == 0);
    CHECK(parse_kv(out2.str()).at("events_total") == "1");

    cfg.window_b = make_rat(2);  // outside the scenario window
    std::ostringstream out3, err3;
    CHECK(run_command(cfg, out3, err3) == 2);
    CHECK(err3.str().find("window") != std::string::npos);
}

TEST_CASE("event times render at the requested precision") {
    Scenario s;
    s.n = 2;
    s.t0 = 0;
    s.t1 = 1;
    s.label = "third crossing";
    // One point walks right, the other stands at x=1/3 shifted: crossing at 1/3.
    s.points.push_back(moving_traj(Poly{{make_rat(0), make_rat(1)}}, Poly::constant(make_rat(0)),
                                   s.t0, s.t1));
    s.points.push_back(moving_traj(Poly::constant(make_rat(1, 3)), Poly::constant(make_rat(1)),
                                   s.t0, s.t1));
    const PriorityAssignment pr = draw_priorities(2, 1);
    const RunOutcome oc = run_window(s, pr, s.t0, s.t1, false);
    REQUIRE(oc.stats.swap_events == 1);

    std::ostringstream five, twelve;
    write_events_csv(five, oc.state, 5);
    write_events_csv(twelve, oc.state, 12);
    CHECK(five.str().find(",0.33333,0,") != std::string::npos);
    CHECK(twelve.str().find(",0.333333333333,0,") != std::string::npos);
}
