#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fcl/cli.hpp"
#include "fcl/experiment.hpp"
#include "fcl/plot.hpp"
#include "fcl/run.hpp"

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& stem) {
  const fs::path p = fs::temp_directory_path() / ("fclab_test_" + stem);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

nlohmann::json minimal_curve_config() {
  return nlohmann::json{{"model", "uniform-support"},
                        {"task", "curve"},
                        {"theta0", 1.0},
                        {"n", {1, 5}},
                        {"eps", {0.0, 0.1, 0.3}},
                        {"alpha", {0.5}},
                        {"k", 50},
                        {"seed", 7}};
}

int run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv;
  argv.push_back("fcl");
  for (const auto& a : args) argv.push_back(a.c_str());
  return fcl::cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("parse_plan accepts a minimal curve config", "[experiment]") {
  const auto plan = fcl::parse_plan(minimal_curve_config());
  CHECK(plan.model == fcl::model_kind::uniform_support);
  CHECK(plan.task == fcl::task_kind::curve);
  CHECK(plan.n_grid == std::vector<std::uint32_t>{1, 5});
  CHECK(plan.eps_grid == std::vector<double>{0.0, 0.1, 0.3});
  CHECK(plan.alphas == std::vector<double>{0.5});
  CHECK(plan.k == 50);
  CHECK(plan.seed == 7);
  CHECK(plan.workers == 1);
  CHECK(plan.plot == true);
}

TEST_CASE("parse_plan rejects unknown and missing fields by name",
          "[experiment]") {
  auto j = minimal_curve_config();
  j["bogus_knob"] = 3;
  CHECK_THROWS_WITH(fcl::parse_plan(j),
                    Catch::Matchers::ContainsSubstring("bogus_knob"));
  auto missing = minimal_curve_config();
  missing.erase("model");
  CHECK_THROWS_WITH(fcl::parse_plan(missing),
                    Catch::Matchers::ContainsSubstring("model"));
  auto no_alpha = minimal_curve_config();
  no_alpha.erase("alpha");
  CHECK_THROWS_WITH(fcl::parse_plan(no_alpha),
                    Catch::Matchers::ContainsSubstring("alpha"));
}

TEST_CASE("parse_plan rejects bad grids with the offending field named",
          "[experiment]") {
  auto j = minimal_curve_config();
  j["eps"] = nlohmann::json::array();
  CHECK_THROWS_WITH(fcl::parse_plan(j),
                    Catch::Matchers::ContainsSubstring("eps"));
  j = minimal_curve_config();
  j["eps"] = {0.3, 0.1};
  CHECK_THROWS_WITH(fcl::parse_plan(j),
                    Catch::Matchers::ContainsSubstring("eps"));
  j = minimal_curve_config();
  j["alpha"] = {1.5};
  CHECK_THROWS_WITH(fcl::parse_plan(j),
                    Catch::Matchers::ContainsSubstring("alpha"));
  j = minimal_curve_config();
  j["k"] = 0;
  CHECK_THROWS_WITH(fcl::parse_plan(j),
                    Catch::Matchers::ContainsSubstring("k"));
  j = minimal_curve_config();
  j["model"] = "no-such-model";
  CHECK_THROWS_WITH(fcl::parse_plan(j),
                    Catch::Matchers::ContainsSubstring("no-such-model"));
}

TEST_CASE("parse_plan enforces cross-field rules", "[experiment]") {
  // solve requires p
  nlohmann::json solve{{"model", "gaussian-conjugate"}, {"task", "solve"},
                       {"theta0", 1.0},  {"sigma", 1.0},
                       {"n", {3, 10}},   {"alpha", {0.5}},
                       {"k", 100}};
  CHECK_THROWS_WITH(fcl::parse_plan(solve),
                    Catch::Matchers::ContainsSubstring("p"));
  solve["p"] = {0.95};
  CHECK_NOTHROW(fcl::parse_plan(solve));

  // m only makes sense for the product model, zipped against n
  auto j = minimal_curve_config();
  j["m"] = {1, 5};
  CHECK_THROWS_AS(fcl::parse_plan(j), fcl::config_error);
  nlohmann::json prod{{"model", "uniform-product"}, {"task", "curve"},
                      {"theta_x", 10.0}, {"theta_y", 1.0},
                      {"n", {1, 2}},     {"m", {1}},
                      {"eps", {0.0, 1.0}}, {"alpha", {0.5}}, {"k", 20}};
  CHECK_THROWS_WITH(fcl::parse_plan(prod),
                    Catch::Matchers::ContainsSubstring("m"));
  prod["m"] = {1, 3};
  CHECK_NOTHROW(fcl::parse_plan(prod));

  // sigma_grid is a ratio-model concept
  j = minimal_curve_config();
  j["sigma_grid"] = {0.1, 1.0};
  CHECK_THROWS_AS(fcl::parse_plan(j), fcl::config_error);

  // closed_form needs the uniform-support curve and a radius below theta0
  j = minimal_curve_config();
  j["closed_form"] = true;
  CHECK_NOTHROW(fcl::parse_plan(j));
  j["eps"] = {0.0, 0.5, 1.0};
  CHECK_THROWS_AS(fcl::parse_plan(j), fcl::config_error);
  nlohmann::json cf_prod{{"model", "uniform-product"}, {"task", "curve"},
                         {"theta_x", 10.0}, {"theta_y", 1.0},
                         {"n", {1}}, {"eps", {0.0, 1.0}}, {"alpha", {0.5}},
                         {"k", 20}, {"closed_form", true}};
  CHECK_THROWS_AS(fcl::parse_plan(cf_prod), fcl::config_error);

  // snapshots are undefined for the draw-based coefvar posterior
  nlohmann::json cv{{"model", "coef-variation"}, {"task", "solve"},
                    {"theta0", 1.0}, {"sigma", 10.0},
                    {"n", {5, 10}},  {"alpha", {0.5}}, {"p", {0.9}},
                    {"k", 50},
                    {"snapshots", {{"count", 2}, {"lo", 0.0}, {"hi", 30.0}}}};
  CHECK_THROWS_AS(fcl::parse_plan(cv), fcl::config_error);
  cv.erase("snapshots");
  CHECK_NOTHROW(fcl::parse_plan(cv));
  cv["n"] = {1, 5};  // coefvar needs n >= 2
  CHECK_THROWS_AS(fcl::parse_plan(cv), fcl::config_error);

  // riemann_cells is ratio-only
  j = minimal_curve_config();
  j["riemann_cells"] = 100;
  CHECK_THROWS_AS(fcl::parse_plan(j), fcl::config_error);
}

TEST_CASE("experiment plans survive a json round trip", "[experiment]") {
  for (int fig = 2; fig <= 9; ++fig) {
    const auto plan = fcl::figure_preset(fig);
    const auto again = fcl::parse_plan(fcl::to_json(plan));
    INFO("figure " << fig);
    CHECK(fcl::to_json(again).dump() == fcl::to_json(plan).dump());
    CHECK(fcl::config_hash(again) == fcl::config_hash(plan));
  }
  CHECK_THROWS_AS(fcl::figure_preset(1), fcl::config_error);
  CHECK_THROWS_AS(fcl::figure_preset(10), fcl::config_error);
}

TEST_CASE("figure presets pin their key parameters", "[experiment]") {
  const auto f2 = fcl::figure_preset(2);
  CHECK(f2.model == fcl::model_kind::uniform_support);
  CHECK(f2.closed_form);
  CHECK(f2.n_grid == std::vector<std::uint32_t>{1, 5, 20, 100});
  CHECK(f2.snapshots.count == 5);
  const auto f7 = fcl::figure_preset(7);
  CHECK(f7.task == fcl::task_kind::contour);
  CHECK(f7.alphas.size() == 19);
  CHECK(f7.ps.size() == 19);
  const auto f8 = fcl::figure_preset(8);
  CHECK(f8.task == fcl::task_kind::solve);
  CHECK(f8.n_grid ==
        std::vector<std::uint32_t>{1, 3, 5, 10, 20, 50, 100, 200, 500, 1000});
  CHECK(f8.alphas == std::vector<double>{0.5});
  CHECK(f8.ps == std::vector<double>{0.95});
  const auto f9 = fcl::figure_preset(9);
  CHECK(f9.model == fcl::model_kind::coef_variation);
  CHECK(f9.sigma == 10.0);
}

TEST_CASE("config_hash ignores execution knobs but tracks the experiment",
          "[experiment]") {
  auto base = fcl::parse_plan(minimal_curve_config());
  auto moved = base;
  moved.out_dir = "/somewhere/else";
  moved.workers = 8;
  moved.plot = false;
  CHECK(fcl::config_hash(moved) == fcl::config_hash(base));
  auto changed = base;
  changed.k = 51;
  CHECK(fcl::config_hash(changed) != fcl::config_hash(base));
  auto reseeded = base;
  reseeded.seed = 8;
  CHECK(fcl::config_hash(reseeded) != fcl::config_hash(base));
}

TEST_CASE("result tables survive a write/read round trip", "[experiment]") {
  const auto dir = fresh_dir("roundtrip");
  fcl::result_table t;
  t.comments = {"# seed=7 config=0123456789abcdef"};
  t.columns = {"a", "b"};
  t.rows = {{"1", "2.5"}, {"-3", "0.29999999999999999"}};
  const auto path = dir / "t.csv";
  fcl::write_table(t, path);
  const auto back = fcl::read_table(path);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  REQUIRE(back.comments.size() == 1);
  CHECK(back.comments[0] == t.comments[0]);
}

TEST_CASE("run_plan writes deterministic curve outputs", "[experiment]") {
  const auto dir = fresh_dir("run_curve");
  auto plan = fcl::parse_plan(minimal_curve_config());
  plan.out_dir = (dir / "a").string();
  const auto rr = fcl::run_plan(plan);
  REQUIRE(fs::exists(rr.csv));
  REQUIRE(fs::exists(rr.meta));
  REQUIRE(fs::exists(rr.svg));
  const auto table = fcl::read_table(rr.csv);
  CHECK(table.columns == fcl::curve_columns());
  // rows = n_grid x sigma(=1) x alpha x eps
  CHECK(table.rows.size() == 2 * 3);
  // uniform models report sigma = 0
  for (const auto& row : table.rows) CHECK(row[2] == "0");

  // identical rerun into a second directory is byte-identical
  auto plan2 = plan;
  plan2.out_dir = (dir / "b").string();
  const auto rr2 = fcl::run_plan(plan2);
  CHECK(slurp(rr.csv) == slurp(rr2.csv));

  const auto meta = nlohmann::json::parse(slurp(rr.meta));
  CHECK(meta["seed"] == 7);
  CHECK(meta["schema"] == "curve");
  CHECK(meta["rows"] == 6);
  CHECK(meta["config_hash"] == fcl::config_hash(plan));
  CHECK(meta["config"]["model"] == "uniform-support");
  CHECK(meta.find("timestamp") == meta.end());
}

TEST_CASE("closed-form uniform curve pins the exact textbook point",
          "[experiment]") {
  const auto dir = fresh_dir("closed_form");
  auto plan = fcl::figure_preset(2);
  plan.out_dir = dir.string();
  plan.plot = false;
  plan.snapshots.count = 0;
  fcl::run_totals totals;
  const auto table = fcl::build_main_table(plan, totals);
  REQUIRE(!table.rows.empty());
  bool found = false;
  for (const auto& row : table.rows) {
    // columns: model, n, sigma, alpha, epsilon, p_hat, mc_se, k, seed
    if (row[1] == "1" && std::fabs(std::stod(row[4]) - 0.3) < 1e-12) {
      found = true;
      CHECK(std::stod(row[5]) == 1.0);
      CHECK(row[6] == "0");  // closed-form rows carry no MC error
      CHECK(row[7] == "0");  // and no replicate count
    }
  }
  CHECK(found);
}

TEST_CASE("run_plan emits snapshots with the documented schema",
          "[experiment]") {
  const auto dir = fresh_dir("snapshots");
  auto j = minimal_curve_config();
  j["snapshots"] = {{"count", 2}, {"lo", 0.0}, {"hi", 3.0}, {"points", 50},
                    {"ball_eps", 0.3}};
  auto plan = fcl::parse_plan(j);
  plan.out_dir = dir.string();
  const auto rr = fcl::run_plan(plan);
  REQUIRE(fs::exists(rr.snapshots_csv));
  REQUIRE(fs::exists(rr.snapshots_svg));
  const auto snap = fcl::read_table(rr.snapshots_csv);
  CHECK(snap.columns == fcl::snapshot_columns());
  // one block per n in the grid: n_grid x count x points rows
  CHECK(snap.rows.size() == 2 * 2 * 50);
  const std::string svg = slurp(rr.snapshots_svg);
  CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("plot rendering rejects schema mismatches loudly", "[experiment]") {
  const auto dir = fresh_dir("plots");
  auto plan = fcl::parse_plan(minimal_curve_config());
  plan.out_dir = dir.string();
  plan.plot = false;
  const auto rr = fcl::run_plan(plan);
  const auto table = fcl::read_table(rr.csv);
  CHECK(rr.svg.empty());
  const std::string svg = fcl::render_plot(table, "curve");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK_THROWS_WITH(fcl::render_plot(table, "contour"),
                    Catch::Matchers::ContainsSubstring("epsilon_solved"));
  CHECK_THROWS_WITH(fcl::render_plot(table, "snapshots"),
                    Catch::Matchers::ContainsSubstring("psi"));
  CHECK_THROWS_AS(fcl::render_plot(table, "no-such-kind"), fcl::plot_error);

  // a single-row table still renders
  fcl::result_table one;
  one.columns = fcl::curve_columns();
  one.rows = {{"uniform-support", "1", "0", "0.5", "0.1", "0.75", "0.01",
               "100", "7"}};
  CHECK(fcl::render_plot(one, "curve").find("<svg") != std::string::npos);

  // unparseable numeric cells are reported with their location
  fcl::result_table bad = one;
  bad.rows[0][5] = "not-a-number";
  CHECK_THROWS_WITH(fcl::render_plot(bad, "curve"),
                    Catch::Matchers::ContainsSubstring("p_hat"));
}

TEST_CASE("solve and contour rendering cover both layouts", "[experiment]") {
  // single (alpha, p) pair: line of eps against n
  fcl::result_table line;
  line.columns = fcl::solve_columns();
  line.rows = {{"gaussian-conjugate", "1", "0.5", "0.95", "0.67", "100", "7"},
               {"gaussian-conjugate", "10", "0.5", "0.95", "0.21", "100", "7"},
               {"gaussian-conjugate", "1000", "0.5", "0.95", "0.02", "100",
                "7"}};
  const std::string svg = fcl::render_plot(line, "contour");
  CHECK(svg.find("<svg") != std::string::npos);

  // full grid: contour panels with the marked reference cell
  fcl::result_table grid;
  grid.columns = fcl::solve_columns();
  for (double a : {0.25, 0.5, 0.75})
    for (double p : {0.25, 0.5, 0.95}) {
      const double eps = 0.5 * a * (1.0 - p) + 0.05;
      grid.rows.push_back({"gaussian-conjugate", "3",
                           fcl::detail::fmt_g17(a), fcl::detail::fmt_g17(p),
                           fcl::detail::fmt_g17(eps), "100", "7"});
    }
  const std::string contour = fcl::render_plot(grid, "contour");
  CHECK(contour.find("<svg") != std::string::npos);
  CHECK(contour.find("eps=") != std::string::npos);
}

TEST_CASE("solve task runs end to end with the conjugate model",
          "[experiment]") {
  const auto dir = fresh_dir("solve_run");
  nlohmann::json j{{"model", "gaussian-conjugate"}, {"task", "solve"},
                   {"theta0", 1.0}, {"sigma", 1.0}, {"prior_mean", 0.0},
                   {"prior_var", 100.0}, {"n", {3, 10}}, {"alpha", {0.5}},
                   {"p", {0.95}}, {"k", 400}, {"seed", 5},
                   {"out", dir.string()}};
  const auto plan = fcl::parse_plan(j);
  CHECK(plan.out_dir == dir.string());
  const auto rr = fcl::run_plan(plan);
  const auto table = fcl::read_table(rr.csv);
  CHECK(table.columns == fcl::solve_columns());
  REQUIRE(table.rows.size() == 2);
  const double eps3 = std::stod(table.rows[0][4]);
  const double eps10 = std::stod(table.rows[1][4]);
  CHECK(eps3 > eps10);  // radius shrinks with sample size here
  const auto meta = nlohmann::json::parse(slurp(rr.meta));
  CHECK(meta["schema"] == "solve");
}

TEST_CASE("cli runs a config file and honors exit codes", "[experiment]") {
  const auto dir = fresh_dir("cli");
  auto j = minimal_curve_config();
  j["out"] = (dir / "out").string();
  const auto cfg = dir / "run.json";
  std::ofstream(cfg) << j.dump(2);
  CHECK(run_cli({"--config", cfg.string()}) == 0);
  CHECK(fs::exists(dir / "out" / "results.csv"));
  CHECK(fs::exists(dir / "out" / "results_meta.json"));

  // --figure and --config are mutually exclusive
  CHECK(run_cli({"--config", cfg.string(), "--figure", "2"}) == 2);
  // neither given
  CHECK(run_cli({}) == 2);
  // bad figure id
  CHECK(run_cli({"--figure", "11"}) == 2);
  // invalid config file content
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{\"model\": \"uniform-support\"}";
  CHECK(run_cli({"--config", bad.string()}) == 2);
  // missing config file
  CHECK(run_cli({"--config", (dir / "absent.json").string()}) == 2);
  // unknown flag
  CHECK(run_cli({"--config", cfg.string(), "--frobnicate"}) == 2);
  // help exits cleanly
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("cli overrides seed, k, out and plotting", "[experiment]") {
  const auto dir = fresh_dir("cli_override");
  auto j = minimal_curve_config();
  j["out"] = (dir / "ignored").string();
  const auto cfg = dir / "run.json";
  std::ofstream(cfg) << j.dump(2);
  CHECK(run_cli({"--config", cfg.string(), "--out", (dir / "real").string(),
                 "--seed", "99", "--k", "25", "--no-plot"}) == 0);
  CHECK(!fs::exists(dir / "ignored"));
  REQUIRE(fs::exists(dir / "real" / "results.csv"));
  CHECK(!fs::exists(dir / "real" / "plot.svg"));
  const auto meta =
      nlohmann::json::parse(slurp(dir / "real" / "results_meta.json"));
  CHECK(meta["seed"] == 99);
  CHECK(meta["config"]["k"] == 25);
}

TEST_CASE("cli plot subcommand re-renders an existing table", "[experiment]") {
  const auto dir = fresh_dir("cli_plot");
  auto j = minimal_curve_config();
  j["out"] = (dir / "out").string();
  const auto cfg = dir / "run.json";
  std::ofstream(cfg) << j.dump(2);
  REQUIRE(run_cli({"--config", cfg.string(), "--no-plot"}) == 0);
  const auto csv = (dir / "out" / "results.csv").string();
  const auto svg = (dir / "out" / "replot.svg").string();
  CHECK(run_cli({"plot", "--csv", csv, "--kind", "curve", "--out", svg}) == 0);
  CHECK(fs::exists(svg));
  CHECK(run_cli({"plot", "--csv", csv, "--kind", "contour", "--out", svg}) ==
        2);
  CHECK(run_cli({"plot", "--csv", csv, "--kind", "nonsense", "--out", svg}) ==
        2);
  CHECK(run_cli({"plot", "--csv", (dir / "none.csv").string(), "--kind",
                 "curve", "--out", svg}) == 2);
}

TEST_CASE("cli reports numerical failures as runtime errors", "[experiment]") {
  const auto dir = fresh_dir("cli_runtime");
  nlohmann::json j{{"model", "gaussian-ratio"}, {"task", "curve"},
                   {"theta_x", 0.1}, {"theta_y", 0.01}, {"sigma", 1.0},
                   {"n", {1}}, {"eps", {1.0}}, {"alpha", {0.5}}, {"k", 2},
                   {"quad_tol", 1e-30}, {"out", (dir / "out").string()}};
  const auto cfg = dir / "run.json";
  std::ofstream(cfg) << j.dump(2);
  CHECK(run_cli({"--config", cfg.string()}) == 3);
}

TEST_CASE("worker resolution prefers CLI over environment over config",
          "[experiment]") {
  CHECK(fcl::resolve_workers(4, true, 1) == 4);
  ::unsetenv("FCL_WORKERS");
  CHECK(fcl::resolve_workers(0, false, 3) == 3);
  ::setenv("FCL_WORKERS", "2", 1);
  CHECK(fcl::resolve_workers(0, false, 3) == 2);
  CHECK(fcl::resolve_workers(5, true, 3) == 5);
  ::setenv("FCL_WORKERS", "junk", 1);
  CHECK_THROWS_AS(fcl::resolve_workers(0, false, 3), fcl::config_error);
  ::setenv("FCL_WORKERS", "0", 1);
  CHECK_THROWS_AS(fcl::resolve_workers(0, false, 3), fcl::config_error);
  ::setenv("FCL_WORKERS", "5000", 1);
  CHECK_THROWS_AS(fcl::resolve_workers(0, false, 3), fcl::config_error);
  ::unsetenv("FCL_WORKERS");
}

TEST_CASE("worker count never changes the written results", "[experiment]") {
  const auto dir = fresh_dir("worker_bytes");
  nlohmann::json j{{"model", "uniform-product"}, {"task", "curve"},
                   {"theta_x", 10.0}, {"theta_y", 1.0}, {"n", {1}},
                   {"eps", {0.0, 2.0, 4.0, 6.0}}, {"alpha", {0.5}},
                   {"k", 800}, {"seed", 3}, {"plot", false}};
  std::string first;
  for (unsigned w : {1u, 2u, 8u}) {
    auto plan = fcl::parse_plan(j);
    plan.workers = w;
    plan.out_dir = (dir / ("w" + std::to_string(w))).string();
    const auto rr = fcl::run_plan(plan);
    const auto bytes = slurp(rr.csv);
    if (first.empty())
      first = bytes;
    else
      CHECK(bytes == first);
  }
}
