#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "fcl/run.hpp"

namespace fcl {

/// --workers beats FCL_WORKERS beats the config file's own setting.
inline unsigned resolve_workers(unsigned cli_value, bool cli_given, unsigned plan_value) {
  if (cli_given) return cli_value;
  if (const char* env = std::getenv("FCL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096)
      throw config_error(
          "environment variable FCL_WORKERS must be an integer between 1 and 4096");
    return static_cast<unsigned>(v);
  }
  return plan_value;
}

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{
      "false confidence lab: measures how often a posterior places high belief on "
      "intervals that miss the true value of a derived parameter"};
  app.name("fcl");

  std::string config_path;
  int figure_id = 0;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::uint64_t k = 0;
  bool no_plot = false;

  auto* opt_config =
      app.add_option("--config", config_path, "path to a JSON experiment config");
  auto* opt_figure =
      app.add_option("--figure", figure_id, "built-in figure preset id (2-9)")
          ->check(CLI::Range(2, 9));
  opt_config->excludes(opt_figure);
  opt_figure->excludes(opt_config);
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  auto* opt_seed = app.add_option("--seed", seed, "master seed override");
  auto* opt_workers = app.add_option("--workers", workers, "worker thread count")
                          ->check(CLI::Range(1, 4096));
  auto* opt_k = app.add_option("--k", k, "replicate count override");
  app.add_flag("--no-plot", no_plot, "write tables only, skip SVG rendering");

  auto* plot_cmd = app.add_subcommand("plot", "render an SVG from an existing results CSV");
  std::string csv_path, kind, svg_out;
  plot_cmd->add_option("--csv", csv_path, "results CSV to render")->required();
  plot_cmd->add_option("--kind", kind, "curve, contour, or snapshots")
      ->required()
      ->check(CLI::IsMember({"curve", "contour", "snapshots"}));
  plot_cmd->add_option("--out", svg_out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plot_cmd->parsed()) {
      result_table table;
      try {
        table = read_table(csv_path);
      } catch (const std::exception& e) {
        // an unreadable input file is a usage problem, not a runtime failure
        throw config_error(e.what());
      }
      write_plot(table, kind, svg_out);
      std::printf("wrote %s\n", svg_out.c_str());
      return 0;
    }

    if (opt_config->count() == 0 && opt_figure->count() == 0)
      throw config_error("one of --config or --figure is required (see --help)");

    experiment_plan plan =
        opt_figure->count() ? figure_preset(figure_id) : parse_plan_file(config_path);
    if (opt_out->count()) plan.out_dir = out_dir;
    if (opt_seed->count()) plan.seed = seed;
    if (opt_k->count()) {
      if (k < 1) throw config_error("--k must be >= 1");
      plan.k = k;
    }
    plan.workers = resolve_workers(workers, opt_workers->count() > 0, plan.workers);
    if (no_plot) plan.plot = false;

    const run_result rr = run_plan(plan);
    std::printf("wrote %s (%llu rows)\n", rr.csv.string().c_str(),
                static_cast<unsigned long long>(rr.totals.rows));
    if (!rr.snapshots_csv.empty()) std::printf("wrote %s\n", rr.snapshots_csv.string().c_str());
    if (!rr.svg.empty()) std::printf("wrote %s\n", rr.svg.string().c_str());
    if (!rr.snapshots_svg.empty())
      std::printf("wrote %s\n", rr.snapshots_svg.string().c_str());
    std::printf("wrote %s\n", rr.meta.string().c_str());
    if (rr.totals.degenerate > 0)
      std::printf("note: %llu replicate radius searches hit the expansion ceiling\n",
                  static_cast<unsigned long long>(rr.totals.degenerate));
    return 0;
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const plot_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return 3;
  }
}

}  // namespace fcl
