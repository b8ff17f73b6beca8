#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fcl/experiment.hpp"
#include "fcl/plot.hpp"

namespace fcl {

/// Executes a resolved plan: writes results.csv (+ snapshots.csv), echoes the
/// configuration into results_meta.json, and renders SVGs when plotting is
/// enabled. Plots are always produced by re-reading the CSV just written, so
/// a rendered figure can never disagree with the table.
inline run_result run_plan(const experiment_plan& plan) {
  namespace fs = std::filesystem;
  fs::create_directories(plan.out_dir);
  run_result rr;
  run_totals totals;

  result_table main_table;
  try {
    main_table = build_main_table(plan, totals);
  } catch (const replicate_error& e) {
    throw std::runtime_error("model '" + to_tag(plan.model) + "', " + e.what());
  }
  rr.csv = fs::path(plan.out_dir) / "results.csv";
  write_table(main_table, rr.csv);

  if (plan.snapshots.count > 0) {
    result_table snap_table;
    try {
      snap_table = build_snapshot_table(plan);
    } catch (const replicate_error& e) {
      throw std::runtime_error("model '" + to_tag(plan.model) + "', " + e.what());
    }
    rr.snapshots_csv = fs::path(plan.out_dir) / "snapshots.csv";
    write_table(snap_table, rr.snapshots_csv);
  }
  rr.totals = totals;

  nlohmann::json files;
  files["results"] = "results.csv";
  if (!rr.snapshots_csv.empty()) files["snapshots"] = "snapshots.csv";

  if (plan.plot) {
    const std::string stem =
        plan.figure_id > 0 ? "figure" + std::to_string(plan.figure_id) : "plot";
    const std::string kind = plan.task == task_kind::curve ? "curve" : "contour";
    rr.svg = fs::path(plan.out_dir) / (stem + ".svg");
    write_plot(read_table(rr.csv), kind, rr.svg);
    files["plot"] = stem + ".svg";
    if (!rr.snapshots_csv.empty()) {
      rr.snapshots_svg = fs::path(plan.out_dir) / (stem + "_snapshots.svg");
      write_plot(read_table(rr.snapshots_csv), "snapshots", rr.snapshots_svg);
      files["snapshots_plot"] = stem + "_snapshots.svg";
    }
  }

  nlohmann::json meta;
  meta["config"] = to_json(plan);
  meta["config_hash"] = config_hash(plan);
  meta["seed"] = plan.seed;
  meta["schema"] = plan.task == task_kind::curve ? "curve" : "solve";
  meta["rows"] = totals.rows;
  meta["degenerate_replicates"] = totals.degenerate;
  meta["files"] = files;
  meta["tool"] = "fclab 0.1.0";
  rr.meta = fs::path(plan.out_dir) / "results_meta.json";
  std::ofstream mo(rr.meta, std::ios::binary);
  if (!mo) throw std::runtime_error("cannot write " + rr.meta.string());
  mo << meta.dump(2) << '\n';
  return rr;
}

}  // namespace fcl
