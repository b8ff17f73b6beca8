#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fcl/engine.hpp"
#include "fcl/models.hpp"

namespace fcl {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class model_kind {
  uniform_support,
  uniform_product,
  gaussian_ratio,
  gaussian_conjugate,
  coef_variation
};

enum class task_kind { curve, solve, contour };

inline const std::map<std::string, model_kind>& model_tags() {
  static const std::map<std::string, model_kind> tags = {
      {"uniform-support", model_kind::uniform_support},
      {"uniform-product", model_kind::uniform_product},
      {"gaussian-ratio", model_kind::gaussian_ratio},
      {"gaussian-conjugate", model_kind::gaussian_conjugate},
      {"coef-variation", model_kind::coef_variation},
  };
  return tags;
}

inline std::string to_tag(model_kind m) {
  for (const auto& [tag, kind] : model_tags())
    if (kind == m) return tag;
  return "?";
}

inline std::string to_tag(task_kind t) {
  switch (t) {
    case task_kind::curve: return "curve";
    case task_kind::solve: return "solve";
    case task_kind::contour: return "contour";
  }
  return "?";
}

/// Optional per-replicate posterior curves written next to the main table.
struct snapshot_request {
  std::uint32_t count = 0;  // 0 disables snapshots
  double lo = 0.0;
  double hi = 1.0;
  std::uint32_t points = 400;
  double ball_eps = 0.0;  // radius of the interval shaded in the plot
};

constexpr std::uint64_t default_seed = 0xfc1ab;

/// Fully resolved description of one run. Parsed from JSON, echoed back into
/// results_meta.json, and hashed (minus the fields that cannot change any
/// number) into every output file.
struct experiment_plan {
  model_kind model = model_kind::uniform_support;
  task_kind task = task_kind::curve;

  // truth
  double theta0 = 1.0;   // uniform-support endpoint, conjugate mean, coefvar mean
  double theta_x = 1.0;  // product / ratio numerator truth
  double theta_y = 1.0;  // product / ratio denominator truth
  double sigma = 1.0;    // known noise scale (ratio, conjugate), truth scale (coefvar)

  // prior
  double prior_mean = 0.0;                       // conjugate
  double prior_var = 100.0;                      // conjugate
  scale_prior prior_scale = scale_prior::reference;  // coefvar

  // grids
  std::vector<std::uint32_t> n_grid;
  std::vector<std::uint32_t> m_grid;   // product second sample; empty = n_grid
  std::vector<double> sigma_grid;      // ratio curves; empty = {sigma}
  std::vector<double> eps_grid;        // curve task
  std::vector<double> alphas;
  std::vector<double> ps;              // solve / contour tasks

  std::uint64_t k = 100000;
  std::uint32_t m_post = 2000;         // coefvar posterior panel size
  std::uint64_t seed = default_seed;
  std::string out_dir = ".";
  unsigned workers = 1;
  bool plot = true;

  double quad_tol = 1e-8;       // ratio quadrature absolute tolerance
  double eps_xtol = 1e-6;       // radius bisection tolerance
  std::uint32_t riemann_cells = 0;  // >0: fixed midpoint rule instead of adaptive

  bool closed_form = false;     // uniform-support curve from the exact formula
  snapshot_request snapshots;
  int figure_id = 0;            // 0 for custom configs
};

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline nlohmann::json to_json(const experiment_plan& p) {
  nlohmann::json j;
  j["model"] = to_tag(p.model);
  j["task"] = to_tag(p.task);
  j["theta0"] = p.theta0;
  j["theta_x"] = p.theta_x;
  j["theta_y"] = p.theta_y;
  j["sigma"] = p.sigma;
  j["prior_mean"] = p.prior_mean;
  j["prior_var"] = p.prior_var;
  j["prior_scale"] = p.prior_scale == scale_prior::reference ? "reference" : "jeffreys";
  j["n"] = p.n_grid;
  if (!p.m_grid.empty()) j["m"] = p.m_grid;
  if (!p.sigma_grid.empty()) j["sigma_grid"] = p.sigma_grid;
  if (!p.eps_grid.empty()) j["eps"] = p.eps_grid;
  j["alpha"] = p.alphas;
  if (!p.ps.empty()) j["p"] = p.ps;
  j["k"] = p.k;
  j["m_post"] = p.m_post;
  j["seed"] = p.seed;
  j["out"] = p.out_dir;
  j["workers"] = p.workers;
  j["plot"] = p.plot;
  j["quad_tol"] = p.quad_tol;
  j["eps_xtol"] = p.eps_xtol;
  j["riemann_cells"] = p.riemann_cells;
  j["closed_form"] = p.closed_form;
  if (p.snapshots.count > 0) {
    j["snapshots"] = {{"count", p.snapshots.count},
                      {"lo", p.snapshots.lo},
                      {"hi", p.snapshots.hi},
                      {"points", p.snapshots.points},
                      {"ball_eps", p.snapshots.ball_eps}};
  }
  if (p.figure_id > 0) j["figure"] = p.figure_id;
  return j;
}

/// Hash of everything that can change a computed number. Output location,
/// worker count, and the plotting switch are excluded on purpose: the same
/// plan must produce the same bytes no matter where or how parallel it runs.
inline std::string config_hash(const experiment_plan& p) {
  nlohmann::json j = to_json(p);
  j.erase("out");
  j.erase("workers");
  j.erase("plot");
  return detail::hex16(detail::fnv1a64(j.dump()));
}

namespace detail {

class plan_reader {
 public:
  explicit plan_reader(const nlohmann::json& j) : j_(j) {
    if (!j.is_object()) throw config_error("config root must be a JSON object");
  }

  ~plan_reader() = default;

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw config_error("unknown config field '" + it.key() + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T require(const std::string& key) {
    if (!j_.contains(key)) throw config_error("missing required config field '" + key + "'");
    return fetch<T>(key);
  }

  template <typename T>
  T optional(const std::string& key, T fallback) {
    if (!j_.contains(key)) return fallback;
    return fetch<T>(key);
  }

  nlohmann::json object(const std::string& key) {
    seen_.insert(key);
    if (!j_.at(key).is_object())
      throw config_error("config field '" + key + "' must be an object");
    return j_.at(key);
  }

 private:
  template <typename T>
  T fetch(const std::string& key) {
    seen_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw config_error("config field '" + key + "' has the wrong type");
    }
  }

  const nlohmann::json& j_;
  std::set<std::string> seen_;
};

inline void check_prob_open(const std::vector<double>& v, const std::string& field) {
  for (const double x : v)
    if (!(x > 0.0 && x < 1.0))
      throw config_error("config field '" + field + "' entries must lie strictly in (0,1)");
}

}  // namespace detail

/// Parses and validates a plan. Every failure is a config_error naming the
/// offending field.
inline experiment_plan parse_plan(const nlohmann::json& j) {
  detail::plan_reader r(j);
  experiment_plan p;

  const auto model_tag = r.require<std::string>("model");
  const auto it = model_tags().find(model_tag);
  if (it == model_tags().end())
    throw config_error("config field 'model': unknown model tag '" + model_tag + "'");
  p.model = it->second;

  const auto task_tag = r.require<std::string>("task");
  if (task_tag == "curve")
    p.task = task_kind::curve;
  else if (task_tag == "solve")
    p.task = task_kind::solve;
  else if (task_tag == "contour")
    p.task = task_kind::contour;
  else
    throw config_error("config field 'task': unknown task '" + task_tag +
                       "' (expected curve, solve, or contour)");

  p.theta0 = r.optional<double>("theta0", p.theta0);
  p.theta_x = r.optional<double>("theta_x", p.theta_x);
  p.theta_y = r.optional<double>("theta_y", p.theta_y);
  p.sigma = r.optional<double>("sigma", p.sigma);
  p.prior_mean = r.optional<double>("prior_mean", p.prior_mean);
  p.prior_var = r.optional<double>("prior_var", p.prior_var);
  const auto scale_tag = r.optional<std::string>("prior_scale", "reference");
  if (scale_tag == "reference")
    p.prior_scale = scale_prior::reference;
  else if (scale_tag == "jeffreys")
    p.prior_scale = scale_prior::jeffreys;
  else
    throw config_error(
        "config field 'prior_scale': expected 'reference' or 'jeffreys'");

  p.n_grid = r.require<std::vector<std::uint32_t>>("n");
  if (p.n_grid.empty()) throw config_error("config field 'n' must be a nonempty list");
  p.m_grid = r.optional<std::vector<std::uint32_t>>("m", {});
  if (!p.m_grid.empty() && p.m_grid.size() != p.n_grid.size())
    throw config_error("config field 'm' must match the length of 'n'");
  p.sigma_grid = r.optional<std::vector<double>>("sigma_grid", {});
  for (const double s : p.sigma_grid)
    if (!(s > 0.0)) throw config_error("config field 'sigma_grid' entries must be positive");

  p.eps_grid = r.optional<std::vector<double>>("eps", {});
  p.alphas = r.require<std::vector<double>>("alpha");
  if (p.alphas.empty()) throw config_error("config field 'alpha' must be a nonempty list");
  detail::check_prob_open(p.alphas, "alpha");
  p.ps = r.optional<std::vector<double>>("p", {});
  detail::check_prob_open(p.ps, "p");

  p.k = r.optional<std::uint64_t>("k", p.k);
  if (p.k < 1 || p.k > 1000000000000ull)
    throw config_error("config field 'k' must be between 1 and 1e12");
  p.m_post = r.optional<std::uint32_t>("m_post", p.m_post);
  if (p.m_post > 100000000u)
    throw config_error("config field 'm_post' must be at most 1e8");
  p.seed = r.optional<std::uint64_t>("seed", p.seed);
  p.out_dir = r.optional<std::string>("out", p.out_dir);
  p.workers = r.optional<unsigned>("workers", p.workers);
  if (p.workers < 1 || p.workers > 4096)
    throw config_error("config field 'workers' must be between 1 and 4096");
  p.plot = r.optional<bool>("plot", p.plot);
  p.quad_tol = r.optional<double>("quad_tol", p.quad_tol);
  if (!(p.quad_tol > 0.0)) throw config_error("config field 'quad_tol' must be positive");
  p.eps_xtol = r.optional<double>("eps_xtol", p.eps_xtol);
  if (!(p.eps_xtol > 0.0)) throw config_error("config field 'eps_xtol' must be positive");
  p.riemann_cells = r.optional<std::uint32_t>("riemann_cells", 0);
  p.closed_form = r.optional<bool>("closed_form", false);
  p.figure_id = r.optional<int>("figure", 0);

  if (r.has("snapshots")) {
    const nlohmann::json snap_j = r.object("snapshots");
    detail::plan_reader s(snap_j);
    p.snapshots.count = s.require<std::uint32_t>("count");
    p.snapshots.lo = s.require<double>("lo");
    p.snapshots.hi = s.require<double>("hi");
    p.snapshots.points = s.optional<std::uint32_t>("points", 400);
    p.snapshots.ball_eps = s.optional<double>("ball_eps", 0.0);
    s.finish();
    if (p.snapshots.count < 1)
      throw config_error("config field 'snapshots.count' must be >= 1");
    if (!(p.snapshots.lo < p.snapshots.hi))
      throw config_error("config field 'snapshots': lo must be less than hi");
    if (p.snapshots.points < 2 || p.snapshots.points > 10000000u)
      throw config_error("config field 'snapshots.points' must be between 2 and 1e7");
    if (p.snapshots.count > 1000000u)
      throw config_error("config field 'snapshots.count' must be at most 1e6");
    if (!(p.snapshots.ball_eps >= 0.0))
      throw config_error("config field 'snapshots.ball_eps' must be nonnegative");
  }
  r.finish();

  // cross-field rules
  if (p.task == task_kind::curve) {
    if (p.eps_grid.empty())
      throw config_error("config field 'eps' must be a nonempty list for curve tasks");
    for (std::size_t i = 0; i + 1 < p.eps_grid.size(); ++i)
      if (!(p.eps_grid[i] < p.eps_grid[i + 1]))
        throw config_error("config field 'eps' must be strictly increasing");
    if (!(p.eps_grid.front() >= 0.0))
      throw config_error("config field 'eps' entries must be nonnegative");
  } else {
    if (p.ps.empty())
      throw config_error("config field 'p' must be a nonempty list for solve/contour tasks");
  }

  switch (p.model) {
    case model_kind::uniform_support:
      if (!(p.theta0 > 0.0)) throw config_error("config field 'theta0' must be positive");
      break;
    case model_kind::uniform_product:
      if (!(p.theta_x > 0.0) || !(p.theta_y > 0.0))
        throw config_error("config fields 'theta_x'/'theta_y' must be positive");
      break;
    case model_kind::gaussian_ratio:
      if (p.theta_y == 0.0) throw config_error("config field 'theta_y' must be nonzero");
      if (!(p.sigma > 0.0)) throw config_error("config field 'sigma' must be positive");
      break;
    case model_kind::gaussian_conjugate:
      if (!(p.sigma > 0.0)) throw config_error("config field 'sigma' must be positive");
      if (!(p.prior_var > 0.0)) throw config_error("config field 'prior_var' must be positive");
      break;
    case model_kind::coef_variation:
      if (p.theta0 == 0.0) throw config_error("config field 'theta0' must be nonzero");
      if (!(p.sigma > 0.0)) throw config_error("config field 'sigma' must be positive");
      if (p.m_post < 10) throw config_error("config field 'm_post' must be >= 10");
      for (const auto n : p.n_grid)
        if (n < 2) throw config_error("config field 'n' entries must be >= 2 for coef-variation");
      break;
  }
  for (const auto n : p.n_grid)
    if (n < 1 || n > 1000000000u)
      throw config_error("config field 'n' entries must be between 1 and 1e9");
  for (const auto m : p.m_grid)
    if (m < 1 || m > 1000000000u)
      throw config_error("config field 'm' entries must be between 1 and 1e9");

  if (p.m_grid.size() && p.model != model_kind::uniform_product)
    throw config_error("config field 'm' only applies to the uniform-product model");
  if (p.sigma_grid.size() && p.model != model_kind::gaussian_ratio)
    throw config_error("config field 'sigma_grid' only applies to the gaussian-ratio model");
  if (p.closed_form) {
    if (p.model != model_kind::uniform_support || p.task != task_kind::curve)
      throw config_error("config field 'closed_form' requires the uniform-support curve task");
    if (!p.eps_grid.empty() && !(p.eps_grid.back() < p.theta0))
      throw config_error(
          "config field 'closed_form': the exact formula needs every 'eps' entry below "
          "'theta0'");
  }
  if (p.snapshots.count > 0 && p.model == model_kind::coef_variation)
    throw config_error(
        "config field 'snapshots': the coef-variation posterior has no curve to tabulate");
  if (p.riemann_cells > 0 && p.model != model_kind::gaussian_ratio)
    throw config_error("config field 'riemann_cells' only applies to the gaussian-ratio model");
  return p;
}

inline experiment_plan parse_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return parse_plan(j);
}

/// Built-in plans. Parameter choices follow the study configurations the
/// library reproduces; sample-size lists not pinned by those configurations
/// are fixed here and documented in the README.
inline experiment_plan figure_preset(int id) {
  experiment_plan p;
  p.figure_id = id;
  auto steps = [](double lo, double hi, int cells) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i)
      g.push_back(lo + (hi - lo) * static_cast<double>(i) / cells);
    return g;
  };
  switch (id) {
    case 2:
      p.model = model_kind::uniform_support;
      p.task = task_kind::curve;
      p.theta0 = 1.0;
      p.n_grid = {1, 5, 20, 100};
      p.alphas = {0.5};
      p.eps_grid = steps(0.0, 0.95, 19);
      p.k = 100000;
      p.closed_form = true;
      p.snapshots = {5, 0.0, 3.0, 400, 0.3};
      break;
    case 3:
      p.model = model_kind::uniform_product;
      p.task = task_kind::curve;
      p.theta_x = 10.0;
      p.theta_y = 1.0;
      p.n_grid = {1, 5, 20, 100};
      p.alphas = {0.5};
      p.eps_grid = steps(0.0, 10.0, 20);
      p.k = 100000;
      p.snapshots = {5, 0.0, 40.0, 400, 6.0};
      break;
    case 4:
    case 5:
      p.model = model_kind::gaussian_ratio;
      p.task = task_kind::curve;
      p.theta_x = 0.1;
      p.theta_y = 0.01;
      p.sigma = 1.0;
      p.sigma_grid = {0.1, 1.0, 10.0};
      p.n_grid = {1, 5, 20, 100};
      p.alphas = {id == 4 ? 0.5 : 0.05};
      p.eps_grid = steps(0.0, 8.0, 16);
      p.k = 10000;
      p.quad_tol = 1e-6;
      p.eps_xtol = 1e-3;
      break;
    case 6:
      p.model = model_kind::gaussian_ratio;
      p.task = task_kind::curve;
      p.theta_x = 0.1;
      p.theta_y = 0.01;
      p.sigma = 1.0;
      p.n_grid = {1, 5, 20, 100};
      p.alphas = {0.5};
      p.eps_grid = {4.0};
      p.k = 10000;
      p.quad_tol = 1e-6;
      p.snapshots = {5, -20.0, 20.0, 600, 4.0};
      break;
    case 7:
      p.model = model_kind::gaussian_conjugate;
      p.task = task_kind::contour;
      p.theta0 = 1.0;
      p.sigma = 1.0;
      p.prior_mean = 0.0;
      p.prior_var = 100.0;
      p.n_grid = {3, 10, 100};
      p.alphas = steps(0.05, 0.95, 18);
      p.ps = steps(0.05, 0.95, 18);
      p.k = 100000;
      break;
    case 8:
      p.model = model_kind::gaussian_conjugate;
      p.task = task_kind::solve;
      p.theta0 = 1.0;
      p.sigma = 1.0;
      p.prior_mean = 0.0;
      p.prior_var = 100.0;
      p.n_grid = {1, 3, 5, 10, 20, 50, 100, 200, 500, 1000};
      p.alphas = {0.5};
      p.ps = {0.95};
      p.k = 100000;
      break;
    case 9:
      p.model = model_kind::coef_variation;
      p.task = task_kind::solve;
      p.theta0 = 1.0;
      p.sigma = 10.0;
      p.prior_scale = scale_prior::reference;
      p.n_grid = {5, 10, 20, 50, 100, 200, 500, 1000};
      p.alphas = {0.5};
      p.ps = {0.9};
      p.k = 10000;
      p.m_post = 2000;
      break;
    default:
      throw config_error("figure id must be between 2 and 9");
  }
  p.out_dir = "figure" + std::to_string(id);
  return p;
}

// ---------------------------------------------------------------------------
// result tables

struct result_table {
  std::vector<std::string> comments;  // leading '#' lines, without newline
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csv_join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

inline void write_table(const result_table& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& c : t.comments) out << c << '\n';
  out << csv_join(t.columns) << '\n';
  for (const auto& row : t.rows) out << csv_join(row) << '\n';
}

inline result_table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  result_table t;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      t.columns = std::move(cells);
      header_seen = true;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline const std::vector<std::string>& curve_columns() {
  static const std::vector<std::string> c = {"model", "n",    "sigma", "alpha", "epsilon",
                                             "p_hat", "mc_se", "k",    "seed"};
  return c;
}

inline const std::vector<std::string>& solve_columns() {
  static const std::vector<std::string> c = {"model", "n", "alpha", "p",
                                             "epsilon_solved", "k", "seed"};
  return c;
}

inline const std::vector<std::string>& snapshot_columns() {
  static const std::vector<std::string> c = {"model", "n",    "sigma", "replicate", "psi",
                                             "value", "kind", "psi0",  "ball_eps"};
  return c;
}

namespace detail {

// Builds the concrete model for one (n, m, sigma) grid point and applies f.
template <typename F>
auto with_model(const experiment_plan& p, std::uint32_t n, std::uint32_t m, double sigma,
                F&& f) {
  switch (p.model) {
    case model_kind::uniform_support:
      return f(uniform_support_model(n, p.theta0));
    case model_kind::uniform_product:
      return f(uniform_product_model(n, m, p.theta_x, p.theta_y));
    case model_kind::gaussian_ratio: {
      quadrature_spec quad;
      quad.abs_tol = p.quad_tol;
      return f(gaussian_ratio_model(n, p.theta_x, p.theta_y, sigma, quad, p.riemann_cells));
    }
    case model_kind::gaussian_conjugate:
      return f(gaussian_conjugate_model(n, p.theta0, p.sigma, p.prior_mean, p.prior_var));
    case model_kind::coef_variation:
      return f(coef_variation_model(n, p.theta0, p.sigma, p.prior_scale, p.m_post));
  }
  throw config_error("unknown model kind");
}

inline std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

}  // namespace detail

struct run_totals {
  std::uint64_t rows = 0;
  std::uint64_t degenerate = 0;
};

/// Main table for the plan: `curve` rows or `solve`/`contour` rows.
inline result_table build_main_table(const experiment_plan& plan, run_totals& totals) {
  result_table t;
  t.comments.push_back("# seed=" + std::to_string(plan.seed) +
                       " config=" + config_hash(plan));
  run_options opt;
  opt.workers = plan.workers;
  opt.eps_xtol = plan.eps_xtol;

  const std::vector<double> sigmas =
      plan.model == model_kind::gaussian_ratio && !plan.sigma_grid.empty()
          ? plan.sigma_grid
          : std::vector<double>{plan.sigma};

  if (plan.task == task_kind::curve) {
    t.columns = curve_columns();
    for (std::size_t in = 0; in < plan.n_grid.size(); ++in) {
      const std::uint32_t n = plan.n_grid[in];
      const std::uint32_t m = plan.m_grid.empty() ? n : plan.m_grid[in];
      for (const double sigma : sigmas) {
        const double sigma_col =
            (plan.model == model_kind::uniform_support ||
             plan.model == model_kind::uniform_product)
                ? 0.0
                : sigma;
        for (const double alpha : plan.alphas) {
          std::vector<probe_result> rows;
          if (plan.closed_form) {
            for (const double eps : plan.eps_grid) {
              probe_result r;
              r.epsilon = eps;
              r.alpha = alpha;
              r.p_hat = fct_prob_closed_form(plan.theta0, eps, alpha, static_cast<double>(n));
              r.mc_se = 0.0;
              r.k = 0;
              r.seed = plan.seed;
              r.model = "uniform-support";
              rows.push_back(r);
            }
          } else {
            rows = detail::with_model(plan, n, m, sigma, [&](const auto& model) {
              return curve(model, plan.eps_grid, alpha, plan.k, plan.seed, opt);
            });
          }
          for (const auto& r : rows) {
            t.rows.push_back({r.model, std::to_string(n), detail::fmt_g17(sigma_col),
                              detail::fmt_g17(r.alpha), detail::fmt_g17(r.epsilon),
                              detail::fmt_g17(r.p_hat), detail::fmt_g17(r.mc_se),
                              detail::fmt_u64(r.k), detail::fmt_u64(r.seed)});
          }
        }
      }
    }
  } else {
    t.columns = solve_columns();
    for (std::size_t in = 0; in < plan.n_grid.size(); ++in) {
      const std::uint32_t n = plan.n_grid[in];
      const std::uint32_t m = plan.m_grid.empty() ? n : plan.m_grid[in];
      const auto grid = detail::with_model(plan, n, m, plan.sigma, [&](const auto& model) {
        return contour_grid(model, plan.alphas, plan.ps, plan.k, plan.seed, opt);
      });
      totals.degenerate += grid.degenerate;
      for (std::size_t ia = 0; ia < grid.alphas.size(); ++ia)
        for (std::size_t ip = 0; ip < grid.ps.size(); ++ip)
          t.rows.push_back({to_tag(plan.model), std::to_string(n),
                            detail::fmt_g17(grid.alphas[ia]), detail::fmt_g17(grid.ps[ip]),
                            detail::fmt_g17(grid.at(ia, ip)), detail::fmt_u64(plan.k),
                            detail::fmt_u64(plan.seed)});
    }
  }
  totals.rows += t.rows.size();
  return t;
}

/// Snapshot table: one row per (n, replicate, grid point).
inline result_table build_snapshot_table(const experiment_plan& plan) {
  result_table t;
  t.comments.push_back("# seed=" + std::to_string(plan.seed) +
                       " config=" + config_hash(plan));
  t.columns = snapshot_columns();
  std::vector<double> grid(plan.snapshots.points);
  for (std::uint32_t i = 0; i < plan.snapshots.points; ++i)
    grid[i] = plan.snapshots.lo + (plan.snapshots.hi - plan.snapshots.lo) *
                                      static_cast<double>(i) /
                                      static_cast<double>(plan.snapshots.points - 1);
  for (std::size_t in = 0; in < plan.n_grid.size(); ++in) {
    const std::uint32_t n = plan.n_grid[in];
    const std::uint32_t m = plan.m_grid.empty() ? n : plan.m_grid[in];
    detail::with_model(plan, n, m, plan.sigma, [&](const auto& model) {
      using model_t = std::decay_t<decltype(model)>;
      if constexpr (snapshot_model<model_t>) {
        const auto snap = posterior_snapshots(model, plan.snapshots.count, plan.seed, grid);
        const double sigma_col = (plan.model == model_kind::uniform_support ||
                                  plan.model == model_kind::uniform_product)
                                     ? 0.0
                                     : plan.sigma;
        for (std::size_t rep = 0; rep < snap.values.size(); ++rep)
          for (std::size_t gi = 0; gi < grid.size(); ++gi)
            t.rows.push_back({model.tag(), std::to_string(n), detail::fmt_g17(sigma_col),
                              std::to_string(rep), detail::fmt_g17(grid[gi]),
                              detail::fmt_g17(snap.values[rep][gi]), snap.kind,
                              detail::fmt_g17(model.true_functional()),
                              detail::fmt_g17(plan.snapshots.ball_eps)});
      } else {
        throw config_error("snapshots are not available for model '" + model.tag() + "'");
      }
    });
  }
  return t;
}

struct run_result {
  std::filesystem::path csv;
  std::filesystem::path meta;
  std::filesystem::path snapshots_csv;  // empty when not requested
  std::filesystem::path svg;            // empty when plotting disabled
  std::filesystem::path snapshots_svg;
  run_totals totals;
};

}  // namespace fcl
