#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "divrate/distribution.hpp"
#include "divrate/estimators.hpp"

namespace divrate {

/// Estimator selectors for the harness. The numeric values are the fixed
/// method identifiers mixed into per-trial seeds, so adding a method to a
/// run never perturbs another method's draws.
enum class Method : std::uint64_t {
  plugin = 0,
  aplugin = 1,
  opt = 2,
};

const char* method_name(Method m);

/// A Monte Carlo experiment: a distribution family, a sweep rule, a trial
/// count, methods, and a seed.
struct ExperimentSpec {
  enum class Family { worst_case_I, zipf_pair, custom_files };
  enum class Sweep { vary_m, vary_k };

  Family family = Family::worst_case_I;
  /// zipf_pair parameters: P = Zipf(alpha_p), Q = Zipf(alpha_q).
  double zipf_alpha_p = 1.0;
  double zipf_alpha_q = 0.8;
  /// custom_files parameters: newline-delimited probability files.
  std::string custom_p_file;
  std::string custom_q_file;

  /// Density-ratio parameter used by the sweep formulas (n = rho * f * m,
  /// or n = k f / log k) and rate formulas. 0 means "derive from the pair"
  /// (zipf_pair / custom_files); worst_case_I requires it explicitly.
  double f = 0.0;
  /// Ratio parameter handed to the worst_case_I constructor. 0 means
  /// "use f". Letting it differ from f allows sweeps whose sample-size
  /// formulas use a smaller f than the family's validity threshold of 10.
  double family_f = 0.0;

  Sweep sweep = Sweep::vary_m;
  /// vary_m: the m grid (k fixed below). vary_k: the k grid. Non-empty,
  /// strictly increasing.
  std::vector<std::int64_t> grid;
  /// Alphabet size for vary_m sweeps.
  std::int64_t k = 0;
  /// vary_m sample coupling: n = ceil(rho * f * m). Family defaults: 3 for
  /// worst_case_I, 0.5 for zipf_pair (0 = use the family default).
  double rho = 0.0;

  std::int64_t trials = 1;
  std::vector<Method> methods{Method::aplugin, Method::opt};
  std::uint64_t seed = 0;
  EstimatorConfig config;

  /// OpenMP across trials when true; the serial reference path otherwise.
  /// Both produce identical rows (per-trial work is seed-determined and the
  /// reduction order is fixed).
  bool parallel = true;
  /// When false, wall_seconds is written as exactly 0.0, making the CSV
  /// byte-stable across runs and machines.
  bool measure_time = true;
  /// Refuse (budget_exceeded) when k * max(m, n) * trials at any sweep
  /// point exceeds this.
  double budget = 1e11;
};

/// One (method, sweep point) result row.
struct RmseRow {
  std::string method;
  std::int64_t sweep_value = 0; // m (vary_m) or k (vary_k)
  double rmse = 0.0;            // over finite-estimate trials
  double mean_bias = 0.0;       // over finite-estimate trials
  std::int64_t infinite_count = 0;
  std::int64_t trials = 0;
  double wall_seconds = 0.0;
};

/// Runs the experiment: for each sweep point and method, `trials` seeded
/// draws and estimates; RMSE and mean bias against the family pair's exact
/// divergence. Infinite plug-in outcomes are counted and excluded from the
/// error statistics. Deterministic for a fixed spec and seed, independent
/// of thread count.
std::vector<RmseRow> run_experiment(const ExperimentSpec& spec);

/// Writes rows as CSV: fixed header, 17-significant-digit decimals, LF
/// line endings. Throws io_error naming the path on failure.
void write_csv(const std::vector<RmseRow>& rows, const std::string& path);

/// Reads back a write_csv file (round-trip inverse). Throws io_error on
/// malformed content.
std::vector<RmseRow> read_csv(const std::string& path);

} // namespace divrate
