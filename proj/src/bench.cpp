#include "divrate/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "divrate/error.hpp"
#include "divrate/io.hpp"
#include "divrate/rng.hpp"
#include "divrate/sampling.hpp"

namespace divrate {
namespace {

constexpr const char* kCsvHeader =
    "method,sweep_value,rmse,mean_bias,infinite_count,trials,wall_seconds";

double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

struct SweepPoint {
  std::int64_t sweep_value = 0; // m (vary_m) or k (vary_k)
  std::int64_t k = 0;
  std::int64_t m = 0;
  std::int64_t n = 0;
  BoundedRatioPair pair;
  double true_divergence = 0.0;
  double f = 0.0; // declared density-ratio bound for this sweep
};

BoundedRatioPair build_pair(const ExperimentSpec& spec, std::int64_t k,
                            double* f_out) {
  switch (spec.family) {
    case ExperimentSpec::Family::worst_case_I: {
      if (!(spec.f > 0.0))
        throw invalid_parameter(
            "run_experiment: worst_case_I requires an explicit f");
      double family_f = spec.family_f > 0.0 ? spec.family_f : spec.f;
      *f_out = spec.f;
      return make_worst_case_pair_bias_I(k, family_f);
    }
    case ExperimentSpec::Family::zipf_pair: {
      DiscreteDistribution p = make_zipf(k, spec.zipf_alpha_p);
      DiscreteDistribution q = make_zipf(k, spec.zipf_alpha_q);
      double ratio = density_ratio_max(p, q);
      double f = spec.f > 0.0 ? spec.f : ratio;
      *f_out = f;
      return BoundedRatioPair(std::move(p), std::move(q), f);
    }
    case ExperimentSpec::Family::custom_files: {
      DiscreteDistribution p = read_distribution_file(spec.custom_p_file);
      DiscreteDistribution q = read_distribution_file(spec.custom_q_file);
      if (p.size() != k)
        throw invalid_parameter(
            "run_experiment: custom distribution size differs from k");
      double ratio = density_ratio_max(p, q);
      if (std::isinf(ratio))
        throw invalid_parameter(
            "run_experiment: custom P has mass where Q vanishes; the density "
            "ratio (and the true divergence) is infinite");
      double f = spec.f > 0.0 ? spec.f : ratio;
      *f_out = f;
      return BoundedRatioPair(std::move(p), std::move(q), f);
    }
  }
  throw invalid_parameter("run_experiment: unknown family");
}

double default_rho(ExperimentSpec::Family family) {
  switch (family) {
    case ExperimentSpec::Family::worst_case_I: return 3.0;
    case ExperimentSpec::Family::zipf_pair: return 0.5;
    case ExperimentSpec::Family::custom_files: return 0.0; // must be explicit
  }
  return 0.0;
}

std::vector<SweepPoint> build_points(const ExperimentSpec& spec) {
  if (spec.grid.empty())
    throw invalid_parameter("run_experiment: empty sweep grid");
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    if (spec.grid[i] < 1)
      throw invalid_parameter("run_experiment: grid values must be >= 1");
    if (i > 0 && spec.grid[i] <= spec.grid[i - 1])
      throw invalid_parameter(
          "run_experiment: grid must be strictly increasing");
  }
  if (spec.trials < 1)
    throw invalid_parameter("run_experiment: trials must be >= 1");
  if (spec.methods.empty())
    throw invalid_parameter("run_experiment: no methods selected");
  spec.config.validate();

  std::vector<SweepPoint> points;
  if (spec.sweep == ExperimentSpec::Sweep::vary_m) {
    if (spec.k < 1)
      throw invalid_parameter("run_experiment: vary_m requires k >= 1");
    double rho = spec.rho > 0.0 ? spec.rho : default_rho(spec.family);
    if (!(rho > 0.0))
      throw invalid_parameter(
          "run_experiment: this family needs an explicit rho for n = rho*f*m");
    double f = 0.0;
    BoundedRatioPair pair = build_pair(spec, spec.k, &f);
    double d = kl_divergence(pair.p(), pair.q());
    for (std::int64_t m : spec.grid) {
      SweepPoint pt{m, spec.k, m,
                    static_cast<std::int64_t>(
                        std::ceil(rho * f * static_cast<double>(m))),
                    pair, d, f};
      points.push_back(std::move(pt));
    }
  } else {
    for (std::int64_t k : spec.grid) {
      if (k < 2)
        throw invalid_parameter(
            "run_experiment: vary_k requires k >= 2 (uses log k)");
      double f = 0.0;
      BoundedRatioPair pair = build_pair(spec, k, &f);
      double d = kl_divergence(pair.p(), pair.q());
      double logk = std::log(static_cast<double>(k));
      std::int64_t m = static_cast<std::int64_t>(
          std::ceil(2.0 * static_cast<double>(k) / logk));
      std::int64_t n = static_cast<std::int64_t>(
          std::ceil(static_cast<double>(k) * f / logk));
      points.push_back(SweepPoint{k, k, m, n, std::move(pair), d, f});
    }
  }

  for (const SweepPoint& pt : points) {
    double cost = static_cast<double>(pt.k) *
                  static_cast<double>(std::max(pt.m, pt.n)) *
                  static_cast<double>(spec.trials);
    if (cost > spec.budget)
      throw budget_exceeded(
          "run_experiment: sweep point " + std::to_string(pt.sweep_value) +
              " needs about " + std::to_string(cost) +
              " count draws, over the budget of " +
              std::to_string(spec.budget),
          cost);
  }
  return points;
}

// One seeded trial. Draw order is fixed (P-side sample first), so a trial
// is a pure function of its seed.
double run_trial(Method method, const SweepPoint& pt,
                 const EstimatorConfig& config, std::uint64_t trial_seed) {
  Xoshiro256ss rng(trial_seed);
  if (method == Method::opt) {
    // Any pair admitted to this sweep has density ratio at most f, so the
    // true divergence lies in [0, ln f]; the optimal estimator is entitled
    // to that bound. An explicit clip_bound_f in the user config wins.
    EstimatorConfig eff = config;
    if (!eff.clip_bound_f.has_value() && pt.f >= 1.0) eff.clip_bound_f = pt.f;
    SplitSamples ms = make_split(rng, pt.pair.p(), pt.m, eff.split_mode);
    SplitSamples ns = make_split(rng, pt.pair.q(), pt.n, eff.split_mode);
    return opt_kl(ms, ns, eff, pt.k, pt.m, pt.n).value;
  }
  auto draw = [&](const DiscreteDistribution& dist, std::int64_t size) {
    return config.split_mode == SplitMode::poissonized_split
               ? sample_poissonized(rng, dist, size)
               : sample_histogram(rng, dist, size);
  };
  SampleHistogram M = draw(pt.pair.p(), pt.m);
  SampleHistogram N = draw(pt.pair.q(), pt.n);
  switch (method) {
    case Method::plugin:
      // Poissonized draws can be empty; an empty empirical P is a vacuous
      // sum (0), and a lost Q sample against observed P mass is infinite.
      if (M.total() == 0) return 0.0;
      for (std::int64_t i = 0; i < M.alphabet_size(); ++i)
        if (M[i] > 0 && N[i] == 0)
          return std::numeric_limits<double>::infinity();
      return plugin_kl(M, N);
    case Method::aplugin:
      if (M.total() == 0) return 0.0;
      return aplugin_kl(M, N, config);
    case Method::opt:
      break;
  }
  throw invalid_parameter("run_experiment: unknown method");
}

} // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::plugin: return "plugin";
    case Method::aplugin: return "aplugin";
    case Method::opt: return "opt";
  }
  throw invalid_parameter("method_name: unknown method");
}

std::vector<RmseRow> run_experiment(const ExperimentSpec& spec) {
  std::vector<SweepPoint> points = build_points(spec);
  std::vector<RmseRow> rows;
  rows.reserve(points.size() * spec.methods.size());

  std::vector<double> errors(static_cast<std::size_t>(spec.trials));
  for (Method method : spec.methods) {
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const SweepPoint& pt = points[pi];
      auto t0 = std::chrono::steady_clock::now();
      std::ptrdiff_t trials = static_cast<std::ptrdiff_t>(spec.trials);
      auto body = [&](std::ptrdiff_t t) {
        std::uint64_t seed =
            mix64(spec.seed, static_cast<std::uint64_t>(pi),
                  static_cast<std::uint64_t>(t),
                  static_cast<std::uint64_t>(method));
        errors[static_cast<std::size_t>(t)] =
            run_trial(method, pt, spec.config, seed) - pt.true_divergence;
      };
      if (spec.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t t = 0; t < trials; ++t) body(t);
      } else {
        for (std::ptrdiff_t t = 0; t < trials; ++t) body(t);
      }

      // Compact finite errors in trial order, then reduce with a fixed
      // pairwise shape: the row is identical for any thread count.
      std::vector<double> finite;
      std::vector<double> finite_sq;
      finite.reserve(errors.size());
      for (double e : errors) {
        if (std::isinf(e)) continue;
        finite.push_back(e);
        finite_sq.push_back(e * e);
      }
      RmseRow row;
      row.method = method_name(method);
      row.sweep_value = pt.sweep_value;
      row.infinite_count =
          spec.trials - static_cast<std::int64_t>(finite.size());
      row.trials = spec.trials;
      if (finite.empty()) {
        row.rmse = std::numeric_limits<double>::quiet_NaN();
        row.mean_bias = std::numeric_limits<double>::quiet_NaN();
      } else {
        double inv = 1.0 / static_cast<double>(finite.size());
        row.rmse =
            std::sqrt(pairwise_sum(finite_sq.data(), finite_sq.size()) * inv);
        row.mean_bias = pairwise_sum(finite.data(), finite.size()) * inv;
      }
      if (spec.measure_time) {
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
      } else {
        row.wall_seconds = 0.0;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_csv(const std::vector<RmseRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << kCsvHeader << '\n';
  for (const RmseRow& r : rows) {
    out << r.method << ',' << r.sweep_value << ',' << format_decimal(r.rmse)
        << ',' << format_decimal(r.mean_bias) << ',' << r.infinite_count
        << ',' << r.trials << ',' << format_decimal(r.wall_seconds) << '\n';
  }
  if (!out) throw io_error("write failure on: " + path);
}

std::vector<RmseRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw io_error(path + ": missing or wrong CSV header");

  auto split = [&](const std::string& s) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = s.find(',', start);
      fields.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return fields;
  };
  auto parse_double = [&](const std::string& s) {
    // from_chars rejects the "nan"/"inf" spellings some written rows carry.
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw io_error(path + ": bad decimal field '" + s + "'");
    }
  };
  auto parse_int = [&](const std::string& s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw io_error(path + ": bad integer field '" + s + "'");
    return v;
  };

  std::vector<RmseRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split(line);
    if (f.size() != 7)
      throw io_error(path + ": expected 7 fields, got " +
                     std::to_string(f.size()));
    RmseRow r;
    r.method = f[0];
    r.sweep_value = parse_int(f[1]);
    r.rmse = parse_double(f[2]);
    r.mean_bias = parse_double(f[3]);
    r.infinite_count = parse_int(f[4]);
    r.trials = parse_int(f[5]);
    r.wall_seconds = parse_double(f[6]);
    rows.push_back(std::move(r));
  }
  if (in.bad()) throw io_error("read failure on: " + path);
  return rows;
}

} // namespace divrate
