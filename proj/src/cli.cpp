#include "divrate/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "divrate/approx.hpp"
#include "divrate/bench.hpp"
#include "divrate/distribution.hpp"
#include "divrate/error.hpp"
#include "divrate/estimators.hpp"
#include "divrate/io.hpp"
#include "divrate/remez.hpp"

namespace divrate {
namespace {

double parse_decimal(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw invalid_parameter(what + ": not a decimal number: '" + s + "'");
  return v;
}

void apply_config_file(EstimatorConfig& cfg, const std::string& path) {
  for (const auto& [key, value] : read_key_value_file(path)) {
    if (key == "add_constant") {
      cfg.add_constant_c = parse_decimal(value, path);
    } else if (key == "c0") {
      cfg.c0 = parse_decimal(value, path);
    } else if (key == "c1") {
      cfg.c1 = parse_decimal(value, path);
    } else if (key == "c2") {
      cfg.c2 = parse_decimal(value, path);
    } else if (key == "c0_prime") {
      cfg.c0_prime = parse_decimal(value, path);
    } else if (key == "c1_prime") {
      cfg.c1_prime = parse_decimal(value, path);
    } else if (key == "c2_prime") {
      cfg.c2_prime = parse_decimal(value, path);
    } else if (key == "clip_bound_f") {
      cfg.clip_bound_f = parse_decimal(value, path);
    } else if (key == "split_mode") {
      if (value == "multinomial-reuse") {
        cfg.split_mode = SplitMode::multinomial_reuse;
      } else if (value == "poissonized-split") {
        cfg.split_mode = SplitMode::poissonized_split;
      } else {
        throw invalid_parameter(path + ": split_mode must be "
                                       "multinomial-reuse or "
                                       "poissonized-split, got '" +
                                value + "'");
      }
    } else {
      throw invalid_parameter(path + ": unknown configuration key '" + key +
                              "'");
    }
  }
}

std::uint64_t seed_from_env_or(std::uint64_t fallback) {
  const char* env = std::getenv("DIVRATE_SEED");
  if (env == nullptr) return fallback;
  std::string s(env);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw invalid_parameter(
        "DIVRATE_SEED must be a decimal 64-bit integer, got '" + s + "'");
  return v;
}

// --- estimate ---------------------------------------------------------------

struct EstimateOpts {
  std::string method;
  std::string hist_p;
  std::string hist_q;
  std::int64_t k = 0;   // 0: take the file length
  double f = 0.0;       // > 0: enable clipping to [0, log f]
  std::string config_file;
};

SampleHistogram pad_histogram(const SampleHistogram& h, std::int64_t k) {
  if (k == 0 || k == h.alphabet_size()) return h;
  if (k < h.alphabet_size())
    throw invalid_parameter(
        "estimate: --k is smaller than the histogram file length");
  std::vector<std::int64_t> counts = h.counts();
  counts.resize(static_cast<std::size_t>(k), 0);
  return SampleHistogram(std::move(counts));
}

void run_estimate(const EstimateOpts& o) {
  SampleHistogram hp = pad_histogram(read_histogram_file(o.hist_p), o.k);
  SampleHistogram hq = pad_histogram(read_histogram_file(o.hist_q), o.k);
  if (hp.alphabet_size() != hq.alphabet_size())
    throw invalid_parameter(
        "estimate: histogram files have different alphabet sizes (pad the "
        "shorter with zeros or pass --k)");
  const std::int64_t k = hp.alphabet_size();

  EstimatorConfig cfg;
  if (!o.config_file.empty()) apply_config_file(cfg, o.config_file);
  if (o.f > 0.0) cfg.clip_bound_f = o.f;
  cfg.validate();

  double value = 0.0, d1 = 0.0, d2 = 0.0;
  bool clipped = false;
  BranchCounts entropy_side{};
  BranchCounts cross_side{};

  if (o.method == "opt") {
    // Single histograms per side: branch selection reuses them.
    SplitSamples ms(hp, hp, SplitMode::multinomial_reuse);
    SplitSamples ns(hq, hq, SplitMode::multinomial_reuse);
    DivergenceEstimate est = opt_kl(ms, ns, cfg, k);
    value = est.value;
    d1 = est.d1_part;
    d2 = est.d2_part;
    clipped = est.clipped;
    entropy_side = est.entropy_side;
    cross_side = est.cross_side;
  } else {
    // The value column is the library estimate; the d1/d2 columns report the
    // usual two-part decomposition (d1 = sum phat log phat, d2 = sum phat
    // times the method's log-Q form), which recombines to the value up to
    // summation rounding.
    value = o.method == "plugin" ? plugin_kl(hp, hq) : aplugin_kl(hp, hq, cfg);
    const double m = static_cast<double>(hp.total());
    const double n = static_cast<double>(hq.total());
    const double denom = n + static_cast<double>(k) * cfg.add_constant_c;
    for (std::int64_t i = 0; i < k; ++i) {
      if (hp[i] == 0) continue;
      double phat = static_cast<double>(hp[i]) / m;
      d1 += phat * std::log(phat);
      if (o.method == "plugin") {
        d2 += hq[i] == 0 ? -std::numeric_limits<double>::infinity()
                         : phat * std::log(static_cast<double>(hq[i]) / n);
      } else {
        d2 += phat *
              std::log((static_cast<double>(hq[i]) + cfg.add_constant_c) /
                       denom);
      }
    }
    entropy_side.plugin_branch = k;
    cross_side.plugin_branch = k;
  }

  std::cout << "method,k,value,d1_part,d2_part,clipped,entropy_poly,"
               "entropy_plugin,cross_poly,cross_plugin\n"
            << o.method << ',' << k << ',' << format_decimal(value) << ','
            << format_decimal(d1) << ',' << format_decimal(d2) << ','
            << (clipped ? "true" : "false") << ','
            << entropy_side.poly_branch << ',' << entropy_side.plugin_branch
            << ',' << cross_side.poly_branch << ','
            << cross_side.plugin_branch << '\n';
}

// --- bench ------------------------------------------------------------------

struct BenchOpts {
  std::string family = "worst_case_I";
  double alpha_p = 1.0;
  double alpha_q = 0.8;
  std::string p_file;
  std::string q_file;
  std::string sweep = "m";
  std::vector<std::int64_t> grid;
  std::int64_t k = 0;
  double f = 0.0;
  double family_f = 20.0;
  double rho = 0.0;
  std::int64_t trials = 10;
  std::vector<std::string> methods{"aplugin", "opt"};
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::string config_file;
  bool serial = false;
  bool no_time = false;
  double budget = 1e11;
};

void run_bench(const BenchOpts& o) {
  ExperimentSpec spec;
  if (o.family == "worst_case_I") {
    spec.family = ExperimentSpec::Family::worst_case_I;
  } else if (o.family == "zipf_pair") {
    spec.family = ExperimentSpec::Family::zipf_pair;
  } else {
    spec.family = ExperimentSpec::Family::custom_files;
  }
  spec.zipf_alpha_p = o.alpha_p;
  spec.zipf_alpha_q = o.alpha_q;
  spec.custom_p_file = o.p_file;
  spec.custom_q_file = o.q_file;
  spec.f = o.f;
  spec.family_f = o.family_f;
  spec.sweep = o.sweep == "k" ? ExperimentSpec::Sweep::vary_k
                              : ExperimentSpec::Sweep::vary_m;
  spec.grid = o.grid;
  if (spec.grid.empty()) {
    spec.grid = spec.sweep == ExperimentSpec::Sweep::vary_m
                    ? std::vector<std::int64_t>{1000, 10000, 100000}
                    : std::vector<std::int64_t>{1000, 10000};
  }
  spec.k = o.k;
  spec.rho = o.rho;
  spec.trials = o.trials;
  spec.methods.clear();
  for (const std::string& name : o.methods) {
    if (name == "plugin") spec.methods.push_back(Method::plugin);
    else if (name == "aplugin") spec.methods.push_back(Method::aplugin);
    else spec.methods.push_back(Method::opt);
  }
  spec.seed = o.seed_given ? o.seed : seed_from_env_or(0);
  if (!o.config_file.empty()) apply_config_file(spec.config, o.config_file);
  spec.parallel = !o.serial;
  spec.measure_time = !o.no_time;
  spec.budget = o.budget;

  write_csv(run_experiment(spec), o.out);
}

// --- remez ------------------------------------------------------------------

struct RemezOpts {
  std::int64_t degree = 1;
  double interval = 0.0; // 0: report the base [0,1] approximation
};

void run_remez(const RemezOpts& o) {
  ApproxPolynomial base = remez_xlogx(o.degree);
  std::vector<double> coeffs;
  double sup = 0.0;
  if (o.interval > 0.0) {
    // Transport to [0, interval]: choose (n, k, c1) reproducing the target
    // endpoint, a = c1 * log(k) / n with n = e, log k = e.
    const double e = std::exp(1.0);
    RescaledPoly gamma =
        rescale_gamma(base, e, std::exp(e), o.interval);
    if (gamma.domain_warning())
      std::cerr << "note: interval >= 1, so the rescaled sup error is no "
                   "smaller than the [0,1] one\n";
    coeffs = gamma.coeffs();
    sup = gamma.residual_bound();
  } else {
    coeffs = base.coeffs();
    sup = base.sup_error();
  }
  std::cout << "j,a_j\n";
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    std::cout << j << ',' << format_decimal(coeffs[j]) << '\n';
  std::cout << "sup_error," << format_decimal(sup) << '\n';
}

// --- construct --------------------------------------------------------------

struct ConstructOpts {
  std::string family;
  std::int64_t k = 0;
  double alpha = 1.0;
  double f = 0.0;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double s = 1.0;
  int variant = 1;
  std::string out_p;
  std::string out_q;
};

void run_construct(const ConstructOpts& o) {
  auto write_pair = [&](const DiscreteDistribution& p,
                        const DiscreteDistribution& q) {
    if (o.out_q.empty())
      throw invalid_parameter(
          "construct: family '" + o.family + "' produces a pair; pass --out-q");
    write_distribution_file(p, o.out_p);
    write_distribution_file(q, o.out_q);
  };
  auto write_single = [&](const DiscreteDistribution& p) {
    if (!o.out_q.empty())
      throw invalid_parameter("construct: family '" + o.family +
                              "' produces a single distribution; --out-q "
                              "does not apply");
    write_distribution_file(p, o.out_p);
  };
  const bool second = o.variant == 2;

  if (o.family == "uniform") {
    write_single(make_uniform(o.k));
  } else if (o.family == "zipf") {
    write_single(make_zipf(o.k, o.alpha));
  } else if (o.family == "worst_case_I") {
    BoundedRatioPair pair = make_worst_case_pair_bias_I(o.k, o.f);
    write_pair(pair.p(), pair.q());
  } else if (o.family == "worst_case_II") {
    BoundedRatioPair pair = make_worst_case_pair_bias_II(o.k, o.n, o.f);
    write_pair(pair.p(), pair.q());
  } else if (o.family == "twopoint_m") {
    auto pairs = make_twopoint_variance_m(o.k, o.f, o.m);
    const BoundedRatioPair& pair = second ? pairs.second : pairs.first;
    write_pair(pair.p(), pair.q());
  } else if (o.family == "twopoint_n") {
    auto pairs = make_twopoint_variance_n(o.k, o.f, o.n);
    const BoundedRatioPair& pair = second ? pairs.second : pairs.first;
    write_pair(pair.p(), pair.q());
  } else if (o.family == "inconsistency") {
    auto pairs = make_inconsistency_pair(o.s);
    const DistributionPair& pair = second ? pairs.second : pairs.first;
    write_pair(pair.p, pair.q);
  } else {
    throw invalid_parameter("construct: unknown family '" + o.family + "'");
  }
}

} // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"divrate: KL divergence estimation on large discrete "
               "alphabets (plug-in, augmented plug-in, and "
               "polynomial-approximation estimators)"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  EstimateOpts eo;
  CLI::App* est = app.add_subcommand(
      "estimate", "Estimate D(P||Q) from two histogram files");
  est->add_option("--method", eo.method, "Estimator")
      ->required()
      ->check(CLI::IsMember({"plugin", "aplugin", "opt"}));
  est->add_option("--hist-p", eo.hist_p, "Histogram file for the P sample")
      ->required();
  est->add_option("--hist-q", eo.hist_q, "Histogram file for the Q sample")
      ->required();
  est->add_option("--k", eo.k,
                  "Alphabet size; pads shorter histogram files with zeros")
      ->check(CLI::PositiveNumber);
  est->add_option("--f", eo.f,
                  "Density-ratio bound; clips the opt estimate to [0, log f]")
      ->check(CLI::PositiveNumber);
  est->add_option("--config", eo.config_file,
                  "key=value estimator configuration file");

  BenchOpts bo;
  CLI::App* ben = app.add_subcommand(
      "bench", "Monte Carlo RMSE sweep over sample sizes or alphabet sizes");
  ben->add_option("--family", bo.family, "Distribution family")
      ->check(CLI::IsMember({"worst_case_I", "zipf_pair", "custom"}));
  ben->add_option("--alpha-p", bo.alpha_p, "Zipf exponent for P");
  ben->add_option("--alpha-q", bo.alpha_q, "Zipf exponent for Q");
  ben->add_option("--p-file", bo.p_file, "custom family: P file");
  ben->add_option("--q-file", bo.q_file, "custom family: Q file");
  ben->add_option("--sweep", bo.sweep, "Sweep variable (default m)")
      ->check(CLI::IsMember({"m", "k"}));
  ben->add_option("--grid", bo.grid,
                  "Comma-separated sweep grid (default m: 1e3,1e4,1e5; "
                  "default k: 1e3,1e4)")
      ->delimiter(',');
  ben->add_option("--k", bo.k, "Alphabet size (m sweeps)");
  ben->add_option("--f", bo.f, "Density-ratio parameter for the sweep rules");
  ben->add_option("--family-f", bo.family_f,
                  "Ratio handed to the worst_case_I constructor, which needs "
                  ">= 10 (default 20); --f alone drives the sample-size "
                  "coupling");
  ben->add_option("--rho", bo.rho, "n = ceil(rho * f * m) coupling");
  ben->add_option("--trials", bo.trials, "Monte Carlo trials per point")
      ->check(CLI::PositiveNumber);
  ben->add_option("--methods", bo.methods,
                  "Comma-separated estimators (default aplugin,opt)")
      ->delimiter(',')
      ->check(CLI::IsMember({"plugin", "aplugin", "opt"}));
  ben->add_option("--seed", bo.seed,
                  "Base seed (default: DIVRATE_SEED env var, else 0)");
  ben->add_option("--out", bo.out, "Output CSV path")->required();
  ben->add_option("--config", bo.config_file,
                  "key=value estimator configuration file");
  ben->add_flag("--serial", bo.serial, "Run trials on one thread");
  ben->add_flag("--no-time", bo.no_time,
                "Write wall_seconds as 0 for byte-stable output");
  ben->add_option("--budget", bo.budget,
                  "Refuse sweeps beyond k*max(m,n)*trials of this");

  RemezOpts ro;
  CLI::App* rem = app.add_subcommand(
      "remez", "Best polynomial approximation of x log x as CSV");
  rem->add_option("--degree", ro.degree, "Polynomial degree L")
      ->required()
      ->check(CLI::Range(static_cast<std::int64_t>(1),
                         static_cast<std::int64_t>(64)));
  rem->add_option("--interval", ro.interval,
                  "Rescale to [0, a] (reports gamma coefficients)")
      ->check(CLI::PositiveNumber);

  ConstructOpts co;
  CLI::App* con = app.add_subcommand(
      "construct", "Write a named distribution family to files");
  con->add_option("--family", co.family, "Family name")
      ->required()
      ->check(CLI::IsMember({"uniform", "zipf", "worst_case_I",
                             "worst_case_II", "twopoint_m", "twopoint_n",
                             "inconsistency"}));
  con->add_option("--k", co.k, "Alphabet size");
  con->add_option("--alpha", co.alpha, "Zipf exponent (default 1)");
  con->add_option("--f", co.f, "Density-ratio parameter");
  con->add_option("--n", co.n, "Q-sample size parameter");
  con->add_option("--m", co.m, "P-sample size parameter");
  con->add_option("--s", co.s, "Inconsistency scale parameter");
  con->add_option("--variant", co.variant,
                  "Which element of a two-point family (1 or 2)")
      ->check(CLI::Range(1, 2));
  con->add_option("--out-p", co.out_p, "Output file for P")->required();
  con->add_option("--out-q", co.out_q, "Output file for Q (pair families)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(est)) {
      run_estimate(eo);
    } else if (app.got_subcommand(ben)) {
      bo.seed_given = ben->count("--seed") > 0;
      run_bench(bo);
    } else if (app.got_subcommand(rem)) {
      run_remez(ro);
    } else {
      run_construct(co);
    }
  } catch (const std::exception& e) {
    std::cerr << "divrate: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace divrate
