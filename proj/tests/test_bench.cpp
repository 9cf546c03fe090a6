// Tests for the Monte Carlo benchmark harness: sweep construction, row
// determinism (including across thread counts), statistics conventions,
// the CSV round trip, and resource guards.

#include "doctest.h"

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "divrate/bench.hpp"
#include "divrate/distribution.hpp"
#include "divrate/error.hpp"
#include "divrate/io.hpp"

using divrate::ExperimentSpec;
using divrate::Method;
using divrate::RmseRow;

namespace {

ExperimentSpec smoke_spec() {
  ExperimentSpec s;
  s.family = ExperimentSpec::Family::worst_case_I;
  s.f = 5.0;
  s.family_f = 20.0;
  s.sweep = ExperimentSpec::Sweep::vary_m;
  s.grid = {50, 100};
  s.k = 10;
  s.trials = 5;
  s.methods = {Method::plugin, Method::aplugin, Method::opt};
  s.seed = 42;
  s.measure_time = false;
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("smoke run produces one row per (method, sweep point) in order") {
  auto rows = divrate::run_experiment(smoke_spec());
  REQUIRE(rows.size() == 6);

  // Method-outer, sweep-inner ordering.
  CHECK(rows[0].method == "plugin");
  CHECK(rows[1].method == "plugin");
  CHECK(rows[2].method == "aplugin");
  CHECK(rows[3].method == "aplugin");
  CHECK(rows[4].method == "opt");
  CHECK(rows[5].method == "opt");
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    CHECK(rows[i].sweep_value == 50);
    CHECK(rows[i + 1].sweep_value == 100);
  }

  for (const auto& r : rows) {
    CHECK(r.trials == 5);
    CHECK(r.infinite_count >= 0);
    CHECK(r.infinite_count <= r.trials);
    CHECK(r.wall_seconds == 0.0); // measure_time = false writes exactly 0
    if (r.infinite_count < r.trials) {
      CHECK(std::isfinite(r.rmse));
      CHECK(r.rmse >= 0.0);
      CHECK(std::isfinite(r.mean_bias));
    }
    // Only the raw plug-in can hit the infinite sentinel.
    if (r.method != "plugin") CHECK(r.infinite_count == 0);
  }
}

TEST_CASE("runs are deterministic and independent of thread count") {
  auto spec = smoke_spec();
  auto a = divrate::run_experiment(spec);
  auto b = divrate::run_experiment(spec);

  int saved = omp_get_max_threads();
  omp_set_num_threads(2);
  auto c = divrate::run_experiment(spec); // parallel path, 2 threads
  auto spec_serial = spec;
  spec_serial.parallel = false;
  auto d = divrate::run_experiment(spec_serial);
  omp_set_num_threads(saved);

  divrate::write_csv(a, "bench_a.csv");
  divrate::write_csv(b, "bench_b.csv");
  divrate::write_csv(c, "bench_c.csv");
  divrate::write_csv(d, "bench_d.csv");
  std::string sa = slurp("bench_a.csv");
  CHECK(sa == slurp("bench_b.csv"));
  CHECK(sa == slurp("bench_c.csv"));
  CHECK(sa == slurp("bench_d.csv"));
  CHECK(sa.find('\r') == std::string::npos); // LF endings only
  std::remove("bench_a.csv");
  std::remove("bench_b.csv");
  std::remove("bench_c.csv");
  std::remove("bench_d.csv");
}

TEST_CASE("adding a method leaves other methods' rows unchanged") {
  auto spec = smoke_spec();
  spec.methods = {Method::aplugin};
  auto lone = divrate::run_experiment(spec);
  spec.methods = {Method::plugin, Method::aplugin, Method::opt};
  auto full = divrate::run_experiment(spec);
  // aplugin rows sit at indices 2,3 of the full run and must match the
  // lone run bit for bit (per-trial seeds ignore the method list).
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(full[i + 2].rmse == lone[i].rmse);
    CHECK(full[i + 2].mean_bias == lone[i].mean_bias);
    CHECK(full[i + 2].infinite_count == lone[i].infinite_count);
  }
}

TEST_CASE("single-trial rows satisfy rmse = |bias| at a zero-divergence pair") {
  // family_f = 10 makes the worst-case pair collapse to P = Q (D = 0).
  ExperimentSpec s;
  s.family = ExperimentSpec::Family::worst_case_I;
  s.f = 10.0;
  s.family_f = 10.0;
  s.sweep = ExperimentSpec::Sweep::vary_m;
  s.grid = {40};
  s.k = 10;
  s.trials = 1;
  s.methods = {Method::aplugin, Method::opt};
  s.seed = 9;
  s.measure_time = false;
  auto rows = divrate::run_experiment(s);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.rmse == doctest::Approx(std::abs(r.mean_bias)).epsilon(1e-15));
  }
}

TEST_CASE("zipf family derives its ratio bound and runs all methods") {
  ExperimentSpec s;
  s.family = ExperimentSpec::Family::zipf_pair;
  s.zipf_alpha_p = 1.0;
  s.zipf_alpha_q = 0.8;
  s.sweep = ExperimentSpec::Sweep::vary_m;
  s.grid = {60, 120};
  s.k = 20;
  s.trials = 4;
  s.methods = {Method::plugin, Method::aplugin, Method::opt};
  s.seed = 3;
  s.measure_time = false;
  auto rows = divrate::run_experiment(s);
  CHECK(rows.size() == 6);
  for (const auto& r : rows)
    if (r.infinite_count < r.trials) CHECK(std::isfinite(r.rmse));
}

TEST_CASE("the optimal estimator beats the smoothed plug-in at scale") {
  // One vary_k point at k = 1000: m = ceil(2k/log k) = 290,
  // n = ceil(k f / log k) with f = 5 -> 724. 50 trials.
  ExperimentSpec s;
  s.family = ExperimentSpec::Family::worst_case_I;
  s.f = 5.0;
  s.family_f = 20.0;
  s.sweep = ExperimentSpec::Sweep::vary_k;
  s.grid = {1000};
  s.trials = 50;
  s.methods = {Method::aplugin, Method::opt};
  s.seed = 2024;
  s.measure_time = false;
  auto rows = divrate::run_experiment(s);
  REQUIRE(rows.size() == 2);
  const RmseRow& ap = rows[0];
  const RmseRow& op = rows[1];
  CHECK(ap.method == "aplugin");
  CHECK(op.method == "opt");
  CHECK(ap.infinite_count == 0);
  CHECK(op.infinite_count == 0);
  // The sample sizes sit in the regime where the smoothed plug-in is
  // bias-dominated; the bounded polynomial estimator must come out ahead.
  CHECK(op.rmse < ap.rmse);
}

TEST_CASE("CSV writes the pinned header and round-trips rows exactly") {
  std::vector<RmseRow> rows;
  RmseRow r1{"aplugin", 1000, 0.12345678901234567, -0.25, 0, 50, 0.0};
  RmseRow r2{"opt", 10000, std::nan(""), 1.5e-300, 50, 50, 1.25};
  RmseRow r3{"plugin", 7, std::numeric_limits<double>::infinity(), 0.0, 3, 9,
             0.0};
  rows = {r1, r2, r3};
  divrate::write_csv(rows, "roundtrip.csv");

  std::string text = slurp("roundtrip.csv");
  CHECK(text.rfind(
            "method,sweep_value,rmse,mean_bias,infinite_count,trials,"
            "wall_seconds\n",
            0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');

  auto back = divrate::read_csv("roundtrip.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[0].method == "aplugin");
  CHECK(back[0].sweep_value == 1000);
  CHECK(back[0].rmse == r1.rmse); // 17 significant digits round-trip doubles
  CHECK(back[0].mean_bias == r1.mean_bias);
  CHECK(back[0].infinite_count == 0);
  CHECK(back[0].trials == 50);
  CHECK(back[0].wall_seconds == 0.0);
  CHECK(std::isnan(back[1].rmse));
  CHECK(back[1].mean_bias == r2.mean_bias);
  CHECK(back[1].wall_seconds == 1.25);
  CHECK(std::isinf(back[2].rmse));
  std::remove("roundtrip.csv");
}

TEST_CASE("CSV with no rows is just the header") {
  divrate::write_csv({}, "empty.csv");
  CHECK(slurp("empty.csv") ==
        "method,sweep_value,rmse,mean_bias,infinite_count,trials,"
        "wall_seconds\n");
  CHECK(divrate::read_csv("empty.csv").empty());
  std::remove("empty.csv");
}

TEST_CASE("CSV reader rejects malformed input") {
  {
    std::ofstream out("bad1.csv", std::ios::binary);
    out << "wrong,header\n";
  }
  CHECK_THROWS_AS(divrate::read_csv("bad1.csv"), divrate::io_error);
  {
    std::ofstream out("bad2.csv", std::ios::binary);
    out << "method,sweep_value,rmse,mean_bias,infinite_count,trials,"
           "wall_seconds\n";
    out << "opt,10,0.5,0.1,0,50\n"; // six fields
  }
  CHECK_THROWS_AS(divrate::read_csv("bad2.csv"), divrate::io_error);
  {
    std::ofstream out("bad3.csv", std::ios::binary);
    out << "method,sweep_value,rmse,mean_bias,infinite_count,trials,"
           "wall_seconds\n";
    out << "opt,10,zebra,0.1,0,50,0\n"; // non-numeric decimal
  }
  CHECK_THROWS_AS(divrate::read_csv("bad3.csv"), divrate::io_error);
  CHECK_THROWS_AS(divrate::read_csv("no_such_file.csv"), divrate::io_error);
  std::remove("bad1.csv");
  std::remove("bad2.csv");
  std::remove("bad3.csv");
}

TEST_CASE("custom distribution files drive the harness") {
  divrate::write_distribution_file(
      divrate::DiscreteDistribution(std::vector<double>{0.5, 0.3, 0.2}),
      "p_custom.txt");
  divrate::write_distribution_file(
      divrate::DiscreteDistribution(std::vector<double>{0.25, 0.35, 0.4}),
      "q_custom.txt");

  ExperimentSpec s;
  s.family = ExperimentSpec::Family::custom_files;
  s.custom_p_file = "p_custom.txt";
  s.custom_q_file = "q_custom.txt";
  s.sweep = ExperimentSpec::Sweep::vary_m;
  s.grid = {30};
  s.k = 3;
  s.rho = 1.0; // custom family has no default coupling
  s.trials = 3;
  s.methods = {Method::aplugin};
  s.seed = 5;
  s.measure_time = false;
  auto rows = divrate::run_experiment(s);
  REQUIRE(rows.size() == 1);
  CHECK(std::isfinite(rows[0].rmse));

  // k mismatch is refused.
  auto bad = s;
  bad.k = 4;
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  // Missing rho too: n = rho * f * m needs an explicit coupling here.
  auto norho = s;
  norho.rho = 0.0;
  CHECK_THROWS_AS(divrate::run_experiment(norho), divrate::invalid_parameter);

  std::remove("p_custom.txt");
  std::remove("q_custom.txt");
}

TEST_CASE("spec validation rejects malformed sweeps") {
  auto s = smoke_spec();

  auto bad = s;
  bad.grid = {};
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  bad = s;
  bad.grid = {100, 100};
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  bad = s;
  bad.grid = {100, 50};
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  bad = s;
  bad.trials = 0;
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  bad = s;
  bad.methods = {};
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  bad = s;
  bad.f = 0.0; // worst_case_I demands an explicit f
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  bad = s;
  bad.sweep = ExperimentSpec::Sweep::vary_k;
  bad.grid = {1, 10}; // vary_k needs k >= 2
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);

  bad = s;
  bad.config.c2 = 99.0; // invalid estimator configuration propagates
  CHECK_THROWS_AS(divrate::run_experiment(bad), divrate::invalid_parameter);
}

TEST_CASE("the cost guard refuses oversized experiments") {
  auto s = smoke_spec();
  s.budget = 1000.0; // k * max(m,n) * trials = 10 * 750 * 5 >> 1000
  CHECK_THROWS_AS(divrate::run_experiment(s), divrate::budget_exceeded);

  // The guard reports before any sampling happens, so it is cheap even
  // for nominally astronomical requests.
  auto huge = smoke_spec();
  huge.grid = {1000000000};
  huge.trials = 1000000;
  CHECK_THROWS_AS(divrate::run_experiment(huge), divrate::budget_exceeded);
}
