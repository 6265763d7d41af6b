#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cliquelab/errors.hpp"
#include "cliquelab/experiment.hpp"

using namespace cliquelab;

namespace {

// Wilson bounds as the roots of (1 + z^2/n) p^2 - (2 phat + z^2/n) p + phat^2.
Interval wilson_oracle(int s, int n, double z) {
  const double phat = static_cast<double>(s) / n;
  const double a = 1.0 + z * z / n;
  const double b = -(2.0 * phat + z * z / n);
  const double c = phat * phat;
  const double root = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  return {(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string records_csv(const ExperimentSpec& spec) {
  std::ostringstream os;
  write_records_csv(os, run_experiment(spec).records);
  return os.str();
}

ExperimentSpec spec_for(std::string algo, std::vector<int> ns, int trials) {
  ExperimentSpec s;
  s.algo = std::move(algo);
  s.ns = std::move(ns);
  s.trials = trials;
  return s;
}

}  // namespace

TEST_CASE("wilson interval matches the quadratic-root oracle") {
  for (auto [s, n] : {std::pair{0, 10}, std::pair{10, 10}, std::pair{50, 100}}) {
    const Interval got = wilson_interval(s, n);
    const Interval want = wilson_oracle(s, n, 1.959963984540054);
    CHECK(got.low == doctest::Approx(want.low).epsilon(1e-12));
    CHECK(got.high == doctest::Approx(want.high).epsilon(1e-12));
  }
  CHECK(wilson_interval(0, 10).low == 0.0);
  CHECK(wilson_interval(10, 10).high == doctest::Approx(1.0));
  CHECK(wilson_interval(0, 10).high == doctest::Approx(0.2775327998).epsilon(1e-9));
}

TEST_CASE("improved_ag: ten successful three-round records") {
  auto spec = spec_for("improved_ag", {16}, 10);
  spec.params.ell = 3;
  const auto result = run_experiment(spec);
  REQUIRE(result.records.size() == 10);
  for (int i = 0; i < 10; ++i) {
    const auto& r = result.records[static_cast<std::size_t>(i)];
    CHECK(r.trial == i);
    CHECK(r.success);
    CHECK(r.rounds_or_time == 3.0);
    CHECK(r.leader_count == 1);
    CHECK(r.leader_id.has_value());
  }
  REQUIRE(result.summaries.size() == 1);
  CHECK(result.summaries[0].successes == 10);
  CHECK(result.summaries[0].ci_high == doctest::Approx(1.0));
}

TEST_CASE("small_id: block-size message bound") {
  auto spec = spec_for("small_id", {8}, 1);
  spec.params.d = 2;
  spec.params.g = 1;
  const auto result = run_experiment(spec);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].messages <= 14);
  CHECK(result.records[0].params == "d=2;g=1");
}

TEST_CASE("invalid experiments are configuration errors") {
  CHECK_THROWS_AS(run_experiment(spec_for("improved_ag", {16}, 0)), ConfigError);
  CHECK_THROWS_AS(run_experiment(spec_for("improved_ag", {}, 1)), ConfigError);
  CHECK_THROWS_AS(run_experiment(spec_for("bogus", {16}, 1)), ConfigError);
  auto even = spec_for("improved_ag", {16}, 1);
  even.params.ell = 4;
  CHECK_THROWS_AS(run_experiment(even), ConfigError);
  auto single = spec_for("las_vegas", {16}, 1);
  single.wake = "single";
  CHECK_THROWS_AS(run_experiment(single), ConfigError);
  auto big_k = spec_for("async_tradeoff", {16}, 1);
  big_k.params.k = 9;
  CHECK_THROWS_AS(run_experiment(big_k), ConfigError);
  auto iso = spec_for("async_levels", {16}, 1);
  iso.mapping = "isolating";
  CHECK_THROWS_AS(run_experiment(iso), ConfigError);
  CHECK_THROWS_AS(make_scheduler("warp", 1), ConfigError);
  CHECK_THROWS_AS(parse_wake("subset:1,99", 8, 1), ConfigError);
  CHECK_THROWS_AS(parse_wake("sometimes", 8, 1), ConfigError);
}

TEST_CASE("parse_wake and describe_params") {
  CHECK(parse_wake("simultaneous", 8, 1).mode == WakeStrategy::Mode::all_at_round_1);
  CHECK(parse_wake("single", 8, 1).nodes.size() == 1);
  CHECK(parse_wake("half", 8, 1).nodes.size() == 4);
  CHECK(parse_wake("subset:1,5", 8, 1).nodes == std::vector<NodeIndex>{1, 5});
  const ProtocolParams p;
  CHECK(describe_params("improved_ag", p) == "ell=3");
  CHECK(describe_params("small_id", p) == "d=1;g=1");
  CHECK(describe_params("async_levels", p).empty());
}

TEST_CASE("sweep over n and ell") {
  auto spec = spec_for("improved_ag", {16, 64, 256}, 5);
  std::vector<ProtocolParams> cells(2);
  cells[0].ell = 3;
  cells[1].ell = 5;
  const auto rows = sweep(spec, cells);
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].success_rate == 1.0);
    if (i > 0 && rows[i].params == rows[i - 1].params) CHECK(rows[i].mean_messages >= rows[i - 1].mean_messages);
  }
  CHECK_THROWS_AS(sweep(spec, std::vector<ProtocolParams>{}), ConfigError);
}

TEST_CASE("sweep: larger k trades time for fewer messages") {
  auto spec = spec_for("async_tradeoff", {256}, 20);
  spec.wake = "single";
  std::vector<ProtocolParams> cells(2);
  cells[0].k = 2;
  cells[1].k = 3;
  const auto rows = sweep(spec, cells);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].mean_messages < rows[0].mean_messages);
}

TEST_CASE("records are reproducible regardless of thread count") {
  for (const std::string algo : {"las_vegas", "two_round", "async_tradeoff"}) {
    auto spec = spec_for(algo, {24, 40}, 6);
    spec.base_seed = 77;
    if (algo != "las_vegas") spec.wake = "half";
    spec.threads = 1;
    const std::string one = records_csv(spec);
    spec.threads = 4;
    CHECK(records_csv(spec) == one);
  }
}

TEST_CASE("run_trial matches the experiment record") {
  auto spec = spec_for("las_vegas", {32}, 3);
  spec.base_seed = 5;
  const auto result = run_experiment(spec);
  for (int t = 0; t < 3; ++t) {
    const auto r = run_trial(spec, 32, t);
    CHECK(r.messages == result.records[static_cast<std::size_t>(t)].messages);
    CHECK(r.attempts == result.records[static_cast<std::size_t>(t)].attempts);
    CHECK(r.attempts >= 1);
    CHECK(r.rounds_or_time == 3.0 * r.attempts);
  }
}

TEST_CASE("csv output matches the golden files") {
  const std::string dir = CLIQUELAB_GOLDEN_DIR;
  auto spec = spec_for("improved_ag", {8, 16}, 3);
  spec.base_seed = 1;
  CHECK(records_csv(spec) == slurp(dir + "/improved_ag_records.csv"));
  CHECK(slurp(dir + "/improved_ag_records.csv").rfind(std::string(kRecordCsvHeader) + "\n", 0) == 0);

  std::ostringstream os;
  const std::vector<ProtocolParams> cells(1);
  write_sweep_csv(os, sweep(spec, cells));
  CHECK(os.str() == slurp(dir + "/improved_ag_sweep.csv"));
}

TEST_CASE("jsonl records carry the csv fields") {
  auto spec = spec_for("async_levels", {8}, 2);
  std::ostringstream os;
  write_records_jsonl(os, run_experiment(spec).records);
  std::istringstream in(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("algo") == "async_levels");
    CHECK(j.at("n") == 8);
    CHECK(j.contains("leader_id"));
    ++lines;
  }
  CHECK(lines == 2);
}
