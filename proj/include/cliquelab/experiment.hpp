#pragma once

// Monte Carlo experiment runner: trials, summaries with Wilson intervals,
// sweeps, and CSV/JSONL emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cliquelab/adversary.hpp"
#include "cliquelab/async_engine.hpp"
#include "cliquelab/sync_engine.hpp"

namespace cliquelab {

struct ProtocolParams {
  int ell = 3;
  int k = 2;
  double epsilon = 0.1;
  int d = 1;
  int g = 1;
  double a = 4.0;
  double b = 4.0;
  double gamma = 4.0;
};

// Known algorithm names: improved_ag, small_id, las_vegas, two_round,
// async_tradeoff, async_levels.
const std::vector<std::string>& algorithm_names();
bool is_async(const std::string& algo);

// Throw ConfigError for an unknown name or invalid parameters.
SyncProtocolPtr make_sync_protocol(const std::string& algo, const ProtocolParams& p);
AsyncProtocolPtr make_async_protocol(const std::string& algo, const ProtocolParams& p);

// Only the parameters the algorithm reads, e.g. "ell=3" or "d=2;g=1".
std::string describe_params(const std::string& algo, const ProtocolParams& p);

// unit | random | slow-competes | fast-wakeups | fifo-stress
SchedulerPtr make_scheduler(const std::string& name, std::uint64_t seed);

// simultaneous | all | single | half | subset:<i,j,...>. "single" and
// "half" pick their nodes from `seed`.
WakeStrategy parse_wake(const std::string& text, int n, std::uint64_t seed);

struct ExperimentSpec {
  std::string algo;
  std::vector<int> ns;
  ProtocolParams params;
  int trials = 1;
  std::uint64_t base_seed = 1;
  std::string wake = "simultaneous";
  std::string scheduler = "random";
  std::string mapping = "random";  // random | isolating (synchronous only)
  bool timing = false;             // fill the seconds column
  int threads = 0;                 // 0 selects the hardware concurrency
};

struct ExperimentRecord {
  int trial = 0;
  std::string algo;
  int n = 0;
  std::string params;
  double rounds_or_time = 0.0;
  std::int64_t messages = 0;
  int leader_count = 0;
  std::optional<std::uint64_t> leader_id;
  bool success = false;  // exactly one leader and every node decided
  int attempts = 1;
  double seconds = 0.0;
};

struct Summary {
  std::string algo;
  int n = 0;
  std::string params;
  int trials = 0;
  double mean_messages = 0.0;
  std::int64_t max_messages = 0;
  double mean_time = 0.0;
  double max_time = 0.0;
  int successes = 0;
  double success_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;  // grouped by n, then trial index
  std::vector<Summary> summaries;         // one per n
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson score interval for a binomial proportion.
Interval wilson_interval(int successes, int trials, double z = kZ95);

// One trial with seed base_seed + trial. Optional traces go to `trace_out`
// as JSONL.
ExperimentRecord run_trial(const ExperimentSpec& spec, int n, int trial, std::ostream* trace_out = nullptr);

// Throws ConfigError for an invalid ExperimentSpec (no n values, trials < 1, unknown
// algorithm, parameters invalid for some n).
ExperimentResult run_experiment(const ExperimentSpec& spec);

Summary summarize(std::span<const ExperimentRecord> records);

// Cross product of spec.ns and `cells`, one summary per pair. Throws
// ConfigError on an empty grid.
std::vector<Summary> sweep(const ExperimentSpec& spec, std::span<const ProtocolParams> cells);

inline constexpr const char* kRecordCsvHeader =
    "trial,algo,n,params,rounds_or_time,messages,leader_count,leader_id,success,attempts,seconds";

void write_records_csv(std::ostream& os, std::span<const ExperimentRecord> records);
void write_records_jsonl(std::ostream& os, std::span<const ExperimentRecord> records);
void write_sweep_csv(std::ostream& os, std::span<const Summary> rows);
void write_sweep_jsonl(std::ostream& os, std::span<const Summary> rows);

}  // namespace cliquelab
