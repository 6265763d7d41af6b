// Command-line front end: run | sweep | verify.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cliquelab/acceptance.hpp"
#include "cliquelab/errors.hpp"
#include "cliquelab/experiment.hpp"

namespace {

using namespace cliquelab;

struct Options {
  std::string algo;
  std::vector<int> ns;
  std::vector<int> ell{3};
  std::vector<int> k{2};
  std::vector<double> epsilon{0.1};
  std::vector<int> d{1};
  std::vector<int> g{1};
  std::vector<double> a{4.0};
  std::vector<double> b{4.0};
  std::vector<double> gamma{4.0};
  int trials = 1;
  std::uint64_t seed = 1;
  std::string wake = "simultaneous";
  std::string scheduler = "random";
  std::string mapping = "random";
  std::string out;
  std::string format = "csv";
  std::string trace;
  bool timing = false;
  int threads = 0;
};

void add_experiment_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--algo", o.algo, "improved_ag | small_id | las_vegas | two_round | async_tradeoff | async_levels")
      ->required();
  cmd->add_option("--n", o.ns, "node counts (comma separated)")->required()->delimiter(',');
  cmd->add_option("--ell", o.ell, "rounds of improved_ag (odd, >= 3)")->delimiter(',');
  cmd->add_option("--k", o.k, "async_tradeoff parameter")->delimiter(',');
  cmd->add_option("--epsilon", o.epsilon, "two_round failure bound")->delimiter(',');
  cmd->add_option("--d", o.d, "small_id ids per block and unit")->delimiter(',');
  cmd->add_option("--g", o.g, "small_id universe factor")->delimiter(',');
  cmd->add_option("--a", o.a, "las_vegas candidate scale")->delimiter(',');
  cmd->add_option("--b", o.b, "las_vegas referee scale")->delimiter(',');
  cmd->add_option("--gamma", o.gamma, "async_tradeoff wake-up fanout constant")->delimiter(',');
  cmd->add_option("--trials", o.trials, "trials per cell");
  cmd->add_option("--seed", o.seed, "base seed; trial i uses seed + i")->envname("CLIQUELAB_SEED");
  cmd->add_option("--wake", o.wake, "simultaneous | all | single | half | subset:<i,j,...>");
  cmd->add_option("--scheduler", o.scheduler, "unit | random | slow-competes | fast-wakeups | fifo-stress");
  cmd->add_option("--mapping", o.mapping, "random | isolating (synchronous algorithms)");
  cmd->add_option("--out", o.out, "output file (default stdout)");
  cmd->add_option("--format", o.format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--trace", o.trace, "write the JSONL event trace of trial 0 for each n to this file");
  cmd->add_flag("--timing", o.timing, "fill the seconds column with wall-clock time");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware concurrency)");
}

ExperimentSpec to_spec(const Options& o) {
  ExperimentSpec s;
  s.algo = o.algo;
  s.ns = o.ns;
  s.trials = o.trials;
  s.base_seed = o.seed;
  s.wake = o.wake;
  s.scheduler = o.scheduler;
  s.mapping = o.mapping;
  s.timing = o.timing;
  s.threads = o.threads;
  return s;
}

// Cross product of every list-valued protocol parameter.
std::vector<ProtocolParams> grid(const Options& o) {
  std::vector<ProtocolParams> cells{ProtocolParams{}};
  auto expand = [&cells](const auto& values, auto field) {
    std::vector<ProtocolParams> next;
    for (const auto& c : cells) {
      for (const auto& x : values) {
        ProtocolParams p = c;
        p.*field = x;
        next.push_back(p);
      }
    }
    cells = std::move(next);
  };
  // Parameters the algorithm ignores stay at one value so they do not
  // duplicate rows.
  const std::string& algo = o.algo;
  if (algo == "improved_ag") expand(o.ell, &ProtocolParams::ell);
  if (algo == "small_id") {
    expand(o.d, &ProtocolParams::d);
    expand(o.g, &ProtocolParams::g);
  }
  if (algo == "las_vegas") {
    expand(o.a, &ProtocolParams::a);
    expand(o.b, &ProtocolParams::b);
  }
  if (algo == "two_round") expand(o.epsilon, &ProtocolParams::epsilon);
  if (algo == "async_tradeoff") {
    expand(o.k, &ProtocolParams::k);
    expand(o.gamma, &ProtocolParams::gamma);
  }
  return cells;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int do_run(const Options& o) {
  const auto cells = grid(o);
  if (cells.size() != 1) throw ConfigError("run takes one value per parameter; use sweep for lists");
  ExperimentSpec spec = to_spec(o);
  spec.params = cells.front();
  const ExperimentResult result = run_experiment(spec);
  Output out(o.out);
  if (o.format == "csv") {
    write_records_csv(out.stream(), result.records);
  } else {
    write_records_jsonl(out.stream(), result.records);
  }
  if (!o.trace.empty()) {
    Output trace(o.trace);
    for (int n : spec.ns) run_trial(spec, n, 0, &trace.stream());
  }
  for (const auto& s : result.summaries) {
    std::cerr << s.algo << " n=" << s.n << ' ' << s.params << ": success " << s.successes << '/' << s.trials
              << " [" << s.ci_low << ", " << s.ci_high << "], mean messages " << s.mean_messages
              << ", mean rounds/time " << s.mean_time << '\n';
  }
  return 0;
}

int do_sweep(const Options& o) {
  const auto cells = grid(o);
  const std::vector<Summary> rows = sweep(to_spec(o), cells);
  Output out(o.out);
  if (o.format == "csv") {
    write_sweep_csv(out.stream(), rows);
  } else {
    write_sweep_jsonl(out.stream(), rows);
  }
  return 0;
}

int do_verify(const std::vector<std::string>& only, double scale) {
  VerifyOptions opts;
  opts.only = only;
  opts.trial_scale = scale;
  opts.progress = &std::cout;
  const auto results = run_acceptance(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed == 0 ? "all " + std::to_string(results.size()) + " criteria passed"
                            : std::to_string(failed) + " of " + std::to_string(results.size()) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader election in clique networks: simulations and experiments"};
  app.require_subcommand(1);

  Options run_opts;
  auto* run = app.add_subcommand("run", "run trials and emit one record per trial");
  add_experiment_flags(run, run_opts);

  Options sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "one summary row per (n, parameter) cell");
  add_experiment_flags(sweep_cmd, sweep_opts);

  std::vector<std::string> only;
  double scale = 1.0;
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_option("--only", only, "criterion names or numbers")->delimiter(',');
  verify->add_option("--scale", scale, "trial count multiplier")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(run_opts);
    if (*sweep_cmd) return do_sweep(sweep_opts);
    if (*verify) return do_verify(only, scale);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
