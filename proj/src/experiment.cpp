#include "cliquelab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"
#include "cliquelab/rng.hpp"

namespace cliquelab {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

bool needs_simultaneous(const std::string& algo) {
  return algo == "improved_ag" || algo == "small_id" || algo == "las_vegas";
}

std::uint64_t universe_for(const std::string& algo, int n, const ProtocolParams& p) {
  const auto un = static_cast<std::uint64_t>(n);
  if (algo == "small_id") return un * static_cast<std::uint64_t>(p.g);
  return std::max<std::uint64_t>(un * un, 1);
}

void validate(const ExperimentSpec& spec) {
  if (spec.ns.empty()) throw ConfigError("experiment: no n values");
  if (spec.trials < 1) throw ConfigError("experiment: trials must be at least 1");
  const auto& names = algorithm_names();
  if (std::ranges::find(names, spec.algo) == names.end()) {
    throw ConfigError("experiment: unknown algorithm '" + spec.algo + "'");
  }
  if (spec.mapping != "random" && spec.mapping != "isolating") {
    throw ConfigError("experiment: unknown mapping '" + spec.mapping + "'");
  }
  const bool async = is_async(spec.algo);
  if (async && spec.mapping != "random") throw ConfigError("experiment: isolating wiring is synchronous only");
  for (int n : spec.ns) {
    if (n < 1) throw ConfigError("experiment: n must be positive");
    const WakeStrategy wake = parse_wake(spec.wake, n, spec.base_seed);
    if (needs_simultaneous(spec.algo) && wake.mode != WakeStrategy::Mode::all_at_round_1) {
      throw ConfigError("experiment: " + spec.algo + " needs simultaneous wake-up");
    }
    // Parameter checks that depend on n happen at node construction.
    const NodeContext probe{Identity{1}, n, 0};
    if (async) {
      make_async_protocol(spec.algo, spec.params)->make_node(probe);
      make_scheduler(spec.scheduler, 0);
    } else {
      make_sync_protocol(spec.algo, spec.params)->make_node(probe);
    }
  }
}

std::optional<std::uint64_t> sole_leader(std::span<const Decision> decisions, const IdAssignment& ids) {
  std::optional<std::uint64_t> out;
  for (std::size_t u = 0; u < decisions.size(); ++u) {
    if (decisions[u] != Decision::leader) continue;
    if (out) return std::nullopt;
    out = ids[static_cast<NodeIndex>(u)].value;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"improved_ag", "small_id",       "las_vegas",
                                              "two_round",   "async_tradeoff", "async_levels"};
  return names;
}

bool is_async(const std::string& algo) { return algo == "async_tradeoff" || algo == "async_levels"; }

SyncProtocolPtr make_sync_protocol(const std::string& algo, const ProtocolParams& p) {
  if (algo == "improved_ag") return improved_afek_gafni(p.ell);
  if (algo == "small_id") return small_id_broadcast(p.d, p.g);
  if (algo == "las_vegas") return las_vegas_three_round(p.a, p.b);
  if (algo == "two_round") return two_round_adversarial(p.epsilon);
  throw ConfigError("unknown synchronous algorithm '" + algo + "'");
}

AsyncProtocolPtr make_async_protocol(const std::string& algo, const ProtocolParams& p) {
  if (algo == "async_tradeoff") return async_tradeoff(p.k, p.gamma);
  if (algo == "async_levels") return async_levels();
  throw ConfigError("unknown asynchronous algorithm '" + algo + "'");
}

std::string describe_params(const std::string& algo, const ProtocolParams& p) {
  if (algo == "improved_ag") return "ell=" + std::to_string(p.ell);
  if (algo == "small_id") return "d=" + std::to_string(p.d) + ";g=" + std::to_string(p.g);
  if (algo == "las_vegas") return "a=" + fmt(p.a) + ";b=" + fmt(p.b);
  if (algo == "two_round") return "epsilon=" + fmt(p.epsilon);
  if (algo == "async_tradeoff") return "k=" + std::to_string(p.k) + ";gamma=" + fmt(p.gamma);
  return "";
}

SchedulerPtr make_scheduler(const std::string& name, std::uint64_t seed) {
  if (name == "unit") return unit_delay();
  if (name == "random") return uniform_random_delay(seed);
  if (name == "slow-competes") return slow_competes();
  if (name == "fast-wakeups") return fast_wakeups_slow_elections();
  if (name == "fifo-stress") return fifo_stress(seed);
  throw ConfigError("unknown scheduler '" + name + "'");
}

WakeStrategy parse_wake(const std::string& text, int n, std::uint64_t seed) {
  if (text == "simultaneous" || text == "all") return WakeStrategy::all();
  if (text == "single") {
    Rng rng(seed);
    return WakeStrategy::single(std::uniform_int_distribution<NodeIndex>(0, n - 1)(rng));
  }
  if (text == "half") return WakeStrategy::subset(random_half(n, seed));
  const std::string prefix = "subset:";
  if (text.starts_with(prefix)) {
    std::vector<NodeIndex> nodes;
    std::istringstream is(text.substr(prefix.size()));
    std::string item;
    while (std::getline(is, item, ',')) {
      std::size_t used = 0;
      int u = -1;
      try {
        u = std::stoi(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size()) throw ConfigError("wake subset: bad node '" + item + "'");
      nodes.push_back(u);
    }
    WakeStrategy w = WakeStrategy::subset(std::move(nodes));
    w.to_sync(n);  // range and emptiness check
    return w;
  }
  throw ConfigError("unknown wake strategy '" + text + "'");
}

Interval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double centre = (p + z2 / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

ExperimentRecord run_trial(const ExperimentSpec& spec, int n, int trial, std::ostream* trace_out) {
  const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(trial);
  const auto started = std::chrono::steady_clock::now();

  ExperimentRecord rec;
  rec.trial = trial;
  rec.algo = spec.algo;
  rec.n = n;
  rec.params = describe_params(spec.algo, spec.params);

  const IdAssignment ids =
      IdAssignment::random(n, universe_for(spec.algo, n, spec.params), derive_seed(seed, Stream::ids, 0));
  const WakeStrategy wake = parse_wake(spec.wake, n, derive_seed(seed, Stream::wake, 0));
  const bool trace = trace_out != nullptr;

  if (is_async(spec.algo)) {
    AsyncConfig cfg{ids,
                    random_port_mapping(n, derive_seed(seed, Stream::mapping, 0)),
                    wake.to_async(n),
                    make_scheduler(spec.scheduler, derive_seed(seed, Stream::scheduler, 0)),
                    seed,
                    TimeAccounting::from_first_wake,
                    0,
                    trace};
    const AsyncOutcome out = run_async(*make_async_protocol(spec.algo, spec.params), cfg);
    rec.rounds_or_time = out.elapsed_time;
    rec.messages = out.messages_total;
    rec.leader_count = out.leader_count;
    rec.leader_id = sole_leader(out.decisions, ids);
    rec.success = out.leader_count == 1 && decided_all(out) && !out.scheduler_fault;
    if (trace) write_trace_jsonl(*trace_out, out.trace);
  } else {
    SyncConfig cfg{ids, random_port_mapping(n, derive_seed(seed, Stream::mapping, 0)), wake.to_sync(n), seed, 0,
                   trace};
    if (spec.mapping == "isolating") cfg.wiring = std::make_shared<IsolatingPortAdversary>(n);
    const SyncOutcome out = run_sync(*make_sync_protocol(spec.algo, spec.params), cfg);
    rec.rounds_or_time = out.rounds_used;
    rec.messages = out.messages_total;
    rec.leader_count = leader_count(out);
    rec.leader_id = sole_leader(out.decisions, ids);
    rec.success = rec.leader_count == 1 && decided_all(out);
    if (spec.algo == "las_vegas") rec.attempts = (out.rounds_used + 2) / 3;
    if (trace) write_trace_jsonl(*trace_out, out.trace);
  }
  if (spec.timing) {
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

Summary summarize(std::span<const ExperimentRecord> records) {
  Summary s;
  if (records.empty()) return s;
  s.algo = records.front().algo;
  s.n = records.front().n;
  s.params = records.front().params;
  s.trials = static_cast<int>(records.size());
  double messages = 0.0;
  double time = 0.0;
  for (const auto& r : records) {
    messages += static_cast<double>(r.messages);
    time += r.rounds_or_time;
    s.max_messages = std::max(s.max_messages, r.messages);
    s.max_time = std::max(s.max_time, r.rounds_or_time);
    if (r.success) ++s.successes;
  }
  s.mean_messages = messages / s.trials;
  s.mean_time = time / s.trials;
  s.success_rate = static_cast<double>(s.successes) / s.trials;
  const Interval ci = wilson_interval(s.successes, s.trials);
  s.ci_low = ci.low;
  s.ci_high = ci.high;
  return s;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const auto per_n = static_cast<std::size_t>(spec.trials);
  const std::size_t total = per_n * spec.ns.size();
  ExperimentResult result;
  result.records.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      try {
        const int n = spec.ns[job / per_n];
        result.records[job] = run_trial(spec, n, static_cast<int>(job % per_n));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto threads = static_cast<std::size_t>(spec.threads > 0 ? static_cast<unsigned>(spec.threads) : hw);
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < std::min(threads, total); ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < spec.ns.size(); ++i) {
    result.summaries.push_back(summarize(std::span(result.records).subspan(i * per_n, per_n)));
  }
  return result;
}

std::vector<Summary> sweep(const ExperimentSpec& spec, std::span<const ProtocolParams> cells) {
  if (cells.empty() || spec.ns.empty()) throw ConfigError("sweep: empty grid");
  std::vector<Summary> rows;
  for (int n : spec.ns) {
    for (const auto& cell : cells) {
      ExperimentSpec one = spec;
      one.ns = {n};
      one.params = cell;
      rows.push_back(run_experiment(one).summaries.front());
    }
  }
  return rows;
}

void write_records_csv(std::ostream& os, std::span<const ExperimentRecord> records) {
  os << kRecordCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.trial << ',' << r.algo << ',' << r.n << ',' << r.params << ',' << fmt(r.rounds_or_time) << ','
       << r.messages << ',' << r.leader_count << ',';
    if (r.leader_id) os << *r.leader_id;
    os << ',' << (r.success ? 1 : 0) << ',' << r.attempts << ',' << fmt(r.seconds) << '\n';
  }
}

void write_records_jsonl(std::ostream& os, std::span<const ExperimentRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j{{"trial", r.trial},
                     {"algo", r.algo},
                     {"n", r.n},
                     {"params", r.params},
                     {"rounds_or_time", r.rounds_or_time},
                     {"messages", r.messages},
                     {"leader_count", r.leader_count},
                     {"leader_id", nullptr},
                     {"success", r.success},
                     {"attempts", r.attempts},
                     {"seconds", r.seconds}};
    if (r.leader_id) j["leader_id"] = *r.leader_id;
    os << j.dump() << '\n';
  }
}

void write_sweep_csv(std::ostream& os, std::span<const Summary> rows) {
  os << "algo,n,param,mean_messages,max_messages,mean_time,success_rate,ci_low,ci_high\n";
  for (const auto& s : rows) {
    os << s.algo << ',' << s.n << ',' << s.params << ',' << fmt(s.mean_messages) << ',' << s.max_messages << ','
       << fmt(s.mean_time) << ',' << fmt(s.success_rate) << ',' << fmt(s.ci_low) << ',' << fmt(s.ci_high) << '\n';
  }
}

void write_sweep_jsonl(std::ostream& os, std::span<const Summary> rows) {
  for (const auto& s : rows) {
    nlohmann::json j{{"algo", s.algo},
                     {"n", s.n},
                     {"param", s.params},
                     {"trials", s.trials},
                     {"mean_messages", s.mean_messages},
                     {"max_messages", s.max_messages},
                     {"mean_time", s.mean_time},
                     {"max_time", s.max_time},
                     {"success_rate", s.success_rate},
                     {"ci_low", s.ci_low},
                     {"ci_high", s.ci_high}};
    os << j.dump() << '\n';
  }
}

}  // namespace cliquelab
