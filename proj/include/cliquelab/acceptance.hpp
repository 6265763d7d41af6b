#pragma once

// The acceptance suite: nine criteria, each run at fixed sizes and trial
// counts with pinned tolerances, reported as one pass/fail line apiece.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cliquelab/async_engine.hpp"
#include "cliquelab/sync_engine.hpp"

namespace cliquelab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values, first failure if any
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct VerifyOptions {
  // Criterion names or numbers to run; empty runs all.
  std::vector<std::string> only;
  // Multiplies every trial count (at least one trial survives). Runtime
  // budgets are not scaled.
  double trial_scale = 1.0;
  std::uint64_t seed = 20240611;
  // Substitutes for the protocols under test, for mutation checks.
  std::function<AsyncProtocolPtr(int k)> async_tradeoff_factory;
  std::function<AsyncProtocolPtr()> async_levels_factory;
  std::function<SyncProtocolPtr()> las_vegas_factory;
  std::ostream* progress = nullptr;
};

struct CriterionInfo {
  int id = 0;
  std::string name;
  double budget_seconds = 0.0;
};

const std::vector<CriterionInfo>& acceptance_criteria();

// Throws ConfigError if `only` names an unknown criterion.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& opts);

// "PASS  3 single_send     ...". One line per result.
std::string format_result(const CriterionResult& r);

}  // namespace cliquelab
