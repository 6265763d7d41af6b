// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status 0 iff all pass.

#include <iostream>
#include <string>

#include "cliquelab/acceptance.hpp"

int main(int argc, char** argv) {
  cliquelab::VerifyOptions opts;
  for (int i = 1; i < argc; ++i) opts.only.emplace_back(argv[i]);
  opts.progress = &std::cout;
  const auto results = cliquelab::run_acceptance(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - static_cast<std::size_t>(failed) << '/' << results.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
