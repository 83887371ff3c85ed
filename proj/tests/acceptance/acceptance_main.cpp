// Acceptance suite: one PASS/FAIL line per criterion, sub-checks indented.
// Usage: decaylab_acceptance [--verbose] [--strict] [criterion-id ...]
#include <fmt/format.h>

#include <cstring>
#include <string>
#include <vector>

#include "decaylab/experiments.hpp"

int main(int argc, char** argv) {
  using namespace decaylab;
  SuiteOptions opt;
  bool verbose = false;
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--verbose") == 0) verbose = true;
    else if (std::strcmp(argv[i], "--strict") == 0) opt.profile = ToleranceProfile::strict;
    else only.emplace_back(argv[i]);
  }
  int failed = 0, ran = 0;
  for (const auto& c : acceptance_criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto r = run_criterion(c, opt);
    ++ran;
    fmt::print("[{}] {:<26} {:7.2f} s  {}\n", r.passed ? "PASS" : "FAIL", r.id, r.seconds, r.title);
    if (verbose || !r.passed)
      for (const auto& line : r.checks) fmt::print("         {}\n", line);
    std::fflush(stdout);
    failed += !r.passed;
  }
  fmt::print("{} of {} criteria passed\n", ran - failed, ran);
  return failed == 0 && ran > 0 ? 0 : 1;
}
