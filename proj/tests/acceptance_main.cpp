// Standalone acceptance runner: one line per criterion, nonzero exit if any
// criterion fails its tolerance or runtime bound.
#include <cstdio>
#include <cstring>

#include "trapcheck/acceptance.hpp"

int main(int argc, char** argv) {
  trapcheck::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) opt.quick = true;
  }

  const auto results = trapcheck::run_acceptance(opt);
  bool all_ok = true;
  for (const auto& r : results) {
    const bool ok = r.passed && r.runtime_ok;
    all_ok = all_ok && ok;
    std::printf("%s  #%02d %-28s  %s  (%.2fs %s %.0fs)\n", ok ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str(), r.runtime_seconds,
                r.runtime_ok ? "<" : ">=", r.runtime_bound);
  }
  std::printf("%s: %zu criteria\n", all_ok ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              results.size());
  return all_ok ? 0 : 1;
}
