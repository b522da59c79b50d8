// Runs every acceptance criterion at full size and prints one line each.

#include <cstdio>
#include <cstring>

#include "gexp/harness.hpp"

int main(int argc, char** argv) {
  gexp::HarnessOptions options;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) options.quick = true;
  }
  int failed = 0;
  (void)gexp::run_acceptance(options, [&](const gexp::CriterionResult& r) {
    std::printf("%s\n", gexp::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  });
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
