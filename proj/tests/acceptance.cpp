// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <exception>

#include "support/criteria.hpp"

int main() {
  int failed = 0;
  for (const auto& c : hvx::criteria::all()) {
    auto t0 = std::chrono::steady_clock::now();
    hvx::criteria::Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-28s %6.2fs  %s\n", o.ok ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.ok ? 0 : 1;
  }
  return failed ? 1 : 0;
}
