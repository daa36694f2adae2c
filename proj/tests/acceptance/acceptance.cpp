// One line per acceptance criterion; nonzero exit if any fails.
#include <algorithm>
#include <filesystem>
#include <iostream>

#include "wic/selftest/selftest.hpp"
#include "wic/util/log.hpp"

int main() {
  using namespace wic::selftest;
  wic::log::set_threshold(wic::log::Level::error);
  auto results = run_core();
  const auto scratch = std::filesystem::path(WIC_SCRATCH_DIR);
  std::filesystem::remove_all(scratch);
  results.push_back(pipeline_determinism(cli_pipeline(WIC_CLI_PATH, WIC_FIXTURE_DIR, "fixture.toml"), scratch.string()));
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  bool ok = true;
  for (const auto& r : results) {
    std::cout << format_line(r) << "\n";
    ok = ok && r.passed;
  }
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << std::endl;
  return ok ? 0 : 1;
}
