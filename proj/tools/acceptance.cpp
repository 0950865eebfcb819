// Acceptance battery: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <cstdio>
#include <set>
#include <thread>

#include "ads/checks.hpp"

int main(int argc, char** argv) {
  using namespace ads;
  CLI::App app{"Acceptance criteria"};
  std::string tier = "ci";
  std::vector<int> only;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
  app.add_option("--tier", tier, "ci, nightly or all")->check(CLI::IsMember({"ci", "nightly", "all"}));
  app.add_option("--criterion", only, "Run only these criteria (repeatable)");
  app.add_option("--workers", workers, "Worker threads");
  app.add_flag("--quiet", quiet, "No progress notes");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  CheckContext ctx;
  ctx.workers = std::max(1u, workers);
  if (!quiet) ctx.log = [](const std::string& s) { std::fprintf(stderr, "  .. %s\n", s.c_str()); };

  bool all_passed = true;
  for (const Criterion& c : acceptance_criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const char* tier_name = c.tier == Tier::ci ? "ci" : "nightly";
    const bool wanted = tier == "all" || tier == tier_name;
    if (!wanted) {
      std::printf("criterion %2d  SKIP  [%s] %s: not in the %s tier\n", c.id, tier_name,
                  c.title.c_str(), tier.c_str());
      std::fflush(stdout);
      continue;
    }
    std::vector<CheckResult> results;
    try {
      results = c.run(ctx);
    } catch (const std::exception& e) {
      results = {{c.title, false, std::string("error: ") + e.what(), 0}};
    }
    bool passed = !results.empty();
    double seconds = 0;
    std::string detail;
    for (const auto& r : results) {
      passed = passed && r.passed;
      seconds += r.seconds;
      if (!detail.empty()) detail += " | ";
      detail += (results.size() > 1 ? r.name + ": " : std::string()) + (r.passed ? "" : "[FAIL] ") + r.detail;
    }
    all_passed = all_passed && passed;
    std::printf("criterion %2d  %s  [%s] %s: %s (%.1f s)\n", c.id, passed ? "PASS" : "FAIL",
                tier_name, c.title.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return all_passed ? 0 : 1;
}
