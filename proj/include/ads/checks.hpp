#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ads {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct CheckContext {
  unsigned workers = 1;
  std::function<void(const std::string&)> log;  // progress notes, may be empty
};

// Analytic and oracle checks.
CheckResult check_free_gaussian(const CheckContext& ctx);
CheckResult check_norm_drift(const CheckContext& ctx);
CheckResult check_pure_decay(const CheckContext& ctx);
CheckResult check_motionless_stirap(const CheckContext& ctx);
CheckResult check_strang_order(const CheckContext& ctx);
CheckResult check_dense_self_consistency(const CheckContext& ctx);
CheckResult check_mcwf_vs_dense(const CheckContext& ctx);

enum class Tier { ci, nightly };

struct Criterion {
  int id = 0;
  std::string title;
  Tier tier = Tier::ci;
  std::function<std::vector<CheckResult>(const CheckContext&)> run;
};

// Acceptance criteria 1 to 10. Criterion 3 has a ci part and a nightly part,
// listed as two entries with the same id.
const std::vector<Criterion>& acceptance_criteria();

struct NamedCheck {
  std::string name;
  std::function<CheckResult(const CheckContext&)> run;
};

// fast: analytic oracles only. full: adds the trajectory-versus-dense
// comparison and the scenario checks at desk scale.
std::vector<NamedCheck> verify_suite(bool full);

}  // namespace ads
