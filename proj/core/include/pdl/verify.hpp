#pragma once

#include <string>
#include <vector>

namespace pdl::verify {

struct PropertyResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  std::string comparison;  // "<=", ">=", "in [a,b]", "== fail"
  double bound = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::size_t seeds = 20;
  // Scales every analytic gradient by 1.01 before comparison. All gradient
  // properties must then fail; used to show the suite can fail.
  bool corrupt_gradients = false;
};

std::vector<std::string> suite_names();  // gradients, mldg-taylor, clustering

// suite is one of suite_names() or "all". Throws ValidationError otherwise.
std::vector<PropertyResult> run_suite(const std::string& suite, const VerifyOptions& options = {});

std::vector<PropertyResult> gradient_suite(const VerifyOptions& options);
std::vector<PropertyResult> mldg_taylor_suite(const VerifyOptions& options);
std::vector<PropertyResult> clustering_suite(const VerifyOptions& options);

bool all_passed(const std::vector<PropertyResult>& results);
// One line per property: PASS/FAIL, suite, name, measured residual and bound.
std::string format_report(const std::vector<PropertyResult>& results);

}  // namespace pdl::verify
