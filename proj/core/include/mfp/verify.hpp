#pragma once

#include <string>
#include <vector>

#include "mfp/common.hpp"

namespace mfp {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Named no-training verification suites:
///   gradients          reverse-mode vs central finite differences, all loss pipelines
///   residual-decay     oracle-sample stationary loss scales like 1/M
///   spurious-minimizer two-point law separation at large vs small sigma_w
///   particle           Euler-Maruyama moments vs the closed-form benchmark
///   time-sampling      tensor-product vs pooled time sampling bias
///   ew-estimators      interaction estimator: unbiasedness, closure agreement,
///                      mollification bias slope
///   all                everything above
std::vector<CheckResult> verify_suite(const std::string& suite);

std::vector<std::string> verify_suite_names();
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace mfp
