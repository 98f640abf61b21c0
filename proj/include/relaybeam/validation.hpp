#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace relaybeam::validation {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool pass() const;
  void print(std::ostream& out) const;
};

/// Closed-form conditional moments against conditional Monte Carlo built from an
/// explicitly inverted joint covariance. Worst relative error must stay below 1%.
SuiteReport run_moments_suite(std::uint64_t seed = 1, int configs = 20,
                               int samples = 1'000'000);

/// Secular-equation eigenvalue vs dense Hermitian solver, second-stage
/// self-consistency, and the scalar closed form.
SuiteReport run_eigen_suite(std::uint64_t seed = 2, int instances = 1000);

/// Debug-mode relaxation bound checks on short campaigns and the vanishing
/// off-diagonal mean of B under random phases.
SuiteReport run_jensen_suite(std::uint64_t seed = 3);

}  // namespace relaybeam::validation
