#pragma once

#include <cstdint>
#include <string>

namespace llpdew::oracle {

/// Outcome of comparing the library's confidence weights against the
/// brute-force reference on `cases` random bags.
struct DewSuiteReport {
  int cases = 0;
  double max_abs_error = 0.0;
  double tolerance = 1e-10;
  bool pass = true;
  std::string worst_case;  // serialized reproduction of the worst case
};

DewSuiteReport run_dew_oracle_suite(std::uint64_t seed, int cases,
                                    double tolerance = 1e-10);

/// Outcome of checking analytic end-to-end gradients of the composite
/// objective against central finite differences on `cases` random small
/// models.  rel error uses max(|analytic|, |numeric|, guard) as denominator.
struct FdSuiteReport {
  int cases = 0;
  double max_rel_error = 0.0;
  double tolerance = 1e-4;
  bool pass = true;
  std::string worst_case;
};

FdSuiteReport run_fd_suite(std::uint64_t seed, int cases, double step = 1e-5,
                           double tolerance = 1e-4);

}  // namespace llpdew::oracle
