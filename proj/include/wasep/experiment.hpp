#pragma once

// Monte Carlo comparison of the rescaled particle height with the continuum
// Cole-Hopf reference, and the averaged bracket statistic.

#include <cstdint>
#include <functional>
#include <vector>

#include "wasep/kpz.hpp"

namespace wasep::study {

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; results must be written to slot i by the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

// Worker count from WASEP_THREADS (default: hardware concurrency, at least 1).
int thread_count();

struct ConvergeConfig {
  std::vector<int> sizes;  // lattice sizes N, eps = 2/(2N+1)
  std::vector<int> paths;  // per size; a single entry applies to all
  double t = 0.5;
  // 0 starts from the canonical ensemble with spin sum +1; otherwise Bernoulli
  double rho = 0.0;
  std::uint64_t seed = 1;
  int ref_paths = 0;  // 0: the largest entry of paths
  int ref_M = 256;
  int threads = 1;

  int paths_for(std::size_t i) const;
  void validate() const;
};

// Weight of the bracket statistic, 1 + cos(pi x); eps sum over a period is exactly 2.
double bracket_weight(double x);

struct EpsRow {
  int N = 0;
  double eps = 0;
  int paths = 0;
  double realised_rho = 0;  // mean over paths
  kpz::OnePoint height;     // h~(t, 0) - h~(0, 0)
  double diff = 0, combined_se = 0;
  bool within_3se = false;
  double bracket = 0, bracket_se = 0;  // t^{-1} int eps sum C~ phi
  double bracket_target = 0;           // stationary mean of the bracket density times eps sum phi
  double bracket_nu = 0;               // nu_eps eps sum phi, lower by the factor 1 - eps/2
  double bracket_limit = 0;            // (1 - rho^2) eps sum phi
  bool bracket_within_3se = false;
  // per path, in path order
  std::vector<double> heights, brackets, bracket_targets;
};

struct ConvergeSummary {
  ConvergeConfig config;
  double nu_ref = 1;
  kpz::OnePoint reference;
  std::vector<EpsRow> rows;
  // least-squares fits over the eps grid (NaN with fewer than two rows)
  double discrepancy_slope = 0;  // log |diff| against log eps
  double bracket_intercept = 0;  // bracket / (eps sum phi) = a + b sqrt(eps): a
  double bracket_slope = 0;      //   ... and b
  bool discrepancy_decreasing = false;
};

ConvergeSummary run_converge(const ConvergeConfig& cfg);

}  // namespace wasep::study
