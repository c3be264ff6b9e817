#pragma once

#include "multipath/alloc.hpp"
#include "multipath/network.hpp"

#include <string>
#include <vector>

namespace multipath {

/// alpha-fair utility U(x) = x^(1-alpha) / (1-alpha); alpha = 1 is log.
struct UtilitySpec {
  double alpha = 1.0;
};

struct OracleOptions {
  /// Target duality gap of the barrier path; the rates end up within about
  /// this distance of the optimum.
  double tol = 1e-8;
  /// Cap on Newton steps over the whole solve.
  std::size_t max_iterations = 100000;
};

struct OracleSolution {
  std::vector<double> rate;                // x_i
  std::vector<std::vector<double>> split;  // x_i^j, [user][resource]
  std::vector<double> price;               // resource multipliers mu_j >= 0
  double gap = 0.0;                        // final duality gap bound
  std::size_t iterations = 0;              // Newton steps taken
  /// Rates were snapped to the active set read off the barrier solution and
  /// verified there (feasible flow, no cheaper inactive resource).
  bool crossover = false;
};

/// Floating-point solve of the per-resource utility maximization with a
/// log-barrier interior-point method on the split variables, followed by an
/// active-set crossover when it verifies. Shares no code with allocate(), so
/// it serves as an independent check on it.
/// Throws ConvergenceError (carrying the last gap) when the step cap is hit.
OracleSolution solve_num(const Network& net, const Counts& counts, const UtilitySpec& utility,
                         const OracleOptions& opts = {});

struct KktReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Exact check of the optimality characterization: feasibility, saturation of
/// every resource a positive-count user can use, and no resource serving a
/// user that has a strictly lower rate than another user of that resource.
KktReport kkt_check(const Network& net, const Counts& counts, const std::vector<Rational>& rates,
                    const SplitMatrix& split);

/// Objective sum_i n_i U(x_i) over positive-count users.
double utility_objective(const Counts& counts, const std::vector<double>& rates,
                         const UtilitySpec& utility);

}  // namespace multipath
