#pragma once

#include "multipath/network.hpp"
#include "multipath/rational.hpp"

#include <vector>

namespace multipath {

/// Total load per user, Lambda_i = n_i x_i, indexed like Network::users().
using LoadVector = std::vector<Rational>;

struct CutReport {
  bool feasible = true;
  std::vector<ResourceMask> violated;  // canonical order
};

/// Checks sum_{I(J')} Lambda_i <= C(J') over every strongly connected J'.
CutReport gcc_feasible(const Network& net, const LoadVector& loads,
                       const EnumerationOptions& opts = {});

/// Independent check: does source -> users -> resources -> sink carry the
/// whole load? Exact rational max-flow.
bool maxflow_feasible(const Network& net, const LoadVector& loads);

/// Load that violates the cut constraint of `target` by exactly epsilon and
/// satisfies every other strongly connected constraint strictly.
struct ViolatingLoad {
  LoadVector loads;
  Rational epsilon;
};

/// Throws InputError if `target` is not strongly connected or has no users
/// inside (a vacuous constraint cannot be violated).
ViolatingLoad violating_allocation(const Network& net, ResourceMask target);

}  // namespace multipath
