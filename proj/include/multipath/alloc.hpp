#pragma once

#include "multipath/network.hpp"
#include "multipath/rational.hpp"

#include <functional>
#include <span>
#include <vector>

namespace multipath {

/// A maximal pooled group inside a level: users share one rate and jointly
/// saturate exactly these resources.
struct Cluster {
  UserMask users = 0;
  ResourceMask resources = 0;
};

/// One step of the clustering algorithm. `users` holds the positive-weight
/// users of I_k; for the trailing level of redundant resources it is empty and
/// `rate` is +infinity.
struct Level {
  UserMask users = 0;
  ResourceMask resources = 0;
  ExtRational rate;
  std::vector<Cluster> clusters;  // ordered by smallest resource index
};

struct ClusterDecomposition {
  std::vector<Level> levels;   // strictly increasing rates
  std::vector<Rational> rate;  // per user; 0 for users with zero count
  ResourceMask redundant = 0;  // resources no positive-count user can reach

  /// Smallest and largest finite level rates. Requires at least one level
  /// with users.
  const Rational& min_level_rate() const;
  const Rational& max_level_rate() const;
};

/// x_i^j, indexed [user][resource]; zero where j is not in J(i).
struct SplitMatrix {
  std::vector<std::vector<Rational>> value;
};

/// Budget functional B(J', I'), evaluated on a strongly connected J' of the
/// current reduced network together with its users_inside I' there.
using BudgetFunction = std::function<Rational(ResourceMask resources, UserMask users_inside)>;

/// (sum w) / (sum w / value). Throws InputError on empty or mismatched input
/// or nonpositive entries.
Rational weighted_harmonic_mean(std::span<const Rational> values, std::span<const Rational> weights);

/// C(J') / sum_{i in I'} n_i; +infinity when the denominator vanishes.
ExtRational cluster_rate(const Network& net, const Counts& counts, UserMask users,
                         ResourceMask resources);

/// Exact rate allocation and clustering for fixed counts. Users with count 0
/// get rate 0 and appear in no level.
ClusterDecomposition allocate(const Network& net, const Counts& counts,
                              const EnumerationOptions& opts = {});

/// The same loop with the cluster rate replaced by B(J', I') / sum_{I'} w_i.
/// Throws StabilityError when B <= 0 on a set that has positive weight.
ClusterDecomposition allocate_generalized(const Network& net, const Counts& weights,
                                          const BudgetFunction& budget,
                                          const EnumerationOptions& opts = {});

/// Per-resource split realizing a decomposition: one exact max-flow per level.
/// Throws ConsistencyError when a level cannot be routed.
SplitMatrix split_rates(const Network& net, const Counts& counts, const ClusterDecomposition& dec);

/// min_i x_i via strongly connected cuts.
Rational min_rate(const Network& net, const Counts& counts, const EnumerationOptions& opts = {});
/// max_i x_i via connected sets and the users that touch them.
Rational max_rate(const Network& net, const Counts& counts, const EnumerationOptions& opts = {});
/// Lower bound on x_i over every J' with J(i) inside J'. Requires n_i > 0.
Rational rate_lower_bound(const Network& net, const Counts& counts, std::size_t user,
                          const EnumerationOptions& opts = {});

namespace detail {

void check_counts(const Network& net, const Counts& counts);
/// Components of the bipartite graph (users, resources) in a view.
std::vector<Cluster> components(std::span<const ResourceMask> user_masks, UserMask users,
                                ResourceMask resources);

}  // namespace detail

}  // namespace multipath
