#pragma once

#include "multipath/dynamics.hpp"
#include "multipath/network.hpp"
#include "multipath/rational.hpp"

#include <span>
#include <vector>

namespace multipath {

/// Fluid state: elastic counts n and streaming counts m (m ignored by the
/// peak-rate model).
struct FluidState {
  Counts n;
  Counts m;
};

/// Time derivative of the fluid state under `model` (integrated or peak_rate).
/// Integrated: n' = lambda - mu n x(n + m), m' = kappa - eta m.
/// Peak rate:  n' = lambda - mu n min(x(n), r), m' = 0.
FluidState drift(const Network& net, const TrafficSpec& traffic, const FluidState& state, Model model,
                 const EnumerationOptions& opts = {});

/// Floating-point convenience: every double is converted exactly and the
/// exact drift is rounded back. The vectors are n followed by m.
std::vector<double> drift(const Network& net, const TrafficSpec& traffic, const std::vector<double>& state,
                          Model model, const EnumerationOptions& opts = {});

struct EquilibriumLevel {
  UserMask users = 0;
  ResourceMask resources = 0;
  Rational rate;
  /// Peak-rate model: users of this level at or below the cutoff in peak-rate
  /// order, i.e. the peak-rate constrained ones. Empty for the integrated model.
  UserMask constrained = 0;
};

struct EquilibriumPoint {
  Counts n_hat;
  Counts m_hat;
  std::vector<Rational> x_hat;
  std::vector<EquilibriumLevel> levels;  // increasing rates
  UserMask peak_constrained = 0;         // I*
  ResourceMask redundant = 0;            // resources reached by no loaded user
};

/// Integrated streaming/elastic equilibrium. Requires stability and
/// kappa_i > 0 for every user with rho_i > 0.
EquilibriumPoint integrated_equilibrium(const Network& net, const TrafficSpec& traffic,
                                        const EnumerationOptions& opts = {});

/// Users of `users` sorted by (peak rate, id).
std::vector<std::size_t> peak_order(const Network& net, const TrafficSpec& traffic, UserMask users);

/// (C - sum_{s > t} rho) / (sum_{s <= t} rho / r) over the users of `order`,
/// where t is a 0-based position.
Rational peak_cluster_rate(const Rational& capacity, std::span<const Rational> rho,
                           std::span<const Rational> peak, std::size_t t);

/// Position t (0-based) in the peak-rate order with
/// r_t < peak_cluster_rate(t) <= r_{t+1}, where r past the end is +infinity.
/// Requires sum rho < capacity; throws StabilityError otherwise.
std::size_t find_istar(const Rational& capacity, std::span<const Rational> rho, std::span<const Rational> peak);

struct NeqReport {
  bool ok = true;
  struct Witness {
    UserMask users;
    ResourceMask resources;
  };
  std::vector<Witness> witnesses;
};

/// sum_{I'} rho != C(J') for every connected J' and I(J') strict subset of
/// I' within the users touching J'.
NeqReport neq_condition(const Network& net, const std::vector<Rational>& rho,
                        const EnumerationOptions& opts = {});

/// Peak-rate equilibrium. Throws StabilityError or NonUniquenessError (naming
/// a witness) when the preconditions fail.
EquilibriumPoint peak_rate_equilibrium(const Network& net, const TrafficSpec& traffic,
                                       const EnumerationOptions& opts = {});

struct PoolingReport {
  bool pooled = true;
  std::vector<ResourceMask> violated;  // strict inequality fails
  std::vector<ResourceMask> boundary;  // holds with equality
};

/// Necessary and sufficient test for complete resource pooling of the
/// integrated equilibrium, over proper strongly connected J' with users inside.
PoolingReport crp_check_integrated(const Network& net, const TrafficSpec& traffic,
                                   const EnumerationOptions& opts = {});

/// Sufficient test: sum of rho over users touching J' exceeds C(J') for every
/// proper J' whose complement is strongly connected.
PoolingReport crp_sufficient_integrated(const Network& net, const TrafficSpec& traffic,
                                        const EnumerationOptions& opts = {});

/// Sufficient test for the peak-rate model: sum of rho over users touching J'
/// exceeds C(J') for every proper connected J'.
PoolingReport crp_check_peak(const Network& net, const TrafficSpec& traffic,
                             const EnumerationOptions& opts = {});

}  // namespace multipath
