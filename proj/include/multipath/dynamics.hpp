#pragma once

#include "multipath/network.hpp"
#include "multipath/rational.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace multipath {

/// Traffic parameters of one user (flow type).
struct UserTraffic {
  Rational lambda{0};  // elastic arrival rate
  Rational mu{1};      // elastic service rate (1 / mean size)
  Rational kappa{0};   // streaming arrival rate
  Rational eta{1};     // streaming departure rate
  std::optional<Rational> peak_rate;

  Rational rho() const { return lambda / mu; }
  /// kappa / eta, the mean number of streaming flows.
  Rational streaming_load() const { return kappa / eta; }
};

/// Indexed like Network::users().
using TrafficSpec = std::vector<UserTraffic>;

enum class Model { streaming, integrated, peak_rate };

const char* to_string(Model model);
/// "streaming", "integrated" or "peak_rate"; throws InputError otherwise.
Model parse_model(std::string_view name);

/// Throws InputError unless the traffic matches the network and the rates the
/// model uses are positive (peak rates are required for peak_rate).
void validate_traffic(const Network& net, const TrafficSpec& traffic, Model model);

std::vector<Rational> elastic_loads(const TrafficSpec& traffic);

struct StabilityReport {
  bool stable = true;
  std::vector<ResourceMask> violated;  // canonical order
};

/// sum_{I(J')} rho_i < C(J') for every strongly connected J'.
StabilityReport stability_check(const Network& net, const std::vector<Rational>& rho,
                                const EnumerationOptions& opts = {});

struct SimConfig {
  Model model = Model::integrated;
  std::int64_t scale = 1;  // L: arrival rates and capacities are multiplied by it
  double horizon = 0.0;    // simulated time, warmup included
  double warmup = 0.0;
  std::uint64_t seed = 0;
  std::size_t replications = 1;
  std::size_t batches = 20;  // batch means per replication
  double confidence = 0.95;
  /// Streaming arrivals of type i are rejected when the minimal rate after
  /// admitting them would fall below this value.
  std::optional<Rational> admission_threshold;
  /// Starting state; empty means all zero.
  Population initial;
  /// Record the state every `sample_interval` time units (0 = off). Only the
  /// first replication is recorded.
  double sample_interval = 0.0;
  std::size_t memo_limit = 1u << 18;
  EnumerationOptions enumeration;
};

struct Sample {
  double time;
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> m;
};

struct SimResult {
  // Time averages over [warmup, horizon], pooled over replications, and
  // CI half-widths at the requested confidence.
  std::vector<double> mean_n, mean_m;
  std::vector<double> ci_n, ci_m;
  /// Time average of n_i * (rate actually received), i.e. elastic throughput
  /// divided by mu_i.
  std::vector<double> mean_load;
  std::vector<std::uint64_t> arrivals;  // streaming arrivals offered
  std::vector<std::uint64_t> blocked;   // of which rejected
  std::vector<double> ci_blocking;      // from per-batch blocking fractions
  std::uint64_t transitions = 0;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::vector<Sample> trajectory;

  double blocking(std::size_t user) const;
};

/// Exact event-driven simulation of the chosen CTMC. Requires stability of
/// the elastic loads for the elastic models. Replications use seeds
/// seed, seed+1, ... and run concurrently; results do not depend on scheduling.
SimResult simulate(const Network& net, const TrafficSpec& traffic, const SimConfig& config);

/// t quantile for two-sided CIs, e.g. student_t_quantile(0.975, dof).
double student_t_quantile(double p, double dof);
/// Half-width of the `confidence` CI of a sample mean.
double ci_half_width(const std::vector<double>& samples, double confidence = 0.95);

struct BlockingResult {
  std::vector<Rational> probability;  // per user
  std::size_t states = 0;             // |A|
  std::vector<std::int64_t> bounds;   // per-user bound on m_i inside A
};

/// Stationary blocking for streaming traffic with admission threshold y:
/// product-form Poisson weights truncated to A = {m : min rate >= y}.
/// `truncation`, if given, caps every m_i and must be at least
/// floor(C(J(i)) / y).
BlockingResult streaming_blocking(const Network& net, const TrafficSpec& traffic, const Rational& y,
                                  std::optional<std::int64_t> truncation = std::nullopt,
                                  const EnumerationOptions& opts = {});

}  // namespace multipath
