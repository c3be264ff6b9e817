#pragma once

#include "multipath/network.hpp"
#include "multipath/dynamics.hpp"
#include "multipath/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace mpt {

using namespace multipath;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  Rational rational(int lo, int hi, int max_den) {
    return Rational(integer(lo, hi)) / Rational(integer(1, max_den));
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline std::vector<std::string> names(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(prefix + std::to_string(k + 1));
  return out;
}

/// Users pick 1..max_route distinct resources; capacities in [1/4, 8].
inline Network random_network(Gen& g, int max_users = 8, int max_resources = 8, int max_route = 3) {
  const int J = g.integer(1, max_resources);
  const int I = g.integer(1, max_users);
  const auto rid = names("r", J);
  const auto uid = names("u", I);
  std::vector<Resource> rs;
  for (int j = 0; j < J; ++j) rs.push_back({rid[j], g.rational(1, 8, 4)});
  std::vector<User> us;
  for (int i = 0; i < I; ++i) {
    std::vector<std::size_t> all(J);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), g.engine());
    all.resize(g.integer(1, std::min(J, max_route)));
    std::sort(all.begin(), all.end());
    us.push_back({uid[i], all});
  }
  return Network(std::move(rs), std::move(us));
}

/// Integer or rational counts in [0, 6], at least one positive.
inline Counts random_counts(Gen& g, const Network& net, double zero_prob = 0.2, bool fractional = false) {
  Counts n(net.num_users());
  for (auto& v : n) v = g.coin(zero_prob) ? Rational(0) : (fractional ? g.rational(1, 24, 4) : Rational(g.integer(1, 6)));
  if (std::all_of(n.begin(), n.end(), [](const Rational& v) { return v == 0; })) n[g.integer(0, (int)n.size() - 1)] = 1;
  return n;
}

inline ResourceMask bit(std::size_t k) { return ResourceMask{1} << k; }

/// Mask from 1-based positions, matching the "1".."N" ids of the fixtures.
inline std::uint64_t set_of(std::initializer_list<int> one_based) {
  std::uint64_t m = 0;
  for (int k : one_based) m |= std::uint64_t{1} << (k - 1);
  return m;
}

inline std::vector<std::uint64_t> subsets(std::uint64_t universe) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = universe; s; s = (s - 1) & universe) out.push_back(s);
  return out;
}

inline std::vector<std::size_t> members(std::uint64_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < 64; ++k)
    if (mask >> k & 1) out.push_back(k);
  return out;
}

// Independent set-theoretic helpers working from the users' index lists.

inline std::uint64_t route_mask(const Network& net, std::size_t i) {
  std::uint64_t m = 0;
  for (auto j : net.users()[i].resources) m |= bit(j);
  return m;
}

inline UserMask bf_inside(const Network& net, ResourceMask J) {
  UserMask out = 0;
  for (std::size_t i = 0; i < net.num_users(); ++i)
    if ((route_mask(net, i) & ~J) == 0) out |= bit(i);
  return out;
}

inline UserMask bf_touching(const Network& net, ResourceMask J) {
  UserMask out = 0;
  for (std::size_t i = 0; i < net.num_users(); ++i)
    if (route_mask(net, i) & J) out |= bit(i);
  return out;
}

/// Union-find over the resources of J, joined through the users of I.
inline bool bf_connected(const Network& net, UserMask I, ResourceMask J) {
  if (!J) return false;
  std::vector<std::size_t> parent(64);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (auto i : members(I)) {
    std::vector<std::size_t> in;
    for (auto j : net.users()[i].resources)
      if (J >> j & 1) in.push_back(j);
    for (std::size_t k = 1; k < in.size(); ++k) parent[find(in[k])] = find(in[0]);
  }
  const auto js = members(J);
  return std::all_of(js.begin(), js.end(), [&](std::size_t j) { return find(j) == find(js[0]); });
}

inline bool bf_strong(const Network& net, ResourceMask J) { return bf_connected(net, bf_inside(net, J), J); }

inline Rational sum_over(const std::vector<Rational>& v, UserMask users) {
  Rational s = 0;
  for (auto i : members(users)) s += v[i];
  return s;
}

inline Rational capacity_of(const Network& net, ResourceMask J) {
  Rational s = 0;
  for (auto j : members(J)) s += net.resources()[j].capacity;
  return s;
}

/// Circle of N capacity-C resources, user i on resources i..i+r-1.
inline Network circle(int N, int r, Rational C = 1) {
  std::vector<Resource> rs;
  std::vector<User> us;
  for (int j = 0; j < N; ++j) rs.push_back({std::to_string(j + 1), C});
  for (int i = 0; i < N; ++i) {
    std::vector<std::size_t> route;
    for (int k = 0; k < r; ++k) route.push_back((i + k) % N);
    std::sort(route.begin(), route.end());
    us.push_back({std::to_string(i + 1), route});
  }
  return Network(std::move(rs), std::move(us));
}

/// Four unit resources on a circle; user i uses i and i+1.
inline Network ring4() { return circle(4, 2); }

/// u1 on {1,2}, u2 on {2,3,4}: {1,2,3} is connected but not strongly connected.
inline Network chain3() {
  std::vector<Resource> rs;
  for (int j = 1; j <= 4; ++j) rs.push_back({std::to_string(j), Rational(1)});
  return Network(std::move(rs), {{"1", {0, 1}}, {"2", {1, 2, 3}}});
}

inline Counts counts(std::initializer_list<int> values) {
  Counts out;
  for (int v : values) out.emplace_back(v);
  return out;
}

/// Random traffic with rho small enough to be stable on `net` most of the time.
inline TrafficSpec random_traffic(Gen& g, const Network& net, bool peak) {
  TrafficSpec t(net.num_users());
  for (auto& u : t) {
    u.lambda = g.rational(1, 12, 16);
    u.mu = g.rational(1, 4, 2);
    u.kappa = g.rational(1, 6, 4);
    u.eta = g.rational(1, 4, 2);
    if (peak) u.peak_rate = g.rational(1, 16, 4);
  }
  return t;
}

}  // namespace mpt
