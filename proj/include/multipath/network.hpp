#pragma once

#include "multipath/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace multipath {

/// Bit j set <=> resource with index j is in the set.
using ResourceMask = std::uint64_t;
/// Bit i set <=> user with index i is in the set.
using UserMask = std::uint64_t;

/// Per-user flow counts indexed like Network::users(). Rational so that the
/// allocation extends verbatim to real-valued (fluid) states.
using Counts = std::vector<Rational>;

inline constexpr std::size_t kMaskBits = 64;
inline constexpr std::size_t kDefaultEnumerationCap = 20;

struct Resource {
  std::string id;
  Rational capacity;
};

struct User {
  std::string id;
  std::vector<std::size_t> resources;  // sorted, unique indices into resources()
};

/// Bipartite users/resources structure for routes of length one: user i may
/// draw rate from any resource in its set J(i).
class Network {
 public:
  Network() = default;
  /// Validates ids, capacities and resource sets; throws InputError.
  Network(std::vector<Resource> resources, std::vector<User> users);

  /// Convenience constructor using resource ids in the user sets.
  static Network from_ids(std::vector<Resource> resources,
                          const std::vector<std::pair<std::string, std::vector<std::string>>>& users);

  std::size_t num_resources() const noexcept { return resources_.size(); }
  std::size_t num_users() const noexcept { return users_.size(); }
  const std::vector<Resource>& resources() const noexcept { return resources_; }
  const std::vector<User>& users() const noexcept { return users_; }

  std::optional<std::size_t> resource_index(std::string_view id) const;
  std::optional<std::size_t> user_index(std::string_view id) const;

  /// True when both sides fit in 64-bit masks.
  bool maskable() const noexcept {
    return resources_.size() <= kMaskBits && users_.size() <= kMaskBits;
  }
  /// J(i) as a mask. Requires maskable().
  ResourceMask user_mask(std::size_t user) const;
  /// All J(i) as masks. Requires maskable().
  const std::vector<ResourceMask>& user_masks() const;
  ResourceMask all_resources() const;
  UserMask all_users() const;

  /// C(J') = sum of capacities.
  Rational capacity(ResourceMask resources) const;

  /// Resource ids -> mask; throws InputError on an unknown id.
  ResourceMask resource_mask(std::span<const std::string> ids) const;
  std::vector<std::string> resource_ids(ResourceMask resources) const;
  std::vector<std::string> user_ids(UserMask users) const;

 private:
  std::vector<Resource> resources_;
  std::vector<User> users_;
  std::vector<ResourceMask> masks_;
};

/// Integer elastic (n) and streaming (m) flow counts.
struct Population {
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> m;

  Counts elastic() const;
  Counts streaming() const;
  /// n + m, the counts the integrated model allocates on.
  Counts total() const;
};

struct EnumerationOptions {
  /// Largest |J| for which subsets are enumerated; at most 63.
  std::size_t max_resources = kDefaultEnumerationCap;
};

/// I(J') = { i : J(i) subset of J' }.
UserMask users_inside(const Network& net, ResourceMask resources);
/// { i : J(i) intersects J' }.
UserMask users_touching(const Network& net, ResourceMask resources);

/// (I', J') is connected: all of J' lies in one component of the bipartite
/// graph restricted to I' and J'. Empty J' is not connected.
bool is_connected(const Network& net, UserMask users, ResourceMask resources);
/// (I(J'), J') is connected.
bool is_strongly_connected(const Network& net, ResourceMask resources);

/// Every nonempty strongly connected J', in canonical order.
std::vector<ResourceMask> enumerate_strongly_connected(const Network& net,
                                                       const EnumerationOptions& opts = {});
/// Every nonempty J' with (I, J') connected, in canonical order.
std::vector<ResourceMask> enumerate_connected(const Network& net,
                                              const EnumerationOptions& opts = {});

/// Splits J' into its maximal strongly connected parts, i.e. the components of
/// (I(J'), J'). The parts' users_inside are pairwise disjoint.
std::vector<ResourceMask> strongly_connected_components(const Network& net, ResourceMask resources);

/// Canonical ordering: by cardinality, then lexicographically by index list.
bool canonical_less(ResourceMask a, ResourceMask b);
std::vector<std::size_t> mask_indices(std::uint64_t mask);
inline int popcount(std::uint64_t mask) { return __builtin_popcountll(mask); }

namespace detail {

/// Connectivity on an explicit view of the structure: `user_masks[i]` is the
/// (possibly amended) resource set of user i.
bool connected(std::span<const ResourceMask> user_masks, UserMask users, ResourceMask resources);

UserMask inside(std::span<const ResourceMask> user_masks, UserMask active, ResourceMask resources);

/// Strongly connected subsets of `universe` in the view, canonical order.
/// Throws SizeError when |universe| exceeds the cap.
std::vector<ResourceMask> strongly_connected_subsets(std::span<const ResourceMask> user_masks,
                                                     UserMask active, ResourceMask universe,
                                                     const EnumerationOptions& opts);

void check_cap(std::size_t resources, const EnumerationOptions& opts);

}  // namespace detail

}  // namespace multipath
