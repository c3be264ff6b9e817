#include "multipath/network.hpp"

#include "multipath/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace multipath {

Network::Network(std::vector<Resource> resources, std::vector<User> users)
    : resources_(std::move(resources)), users_(std::move(users)) {
  std::unordered_set<std::string> seen;
  for (const auto& r : resources_) {
    if (r.id.empty()) throw InputError("resource id must be nonempty");
    if (!seen.insert(r.id).second) throw InputError("duplicate resource id '" + r.id + "'");
    if (r.capacity <= 0) throw InputError("capacity of resource '" + r.id + "' must be positive");
  }
  seen.clear();
  for (auto& u : users_) {
    if (u.id.empty()) throw InputError("user id must be nonempty");
    if (!seen.insert(u.id).second) throw InputError("duplicate user id '" + u.id + "'");
    if (u.resources.empty()) throw InputError("user '" + u.id + "' has an empty resource set");
    std::sort(u.resources.begin(), u.resources.end());
    u.resources.erase(std::unique(u.resources.begin(), u.resources.end()), u.resources.end());
    if (u.resources.back() >= resources_.size())
      throw InputError("user '" + u.id + "' references an unknown resource index");
  }
  if (maskable()) {
    masks_.reserve(users_.size());
    for (const auto& u : users_) {
      ResourceMask m = 0;
      for (auto j : u.resources) m |= ResourceMask{1} << j;
      masks_.push_back(m);
    }
  }
}

Network Network::from_ids(std::vector<Resource> resources,
                          const std::vector<std::pair<std::string, std::vector<std::string>>>& users) {
  std::vector<User> built;
  built.reserve(users.size());
  for (const auto& [id, names] : users) {
    User u{id, {}};
    for (const auto& name : names) {
      auto it = std::find_if(resources.begin(), resources.end(),
                             [&](const Resource& r) { return r.id == name; });
      if (it == resources.end())
        throw InputError("user '" + id + "' references unknown resource '" + name + "'");
      u.resources.push_back(static_cast<std::size_t>(it - resources.begin()));
    }
    built.push_back(std::move(u));
  }
  return Network(std::move(resources), std::move(built));
}

std::optional<std::size_t> Network::resource_index(std::string_view id) const {
  for (std::size_t j = 0; j < resources_.size(); ++j) {
    if (resources_[j].id == id) return j;
  }
  return std::nullopt;
}

std::optional<std::size_t> Network::user_index(std::string_view id) const {
  for (std::size_t i = 0; i < users_.size(); ++i) {
    if (users_[i].id == id) return i;
  }
  return std::nullopt;
}

ResourceMask Network::user_mask(std::size_t user) const {
  return user_masks().at(user);
}

const std::vector<ResourceMask>& Network::user_masks() const {
  if (!maskable())
    throw SizeError("network has more than 64 resources or users; subset operations unavailable",
                    kMaskBits);
  return masks_;
}

ResourceMask Network::all_resources() const {
  if (!maskable()) user_masks();  // throws
  return resources_.size() == kMaskBits ? ~ResourceMask{0}
                                        : (ResourceMask{1} << resources_.size()) - 1;
}

UserMask Network::all_users() const {
  if (!maskable()) user_masks();
  return users_.size() == kMaskBits ? ~UserMask{0} : (UserMask{1} << users_.size()) - 1;
}

Rational Network::capacity(ResourceMask resources) const {
  Rational total = 0;
  for (auto j : mask_indices(resources)) total += resources_.at(j).capacity;
  return total;
}

ResourceMask Network::resource_mask(std::span<const std::string> ids) const {
  ResourceMask mask = 0;
  for (const auto& id : ids) {
    auto j = resource_index(id);
    if (!j) throw InputError("unknown resource id '" + id + "'");
    if (*j >= kMaskBits) throw SizeError("resource index beyond mask width", kMaskBits);
    mask |= ResourceMask{1} << *j;
  }
  return mask;
}

std::vector<std::string> Network::resource_ids(ResourceMask resources) const {
  std::vector<std::string> out;
  for (auto j : mask_indices(resources)) out.push_back(resources_.at(j).id);
  return out;
}

std::vector<std::string> Network::user_ids(UserMask users) const {
  std::vector<std::string> out;
  for (auto i : mask_indices(users)) out.push_back(users_.at(i).id);
  return out;
}

namespace {

Counts to_counts(const std::vector<std::int64_t>& v) {
  Counts out;
  out.reserve(v.size());
  for (auto x : v) out.emplace_back(x);
  return out;
}

void check_subset(const Network& net, ResourceMask resources) {
  if (resources & ~net.all_resources()) throw InputError("resource set references unknown resources");
}

}  // namespace

Counts Population::elastic() const { return to_counts(n); }
Counts Population::streaming() const { return to_counts(m); }

Counts Population::total() const {
  Counts out(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) out[i] = n[i] + (i < m.size() ? m[i] : 0);
  return out;
}

std::vector<std::size_t> mask_indices(std::uint64_t mask) {
  std::vector<std::size_t> out;
  while (mask) {
    out.push_back(static_cast<std::size_t>(__builtin_ctzll(mask)));
    mask &= mask - 1;
  }
  return out;
}

bool canonical_less(ResourceMask a, ResourceMask b) {
  const int pa = popcount(a), pb = popcount(b);
  if (pa != pb) return pa < pb;
  // Lexicographic on the ascending index lists: the first differing index
  // is the lowest bit of a ^ b; the set that owns it comes first.
  const ResourceMask diff = a ^ b;
  if (!diff) return false;
  return (a & diff & (~diff + 1)) != 0;
}

namespace detail {

void check_cap(std::size_t resources, const EnumerationOptions& opts) {
  const std::size_t cap = std::min<std::size_t>(opts.max_resources, kMaskBits - 1);
  if (resources > cap)
    throw SizeError("subset enumeration over " + std::to_string(resources) +
                        " resources exceeds the cap of " + std::to_string(cap) +
                        " (raise it with an explicit override)",
                    cap);
}

bool connected(std::span<const ResourceMask> user_masks, UserMask users, ResourceMask resources) {
  if (!resources) return false;
  ResourceMask reached = resources & (~resources + 1);
  UserMask pending = users;
  bool grew = true;
  while (grew && reached != resources) {
    grew = false;
    for (UserMask left = pending; left; left &= left - 1) {
      const auto i = static_cast<std::size_t>(__builtin_ctzll(left));
      const ResourceMask edges = user_masks[i] & resources;
      if (edges & reached) {
        reached |= edges;
        pending &= ~(UserMask{1} << i);
        grew = true;
      }
    }
  }
  return reached == resources;
}

UserMask inside(std::span<const ResourceMask> user_masks, UserMask active, ResourceMask resources) {
  UserMask out = 0;
  for (UserMask left = active; left; left &= left - 1) {
    const auto i = static_cast<std::size_t>(__builtin_ctzll(left));
    if ((user_masks[i] & ~resources) == 0) out |= UserMask{1} << i;
  }
  return out;
}

std::vector<ResourceMask> strongly_connected_subsets(std::span<const ResourceMask> user_masks,
                                                     UserMask active, ResourceMask universe,
                                                     const EnumerationOptions& opts) {
  check_cap(static_cast<std::size_t>(popcount(universe)), opts);
  std::vector<ResourceMask> out;
  for (ResourceMask s = universe; s; s = (s - 1) & universe) {
    if (connected(user_masks, inside(user_masks, active, s), s)) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

}  // namespace detail

UserMask users_inside(const Network& net, ResourceMask resources) {
  check_subset(net, resources);
  return detail::inside(net.user_masks(), net.all_users(), resources);
}

UserMask users_touching(const Network& net, ResourceMask resources) {
  check_subset(net, resources);
  UserMask out = 0;
  const auto& masks = net.user_masks();
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i] & resources) out |= UserMask{1} << i;
  }
  return out;
}

bool is_connected(const Network& net, UserMask users, ResourceMask resources) {
  check_subset(net, resources);
  if (users & ~net.all_users()) throw InputError("user set references unknown users");
  return detail::connected(net.user_masks(), users, resources);
}

bool is_strongly_connected(const Network& net, ResourceMask resources) {
  return is_connected(net, users_inside(net, resources), resources);
}

std::vector<ResourceMask> enumerate_strongly_connected(const Network& net,
                                                       const EnumerationOptions& opts) {
  detail::check_cap(net.num_resources(), opts);
  return detail::strongly_connected_subsets(net.user_masks(), net.all_users(), net.all_resources(),
                                            opts);
}

std::vector<ResourceMask> enumerate_connected(const Network& net, const EnumerationOptions& opts) {
  detail::check_cap(net.num_resources(), opts);
  const auto& masks = net.user_masks();
  const ResourceMask universe = net.all_resources();
  const UserMask everyone = net.all_users();
  std::vector<ResourceMask> out;
  for (ResourceMask s = universe; s; s = (s - 1) & universe) {
    if (detail::connected(masks, everyone, s)) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

std::vector<ResourceMask> strongly_connected_components(const Network& net, ResourceMask resources) {
  check_subset(net, resources);
  const auto& masks = net.user_masks();
  const UserMask inner = detail::inside(masks, net.all_users(), resources);
  std::vector<ResourceMask> parts;
  ResourceMask left = resources;
  while (left) {
    ResourceMask part = left & (~left + 1);
    bool grew = true;
    while (grew) {
      grew = false;
      for (UserMask u = inner; u; u &= u - 1) {
        const auto i = static_cast<std::size_t>(__builtin_ctzll(u));
        if ((masks[i] & part) && (masks[i] & ~part)) {
          part |= masks[i];
          grew = true;
        }
      }
    }
    parts.push_back(part);
    left &= ~part;
  }
  return parts;
}

}  // namespace multipath
