#include "multipath/alloc.hpp"

#include "maxflow.hpp"
#include "multipath/error.hpp"

#include <algorithm>

namespace multipath {

namespace detail {

void check_counts(const Network& net, const Counts& counts) {
  if (counts.size() != net.num_users())
    throw InputError("expected " + std::to_string(net.num_users()) + " counts, got " +
                     std::to_string(counts.size()));
  for (const auto& c : counts) {
    if (c < 0) throw InputError("counts must be nonnegative");
  }
}

std::vector<Cluster> components(std::span<const ResourceMask> user_masks, UserMask users,
                                ResourceMask resources) {
  std::vector<Cluster> out;
  ResourceMask left = resources;
  while (left) {
    Cluster c{0, left & (~left + 1)};
    bool grew = true;
    while (grew) {
      grew = false;
      for (UserMask u = users & ~c.users; u; u &= u - 1) {
        const auto i = static_cast<std::size_t>(__builtin_ctzll(u));
        if (user_masks[i] & c.resources) {
          c.users |= UserMask{1} << i;
          c.resources |= user_masks[i] & resources;
          grew = true;
        }
      }
    }
    left &= ~c.resources;
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

namespace {

Rational weight_of(const Counts& weights, UserMask users) {
  Rational total = 0;
  for (auto i : mask_indices(users)) total += weights[i];
  return total;
}

UserMask positive_users(const Counts& weights) {
  UserMask out = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0) out |= UserMask{1} << i;
  }
  return out;
}

}  // namespace

const Rational& ClusterDecomposition::min_level_rate() const {
  for (const auto& level : levels) {
    if (!level.rate.is_infinite()) return level.rate.value();
  }
  throw InputError("decomposition has no level with users");
}

const Rational& ClusterDecomposition::max_level_rate() const {
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    if (!it->rate.is_infinite()) return it->rate.value();
  }
  throw InputError("decomposition has no level with users");
}

Rational weighted_harmonic_mean(std::span<const Rational> values, std::span<const Rational> weights) {
  if (values.empty()) throw InputError("weighted harmonic mean of an empty list");
  if (values.size() != weights.size())
    throw InputError("weighted harmonic mean: values and weights differ in length");
  Rational num = 0, den = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] <= 0 || weights[k] <= 0)
      throw InputError("weighted harmonic mean requires positive values and weights");
    num += weights[k];
    den += weights[k] / values[k];
  }
  return num / den;
}

ExtRational cluster_rate(const Network& net, const Counts& counts, UserMask users,
                         ResourceMask resources) {
  detail::check_counts(net, counts);
  const Rational total = weight_of(counts, users);
  if (total == 0) return ExtRational::infinity();
  return ExtRational(net.capacity(resources) / total);
}

ClusterDecomposition allocate_generalized(const Network& net, const Counts& weights,
                                          const BudgetFunction& budget,
                                          const EnumerationOptions& opts) {
  detail::check_counts(net, weights);
  detail::check_cap(net.num_resources(), opts);

  std::vector<ResourceMask> view = net.user_masks();
  UserMask active = net.all_users();
  ResourceMask remaining = net.all_resources();
  const UserMask positive = positive_users(weights);

  ClusterDecomposition dec;
  dec.rate.assign(net.num_users(), Rational(0));
  std::optional<Rational> previous;

  while (remaining) {
    const auto candidates = detail::strongly_connected_subsets(view, active, remaining, opts);

    std::optional<Rational> best;
    ResourceMask union_of_minimizers = 0;
    for (ResourceMask s : candidates) {
      const UserMask inner = detail::inside(view, active, s);
      const Rational w = weight_of(weights, inner);
      if (w == 0) continue;
      const Rational b = budget(s, inner);
      if (b <= 0)
        throw StabilityError("budget of resource set {" + [&] {
          std::string ids;
          for (const auto& id : net.resource_ids(s)) ids += (ids.empty() ? "" : ",") + id;
          return ids;
        }() + "} is not positive");
      Rational rate = b / w;
      if (!best || rate < *best) {
        best = std::move(rate);
        union_of_minimizers = s;
      } else if (rate == *best) {
        union_of_minimizers |= s;
      }
    }

    if (!best) {
      // Nothing left carries weight: the rest is unreachable capacity.
      dec.levels.push_back(Level{0, remaining, ExtRational::infinity(), {}});
      dec.redundant = remaining;
      break;
    }

    const ResourceMask level_resources = union_of_minimizers;
    const UserMask level_users = detail::inside(view, active, level_resources);

    // The union of minimizers attains the minimum itself, and minima increase.
    const Rational union_rate = budget(level_resources, level_users) / weight_of(weights, level_users);
    if (union_rate != *best)
      throw ConsistencyError("union of minimizing sets does not attain the minimum rate");
    if (previous && !(*previous < *best))
      throw ConsistencyError("level rates are not strictly increasing");

    Level level{level_users & positive, level_resources, ExtRational(*best), {}};
    level.clusters = detail::components(view, level.users, level_resources);
    for (auto i : mask_indices(level.users)) dec.rate[i] = *best;
    dec.levels.push_back(std::move(level));

    previous = *best;
    active &= ~level_users;
    remaining &= ~level_resources;
    for (auto& m : view) m &= remaining;
  }
  return dec;
}

ClusterDecomposition allocate(const Network& net, const Counts& counts,
                              const EnumerationOptions& opts) {
  return allocate_generalized(
      net, counts, [&net](ResourceMask resources, UserMask) { return net.capacity(resources); },
      opts);
}

SplitMatrix split_rates(const Network& net, const Counts& counts, const ClusterDecomposition& dec) {
  detail::check_counts(net, counts);
  const auto& masks = net.user_masks();
  SplitMatrix split;
  split.value.assign(net.num_users(), std::vector<Rational>(net.num_resources(), Rational(0)));

  for (const auto& level : dec.levels) {
    if (level.rate.is_infinite()) continue;
    const auto users = mask_indices(level.users);
    const auto resources = mask_indices(level.resources);
    const std::size_t source = 0, sink = 1;
    detail::MaxFlow flow(2 + users.size() + resources.size());

    Rational demand = 0;
    for (std::size_t a = 0; a < users.size(); ++a) {
      Rational supply = counts[users[a]] * level.rate.value();
      demand += supply;
      flow.add_edge(source, 2 + a, std::move(supply));
    }
    for (std::size_t b = 0; b < resources.size(); ++b) {
      flow.add_edge(2 + users.size() + b, sink, net.resources()[resources[b]].capacity);
    }
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> middle;  // user, resource, edge
    for (std::size_t a = 0; a < users.size(); ++a) {
      for (std::size_t b = 0; b < resources.size(); ++b) {
        if (masks[users[a]] & (ResourceMask{1} << resources[b])) {
          middle.emplace_back(users[a], resources[b],
                              flow.add_edge(2 + a, 2 + users.size() + b, Rational(0), true));
        }
      }
    }
    if (flow.run(source, sink) != demand)
      throw ConsistencyError("a cluster level cannot route its allocated load");
    for (const auto& [i, j, e] : middle) split.value[i][j] = flow.flow(e) / counts[i];
  }
  return split;
}

Rational min_rate(const Network& net, const Counts& counts, const EnumerationOptions& opts) {
  detail::check_counts(net, counts);
  std::optional<Rational> best;
  for (ResourceMask s : enumerate_strongly_connected(net, opts)) {
    const Rational w = weight_of(counts, users_inside(net, s));
    if (w == 0) continue;
    Rational r = net.capacity(s) / w;
    if (!best || r < *best) best = std::move(r);
  }
  if (!best) throw InputError("min_rate requires at least one positive count");
  return *best;
}

Rational max_rate(const Network& net, const Counts& counts, const EnumerationOptions& opts) {
  detail::check_counts(net, counts);
  detail::check_cap(net.num_resources(), opts);
  // Zero-count users neither receive rate nor link resources together.
  const UserMask positive = positive_users(counts);
  const auto& masks = net.user_masks();
  const ResourceMask universe = net.all_resources();
  std::optional<Rational> best;
  for (ResourceMask s = universe; s; s = (s - 1) & universe) {
    if (!detail::connected(masks, positive, s)) continue;
    UserMask touching = 0;
    for (auto i : mask_indices(positive)) {
      if (masks[i] & s) touching |= UserMask{1} << i;
    }
    const Rational w = weight_of(counts, touching);
    if (w == 0) continue;
    Rational r = net.capacity(s) / w;
    if (!best || r > *best) best = std::move(r);
  }
  if (!best) throw InputError("max_rate requires at least one positive count");
  return *best;
}

Rational rate_lower_bound(const Network& net, const Counts& counts, std::size_t user,
                          const EnumerationOptions& opts) {
  detail::check_counts(net, counts);
  detail::check_cap(net.num_resources(), opts);
  if (user >= net.num_users()) throw InputError("unknown user index");
  if (counts[user] <= 0) throw InputError("rate_lower_bound requires a positive count for the user");
  const ResourceMask own = net.user_mask(user);
  const ResourceMask free = net.all_resources() & ~own;
  std::optional<Rational> best;
  ResourceMask extra = free;
  for (;;) {
    const ResourceMask s = own | extra;
    Rational r = net.capacity(s) / weight_of(counts, users_inside(net, s));
    if (!best || r < *best) best = std::move(r);
    if (!extra) break;
    extra = (extra - 1) & free;
  }
  return *best;
}

}  // namespace multipath
