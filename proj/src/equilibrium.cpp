#include "multipath/equilibrium.hpp"

#include "multipath/alloc.hpp"
#include "multipath/error.hpp"

#include <algorithm>
#include <optional>

namespace multipath {
namespace {

std::string describe(const Network& net, ResourceMask resources) {
  std::string out = "{";
  for (const auto& id : net.resource_ids(resources)) out += (out.size() > 1 ? "," : "") + id;
  return out + "}";
}

std::string describe_users(const Network& net, UserMask users) {
  std::string out = "{";
  for (const auto& id : net.user_ids(users)) out += (out.size() > 1 ? "," : "") + id;
  return out + "}";
}

void require_stable(const Network& net, const std::vector<Rational>& rho, const EnumerationOptions& opts) {
  const auto report = stability_check(net, rho, opts);
  if (report.stable) return;
  std::string sets;
  for (auto s : report.violated) sets += (sets.empty() ? "" : ", ") + describe(net, s);
  throw StabilityError("loads violate the stability condition on " + sets);
}

Rational sum_over(const std::vector<Rational>& v, UserMask users) {
  Rational total = 0;
  for (auto i : mask_indices(users)) total += v[i];
  return total;
}

UserMask positive(const std::vector<Rational>& v) {
  UserMask out = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0) out |= UserMask{1} << i;
  }
  return out;
}

void check_state(const Network& net, const FluidState& s, Model model) {
  if (s.n.size() != net.num_users()) throw InputError("fluid state needs one elastic count per user");
  if (model == Model::integrated && s.m.size() != net.num_users())
    throw InputError("fluid state needs one streaming count per user");
  for (const auto* v : {&s.n, &s.m}) {
    for (const auto& c : *v) {
      if (c < 0) throw InputError("fluid state must be nonnegative");
    }
  }
}

}  // namespace

FluidState drift(const Network& net, const TrafficSpec& traffic, const FluidState& state, Model model,
                 const EnumerationOptions& opts) {
  if (model == Model::streaming) throw InputError("drift is defined for the integrated and peak_rate models");
  validate_traffic(net, traffic, model);
  check_state(net, state, model);
  const std::size_t users = net.num_users();
  FluidState out;
  out.n.resize(users);
  out.m.assign(users, Rational(0));
  if (model == Model::integrated) {
    Counts total(users);
    for (std::size_t i = 0; i < users; ++i) total[i] = state.n[i] + state.m[i];
    const auto dec = allocate(net, total, opts);
    for (std::size_t i = 0; i < users; ++i) {
      out.n[i] = traffic[i].lambda - traffic[i].mu * state.n[i] * dec.rate[i];
      out.m[i] = traffic[i].kappa - traffic[i].eta * state.m[i];
    }
  } else {
    const auto dec = allocate(net, state.n, opts);
    for (std::size_t i = 0; i < users; ++i) {
      const Rational& x = dec.rate[i];
      const Rational& r = *traffic[i].peak_rate;
      out.n[i] = traffic[i].lambda - traffic[i].mu * state.n[i] * (x < r ? x : r);
    }
  }
  return out;
}

std::vector<double> drift(const Network& net, const TrafficSpec& traffic, const std::vector<double>& state,
                          Model model, const EnumerationOptions& opts) {
  const std::size_t users = net.num_users();
  if (state.size() != 2 * users) throw InputError("state must hold n followed by m");
  FluidState s;
  for (std::size_t i = 0; i < users; ++i) s.n.push_back(rational_from_double(state[i]));
  for (std::size_t i = 0; i < users; ++i) s.m.push_back(rational_from_double(state[users + i]));
  const auto d = drift(net, traffic, s, model, opts);
  std::vector<double> out;
  for (const auto& v : d.n) out.push_back(to_double(v));
  for (const auto& v : d.m) out.push_back(to_double(v));
  return out;
}

EquilibriumPoint integrated_equilibrium(const Network& net, const TrafficSpec& traffic,
                                        const EnumerationOptions& opts) {
  validate_traffic(net, traffic, Model::integrated);
  const auto rho = elastic_loads(traffic);
  require_stable(net, rho, opts);

  const std::size_t users = net.num_users();
  EquilibriumPoint eq;
  for (std::size_t i = 0; i < users; ++i) {
    eq.m_hat.push_back(traffic[i].streaming_load());
    if (rho[i] > 0 && eq.m_hat[i] == 0)
      throw InputError("user '" + net.users()[i].id +
                       "' has elastic load but no streaming traffic; the integrated equilibrium needs kappa > 0");
  }

  const auto dec = allocate_generalized(
      net, eq.m_hat,
      [&](ResourceMask resources, UserMask inside) { return net.capacity(resources) - sum_over(rho, inside); },
      opts);

  eq.x_hat = dec.rate;
  eq.n_hat.assign(users, Rational(0));
  for (std::size_t i = 0; i < users; ++i) {
    if (eq.m_hat[i] > 0) eq.n_hat[i] = rho[i] / eq.x_hat[i];
  }
  for (const auto& level : dec.levels) {
    if (level.rate.is_infinite()) continue;
    eq.levels.push_back({level.users, level.resources, level.rate.value(), 0});
  }
  eq.redundant = dec.redundant;
  return eq;
}

std::vector<std::size_t> peak_order(const Network& net, const TrafficSpec& traffic, UserMask users) {
  auto order = mask_indices(users);
  for (auto i : order) {
    if (i >= traffic.size() || !traffic[i].peak_rate) throw InputError("peak rate missing for a user");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = *traffic[a].peak_rate;
    const auto& rb = *traffic[b].peak_rate;
    if (ra != rb) return ra < rb;
    return net.users()[a].id < net.users()[b].id;
  });
  return order;
}

Rational peak_cluster_rate(const Rational& capacity, std::span<const Rational> rho,
                           std::span<const Rational> peak, std::size_t t) {
  if (rho.size() != peak.size() || t >= rho.size()) throw InputError("cutoff position out of range");
  Rational num = capacity, den = 0;
  for (std::size_t s = 0; s < rho.size(); ++s) {
    if (s <= t) {
      den += rho[s] / peak[s];
    } else {
      num -= rho[s];
    }
  }
  if (den == 0) throw InputError("no load at or below the cutoff");
  return num / den;
}

std::size_t find_istar(const Rational& capacity, std::span<const Rational> rho, std::span<const Rational> peak) {
  if (rho.empty() || rho.size() != peak.size()) throw InputError("find_istar needs matching nonempty inputs");
  for (std::size_t s = 0; s < rho.size(); ++s) {
    if (rho[s] <= 0 || peak[s] <= 0) throw InputError("find_istar needs positive loads and peak rates");
    if (s > 0 && peak[s] < peak[s - 1]) throw InputError("peak rates must be sorted ascending");
  }
  Rational total = 0;
  for (const auto& v : rho) total += v;
  if (total >= capacity) throw StabilityError("load of the cluster reaches its capacity");

  for (std::size_t t = 0; t < rho.size(); ++t) {
    const Rational pi = peak_cluster_rate(capacity, rho, peak, t);
    if (pi > peak[t] && (t + 1 == rho.size() || pi <= peak[t + 1])) return t;
  }
  throw ConsistencyError("no cutoff position brackets the cluster rate");
}

NeqReport neq_condition(const Network& net, const std::vector<Rational>& rho, const EnumerationOptions& opts) {
  if (rho.size() != net.num_users()) throw InputError("one load per user expected");
  NeqReport report;
  for (ResourceMask s : enumerate_connected(net, opts)) {
    const UserMask inside = users_inside(net, s);
    const UserMask extra = users_touching(net, s) & ~inside;
    const Rational capacity = net.capacity(s);
    const Rational base = sum_over(rho, inside);
    // Submasks of `extra` from small to large index patterns.
    for (UserMask e = extra; e; e = (e - 1) & extra) {
      if (base + sum_over(rho, e) == capacity) {
        report.ok = false;
        report.witnesses.push_back({inside | e, s});
      }
    }
  }
  std::stable_sort(report.witnesses.begin(), report.witnesses.end(), [](const auto& a, const auto& b) {
    if (a.resources != b.resources) return canonical_less(a.resources, b.resources);
    return canonical_less(a.users, b.users);
  });
  return report;
}

EquilibriumPoint peak_rate_equilibrium(const Network& net, const TrafficSpec& traffic,
                                       const EnumerationOptions& opts) {
  validate_traffic(net, traffic, Model::peak_rate);
  const auto rho = elastic_loads(traffic);
  require_stable(net, rho, opts);
  const auto neq = neq_condition(net, rho, opts);
  if (!neq.ok) {
    const auto& w = neq.witnesses.front();
    throw NonUniquenessError("equilibrium is not unique: loads of users " + describe_users(net, w.users) +
                             " sum to the capacity of " + describe(net, w.resources));
  }

  const std::size_t users = net.num_users();
  std::vector<ResourceMask> view = net.user_masks();
  UserMask active = net.all_users();
  ResourceMask remaining = net.all_resources();
  const UserMask loaded = positive(rho);

  EquilibriumPoint eq;
  eq.n_hat.assign(users, Rational(0));
  eq.m_hat.assign(users, Rational(0));
  eq.x_hat.assign(users, Rational(0));
  std::optional<Rational> previous;

  // Rate and cutoff of a candidate set; nullopt when nobody loaded is inside.
  struct Candidate {
    Rational rate;
    UserMask constrained;
  };
  auto evaluate = [&](ResourceMask s) -> std::optional<Candidate> {
    const UserMask inside = detail::inside(view, active, s) & loaded;
    if (!inside) return std::nullopt;
    const auto order = peak_order(net, traffic, inside);
    std::vector<Rational> r, p;
    for (auto i : order) {
      r.push_back(rho[i]);
      p.push_back(*traffic[i].peak_rate);
    }
    const Rational capacity = net.capacity(s);
    Rational total = 0;
    for (const auto& v : r) total += v;
    if (total >= capacity)
      throw ConsistencyError("reduced network lost stability on " + describe(net, s));
    const auto t = find_istar(capacity, r, p);
    Candidate c{peak_cluster_rate(capacity, r, p, t), 0};
    for (std::size_t k = 0; k <= t; ++k) c.constrained |= UserMask{1} << order[k];
    return c;
  };

  while (remaining) {
    std::optional<Rational> best;
    ResourceMask union_of_minimizers = 0;
    for (ResourceMask s : detail::strongly_connected_subsets(view, active, remaining, opts)) {
      auto c = evaluate(s);
      if (!c) continue;
      if (!best || c->rate < *best) {
        best = std::move(c->rate);
        union_of_minimizers = s;
      } else if (c->rate == *best) {
        union_of_minimizers |= s;
      }
    }
    if (!best) {
      eq.redundant = remaining;
      break;
    }

    const auto level = evaluate(union_of_minimizers);
    if (!level || level->rate != *best)
      throw ConsistencyError("union of minimizing sets does not attain the minimum rate");
    if (previous && !(*previous < *best)) throw ConsistencyError("level rates are not strictly increasing");

    const UserMask inside = detail::inside(view, active, union_of_minimizers);
    EquilibriumLevel out{inside & loaded, union_of_minimizers, *best, level->constrained};
    for (auto i : mask_indices(out.users)) {
      eq.x_hat[i] = *best;
      const bool capped = (level->constrained >> i) & 1;
      eq.n_hat[i] = capped ? rho[i] / *traffic[i].peak_rate : rho[i] / *best;
    }
    eq.peak_constrained |= level->constrained;
    eq.levels.push_back(std::move(out));

    previous = *best;
    active &= ~inside;
    remaining &= ~union_of_minimizers;
    for (auto& m : view) m &= remaining;
  }
  return eq;
}

PoolingReport crp_check_integrated(const Network& net, const TrafficSpec& traffic,
                                   const EnumerationOptions& opts) {
  validate_traffic(net, traffic, Model::integrated);
  const auto rho = elastic_loads(traffic);
  require_stable(net, rho, opts);
  std::vector<Rational> load;
  for (const auto& t : traffic) load.push_back(t.streaming_load());

  const ResourceMask all = net.all_resources();
  const UserMask everyone = net.all_users();
  PoolingReport report;
  for (ResourceMask s : enumerate_strongly_connected(net, opts)) {
    if (s == all) continue;
    const UserMask inside = users_inside(net, s);
    const Rational inner_load = sum_over(load, inside);
    if (inner_load == 0) continue;
    const UserMask outside = everyone & ~inside;
    const Rational lhs = sum_over(rho, outside) - net.capacity(all & ~s);
    const Rational rhs = -(sum_over(load, outside) / inner_load) * (net.capacity(s) - sum_over(rho, inside));
    if (lhs == rhs) {
      report.boundary.push_back(s);
    } else if (lhs < rhs) {
      report.violated.push_back(s);
    }
  }
  report.pooled = report.violated.empty() && report.boundary.empty();
  return report;
}

PoolingReport crp_sufficient_integrated(const Network& net, const TrafficSpec& traffic,
                                        const EnumerationOptions& opts) {
  validate_traffic(net, traffic, Model::integrated);
  const auto rho = elastic_loads(traffic);
  require_stable(net, rho, opts);
  const ResourceMask all = net.all_resources();
  PoolingReport report;
  for (ResourceMask complement : enumerate_strongly_connected(net, opts)) {
    const ResourceMask s = all & ~complement;
    if (!s) continue;
    const Rational load = sum_over(rho, users_touching(net, s));
    if (load == net.capacity(s)) {
      report.boundary.push_back(s);
    } else if (load < net.capacity(s)) {
      report.violated.push_back(s);
    }
  }
  std::sort(report.violated.begin(), report.violated.end(), canonical_less);
  std::sort(report.boundary.begin(), report.boundary.end(), canonical_less);
  report.pooled = report.violated.empty() && report.boundary.empty();
  return report;
}

PoolingReport crp_check_peak(const Network& net, const TrafficSpec& traffic, const EnumerationOptions& opts) {
  validate_traffic(net, traffic, Model::peak_rate);
  const auto rho = elastic_loads(traffic);
  require_stable(net, rho, opts);
  const ResourceMask all = net.all_resources();
  PoolingReport report;
  for (ResourceMask s : enumerate_connected(net, opts)) {
    if (s == all) continue;
    const Rational load = sum_over(rho, users_touching(net, s));
    if (load == net.capacity(s)) {
      report.boundary.push_back(s);
    } else if (load < net.capacity(s)) {
      report.violated.push_back(s);
    }
  }
  report.pooled = report.violated.empty() && report.boundary.empty();
  return report;
}

}  // namespace multipath
