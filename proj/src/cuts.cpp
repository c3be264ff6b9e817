#include "multipath/cuts.hpp"

#include "maxflow.hpp"
#include "multipath/error.hpp"

#include <algorithm>

namespace multipath {
namespace {

void check_loads(const Network& net, const LoadVector& loads) {
  if (loads.size() != net.num_users())
    throw InputError("expected " + std::to_string(net.num_users()) + " loads, got " +
                     std::to_string(loads.size()));
  for (const auto& l : loads) {
    if (l < 0) throw InputError("loads must be nonnegative");
  }
}

}  // namespace

CutReport gcc_feasible(const Network& net, const LoadVector& loads, const EnumerationOptions& opts) {
  check_loads(net, loads);
  CutReport report;
  for (ResourceMask s : enumerate_strongly_connected(net, opts)) {
    Rational load = 0;
    for (auto i : mask_indices(users_inside(net, s))) load += loads[i];
    if (load > net.capacity(s)) report.violated.push_back(s);
  }
  report.feasible = report.violated.empty();
  return report;
}

bool maxflow_feasible(const Network& net, const LoadVector& loads) {
  check_loads(net, loads);
  const std::size_t users = net.num_users();
  const std::size_t source = 0, sink = 1;
  detail::MaxFlow flow(2 + users + net.num_resources());
  Rational total = 0;
  for (std::size_t i = 0; i < users; ++i) {
    total += loads[i];
    flow.add_edge(source, 2 + i, loads[i]);
  }
  for (std::size_t i = 0; i < users; ++i) {
    for (auto j : net.users()[i].resources) flow.add_edge(2 + i, 2 + users + j, Rational(0), true);
  }
  for (std::size_t j = 0; j < net.num_resources(); ++j) {
    flow.add_edge(2 + users + j, sink, net.resources()[j].capacity);
  }
  return flow.run(source, sink) == total;
}

ViolatingLoad violating_allocation(const Network& net, ResourceMask target) {
  if (!is_strongly_connected(net, target))
    throw InputError("target resource set is not strongly connected");
  const UserMask inner = users_inside(net, target);
  if (!inner) throw InputError("target resource set has no users inside; its constraint cannot be violated");

  const auto& masks = net.user_masks();
  std::vector<Rational> sharers(net.num_resources(), Rational(0));  // k_j
  for (auto i : mask_indices(inner)) {
    for (auto j : mask_indices(masks[i])) sharers[j] += 1;
  }

  Rational bound = net.resources().front().capacity;
  for (const auto& r : net.resources()) bound = std::min(bound, r.capacity);
  for (auto j : mask_indices(target)) bound = std::min<Rational>(bound, net.resources()[j].capacity / sharers[j]);
  // Any epsilon strictly below the bound works; half of it keeps clear of ties.
  const Rational epsilon = bound / 2;

  ViolatingLoad out{LoadVector(net.num_users(), Rational(0)), epsilon};
  const Rational share = epsilon / popcount(inner);
  for (auto i : mask_indices(inner)) {
    Rational load = share;
    for (auto j : mask_indices(masks[i])) load += net.resources()[j].capacity / sharers[j];
    out.loads[i] = std::move(load);
  }
  return out;
}

}  // namespace multipath
