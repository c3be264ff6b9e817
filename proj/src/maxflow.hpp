#pragma once

// Exact max-flow over rationals. Edmonds-Karp with adjacency scanned in
// insertion order, so the resulting flow is deterministic.

#include "multipath/rational.hpp"

#include <cstddef>
#include <deque>
#include <limits>
#include <vector>

namespace multipath::detail {

class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adjacency_(nodes) {}

  /// Adds u->v; `infinite` ignores `capacity`. Returns the edge handle.
  std::size_t add_edge(std::size_t u, std::size_t v, Rational capacity, bool infinite = false) {
    const std::size_t id = edges_.size();
    edges_.push_back({v, std::move(capacity), Rational(0), infinite});
    adjacency_[u].push_back(id);
    edges_.push_back({u, Rational(0), Rational(0), false});
    adjacency_[v].push_back(id + 1);
    return id;
  }

  Rational run(std::size_t source, std::size_t sink) {
    Rational total = 0;
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    for (;;) {
      std::vector<std::size_t> via(adjacency_.size(), none);
      std::vector<bool> seen(adjacency_.size(), false);
      std::deque<std::size_t> queue{source};
      seen[source] = true;
      while (!queue.empty() && !seen[sink]) {
        const auto u = queue.front();
        queue.pop_front();
        for (auto e : adjacency_[u]) {
          const auto v = edges_[e].to;
          if (!seen[v] && has_residual(e)) {
            seen[v] = true;
            via[v] = e;
            queue.push_back(v);
          }
        }
      }
      if (!seen[sink]) break;

      bool bounded = false;
      Rational push = 0;
      for (auto v = sink; v != source; v = edges_[via[v] ^ 1].to) {
        const auto e = via[v];
        if (edges_[e].infinite) continue;
        Rational r = edges_[e].capacity - edges_[e].flow;
        if (!bounded || r < push) push = r;
        bounded = true;
      }
      if (!bounded) break;  // infinite path; callers always bound the source side
      for (auto v = sink; v != source; v = edges_[via[v] ^ 1].to) {
        const auto e = via[v];
        edges_[e].flow += push;
        edges_[e ^ 1].flow -= push;
      }
      total += push;
    }
    return total;
  }

  const Rational& flow(std::size_t edge) const { return edges_[edge].flow; }

 private:
  struct Edge {
    std::size_t to;
    Rational capacity;
    Rational flow;
    bool infinite;
  };

  bool has_residual(std::size_t e) const {
    return edges_[e].infinite || edges_[e].flow < edges_[e].capacity;
  }

  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<Edge> edges_;
};

}  // namespace multipath::detail
