#include "multipath/convex_oracle.hpp"

#include "multipath/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <map>
#include <set>
#include <sstream>

namespace multipath {
namespace {

struct Variable {
  std::size_t user;
  std::size_t resource;
};

double marginal(double x, double alpha) { return std::pow(x, -alpha); }
double curvature(double x, double alpha) { return alpha * std::pow(x, -alpha - 1.0); }

double utility(double x, double alpha) {
  return alpha == 1.0 ? std::log(x) : std::pow(x, 1.0 - alpha) / (1.0 - alpha);
}

// Barrier problem on y = (x_i^j): minimize -t * sum n_i U(x_i) - sum log y - sum log s_j,
// with s_j = C_j - sum_i n_i x_i^j.
class BarrierProblem {
 public:
  BarrierProblem(const Network& net, const std::vector<double>& n, double alpha)
      : n_(n), alpha_(alpha), users_(net.num_users()) {
    for (std::size_t i = 0; i < net.num_users(); ++i) {
      if (n[i] <= 0) continue;
      for (auto j : net.users()[i].resources) {
        vars_.push_back({i, j});
        touched_.insert(j);
      }
    }
    resources_.assign(touched_.begin(), touched_.end());
    for (std::size_t r = 0; r < resources_.size(); ++r) slot_[resources_[r]] = r;
    capacity_.resize(resources_.size());
    for (std::size_t r = 0; r < resources_.size(); ++r)
      capacity_[r] = to_double(net.resources()[resources_[r]].capacity);
  }

  std::size_t size() const { return vars_.size(); }
  std::size_t constraints() const { return vars_.size() + resources_.size(); }
  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<std::size_t>& resources() const { return resources_; }

  Eigen::VectorXd initial_point() const {
    std::vector<double> demand(resources_.size(), 0.0);
    for (const auto& v : vars_) demand[slot_.at(v.resource)] += n_[v.user];
    Eigen::VectorXd y(vars_.size());
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      const auto r = slot_.at(vars_[k].resource);
      y[k] = 0.5 * capacity_[r] / demand[r];
    }
    return y;
  }

  std::vector<double> rates(const Eigen::VectorXd& y) const {
    std::vector<double> x(users_, 0.0);
    for (std::size_t k = 0; k < vars_.size(); ++k) x[vars_[k].user] += y[k];
    return x;
  }

  std::vector<double> slacks(const Eigen::VectorXd& y) const {
    std::vector<double> s = capacity_;
    for (std::size_t k = 0; k < vars_.size(); ++k) s[slot_.at(vars_[k].resource)] -= n_[vars_[k].user] * y[k];
    return s;
  }

  // At a central point 1/(t s_j) = U'(x_i) + 1/(t n_i y_ij) for every split on
  // j; the right side read off the largest split avoids the cancellation in s_j.
  std::vector<double> prices(const Eigen::VectorXd& y, double t, std::size_t resources) const {
    const auto x = rates(y);
    std::vector<double> price(resources, 0.0);
    std::vector<double> largest(resources_.size(), 0.0);
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      const auto& v = vars_[k];
      const auto r = slot_.at(v.resource);
      const double share = n_[v.user] * y[k];
      if (share > largest[r]) {
        largest[r] = share;
        price[v.resource] = marginal(x[v.user], alpha_) + 1.0 / (t * share);
      }
    }
    return price;
  }

  bool interior(const Eigen::VectorXd& y) const {
    if ((y.array() <= 0.0).any()) return false;
    for (double s : slacks(y)) {
      if (s <= 0.0) return false;
    }
    return true;
  }

  double value(const Eigen::VectorXd& y, double t) const {
    const auto x = rates(y);
    double f = 0.0;
    for (std::size_t i = 0; i < users_; ++i) {
      if (n_[i] > 0) f -= t * n_[i] * utility(x[i], alpha_);
    }
    for (Eigen::Index k = 0; k < y.size(); ++k) f -= std::log(y[k]);
    for (double s : slacks(y)) f -= std::log(s);
    return f;
  }

  void derivatives(const Eigen::VectorXd& y, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const auto x = rates(y);
    const auto s = slacks(y);
    const auto m = vars_.size();
    grad.setZero(m);
    hess.setZero(m, m);
    for (std::size_t a = 0; a < m; ++a) {
      const auto& va = vars_[a];
      const double na = n_[va.user];
      grad[a] = -t * na * marginal(x[va.user], alpha_) - 1.0 / y[a] + na / s[slot_.at(va.resource)];
      hess(a, a) += 1.0 / (y[a] * y[a]);
      for (std::size_t b = 0; b < m; ++b) {
        const auto& vb = vars_[b];
        if (va.user == vb.user) hess(a, b) += t * na * curvature(x[va.user], alpha_);
        if (va.resource == vb.resource) {
          const double sr = s[slot_.at(va.resource)];
          hess(a, b) += na * n_[vb.user] / (sr * sr);
        }
      }
    }
  }

 private:
  std::vector<double> n_;
  double alpha_;
  std::size_t users_;
  std::vector<Variable> vars_;
  std::set<std::size_t> touched_;
  std::vector<std::size_t> resources_;
  std::map<std::size_t, std::size_t> slot_;
  std::vector<double> capacity_;
};

// Dense Edmonds-Karp on doubles; residuals below `floor` count as empty.
double max_flow(std::vector<std::vector<double>>& cap, std::size_t source, std::size_t sink, double floor) {
  const std::size_t size = cap.size();
  double total = 0.0;
  for (;;) {
    std::vector<std::ptrdiff_t> prev(size, -1);
    prev[source] = static_cast<std::ptrdiff_t>(source);
    std::vector<std::size_t> queue{source};
    for (std::size_t head = 0; head < queue.size() && prev[sink] < 0; ++head) {
      const auto u = queue[head];
      for (std::size_t v = 0; v < size; ++v) {
        if (prev[v] < 0 && cap[u][v] > floor) {
          prev[v] = static_cast<std::ptrdiff_t>(u);
          queue.push_back(v);
        }
      }
    }
    if (prev[sink] < 0) return total;
    double push = HUGE_VAL;
    for (auto v = sink; v != source; v = static_cast<std::size_t>(prev[v]))
      push = std::min(push, cap[static_cast<std::size_t>(prev[v])][v]);
    for (auto v = sink; v != source; v = static_cast<std::size_t>(prev[v])) {
      const auto u = static_cast<std::size_t>(prev[v]);
      cap[u][v] -= push;
      cap[v][u] += push;
    }
    total += push;
  }
}

struct Snapped {
  std::vector<double> rate;
  std::vector<std::vector<double>> split;
  std::vector<double> price;
};

// Splits that stay clearly positive on the barrier path form a bipartite
// graph; on each of its components stationarity forces one common rate,
// capacity / count. The snapped point is kept only if it is feasible on the
// active edges and no inactive edge offers a user a lower price.
std::optional<Snapped> crossover(const Network& net, const std::vector<double>& n, const BarrierProblem& problem,
                                 const Eigen::VectorXd& y, double alpha) {
  constexpr double kActive = 1e-3, kTie = 1e-9;
  const std::size_t users = net.num_users(), resources = net.num_resources();
  const auto x = problem.rates(y);

  std::vector<std::size_t> parent(users + resources);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<bool> active(problem.size(), false), covered(resources, false);
  for (std::size_t k = 0; k < problem.size(); ++k) {
    const auto& v = problem.vars()[k];
    if (y[k] < kActive * x[v.user]) continue;
    active[k] = true;
    covered[v.resource] = true;
    parent[find(v.user)] = find(users + v.resource);
  }
  for (auto j : problem.resources()) {
    if (!covered[j]) return std::nullopt;
  }

  std::vector<double> capacity(users + resources, 0.0), count(users + resources, 0.0);
  for (auto j : problem.resources()) capacity[find(users + j)] += to_double(net.resources()[j].capacity);
  for (std::size_t i = 0; i < users; ++i)
    if (n[i] > 0) count[find(i)] += n[i];

  Snapped out;
  out.rate.assign(users, 0.0);
  out.price.assign(resources, 0.0);
  out.split.assign(users, std::vector<double>(resources, 0.0));
  for (std::size_t i = 0; i < users; ++i)
    if (n[i] > 0) out.rate[i] = capacity[find(i)] / count[find(i)];
  for (auto j : problem.resources()) {
    const auto root = find(users + j);
    out.price[j] = marginal(capacity[root] / count[root], alpha);
  }
  for (std::size_t k = 0; k < problem.size(); ++k) {
    if (active[k]) continue;
    const auto& v = problem.vars()[k];
    const auto root = find(users + v.resource);
    const double other = capacity[root] / count[root];
    if (out.rate[v.user] < other * (1.0 - kTie)) return std::nullopt;
  }

  // source, users, resources, sink
  const std::size_t source = 0, sink = users + resources + 1;
  std::vector<std::vector<double>> cap(sink + 1, std::vector<double>(sink + 1, 0.0));
  double demand = 0.0;
  for (std::size_t i = 0; i < users; ++i) {
    cap[source][1 + i] = n[i] * out.rate[i];
    demand += cap[source][1 + i];
  }
  for (std::size_t k = 0; k < problem.size(); ++k)
    if (active[k]) cap[1 + problem.vars()[k].user][1 + users + problem.vars()[k].resource] = HUGE_VAL;
  for (auto j : problem.resources()) cap[1 + users + j][sink] = to_double(net.resources()[j].capacity);
  const auto initial = cap;
  const double floor = 1e-14 * std::max(1.0, demand);
  if (max_flow(cap, source, sink, floor) < demand * (1.0 - kTie)) return std::nullopt;
  for (std::size_t k = 0; k < problem.size(); ++k) {
    if (!active[k]) continue;
    const auto& v = problem.vars()[k];
    const double flow = cap[1 + users + v.resource][1 + v.user] - initial[1 + users + v.resource][1 + v.user];
    out.split[v.user][v.resource] = std::max(0.0, flow) / n[v.user];
  }
  return out;
}

}  // namespace

double utility_objective(const Counts& counts, const std::vector<double>& rates,
                         const UtilitySpec& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) total += to_double(counts[i]) * utility(rates[i], spec.alpha);
  }
  return total;
}

OracleSolution solve_num(const Network& net, const Counts& counts, const UtilitySpec& spec,
                         const OracleOptions& opts) {
  detail::check_counts(net, counts);
  if (!(spec.alpha > 0.0)) throw InputError("alpha must be positive");
  if (!(opts.tol > 0.0)) throw InputError("tolerance must be positive");

  std::vector<double> n(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) n[i] = to_double(counts[i]);

  BarrierProblem problem(net, n, spec.alpha);
  if (problem.size() == 0) throw InputError("solve_num requires at least one positive count");

  Eigen::VectorXd y = problem.initial_point();
  const double m = static_cast<double>(problem.constraints());
  double t = 1.0;
  std::size_t steps = 0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;

  for (;;) {
    // Centering by damped Newton.
    double previous = HUGE_VAL;
    for (;;) {
      if (++steps > opts.max_iterations)
        throw ConvergenceError("interior-point solve hit the iteration cap", m / t);
      problem.derivatives(y, t, grad, hess);
      const Eigen::VectorXd scale = hess.diagonal().cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd scaled = scale.asDiagonal() * hess * scale.asDiagonal();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
      const Eigen::VectorXd rhs = -scale.cwiseProduct(grad);
      const Eigen::VectorXd step = scale.cwiseProduct(ldlt.solve(rhs));
      const double decrement = -grad.dot(step);
      if (decrement / 2.0 <= 1e-12) break;
      // Newton converges quadratically near the center; once it stops doing so
      // the remaining decrement is rounding noise.
      if (decrement / 2.0 <= 1e-6 && decrement > 0.5 * previous) break;
      previous = decrement;

      double len = 1.0;
      while (!problem.interior(y + len * step)) len *= 0.5;
      const double base = problem.value(y, t);
      // Below this the line search compares rounding errors of the objective.
      if (decrement / 2.0 <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(base)) break;
      while (len > 1e-14 && problem.value(y + len * step, t) > base - 0.25 * len * decrement) len *= 0.5;
      if (len <= 1e-14) break;
      if (len < 1.0 && decrement / 2.0 <= 1e-6) break;
      y += len * step;
    }
    if (m / t <= opts.tol) break;
    t *= 8.0;
  }

  OracleSolution out;
  out.iterations = steps;
  out.gap = m / t;
  if (auto snapped = crossover(net, n, problem, y, spec.alpha)) {
    out.rate = std::move(snapped->rate);
    out.split = std::move(snapped->split);
    out.price = std::move(snapped->price);
    out.crossover = true;
    return out;
  }
  out.rate = problem.rates(y);
  out.split.assign(net.num_users(), std::vector<double>(net.num_resources(), 0.0));
  for (std::size_t k = 0; k < problem.size(); ++k) {
    out.split[problem.vars()[k].user][problem.vars()[k].resource] = y[k];
  }
  out.price = problem.prices(y, t, net.num_resources());
  return out;
}

KktReport kkt_check(const Network& net, const Counts& counts, const std::vector<Rational>& rates,
                    const SplitMatrix& split) {
  detail::check_counts(net, counts);
  KktReport report;
  auto fail = [&](const std::string& msg) {
    report.ok = false;
    report.violations.push_back(msg);
  };
  if (rates.size() != net.num_users() || split.value.size() != net.num_users()) {
    fail("rates or split matrix have the wrong number of users");
    return report;
  }

  const auto& users = net.users();
  const auto& resources = net.resources();
  std::vector<Rational> used(net.num_resources(), Rational(0));
  std::vector<bool> reachable(net.num_resources(), false);

  for (std::size_t i = 0; i < users.size(); ++i) {
    if (split.value[i].size() != net.num_resources()) {
      fail("split row of user '" + users[i].id + "' has the wrong length");
      return report;
    }
    Rational total = 0;
    for (std::size_t j = 0; j < net.num_resources(); ++j) {
      const auto& v = split.value[i][j];
      const bool allowed = std::binary_search(users[i].resources.begin(), users[i].resources.end(), j);
      if (v < 0) fail("negative split for user '" + users[i].id + "' on '" + resources[j].id + "'");
      if (!allowed && v != 0) fail("user '" + users[i].id + "' uses forbidden resource '" + resources[j].id + "'");
      total += v;
      used[j] += counts[i] * v;
    }
    if (counts[i] > 0) {
      if (total != rates[i]) fail("splits of user '" + users[i].id + "' do not sum to its rate");
      for (auto j : users[i].resources) reachable[j] = true;
    }
  }
  for (std::size_t j = 0; j < resources.size(); ++j) {
    if (used[j] > resources[j].capacity) fail("resource '" + resources[j].id + "' is over capacity");
    if (reachable[j] && used[j] != resources[j].capacity)
      fail("resource '" + resources[j].id + "' is not saturated");
  }
  for (std::size_t a = 0; a < users.size(); ++a) {
    if (counts[a] <= 0) continue;
    for (std::size_t b = 0; b < users.size(); ++b) {
      if (counts[b] <= 0 || !(rates[a] > rates[b])) continue;
      for (auto j : users[a].resources) {
        const bool shared = std::binary_search(users[b].resources.begin(), users[b].resources.end(), j);
        if (shared && split.value[a][j] != 0) {
          std::ostringstream msg;
          msg << "user '" << users[a].id << "' draws from '" << resources[j].id << "' shared with slower user '"
              << users[b].id << "'";
          fail(msg.str());
        }
      }
    }
  }
  return report;
}

}  // namespace multipath
