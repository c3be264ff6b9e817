#include "multipath/dynamics.hpp"

#include "multipath/alloc.hpp"
#include "multipath/error.hpp"

#include <boost/container_hash/hash.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

namespace multipath {

const char* to_string(Model model) {
  switch (model) {
    case Model::streaming: return "streaming";
    case Model::integrated: return "integrated";
    case Model::peak_rate: return "peak_rate";
  }
  return "unknown";
}

Model parse_model(std::string_view name) {
  if (name == "streaming") return Model::streaming;
  if (name == "integrated") return Model::integrated;
  if (name == "peak_rate") return Model::peak_rate;
  throw InputError("unknown model '" + std::string(name) + "' (expected streaming, integrated or peak_rate)");
}

void validate_traffic(const Network& net, const TrafficSpec& traffic, Model model) {
  if (traffic.size() != net.num_users())
    throw InputError("traffic has " + std::to_string(traffic.size()) + " users, network has " +
                     std::to_string(net.num_users()));
  for (std::size_t i = 0; i < traffic.size(); ++i) {
    const auto& t = traffic[i];
    const std::string who = "user '" + net.users()[i].id + "'";
    if (t.lambda < 0 || t.kappa < 0) throw InputError(who + ": arrival rates must be nonnegative");
    if (model != Model::streaming && t.mu <= 0) throw InputError(who + ": mu must be positive");
    if (model != Model::peak_rate && t.eta <= 0) throw InputError(who + ": eta must be positive");
    if (model == Model::peak_rate) {
      if (!t.peak_rate) throw InputError(who + ": peak_rate model needs a peak rate");
      if (*t.peak_rate <= 0) throw InputError(who + ": peak rate must be positive");
    }
  }
}

std::vector<Rational> elastic_loads(const TrafficSpec& traffic) {
  std::vector<Rational> out;
  out.reserve(traffic.size());
  for (const auto& t : traffic) out.push_back(t.rho());
  return out;
}

StabilityReport stability_check(const Network& net, const std::vector<Rational>& rho,
                                const EnumerationOptions& opts) {
  if (rho.size() != net.num_users()) throw InputError("one load per user expected");
  StabilityReport report;
  for (ResourceMask s : enumerate_strongly_connected(net, opts)) {
    Rational load = 0;
    for (auto i : mask_indices(users_inside(net, s))) load += rho[i];
    if (load >= net.capacity(s)) {
      report.stable = false;
      report.violated.push_back(s);
    }
  }
  return report;
}

double SimResult::blocking(std::size_t user) const {
  if (arrivals.at(user) == 0) return 0.0;
  return static_cast<double>(blocked[user]) / static_cast<double>(arrivals[user]);
}

double student_t_quantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

double ci_half_width(const std::vector<double>& samples, double confidence) {
  const auto k = samples.size();
  if (k < 2) return HUGE_VAL;
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(k - 1));
  return student_t_quantile(0.5 + confidence / 2.0, static_cast<double>(k - 1)) * sd /
         std::sqrt(static_cast<double>(k));
}

namespace {

using State = std::vector<std::int64_t>;

struct StateHash {
  std::size_t operator()(const State& s) const { return boost::hash_range(s.begin(), s.end()); }
};

/// x(counts; C) as doubles, memoized. Rates for zero-count users are 0.
class RateCache {
 public:
  RateCache(const Network& net, std::size_t limit, EnumerationOptions opts)
      : net_(net), limit_(limit), opts_(opts) {}

  const std::vector<double>& operator()(const State& counts) {
    if (auto it = memo_.find(counts); it != memo_.end()) return it->second;
    if (memo_.size() >= limit_) memo_.clear();
    Counts exact(counts.begin(), counts.end());
    const auto dec = allocate(net_, exact, opts_);
    std::vector<double> x(counts.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = to_double(dec.rate[i]);
    return memo_.emplace(counts, std::move(x)).first->second;
  }

 private:
  const Network& net_;
  std::size_t limit_;
  EnumerationOptions opts_;
  std::unordered_map<State, std::vector<double>, StateHash> memo_;
};

struct Replication {
  // Integrals over each batch; divided by the batch length at merge time.
  std::vector<std::vector<double>> n, m;
  std::vector<double> load;
  std::vector<std::vector<std::uint64_t>> arrivals, blocked;
  std::uint64_t transitions = 0;
  std::vector<Sample> trajectory;
};

struct Params {
  std::vector<double> lambda, mu, kappa, eta, peak;
  double scale;
  std::optional<double> threshold;
};

double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Replication run_one(const Network& net, const Params& p, const SimConfig& cfg, std::uint64_t seed,
                    bool record) {
  const std::size_t users = net.num_users();
  const std::size_t batches = cfg.batches;
  const double span = (cfg.horizon - cfg.warmup) / static_cast<double>(batches);
  std::mt19937_64 rng(seed);
  RateCache rates(net, cfg.memo_limit, cfg.enumeration);

  State n = cfg.initial.n.empty() ? State(users, 0) : cfg.initial.n;
  State m = cfg.initial.m.empty() ? State(users, 0) : cfg.initial.m;

  Replication rep;
  rep.n.assign(batches, std::vector<double>(users, 0.0));
  rep.m.assign(batches, std::vector<double>(users, 0.0));
  rep.load.assign(users, 0.0);
  rep.arrivals.assign(batches, std::vector<std::uint64_t>(users, 0));
  rep.blocked.assign(batches, std::vector<std::uint64_t>(users, 0));

  auto batch_of = [&](double t) {
    const auto k = static_cast<std::size_t>((t - cfg.warmup) / span);
    return std::min(k, batches - 1);
  };

  std::vector<double> served(users, 0.0);  // n_i times its effective rate
  auto integrate = [&](double a, double b) {
    a = std::max(a, cfg.warmup);
    while (a < b) {
      const auto k = batch_of(a);
      const double end = k + 1 == batches ? b : std::min(b, cfg.warmup + span * static_cast<double>(k + 1));
      const double dt = end - a;
      for (std::size_t i = 0; i < users; ++i) {
        rep.n[k][i] += dt * static_cast<double>(n[i]);
        rep.m[k][i] += dt * static_cast<double>(m[i]);
        rep.load[i] += dt * served[i];
      }
      a = end;
    }
  };

  auto allocation_input = [&] {
    State c(users);
    for (std::size_t i = 0; i < users; ++i) {
      c[i] = cfg.model == Model::integrated ? n[i] + m[i] : (cfg.model == Model::peak_rate ? n[i] : m[i]);
    }
    return c;
  };

  double next_sample = 0.0;
  std::vector<double> event(4 * users);
  double t = 0.0;
  for (;;) {
    const bool elastic = cfg.model != Model::streaming;
    const bool streaming = cfg.model != Model::peak_rate;
    std::fill(served.begin(), served.end(), 0.0);
    if (elastic) {
      const auto& x = rates(allocation_input());
      for (std::size_t i = 0; i < users; ++i) {
        const double rate = p.scale * x[i];
        served[i] = static_cast<double>(n[i]) * (cfg.model == Model::peak_rate ? std::min(rate, p.peak[i]) : rate);
      }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < users; ++i) {
      event[4 * i + 0] = elastic ? p.scale * p.lambda[i] : 0.0;
      event[4 * i + 1] = elastic ? p.mu[i] * served[i] : 0.0;
      event[4 * i + 2] = streaming ? p.scale * p.kappa[i] : 0.0;
      event[4 * i + 3] = streaming ? p.eta[i] * static_cast<double>(m[i]) : 0.0;
    }
    for (double r : event) total += r;

    const double next = total > 0.0 ? t - std::log1p(-uniform(rng)) / total : cfg.horizon;
    const double stop = std::min(next, cfg.horizon);
    if (record && cfg.sample_interval > 0.0) {
      while (next_sample < stop) {
        rep.trajectory.push_back({next_sample, n, m});
        next_sample += cfg.sample_interval;
      }
    }
    integrate(t, stop);
    if (next >= cfg.horizon) break;
    t = next;

    double pick = uniform(rng) * total;
    std::size_t e = 0;
    for (; e + 1 < event.size(); ++e) {
      if (pick < event[e]) break;
      pick -= event[e];
    }
    while (event[e] == 0.0) --e;  // rounding at the top end
    const std::size_t i = e / 4;
    ++rep.transitions;
    switch (e % 4) {
      case 0: ++n[i]; break;
      case 1: --n[i]; break;
      case 2: {
        bool admit = true;
        if (p.threshold) {
          State c = allocation_input();
          ++c[i];
          const auto& x = rates(c);
          for (std::size_t u = 0; u < users; ++u) {
            if (c[u] > 0 && p.scale * x[u] < *p.threshold) admit = false;
          }
        }
        if (t >= cfg.warmup) {
          const auto k = batch_of(t);
          ++rep.arrivals[k][i];
          if (!admit) ++rep.blocked[k][i];
        }
        if (admit) ++m[i];
        break;
      }
      default: --m[i]; break;
    }
  }
  return rep;
}

}  // namespace

SimResult simulate(const Network& net, const TrafficSpec& traffic, const SimConfig& cfg) {
  validate_traffic(net, traffic, cfg.model);
  if (!(cfg.horizon > 0.0)) throw InputError("horizon must be positive");
  if (!(cfg.warmup >= 0.0) || !(cfg.warmup < cfg.horizon))
    throw InputError("warmup must lie in [0, horizon)");
  if (cfg.scale < 1) throw InputError("scale must be at least 1");
  if (cfg.replications < 1) throw InputError("at least one replication is required");
  if (cfg.batches < 1) throw InputError("at least one batch is required");
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) throw InputError("confidence must lie in (0, 1)");
  if (cfg.sample_interval < 0.0) throw InputError("sample interval must be nonnegative");
  if (cfg.admission_threshold && *cfg.admission_threshold <= 0)
    throw InputError("admission threshold must be positive");
  for (const auto* v : {&cfg.initial.n, &cfg.initial.m}) {
    if (!v->empty() && v->size() != net.num_users()) throw InputError("initial state has the wrong size");
    for (auto c : *v) {
      if (c < 0) throw InputError("initial state must be nonnegative");
    }
  }
  if (cfg.model != Model::streaming) {
    const auto report = stability_check(net, elastic_loads(traffic), cfg.enumeration);
    if (!report.stable) {
      std::string ids;
      for (auto s : report.violated) {
        std::string set;
        for (const auto& id : net.resource_ids(s)) set += (set.empty() ? "" : ",") + id;
        ids += (ids.empty() ? "{" : ", {") + set + "}";
      }
      throw StabilityError("elastic loads violate the stability condition on " + ids);
    }
  } else {
    detail::check_cap(net.num_resources(), cfg.enumeration);
  }

  Params p;
  p.scale = static_cast<double>(cfg.scale);
  for (const auto& t : traffic) {
    p.lambda.push_back(to_double(t.lambda));
    p.mu.push_back(to_double(t.mu));
    p.kappa.push_back(to_double(t.kappa));
    p.eta.push_back(to_double(t.eta));
    p.peak.push_back(t.peak_rate ? to_double(*t.peak_rate) : HUGE_VAL);
  }
  if (cfg.admission_threshold) p.threshold = to_double(*cfg.admission_threshold);

  std::vector<std::future<Replication>> jobs;
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    jobs.push_back(std::async(std::launch::async, run_one, std::cref(net), std::cref(p), std::cref(cfg),
                              cfg.seed + r, r == 0));
  }
  std::vector<Replication> reps;
  for (auto& j : jobs) reps.push_back(j.get());

  const std::size_t users = net.num_users();
  const double window = cfg.horizon - cfg.warmup;
  const double span = window / static_cast<double>(cfg.batches);
  const double count = static_cast<double>(reps.size());

  SimResult out;
  out.seed = cfg.seed;
  out.replications = reps.size();
  out.mean_n.assign(users, 0.0);
  out.mean_m.assign(users, 0.0);
  out.mean_load.assign(users, 0.0);
  out.arrivals.assign(users, 0);
  out.blocked.assign(users, 0);
  for (std::size_t i = 0; i < users; ++i) {
    std::vector<double> bn, bm, bb;
    for (const auto& rep : reps) {
      double sn = 0.0, sm = 0.0;
      for (std::size_t k = 0; k < cfg.batches; ++k) {
        sn += rep.n[k][i];
        sm += rep.m[k][i];
        bn.push_back(rep.n[k][i] / span);
        bm.push_back(rep.m[k][i] / span);
        out.arrivals[i] += rep.arrivals[k][i];
        out.blocked[i] += rep.blocked[k][i];
        if (rep.arrivals[k][i] > 0)
          bb.push_back(static_cast<double>(rep.blocked[k][i]) / static_cast<double>(rep.arrivals[k][i]));
      }
      out.mean_n[i] += sn / window / count;
      out.mean_m[i] += sm / window / count;
      out.mean_load[i] += rep.load[i] / window / count;
    }
    out.ci_n.push_back(ci_half_width(bn, cfg.confidence));
    out.ci_m.push_back(ci_half_width(bm, cfg.confidence));
    out.ci_blocking.push_back(ci_half_width(bb, cfg.confidence));
  }
  for (const auto& rep : reps) out.transitions += rep.transitions;
  out.trajectory = std::move(reps.front().trajectory);
  return out;
}

BlockingResult streaming_blocking(const Network& net, const TrafficSpec& traffic, const Rational& y,
                                  std::optional<std::int64_t> truncation, const EnumerationOptions& opts) {
  validate_traffic(net, traffic, Model::streaming);
  if (y <= 0) throw InputError("threshold must be positive");
  detail::check_cap(net.num_resources(), opts);
  const std::size_t users = net.num_users();

  BlockingResult out;
  std::vector<Rational> load;
  for (std::size_t i = 0; i < users; ++i) {
    // n_i x_i <= C(J(i)) while x_i >= y inside A.
    const Rational bound = net.capacity(net.user_mask(i)) / y;
    const auto floor_bound =
        static_cast<std::int64_t>(boost::multiprecision::numerator(bound) / boost::multiprecision::denominator(bound));
    out.bounds.push_back(floor_bound);
    if (truncation && *truncation < floor_bound)
      throw InputError("truncation " + std::to_string(*truncation) + " is below the bound " +
                       std::to_string(floor_bound) + " for user '" + net.users()[i].id + "'");
    load.push_back(traffic[i].streaming_load());
  }

  std::map<State, Rational> weight;
  std::deque<State> queue;
  const State origin(users, 0);
  weight.emplace(origin, Rational(1));
  queue.push_back(origin);
  auto feasible = [&](const State& s) {
    Counts c(s.begin(), s.end());
    return min_rate(net, c, opts) >= y;
  };
  std::map<State, bool> membership{{origin, true}};
  auto member = [&](const State& s) {
    if (auto it = membership.find(s); it != membership.end()) return it->second;
    return membership.emplace(s, feasible(s)).first->second;
  };

  while (!queue.empty()) {
    const State s = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i < users; ++i) {
      State next = s;
      ++next[i];
      if (weight.count(next) || !member(next)) continue;
      if (next[i] > out.bounds[i]) throw ConsistencyError("admissible state beyond the cut bound");
      weight.emplace(next, weight.at(s) * load[i] / next[i]);
      queue.push_back(std::move(next));
    }
  }

  Rational total = 0;
  std::vector<Rational> blocked(users, Rational(0));
  for (const auto& [s, w] : weight) {
    total += w;
    for (std::size_t i = 0; i < users; ++i) {
      State next = s;
      ++next[i];
      if (!member(next)) blocked[i] += w;
    }
  }
  out.states = weight.size();
  for (auto& b : blocked) out.probability.push_back(b / total);
  return out;
}

}  // namespace multipath
