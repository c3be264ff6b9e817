#include "multipath/cli.hpp"

#include "multipath/alloc.hpp"
#include "multipath/circle.hpp"
#include "multipath/convex_oracle.hpp"
#include "multipath/cuts.hpp"
#include "multipath/dynamics.hpp"
#include "multipath/equilibrium.hpp"
#include "multipath/error.hpp"
#include "multipath/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace multipath::cli {
namespace {

using io::json;

struct Options {
  std::string network, counts, loads, traffic, output, format = "json";
  bool csv = false;
  std::size_t max_resources = kDefaultEnumerationCap;

  double alpha = 1.0, tol = 1e-8;
  std::size_t max_iterations = 100000;

  std::string model = "integrated";
  std::int64_t scale = 1;
  double horizon = 0.0, warmup = 0.0, confidence = 0.95;
  std::uint64_t seed = 0;
  std::size_t reps = 1, batches = 20;
  std::string threshold;
  std::int64_t truncation = -1;

  CircleParams circle;
  double eps = 0.01;
};

/// Output of a command: JSON, or CSV text when requested and supported.
struct Output {
  json doc;
  std::string csv;
};

EnumerationOptions enumeration(const Options& o) { return EnumerationOptions{o.max_resources}; }

std::string fixed(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

io::NetworkDocument load_network(const Options& o) { return io::network_from_json(io::read_json_file(o.network)); }

Counts counts_for(const Options& o, const io::NetworkDocument& doc) {
  if (o.counts.empty()) return doc.population.total();
  return io::user_values_from_json(io::read_json_file(o.counts), doc.network, "counts");
}

Output cmd_allocate(const Options& o) {
  const auto doc = load_network(o);
  const auto counts = counts_for(o, doc);
  const auto dec = allocate(doc.network, counts, enumeration(o));
  const auto split = split_rates(doc.network, counts, dec);
  Output out;
  out.doc = io::decomposition_to_json(doc.network, dec, split);
  std::ostringstream csv;
  csv << "user,count,rate,rate_float\n";
  for (std::size_t i = 0; i < doc.network.num_users(); ++i) {
    csv << doc.network.users()[i].id << ',' << to_string(counts[i]) << ',' << to_string(dec.rate[i]) << ','
        << fixed(to_double(dec.rate[i])) << '\n';
  }
  out.csv = csv.str();
  return out;
}

Output cmd_verify_cuts(const Options& o) {
  const auto doc = load_network(o);
  const auto loads = io::user_values_from_json(io::read_json_file(o.loads), doc.network, "loads");
  const auto report = gcc_feasible(doc.network, loads, enumeration(o));
  json violated = json::array();
  for (auto s : report.violated) violated.push_back(io::ids(doc.network, s));
  Output out;
  out.doc = {{"feasible", report.feasible},
             {"maxflow_feasible", maxflow_feasible(doc.network, loads)},
             {"violated", std::move(violated)}};
  return out;
}

Output cmd_oracle(const Options& o) {
  const auto doc = load_network(o);
  const auto counts = counts_for(o, doc);
  const auto sol = solve_num(doc.network, counts, UtilitySpec{o.alpha}, OracleOptions{o.tol, o.max_iterations});
  const auto& net = doc.network;
  json rates = json::object(), prices = json::object(), splits = json::object();
  for (std::size_t i = 0; i < net.num_users(); ++i) {
    rates[net.users()[i].id] = sol.rate[i];
    json row = json::object();
    for (auto j : net.users()[i].resources) row[net.resources()[j].id] = sol.split[i][j];
    splits[net.users()[i].id] = std::move(row);
  }
  for (std::size_t j = 0; j < net.num_resources(); ++j) prices[net.resources()[j].id] = sol.price[j];
  Output out;
  out.doc = {{"rates", std::move(rates)},
             {"prices", std::move(prices)},
             {"splits", std::move(splits)},
             {"gap", sol.gap},
             {"iterations", sol.iterations},
             {"crossover", sol.crossover},
             {"alpha", o.alpha}};
  std::ostringstream csv;
  csv << "user,rate\n";
  for (std::size_t i = 0; i < net.num_users(); ++i) csv << net.users()[i].id << ',' << fixed(sol.rate[i]) << '\n';
  out.csv = csv.str();
  return out;
}

Output cmd_simulate(const Options& o) {
  const auto doc = load_network(o);
  const auto model = parse_model(o.model);
  const auto traffic = io::traffic_from_json(io::read_json_file(o.traffic), doc.network);
  SimConfig cfg;
  cfg.model = model;
  cfg.scale = o.scale;
  cfg.horizon = o.horizon;
  cfg.warmup = o.warmup;
  cfg.seed = o.seed;
  cfg.replications = o.reps;
  cfg.batches = o.batches;
  cfg.confidence = o.confidence;
  cfg.initial = doc.population;
  cfg.enumeration = enumeration(o);
  if (!o.threshold.empty()) cfg.admission_threshold = parse_rational(o.threshold);
  const auto res = simulate(doc.network, traffic, cfg);

  const auto& net = doc.network;
  json users = json::object();
  std::ostringstream csv;
  csv << "user,mean_n,ci_n,mean_m,ci_m,mean_load,arrivals,blocked,blocking\n";
  for (std::size_t i = 0; i < net.num_users(); ++i) {
    users[net.users()[i].id] = {{"mean_n", res.mean_n[i]},       {"ci_n", res.ci_n[i]},
                                {"mean_m", res.mean_m[i]},       {"ci_m", res.ci_m[i]},
                                {"mean_load", res.mean_load[i]}, {"arrivals", res.arrivals[i]},
                                {"blocked", res.blocked[i]},     {"blocking", res.blocking(i)},
                                {"ci_blocking", res.ci_blocking[i]}};
    csv << net.users()[i].id << ',' << fixed(res.mean_n[i]) << ',' << fixed(res.ci_n[i]) << ','
        << fixed(res.mean_m[i]) << ',' << fixed(res.ci_m[i]) << ',' << fixed(res.mean_load[i]) << ','
        << res.arrivals[i] << ',' << res.blocked[i] << ',' << fixed(res.blocking(i)) << '\n';
  }
  Output out;
  out.doc = {{"model", to_string(model)}, {"scale", o.scale},       {"horizon", o.horizon},
             {"warmup", o.warmup},        {"seed", o.seed},         {"replications", res.replications},
             {"transitions", res.transitions}, {"confidence", o.confidence}, {"users", std::move(users)}};
  out.csv = csv.str();
  return out;
}

json masks_to_json(const Network& net, const std::vector<ResourceMask>& sets) {
  json out = json::array();
  for (auto s : sets) out.push_back(io::ids(net, s));
  return out;
}

Output cmd_equilibrium(const Options& o) {
  const auto doc = load_network(o);
  const auto model = parse_model(o.model);
  if (model == Model::streaming) throw InputError("equilibrium supports the integrated and peak_rate models");
  const auto traffic = io::traffic_from_json(io::read_json_file(o.traffic), doc.network);
  const auto& net = doc.network;
  const auto opts = enumeration(o);

  Output out;
  if (model == Model::integrated) {
    const auto eq = integrated_equilibrium(net, traffic, opts);
    const auto crp = crp_check_integrated(net, traffic, opts);
    out.doc = io::equilibrium_to_json(net, eq);
    out.doc["crp"] = crp.pooled;
    out.doc["crp_violated"] = masks_to_json(net, crp.violated);
    out.doc["crp_boundary"] = masks_to_json(net, crp.boundary);
  } else {
    const auto eq = peak_rate_equilibrium(net, traffic, opts);
    const auto crp = crp_check_peak(net, traffic, opts);
    out.doc = io::equilibrium_to_json(net, eq);
    out.doc["crp"] = eq.levels.size() == 1 && eq.levels.front().resources == net.all_resources();
    out.doc["crp_sufficient"] = crp.pooled;
  }
  out.doc["model"] = to_string(model);
  return out;
}

Output cmd_blocking(const Options& o) {
  const auto doc = load_network(o);
  const auto traffic = io::traffic_from_json(io::read_json_file(o.traffic), doc.network);
  if (o.threshold.empty()) throw InputError("--threshold is required");
  std::optional<std::int64_t> truncation;
  if (o.truncation >= 0) truncation = o.truncation;
  const auto res = streaming_blocking(doc.network, traffic, parse_rational(o.threshold), truncation, enumeration(o));
  const auto& net = doc.network;
  json prob = json::object(), floats = json::object(), bounds = json::object();
  std::ostringstream csv;
  csv << "user,blocking,blocking_float\n";
  for (std::size_t i = 0; i < net.num_users(); ++i) {
    const auto& id = net.users()[i].id;
    prob[id] = io::rational(res.probability[i]);
    floats[id] = to_double(res.probability[i]);
    bounds[id] = res.bounds[i];
    csv << id << ',' << to_string(res.probability[i]) << ',' << fixed(to_double(res.probability[i])) << '\n';
  }
  Output out;
  out.doc = {{"probability", std::move(prob)},
             {"probability_float", std::move(floats)},
             {"states", res.states},
             {"bounds", std::move(bounds)},
             {"threshold", o.threshold}};
  out.csv = csv.str();
  return out;
}

Output cmd_circle(const Options& o) {
  const auto& p = o.circle;
  const auto eq = circle_equilibrium(p);
  const auto s = diffusion_scalars(p);
  const auto cov = covariance_closed(p);
  const auto terms = congestion_probabilities(p, o.eps);
  const auto size = most_likely_cluster_size(p, o.eps);

  json table = json::array();
  std::ostringstream csv;
  csv << "k,z,log_probability,probability\n";
  for (const auto& t : terms) {
    table.push_back({{"k", t.k}, {"z", t.z}, {"log_probability", t.log_probability}, {"probability", t.probability}});
    csv << t.k << ',' << fixed(t.z) << ',' << fixed(t.log_probability) << ',' << fixed(t.probability) << '\n';
  }
  Output out;
  out.doc = {
      {"params",
       {{"N", p.N}, {"r", p.r}, {"C", p.C}, {"lambda", p.lambda}, {"mu", p.mu}, {"kappa", p.kappa}, {"eta", p.eta},
        {"eps", o.eps}}},
      {"equilibrium",
       {{"n_hat", to_double(eq.n_hat)},
        {"m_hat", to_double(eq.m_hat)},
        {"x_hat", to_double(eq.x_hat)},
        {"exact", {{"n_hat", to_string(eq.n_hat)}, {"m_hat", to_string(eq.m_hat)}, {"x_hat", to_string(eq.x_hat)}}}}},
      {"diffusion", {{"q", s.q}, {"d", s.d}, {"V", s.V}, {"C", s.Cov}, {"C_prime", s.Cprime}, {"V_prime", s.Vprime}}},
      {"covariances",
       {{"cov_nn", cov.cov_nn}, {"var_n", cov.var_n}, {"cov_nm", cov.cov_nm}, {"var_m", cov.var_m},
        {"cov_mm", cov.cov_mm}}},
      {"congestion", std::move(table)},
      {"k_argmax", size.k_argmax},
      {"k0", size.k0 ? json(*size.k0) : json(nullptr)}};
  out.csv = csv.str();
  return out;
}

json error_json(const char* kind, const std::string& message, int code) {
  return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Flow-level multipath routing on single-hop networks"};
  app.name("multipath");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for every command");

  auto common = [&](CLI::App* sub, bool network = true) {
    if (network) sub->add_option("--network", o.network, "Network JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--max-resources", o.max_resources, "Cap on |J| for subset enumeration (at most 63)")
        ->check(CLI::Range(1, 63));
    sub->add_option("-o,--output", o.output, "Write the result here instead of standard output");
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--csv", o.csv, "Shorthand for --format csv");
  };

  auto* allocate_cmd = app.add_subcommand("allocate", "Exact rate allocation and cluster levels");
  common(allocate_cmd);
  allocate_cmd->add_option("--counts", o.counts, "Counts JSON {user: n}; default: n + m from the network")
      ->check(CLI::ExistingFile);
  allocate_cmd->footer("CSV columns: user,count,rate,rate_float");

  auto* cuts_cmd = app.add_subcommand("verify-cuts", "Check loads against the generalized cut constraints");
  common(cuts_cmd);
  cuts_cmd->add_option("--loads", o.loads, "Loads JSON {user: Lambda}")->required()->check(CLI::ExistingFile);

  auto* oracle_cmd = app.add_subcommand("oracle-solve", "Numerical utility maximization (interior point)");
  common(oracle_cmd);
  oracle_cmd->add_option("--counts", o.counts, "Counts JSON; default: n + m from the network")
      ->check(CLI::ExistingFile);
  oracle_cmd->add_option("--alpha", o.alpha, "alpha-fairness parameter")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--tol", o.tol, "Duality gap target")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--max-iterations", o.max_iterations, "Newton step cap");
  oracle_cmd->footer("CSV columns: user,rate");

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the flow-level Markov chain");
  common(sim_cmd);
  sim_cmd->add_option("--traffic", o.traffic, "Traffic JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--model", o.model, "streaming, integrated or peak_rate");
  sim_cmd->add_option("--scale", o.scale, "Scale L for arrival rates and capacities");
  sim_cmd->add_option("--horizon", o.horizon, "Simulated time including warmup")->required();
  sim_cmd->add_option("--warmup", o.warmup, "Initial time excluded from averages");
  sim_cmd->add_option("--seed", o.seed, "Base seed; replication k uses seed + k");
  sim_cmd->add_option("--reps", o.reps, "Independent replications");
  sim_cmd->add_option("--batches", o.batches, "Batches per replication for the CI");
  sim_cmd->add_option("--confidence", o.confidence, "CI level");
  sim_cmd->add_option("--threshold", o.threshold, "Admission threshold y (rational) for streaming arrivals");
  sim_cmd->footer("CSV columns: user,mean_n,ci_n,mean_m,ci_m,mean_load,arrivals,blocked,blocking");

  auto* eq_cmd = app.add_subcommand("equilibrium", "Fluid-limit equilibrium and resource pooling");
  common(eq_cmd);
  eq_cmd->add_option("--traffic", o.traffic, "Traffic JSON")->required()->check(CLI::ExistingFile);
  eq_cmd->add_option("--model", o.model, "integrated or peak_rate");

  auto* block_cmd = app.add_subcommand("blocking", "Streaming blocking probabilities under admission control");
  common(block_cmd);
  block_cmd->add_option("--traffic", o.traffic, "Traffic JSON")->required()->check(CLI::ExistingFile);
  block_cmd->add_option("--threshold", o.threshold, "Admission threshold y (rational)")->required();
  block_cmd->add_option("--truncation", o.truncation, "Per-user cap on streaming counts");
  block_cmd->footer("CSV columns: user,blocking,blocking_float");

  auto* circle_cmd = app.add_subcommand("circle", "Symmetric circle: equilibrium, covariances, congestion");
  common(circle_cmd, false);
  circle_cmd->add_option("--N", o.circle.N, "Number of resources and users")->required();
  circle_cmd->add_option("--r", o.circle.r, "Resources per user")->required();
  circle_cmd->add_option("--C", o.circle.C, "Capacity per resource");
  circle_cmd->add_option("--lambda", o.circle.lambda, "Elastic arrival rate");
  circle_cmd->add_option("--mu", o.circle.mu, "Elastic service rate");
  circle_cmd->add_option("--kappa", o.circle.kappa, "Streaming arrival rate");
  circle_cmd->add_option("--eta", o.circle.eta, "Streaming departure rate");
  circle_cmd->add_option("--eps", o.eps, "Congestion threshold on the rate");
  circle_cmd->footer("CSV columns: k,z,log_probability,probability");

  auto fail = [&](const char* kind, const std::string& message, int code, json extra = json::object()) {
    auto doc = error_json(kind, message, code);
    for (auto& [k, v] : extra.items()) doc["error"][k] = v;
    err << doc.dump() << '\n';
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kUsage);
  }

  try {
    Output result;
    if (allocate_cmd->parsed()) result = cmd_allocate(o);
    else if (cuts_cmd->parsed()) result = cmd_verify_cuts(o);
    else if (oracle_cmd->parsed()) result = cmd_oracle(o);
    else if (sim_cmd->parsed()) result = cmd_simulate(o);
    else if (eq_cmd->parsed()) result = cmd_equilibrium(o);
    else if (block_cmd->parsed()) result = cmd_blocking(o);
    else result = cmd_circle(o);

    const bool csv = o.csv || o.format == "csv";
    if (csv && result.csv.empty()) throw InputError("this command has no CSV output");
    const std::string text = csv ? result.csv : result.doc.dump(2) + "\n";
    if (o.output.empty()) {
      out << text;
    } else {
      std::ofstream file(o.output, std::ios::binary);
      if (!file) throw InputError("cannot write '" + o.output + "'");
      file << text;
    }
    return kOk;
  } catch (const InputError& e) {
    return fail(e.kind(), e.what(), kUsage);
  } catch (const SizeError& e) {
    return fail(e.kind(), e.what(), kDomain, {{"cap", e.cap()}});
  } catch (const ConvergenceError& e) {
    return fail(e.kind(), e.what(), kDomain, {{"residual", e.residual()}});
  } catch (const ConsistencyError& e) {
    return fail(e.kind(), e.what(), kInternal);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), kDomain);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kInternal);
  }
}

}  // namespace multipath::cli
