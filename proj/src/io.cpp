#include "multipath/io.hpp"

#include "multipath/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace multipath::io {

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": malformed JSON (" + e.what() + ")");
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str(), path.string());
}

Rational rational_from_json(const json& value, const std::string& what) {
  if (value.is_string()) {
    try {
      return parse_rational(value.get<std::string>());
    } catch (const InputError& e) {
      throw InputError(what + ": " + e.what());
    }
  }
  if (value.is_number_integer()) {
    return value.is_number_unsigned() ? Rational(value.get<std::uint64_t>()) : Rational(value.get<std::int64_t>());
  }
  if (value.is_number_float()) return parse_rational(value.dump());
  throw InputError(what + ": expected a number or a rational string");
}

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + ": missing \"" + key + "\"");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) throw InputError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::int64_t count_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return 0;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
    throw InputError(where + ": \"" + key + "\" must be a nonnegative integer");
  return it->get<std::int64_t>();
}

}  // namespace

NetworkDocument network_from_json(const json& doc) {
  const auto& resources = field(doc, "resources", "network");
  const auto& users = field(doc, "users", "network");
  if (!resources.is_array() || !users.is_array()) throw InputError("network: resources and users must be arrays");

  std::vector<Resource> rs;
  for (std::size_t j = 0; j < resources.size(); ++j) {
    const std::string where = "network.resources[" + std::to_string(j) + "]";
    const auto id = string_field(resources[j], "id", where);
    rs.push_back({id, rational_from_json(field(resources[j], "capacity", where), where + ".capacity")});
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> us;
  Population pop;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const std::string where = "network.users[" + std::to_string(i) + "]";
    const auto id = string_field(users[i], "id", where);
    const auto& set = field(users[i], "resources", where);
    if (!set.is_array()) throw InputError(where + ": \"resources\" must be an array");
    std::vector<std::string> names;
    for (const auto& r : set) {
      if (!r.is_string()) throw InputError(where + ": resource ids must be strings");
      names.push_back(r.get<std::string>());
    }
    us.emplace_back(id, std::move(names));
    pop.n.push_back(count_field(users[i], "n", where));
    pop.m.push_back(count_field(users[i], "m", where));
  }
  return {Network::from_ids(std::move(rs), us), std::move(pop)};
}

json network_to_json(const Network& net, const Population& population) {
  json doc{{"resources", json::array()}, {"users", json::array()}};
  for (const auto& r : net.resources()) doc["resources"].push_back({{"id", r.id}, {"capacity", to_string(r.capacity)}});
  for (std::size_t i = 0; i < net.num_users(); ++i) {
    json u{{"id", net.users()[i].id}, {"resources", json::array()}};
    for (auto j : net.users()[i].resources) u["resources"].push_back(net.resources()[j].id);
    if (i < population.n.size()) u["n"] = population.n[i];
    if (i < population.m.size()) u["m"] = population.m[i];
    doc["users"].push_back(std::move(u));
  }
  return doc;
}

TrafficSpec traffic_from_json(const json& doc, const Network& net) {
  const auto& users = field(doc, "users", "traffic");
  if (!users.is_array()) throw InputError("traffic: \"users\" must be an array");
  TrafficSpec spec(net.num_users());
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < users.size(); ++k) {
    const std::string where = "traffic.users[" + std::to_string(k) + "]";
    const auto id = string_field(users[k], "id", where);
    const auto index = net.user_index(id);
    if (!index) throw InputError(where + ": unknown user '" + id + "'");
    if (!seen.insert(*index).second) throw InputError(where + ": duplicate user '" + id + "'");
    auto& t = spec[*index];
    auto read = [&](const char* key, Rational& into) {
      if (auto it = users[k].find(key); it != users[k].end()) into = rational_from_json(*it, where + "." + key);
    };
    read("lambda", t.lambda);
    read("mu", t.mu);
    read("kappa", t.kappa);
    read("eta", t.eta);
    if (auto it = users[k].find("peak_rate"); it != users[k].end() && !it->is_null())
      t.peak_rate = rational_from_json(*it, where + ".peak_rate");
  }
  if (seen.size() != net.num_users()) {
    for (std::size_t i = 0; i < net.num_users(); ++i) {
      if (!seen.count(i)) throw InputError("traffic: no entry for user '" + net.users()[i].id + "'");
    }
  }
  return spec;
}

std::vector<Rational> user_values_from_json(const json& doc, const Network& net, const std::string& what) {
  if (!doc.is_object()) throw InputError(what + ": expected an object mapping user ids to values");
  std::vector<Rational> out(net.num_users(), Rational(0));
  for (const auto& [key, value] : doc.items()) {
    const auto index = net.user_index(key);
    if (!index) throw InputError(what + ": unknown user '" + key + "'");
    out[*index] = rational_from_json(value, what + "." + key);
    if (out[*index] < 0) throw InputError(what + ": values must be nonnegative");
  }
  return out;
}

json ids(const Network& net, ResourceMask resources) { return net.resource_ids(resources); }
json user_ids(const Network& net, UserMask users) { return net.user_ids(users); }
json rational(const Rational& value) { return to_string(value); }

json decomposition_to_json(const Network& net, const ClusterDecomposition& dec, const SplitMatrix& split) {
  json levels = json::array();
  for (const auto& level : dec.levels) {
    json clusters = json::array();
    for (const auto& c : level.clusters) {
      clusters.push_back({{"users", user_ids(net, c.users)}, {"resources", ids(net, c.resources)}});
    }
    levels.push_back({{"users", user_ids(net, level.users)},
                      {"resources", ids(net, level.resources)},
                      {"rate", level.rate.to_string()},
                      {"rate_float", level.rate.is_infinite() ? json(nullptr) : json(level.rate.to_double())},
                      {"clusters", std::move(clusters)}});
  }
  json rates = json::object(), floats = json::object(), splits = json::object();
  for (std::size_t i = 0; i < net.num_users(); ++i) {
    const auto& id = net.users()[i].id;
    rates[id] = rational(dec.rate[i]);
    floats[id] = to_double(dec.rate[i]);
    json row = json::object();
    for (auto j : net.users()[i].resources) row[net.resources()[j].id] = rational(split.value[i][j]);
    splits[id] = std::move(row);
  }
  return {{"levels", std::move(levels)},
          {"rates", std::move(rates)},
          {"rates_float", std::move(floats)},
          {"splits", std::move(splits)},
          {"redundant", ids(net, dec.redundant)}};
}

json equilibrium_to_json(const Network& net, const EquilibriumPoint& eq) {
  json n = json::object(), m = json::object(), x = json::object();
  for (std::size_t i = 0; i < net.num_users(); ++i) {
    const auto& id = net.users()[i].id;
    n[id] = rational(eq.n_hat[i]);
    m[id] = rational(eq.m_hat[i]);
    x[id] = rational(eq.x_hat[i]);
  }
  json levels = json::array();
  for (const auto& level : eq.levels) {
    levels.push_back({{"users", user_ids(net, level.users)},
                      {"resources", ids(net, level.resources)},
                      {"rate", rational(level.rate)},
                      {"constrained", user_ids(net, level.constrained)}});
  }
  return {{"n_hat", std::move(n)},
          {"m_hat", std::move(m)},
          {"x_hat", std::move(x)},
          {"levels", std::move(levels)},
          {"I_star", user_ids(net, eq.peak_constrained)},
          {"redundant", ids(net, eq.redundant)}};
}

}  // namespace multipath::io
