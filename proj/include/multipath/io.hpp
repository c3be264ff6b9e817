#pragma once

#include "multipath/alloc.hpp"
#include "multipath/cuts.hpp"
#include "multipath/dynamics.hpp"
#include "multipath/equilibrium.hpp"
#include "multipath/network.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace multipath::io {

using nlohmann::json;

/// Reads and parses a JSON file. Malformed input raises InputError with the
/// parser's line/column information.
json read_json_file(const std::filesystem::path& path);
json parse_json(const std::string& text, const std::string& origin = "input");

/// "p/q", integer and decimal strings, or JSON numbers (re-read from their
/// shortest text form, so 0.1 means 1/10).
Rational rational_from_json(const json& value, const std::string& what);

struct NetworkDocument {
  Network network;
  Population population;  // from optional "n" / "m" per user, default 0
};

/// {"resources":[{"id","capacity"}],"users":[{"id","resources":[...],"n","m"}]}
NetworkDocument network_from_json(const json& doc);
json network_to_json(const Network& net, const Population& population = {});

/// {"users":[{"id","lambda","mu","kappa","eta","peak_rate"}]}; missing mu and
/// eta default to 1, missing arrival rates to 0. Every network user must appear.
TrafficSpec traffic_from_json(const json& doc, const Network& net);

/// Object mapping user id to a value; missing users default to 0.
std::vector<Rational> user_values_from_json(const json& doc, const Network& net, const std::string& what);

json ids(const Network& net, ResourceMask resources);
json user_ids(const Network& net, UserMask users);
json rational(const Rational& value);

json decomposition_to_json(const Network& net, const ClusterDecomposition& dec, const SplitMatrix& split);
json equilibrium_to_json(const Network& net, const EquilibriumPoint& eq);

}  // namespace multipath::io
