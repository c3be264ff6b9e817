#include "doctest.h"
#include "support.hpp"

#include "multipath/cli.hpp"
#include "multipath/error.hpp"
#include "multipath/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mpt;
using multipath::io::json;

namespace {

const std::filesystem::path fixtures = MULTIPATH_FIXTURES;

std::string fixture(const char* name) { return (fixtures / name).string(); }

struct Run {
  int code;
  std::string out, err;
  json out_json() const { return json::parse(out); }
  json err_json() const { return json::parse(err); }
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = multipath::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("multipath_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

json slurp(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

}  // namespace

TEST_CASE("rational_from_json") {
  using multipath::io::rational_from_json;
  CHECK(rational_from_json(json("3/4"), "x") == Rational(3, 4));
  CHECK(rational_from_json(json(0.1), "x") == Rational(1, 10));
  CHECK(rational_from_json(json(-2), "x") == -2);
  CHECK(rational_from_json(json("1.25"), "x") == Rational(5, 4));
  CHECK_THROWS_AS(rational_from_json(json(true), "x"), InputError);
  CHECK_THROWS_AS(rational_from_json(json("1/0"), "x"), InputError);
  CHECK_THROWS_AS(rational_from_json(json("abc"), "x"), InputError);
}

TEST_CASE("network documents") {
  using namespace multipath::io;
  const auto doc = network_from_json(read_json_file(fixture("ring4.json")));
  CHECK(doc.network.num_resources() == 4);
  CHECK(doc.population.n == std::vector<std::int64_t>{4, 1, 1, 1});
  CHECK(route_mask(doc.network, 3) == set_of({1, 4}));

  const auto back = network_from_json(network_to_json(doc.network, doc.population));
  CHECK(back.population.n == doc.population.n);
  for (std::size_t i = 0; i < 4; ++i) CHECK(route_mask(back.network, i) == route_mask(doc.network, i));

  auto bad = [](const char* text) { return network_from_json(parse_json(text)); };
  CHECK_THROWS_AS(bad(R"({"resources":[{"id":"a","capacity":1}],"users":[{"id":"u","resources":["b"]}]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"resources":[{"id":"a","capacity":1},{"id":"a","capacity":1}],"users":[]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"resources":[{"id":"a","capacity":1}],"users":[{"id":"u","resources":["a"],"n":-1}]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"resources":[{"id":"a","capacity":0}],"users":[]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"resources":[{"id":"a"}],"users":[]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"users":[]})"), InputError);
  try {
    parse_json("{\n  \"resources\": [\n", "net.json");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("net.json") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("traffic documents") {
  using namespace multipath::io;
  const auto net = ring4();
  const auto t = traffic_from_json(read_json_file(fixture("ring4_traffic.json")), net);
  CHECK(t[0].lambda == Rational(1, 2));
  CHECK(t[1].kappa == Rational(1, 4));
  CHECK(*t[3].peak_rate == 4);
  const auto defaults = traffic_from_json(parse_json(R"({"users":[{"id":"1"},{"id":"2"},{"id":"3"},{"id":"4"}]})"), net);
  CHECK(defaults[2].mu == 1);
  CHECK(defaults[2].eta == 1);
  CHECK(defaults[2].lambda == 0);
  CHECK_FALSE(defaults[2].peak_rate);
  CHECK_THROWS_AS(traffic_from_json(parse_json(R"({"users":[{"id":"1"}]})"), net), InputError);
  CHECK_THROWS_AS(traffic_from_json(parse_json(R"({"users":[{"id":"1"},{"id":"1"}]})"), net), InputError);
  CHECK_THROWS_AS(traffic_from_json(parse_json(R"({"users":[{"id":"9"}]})"), net), InputError);
  CHECK_THROWS_AS(user_values_from_json(parse_json(R"({"9": 1})"), net, "counts"), InputError);
  CHECK_THROWS_AS(user_values_from_json(parse_json(R"({"1": -1})"), net, "counts"), InputError);
  CHECK(user_values_from_json(parse_json(R"({"2": "3/2"})"), net, "counts")[1] == Rational(3, 2));
}

TEST_CASE("cli allocate matches the golden output") {
  const auto r = invoke({"allocate", "--network", fixture("ring4.json")});
  REQUIRE(r.code == multipath::cli::kOk);
  CHECK(r.out_json() == slurp(fixture("ring4_allocate.golden.json")));

  const auto csv = invoke({"allocate", "--network", fixture("ring4.json"), "--csv"});
  CHECK(csv.out ==
        "user,count,rate,rate_float\n1,4,1/2,0.5\n2,1,2/3,0.6666666666666666\n3,1,2/3,0.6666666666666666\n"
        "4,1,2/3,0.6666666666666666\n");

  const auto counts_file = scratch("counts.json", R"({"1": 1, "2": 1, "3": 1, "4": 1})");
  const auto uniform = invoke({"allocate", "--network", fixture("ring4.json"), "--counts", counts_file});
  REQUIRE(uniform.code == 0);
  CHECK(uniform.out_json()["rates"]["3"] == "1");
  CHECK(uniform.out_json()["levels"].size() == 1);

  const auto path = (std::filesystem::temp_directory_path() / "multipath_test_out.json").string();
  const auto to_file = invoke({"allocate", "--network", fixture("ring4.json"), "-o", path});
  CHECK(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(slurp(path) == r.out_json());
}

TEST_CASE("cli verify-cuts") {
  const auto inside = scratch("loads_ok.json", R"({"1": 2, "2": "2/3", "3": "2/3", "4": "2/3"})");
  const auto ok = invoke({"verify-cuts", "--network", fixture("ring4.json"), "--loads", inside});
  REQUIRE(ok.code == 0);
  CHECK(ok.out_json()["feasible"] == true);
  CHECK(ok.out_json()["maxflow_feasible"] == true);

  const auto over = scratch("loads_bad.json", R"({"1": 3})");
  const auto bad = invoke({"verify-cuts", "--network", fixture("ring4.json"), "--loads", over});
  REQUIRE(bad.code == 0);
  CHECK(bad.out_json()["feasible"] == false);
  CHECK(bad.out_json()["maxflow_feasible"] == false);
  CHECK_FALSE(bad.out_json()["violated"].empty());
}

TEST_CASE("cli oracle-solve") {
  const auto r = invoke({"oracle-solve", "--network", fixture("ring4.json"), "--alpha", "2"});
  REQUIRE(r.code == 0);
  const auto out = r.out_json();
  CHECK(out["rates"]["1"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(out["rates"]["2"].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-6));
  const auto capped = invoke({"oracle-solve", "--network", fixture("ring4.json"), "--max-iterations", "2"});
  CHECK(capped.code == multipath::cli::kDomain);
  CHECK(capped.err_json()["error"]["kind"] == "convergence");
}

TEST_CASE("cli equilibrium") {
  const auto r = invoke({"equilibrium", "--network", fixture("ring4.json"), "--traffic", fixture("ring4_traffic.json")});
  REQUIRE(r.code == 0);
  const auto out = r.out_json();
  CHECK(out["model"] == "integrated");
  CHECK(out["x_hat"]["1"] == "11/4");
  CHECK(out["n_hat"]["1"] == "2/11");
  CHECK(out["crp"] == true);

  const auto boundary = invoke({"equilibrium", "--network", fixture("boundary.json"), "--traffic",
                           fixture("boundary_traffic.json"), "--model", "peak_rate"});
  CHECK(boundary.code == multipath::cli::kDomain);
  CHECK(boundary.out.empty());
  CHECK(boundary.err_json()["error"]["kind"] == "non_uniqueness");
  CHECK(boundary.err_json()["error"]["exit_code"] == 3);

  const auto heavy = scratch("heavy.json", R"({"users":[{"id":"1","lambda":3},{"id":"2"},{"id":"3"},{"id":"4"}]})");
  const auto unstable = invoke({"equilibrium", "--network", fixture("ring4.json"), "--traffic", heavy});
  CHECK(unstable.code == multipath::cli::kDomain);
  CHECK(unstable.err_json()["error"]["kind"] == "stability");
}

TEST_CASE("cli blocking and simulate") {
  const auto r = invoke({"blocking", "--network", fixture("single.json"), "--traffic", fixture("single_traffic.json"),
                      "--threshold", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out_json()["probability"]["1"] == "1/5");
  CHECK(r.out_json()["states"] == 3);

  const std::vector<std::string> sim{"simulate", "--network", fixture("single.json"), "--traffic",
                                     fixture("single_traffic.json"), "--model", "streaming", "--horizon", "50",
                                     "--warmup", "5", "--reps", "3", "--seed", "11"};
  const auto a = invoke(sim), b = invoke(sim);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out_json()["replications"] == 3);
  CHECK(a.out_json()["users"]["1"].contains("mean_m"));
}

TEST_CASE("cli circle") {
  const auto r = invoke({"circle", "--N", "5", "--r", "2"});
  REQUIRE(r.code == 0);
  const auto out = r.out_json();
  CHECK(out["equilibrium"]["exact"]["n_hat"] == "1");
  CHECK(out["equilibrium"]["exact"]["x_hat"] == "1/2");
  CHECK(out["congestion"].size() == 4);
  CHECK(out["k_argmax"].is_number_integer());

  const auto csv = invoke({"circle", "--N", "5", "--r", "2", "--csv"});
  CHECK(csv.out.rfind("k,", 0) == 0);

  const auto bad = invoke({"circle", "--N", "4", "--r", "4"});
  CHECK(bad.code == multipath::cli::kUsage);
  CHECK(bad.err_json()["error"]["kind"] == "input");
}

TEST_CASE("cli usage and input errors") {
  CHECK(invoke({}).code == multipath::cli::kUsage);
  CHECK(invoke({"frobnicate"}).code == multipath::cli::kUsage);
  CHECK(invoke({"allocate"}).code == multipath::cli::kUsage);
  CHECK(invoke({"allocate", "--network", "/nonexistent/net.json"}).code == multipath::cli::kUsage);
  CHECK(invoke({"allocate", "--network", fixture("ring4.json"), "--format", "xml"}).code == multipath::cli::kUsage);

  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("allocate") != std::string::npos);

  const auto broken = scratch("broken.json", "{\n  \"resources\": [\n");
  const auto r = invoke({"allocate", "--network", broken});
  CHECK(r.code == multipath::cli::kUsage);
  const auto message = r.err_json()["error"]["message"].get<std::string>();
  CHECK(message.find("line 3") != std::string::npos);

  const auto capped = invoke({"allocate", "--network", fixture("ring4.json"), "--max-resources", "3"});
  CHECK(capped.code == multipath::cli::kDomain);
  CHECK(capped.err_json()["error"]["kind"] == "size");
  CHECK(capped.err_json()["error"]["cap"] == 3);
}
