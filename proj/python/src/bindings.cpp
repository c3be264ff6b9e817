#include "multipath/alloc.hpp"
#include "multipath/circle.hpp"
#include "multipath/cli.hpp"
#include "multipath/convex_oracle.hpp"
#include "multipath/cuts.hpp"
#include "multipath/dynamics.hpp"
#include "multipath/equilibrium.hpp"
#include "multipath/error.hpp"
#include "multipath/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace multipath;
using io::json;

namespace {

std::vector<Rational> rationals(const std::vector<std::string>& text) {
  std::vector<Rational> out;
  out.reserve(text.size());
  for (const auto& t : text) out.push_back(parse_rational(t));
  return out;
}

std::vector<std::string> strings(const std::vector<Rational>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) out.push_back(to_string(v));
  return out;
}

EnumerationOptions cap(std::size_t max_resources) {
  EnumerationOptions opts;
  opts.max_resources = max_resources;
  return opts;
}

TrafficSpec traffic(const Network& net, const std::string& text) {
  return io::traffic_from_json(io::parse_json(text, "traffic"), net);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact multipath rate allocation, fluid equilibria and circle diffusion analytics.";

  auto base = py::register_exception<Error>(m, "MultipathError");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());
  py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
  py::register_exception<NonUniquenessError>(m, "NonUniquenessError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());

  py::class_<Network>(m, "Network")
      .def(py::init([](const std::vector<std::pair<std::string, std::string>>& resources,
                       const std::vector<std::pair<std::string, std::vector<std::string>>>& users) {
             std::vector<Resource> rs;
             for (const auto& [id, capacity] : resources) rs.push_back({id, parse_rational(capacity)});
             return Network::from_ids(std::move(rs), users);
           }),
           py::arg("resources"), py::arg("users"))
      .def_static("from_json", [](const std::string& text) {
        auto doc = io::network_from_json(io::parse_json(text, "network"));
        return py::make_tuple(std::move(doc.network), doc.population.n, doc.population.m);
      })
      .def_property_readonly("num_resources", &Network::num_resources)
      .def_property_readonly("num_users", &Network::num_users)
      .def_property_readonly("resource_ids",
                             [](const Network& n) { return n.resource_ids(n.all_resources()); })
      .def_property_readonly("user_ids", [](const Network& n) {
        std::vector<std::string> ids;
        for (const auto& u : n.users()) ids.push_back(u.id);
        return ids;
      });

  m.def(
      "allocate",
      [](const Network& net, const std::vector<std::string>& counts, std::size_t max_resources) {
        const auto n = rationals(counts);
        const auto dec = allocate(net, n, cap(max_resources));
        return io::decomposition_to_json(net, dec, split_rates(net, n, dec)).dump();
      },
      py::arg("network"), py::arg("counts"), py::arg("max_resources") = 20);

  m.def(
      "min_rate",
      [](const Network& net, const std::vector<std::string>& counts, std::size_t max_resources) {
        return to_string(min_rate(net, rationals(counts), cap(max_resources)));
      },
      py::arg("network"), py::arg("counts"), py::arg("max_resources") = 20);

  m.def(
      "max_rate",
      [](const Network& net, const std::vector<std::string>& counts, std::size_t max_resources) {
        return to_string(max_rate(net, rationals(counts), cap(max_resources)));
      },
      py::arg("network"), py::arg("counts"), py::arg("max_resources") = 20);

  m.def(
      "gcc_feasible",
      [](const Network& net, const std::vector<std::string>& loads, std::size_t max_resources) {
        const auto report = gcc_feasible(net, rationals(loads), cap(max_resources));
        std::vector<std::vector<std::string>> violated;
        for (auto s : report.violated) violated.push_back(net.resource_ids(s));
        return py::make_tuple(report.feasible, violated);
      },
      py::arg("network"), py::arg("loads"), py::arg("max_resources") = 20);

  m.def(
      "maxflow_feasible",
      [](const Network& net, const std::vector<std::string>& loads) {
        return maxflow_feasible(net, rationals(loads));
      },
      py::arg("network"), py::arg("loads"));

  m.def(
      "solve_num",
      [](const Network& net, const std::vector<std::string>& counts, double alpha, double tol) {
        OracleOptions opts;
        opts.tol = tol;
        const auto sol = solve_num(net, rationals(counts), {alpha}, opts);
        py::dict out;
        out["rates"] = sol.rate;
        out["prices"] = sol.price;
        out["splits"] = sol.split;
        out["gap"] = sol.gap;
        out["iterations"] = sol.iterations;
        out["crossover"] = sol.crossover;
        return out;
      },
      py::arg("network"), py::arg("counts"), py::arg("alpha") = 1.0, py::arg("tol") = 1e-8);

  m.def(
      "equilibrium",
      [](const Network& net, const std::string& traffic_json, const std::string& model,
         std::size_t max_resources) {
        const auto t = traffic(net, traffic_json);
        const auto kind = parse_model(model);
        if (kind == Model::streaming) throw InputError("equilibrium needs the integrated or peak_rate model");
        const auto eq = kind == Model::integrated ? integrated_equilibrium(net, t, cap(max_resources))
                                                  : peak_rate_equilibrium(net, t, cap(max_resources));
        return io::equilibrium_to_json(net, eq).dump();
      },
      py::arg("network"), py::arg("traffic"), py::arg("model") = "integrated", py::arg("max_resources") = 20);

  m.def(
      "streaming_blocking",
      [](const Network& net, const std::string& traffic_json, const std::string& threshold) {
        const auto res = streaming_blocking(net, traffic(net, traffic_json), parse_rational(threshold));
        return py::make_tuple(strings(res.probability), res.states, res.bounds);
      },
      py::arg("network"), py::arg("traffic"), py::arg("threshold"));

  py::class_<CircleParams>(m, "CircleParams")
      .def(py::init([](int N, int r, double C, double lambda, double mu, double kappa, double eta) {
             CircleParams p;
             p.N = N;
             p.r = r;
             p.C = C;
             p.lambda = lambda;
             p.mu = mu;
             p.kappa = kappa;
             p.eta = eta;
             validate(p);
             return p;
           }),
           py::arg("N"), py::arg("r"), py::arg("C") = 1.0, py::arg("lambda_") = 0.5, py::arg("mu") = 1.0,
           py::arg("kappa") = 1.0, py::arg("eta") = 1.0)
      .def_readonly("N", &CircleParams::N)
      .def_readonly("r", &CircleParams::r)
      .def_readonly("C", &CircleParams::C)
      .def_readonly("lambda_", &CircleParams::lambda)
      .def_readonly("mu", &CircleParams::mu)
      .def_readonly("kappa", &CircleParams::kappa)
      .def_readonly("eta", &CircleParams::eta);

  m.def("circle_equilibrium", [](const CircleParams& p) {
    const auto eq = circle_equilibrium(p);
    return py::make_tuple(to_string(eq.n_hat), to_string(eq.m_hat), to_string(eq.x_hat));
  });
  m.def("drift_matrix", [](const CircleParams& p) {
    auto model = drift_matrix(p);
    return py::make_tuple(model.P, model.D);
  });
  m.def("expm_closed", &expm_closed, py::arg("params"), py::arg("t"));
  m.def("expm_numeric", &expm_numeric, py::arg("P"), py::arg("t"));
  m.def("covariance_matrix_closed", &covariance_matrix_closed);
  m.def("covariance_numeric", &covariance_numeric, py::arg("P"), py::arg("D"));
  m.def("covariance_closed", [](const CircleParams& p) {
    const auto c = covariance_closed(p);
    py::dict out;
    out["cov_nn"] = c.cov_nn;
    out["var_n"] = c.var_n;
    out["cov_nm"] = c.cov_nm;
    out["var_m"] = c.var_m;
    out["cov_mm"] = c.cov_mm;
    out["V"] = c.V;
    out["Cov"] = c.Cov;
    return out;
  });
  m.def(
      "congestion_probabilities",
      [](const CircleParams& p, double eps) {
        std::vector<std::tuple<int, double, double>> out;
        for (const auto& t : congestion_probabilities(p, eps)) out.emplace_back(t.k, t.log_probability, t.z);
        return out;
      },
      py::arg("params"), py::arg("eps"));
  m.def(
      "most_likely_cluster_size",
      [](const CircleParams& p, double eps) {
        const auto est = most_likely_cluster_size(p, eps);
        return py::make_tuple(est.k_argmax, est.k0);
      },
      py::arg("params"), py::arg("eps"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
