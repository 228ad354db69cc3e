#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pgsgan/cli/commands.hpp"
#include "pgsgan/dataflow/synth.hpp"
#include "pgsgan/evalkit/metrics.hpp"
#include "pgsgan/gan/policy.hpp"
#include "pgsgan/orderdomain/order.hpp"

namespace py = pybind11;
using namespace pgsgan;

PYBIND11_MODULE(_pgsgan, m) {
  m.doc() = "Order-policy GAN core: order classes, policies, metrics, synthetic markets and the CLI";

  m.attr("NUM_CLASSES") = order::kNumClasses;
  m.attr("NUM_VALUE_CLASSES") = order::kNumValueClasses;
  m.attr("POLICY_LOGITS") = gan::kPolicyLogits;
  m.attr("BY_CHANCE_NLL") = gan::kByChanceNll;
  m.attr("BY_CHANCE_ENTROPY") = gan::kByChanceEntropy;

  py::class_<order::Order>(m, "Order")
      .def(py::init([](int side, int action, int is_mo, int price_class, int volume_class) {
             return order::Order{side, action, is_mo, price_class, volume_class};
           }),
           py::arg("side") = 0, py::arg("action") = 0, py::arg("is_mo") = 0, py::arg("price_class") = 0,
           py::arg("volume_class") = 0)
      .def_readwrite("side", &order::Order::side)
      .def_readwrite("action", &order::Order::action)
      .def_readwrite("is_mo", &order::Order::is_mo)
      .def_readwrite("price_class", &order::Order::price_class)
      .def_readwrite("volume_class", &order::Order::volume_class)
      .def("valid", &order::Order::valid)
      .def("validate", &order::Order::validate)
      .def("class_index", [](const order::Order& o) { return order::class_index(o); })
      .def_static("from_index", &order::order_of_index, py::arg("index"))
      .def(py::self == py::self)
      .def("__repr__", &order::Order::to_string);

  m.def(
      "discretize",
      [](int side, int action, int is_mo, double price, double volume, double best_bid, double best_ask,
         double tick_size, double min_volume_unit) {
        order::RawOrder r{side, action, is_mo, price, volume, best_bid, best_ask, tick_size, min_volume_unit};
        r.validate();
        return order::discretize(r);
      },
      py::arg("side"), py::arg("action"), py::arg("is_mo"), py::arg("price"), py::arg("volume"),
      py::arg("best_bid"), py::arg("best_ask"), py::arg("tick_size") = 1.0, py::arg("min_volume_unit") = 1.0,
      "Raw order fields and quotes to a discrete Order.");

  py::class_<gan::Policy>(m, "Policy")
      .def_static("uniform", &gan::Policy::uniform)
      .def_static("from_logits", [](const std::vector<double>& l) { return gan::Policy::from_logits(l); },
                  py::arg("logits"))
      .def("nll", [](const gan::Policy& p, const order::Order& o) { return gan::nll(p, o); }, py::arg("order"))
      .def("entropy_bits", [](const gan::Policy& p) { return gan::entropy_bits(p); })
      .def("probability", &gan::Policy::joint_probability, py::arg("order"))
      .def(
          "sample",
          [](const gan::Policy& p, int n, std::uint64_t seed) {
            Rng rng(seed);
            std::vector<order::Order> out;
            for (int i = 0; i < n; ++i) out.push_back(gan::sample_order(p, rng).emitted);
            return out;
          },
          py::arg("n"), py::arg("seed") = 0);

  m.def(
      "round_to_discrete",
      [](const std::array<double, 5>& v) { return gan::round_to_discrete(std::span<const double, 5>(v)); },
      py::arg("values"));

  m.def(
      "kld_bits", [](const std::vector<double>& p, const std::vector<double>& q) { return eval::kld_bits(p, q); },
      py::arg("p"), py::arg("q"), "D(p || q) in bits; inf when q misses support of p.");
  m.def(
      "mse", [](const std::vector<double>& p, const std::vector<double>& q) { return eval::mse(p, q); },
      py::arg("p"), py::arg("q"));
  m.def(
      "entropy_bits", [](const std::vector<double>& p) { return eval::entropy_bits(p); }, py::arg("p"));
  m.def(
      "empirical_distribution",
      [](const std::vector<order::Order>& orders) { return eval::empirical_distribution(orders).probs; },
      py::arg("orders"));

  m.def(
      "synth_ground_truth",
      [](std::uint64_t seed) {
        auto cfg = data::SynthConfig::defaults();
        cfg.seed = seed;
        return data::synth_ground_truth(cfg);
      },
      py::arg("seed") = 1, "Stationary class distribution of the default synthetic market.");
  m.def(
      "synth_orders",
      [](std::int64_t num_orders, std::uint64_t seed) {
        auto cfg = data::SynthConfig::defaults();
        cfg.num_orders = num_orders;
        cfg.seed = seed;
        const auto r = data::synth_market(cfg);
        std::vector<order::Order> out;
        for (const auto& o : r.stream.orders) out.push_back(order::discretize(o));
        return out;
      },
      py::arg("num_orders"), py::arg("seed") = 1, "Discretized orders of a default synthetic market.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a pgsgan subcommand; returns (exit_code, stdout, stderr).");
}
