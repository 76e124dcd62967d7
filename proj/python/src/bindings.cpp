#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "ssh/accounting.hpp"
#include "ssh/adapter.hpp"
#include "ssh/checkpoint.hpp"
#include "ssh/config.hpp"
#include "ssh/errors.hpp"
#include "ssh/experiments.hpp"
#include "ssh/hartley.hpp"
#include "ssh/reports.hpp"
#include "ssh/spectrum.hpp"

namespace py = pybind11;
using namespace ssh;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D array, got " + std::to_string(a.ndim()) + "-D");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  if (rows == 0 || cols == 0) throw DimensionError("empty array");
  std::vector<double> data(a.data(), a.data() + rows * cols);
  return Matrix(rows, cols, std::move(data));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
  return out;
}

Array to_array(std::span<const double> v) {
  Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

py::list positions(const std::vector<Position>& ps) {
  py::list out;
  for (const auto& p : ps) out.append(py::make_tuple(p.u, p.v));
  return out;
}

py::object json_loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

py::dict budget_dict(const BudgetReport& r) {
  py::dict d;
  d["method"] = std::string(method_name(r.method));
  d["trainable_params"] = r.trainable_params;
  d["required_bytes"] = r.required_bytes;
  d["flop_estimate"] = r.flop_estimate;
  return d;
}

ModelConfig model_from(const std::vector<std::pair<std::size_t, std::size_t>>& shapes) {
  ModelConfig m{"custom", {}};
  for (const auto& [r, c] : shapes) m.layer_shapes.push_back({r, c});
  return m;
}

ExperimentConfig config_from(const py::object& cfg) {
  if (cfg.is_none()) return ExperimentConfig{};
  if (py::isinstance<py::str>(cfg)) return parse_config(cfg.cast<std::string>());
  const std::string text = py::module_::import("json").attr("dumps")(cfg).cast<std::string>();
  return parse_config(text);
}

py::dict training_dict(const TrainingResult& r, const ExperimentConfig& cfg) {
  py::dict d = json_loads(training_metrics_json(r, cfg));
  d["losses"] = to_array(r.losses);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse spectral adapters over the 2D discrete Hartley transform.";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<DimensionError>(m, "DimensionError", error);
  py::register_exception<NumericError>(m, "NumericError", error);
  py::register_exception<CapacityError>(m, "CapacityError", error);
  py::register_exception<ContractError>(m, "ContractError", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<DivergenceError>(m, "DivergenceError", error);
  auto ckpt = py::register_exception<CheckpointError>(m, "CheckpointError", error);
  py::register_exception<CheckpointMagicError>(m, "CheckpointMagicError", ckpt);
  py::register_exception<CheckpointTruncatedError>(m, "CheckpointTruncatedError", ckpt);
  py::register_exception<CheckpointDigestError>(m, "CheckpointDigestError", ckpt);

  m.attr("HARTLEY_SINE_SIGN") = kHartleySineSign;

  m.def("cas", &cas, py::arg("theta"));
  m.def("dht1", [](const Array& x) { return to_array(dht1(to_vector(x))); }, py::arg("x"));
  m.def("dht2", [](const Array& w) { return to_array(dht2(to_matrix(w)).coeffs()); }, py::arg("w"));
  m.def("idht2", [](const Array& h) { return to_array(idht2(Spectrum(to_matrix(h)))); },
        py::arg("h"));
  m.def(
      "dft2_oracle",
      [](const Array& w) {
        const ComplexSpectrum f = dft2_oracle(to_matrix(w));
        return py::make_tuple(to_array(f.real.coeffs()), to_array(f.imag.coeffs()));
      },
      py::arg("w"), "(real, imag) of the positive-exponent DFT; dht2(w) == real - imag.");
  m.def("energy_map", [](const Array& h) { return to_array(energy_map(Spectrum(to_matrix(h)))); },
        py::arg("h"));

  m.def(
      "select_frequencies",
      [](const Array& h, std::size_t n, double delta, std::uint64_t seed) {
        const FrequencyMask mask = select_frequencies(Spectrum(to_matrix(h)), {n, delta, seed});
        py::dict d;
        d["energy"] = positions(mask.energy_positions());
        d["random"] = positions(mask.random_positions());
        d["hash"] = mask.hash();
        return d;
      },
      py::arg("h"), py::arg("n"), py::arg("delta"), py::arg("seed") = 0);

  py::class_<SshLayer>(m, "SshLayer")
      .def(py::init([](const Array& w0, std::size_t n, double delta, std::uint64_t seed,
                       double alpha, std::uint64_t init_seed) {
             Rng rng(init_seed);
             return SshLayer::init(to_matrix(w0), {n, delta, seed}, alpha, rng);
           }),
           py::arg("w0"), py::arg("n"), py::arg("delta") = 1.0, py::arg("seed") = 0,
           py::arg("alpha") = 1.0, py::arg("init_seed") = 0)
      .def_property_readonly("shape", [](const SshLayer& l) { return py::make_tuple(l.rows(), l.cols()); })
      .def_property_readonly("alpha", &SshLayer::alpha)
      .def_property_readonly("num_trainable", &SshLayer::num_trainable)
      .def_property_readonly("positions", [](const SshLayer& l) { return positions(l.mask().positions()); })
      .def_property_readonly("mask_hash", [](const SshLayer& l) { return l.mask().hash(); })
      .def_property_readonly("base_weight", [](const SshLayer& l) { return to_array(l.base_weight()); })
      .def_property("values", [](const SshLayer& l) { return to_array(l.values()); },
                    [](SshLayer& l, const Array& v) { l.set_values(to_vector(v)); })
      .def("delta_weight", [](const SshLayer& l) { return to_array(l.delta_weight()); })
      .def("merge_weights", [](const SshLayer& l) { return to_array(l.merge_weights()); })
      .def("forward", [](const SshLayer& l, const Array& x) { return to_array(l.forward(to_matrix(x))); },
           py::arg("x"))
      .def("backward",
           [](const SshLayer& l, const Array& g) { return to_array(l.backward(to_matrix(g))); },
           py::arg("grad_w"))
      .def("sgd_step", [](SshLayer& l, const Array& g, double eta) { l.sgd_step(to_vector(g), eta); },
           py::arg("grads"), py::arg("eta"))
      .def("save", [](const SshLayer& l, const std::filesystem::path& p) { save_checkpoint(p, l); },
           py::arg("path"))
      .def_static("load",
                  [](const std::filesystem::path& p, const Array& w0) {
                    return load_checkpoint(p, to_matrix(w0));
                  },
                  py::arg("path"), py::arg("w0"));

  m.def("presets", [] {
    std::vector<std::string> keys;
    for (const auto& p : model_presets()) keys.push_back(p.key);
    return keys;
  });
  m.def(
      "budgets",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& shapes, std::size_t n,
         std::size_t rank) {
        const ModelConfig model = model_from(shapes);
        py::dict d;
        d["ssh"] = budget_dict(ssh_budget(model, n));
        d["fourierft"] = budget_dict(fourierft_budget(model, n));
        d["lora"] = budget_dict(lora_budget(model, rank));
        d["full"] = budget_dict(full_budget(model));
        return d;
      },
      py::arg("shapes"), py::arg("n"), py::arg("rank"),
      "Parameter, byte and FLOP-model counts for a list of (d1, d2) layer shapes.");
  m.def(
      "table1",
      [](const std::string& key) {
        py::list out;
        for (const auto& row : reproduce_table1(find_preset(key))) {
          for (const auto& c : row.cells) {
            py::dict d;
            d["preset"] = row.preset;
            d["lora_rank"] = row.lora_rank;
            d["ssh_n"] = row.ssh_n;
            d["layers"] = row.num_layers;
            d["column"] = c.column;
            d["computed"] = c.computed;
            d["computed_text"] = c.computed_text;
            d["printed"] = c.printed;
            d["match"] = c.match;
            d["status"] = table1_status(c);
            d["note"] = c.known_discrepancy;
            out.append(d);
          }
        }
        return out;
      },
      py::arg("preset"));

  m.def(
      "run_experiment",
      [](const py::object& cfg) {
        const ExperimentConfig c = config_from(cfg);
        TrainingResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        return training_dict(r, c);
      },
      py::arg("config") = py::none(),
      "Runs one experiment; config is a dict or JSON string with the CLI config keys.");
  m.def(
      "run_gradcheck",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& shapes, std::size_t trials,
         std::uint64_t seed) {
        std::vector<LayerShape> s;
        for (const auto& [r, c] : shapes) s.push_back({r, c});
        GradcheckReport r;
        {
          py::gil_scoped_release release;
          r = run_gradcheck(s, trials, seed);
        }
        return json_loads(gradcheck_json(r));
      },
      py::arg("shapes"), py::arg("trials"), py::arg("seed") = 0);
  m.def(
      "profile_spectrum",
      [](const Array& w, std::size_t n, double delta, std::uint64_t seed) {
        return json_loads(spectrum_summary_json(profile_spectrum(to_matrix(w), {n, delta, seed})));
      },
      py::arg("w"), py::arg("n"), py::arg("delta") = 1.0, py::arg("seed") = 0);
}
