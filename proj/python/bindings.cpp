#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "strecover/error.hpp"
#include "strecover/evaluation.hpp"
#include "strecover/lfa_engine.hpp"
#include "strecover/synthetic.hpp"

namespace py = pybind11;
using namespace strecover;

namespace {

// (n, 3) array of i, j, v rows.
Eigen::MatrixXd entry_array(const std::vector<Entry>& entries) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(entries.size()), 3);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto r = static_cast<Eigen::Index>(k);
    out(r, 0) = static_cast<double>(entries[k].i);
    out(r, 1) = static_cast<double>(entries[k].j);
    out(r, 2) = entries[k].v;
  }
  return out;
}

std::vector<Entry> entries_from(const std::vector<Index>& i, const std::vector<Index>& j,
                                const std::vector<double>& v) {
  if (i.size() != j.size() || i.size() != v.size()) {
    throw ShapeError("i, j and v must have equal lengths");
  }
  std::vector<Entry> out(i.size());
  for (std::size_t k = 0; k < i.size(); ++k) out[k] = {i[k], j[k], v[k]};
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spatio-temporal matrix recovery with latent factor analysis";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", base);
  py::register_exception<IndexError>(m, "IndexError", base);
  py::register_exception<ShapeError>(m, "ShapeError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<DuplicateEntryError>(m, "DuplicateEntryError", base);
  py::register_exception<DegenerateDistanceError>(m, "DegenerateDistanceError", base);
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<DivergenceError>(m, "DivergenceError", base);

  py::class_<ObservedMatrix>(m, "ObservedMatrix")
      .def(py::init([](Index rows, Index cols, const std::vector<Index>& i,
                       const std::vector<Index>& j, const std::vector<double>& v) {
             return ObservedMatrix(rows, cols, entries_from(i, j, v));
           }),
           py::arg("rows"), py::arg("cols"), py::arg("i"), py::arg("j"), py::arg("v"))
      .def_property_readonly("rows", &ObservedMatrix::rows)
      .def_property_readonly("cols", &ObservedMatrix::cols)
      .def("__len__", &ObservedMatrix::size)
      .def("value", &ObservedMatrix::value, py::arg("i"), py::arg("j"))
      .def("entries", [](const ObservedMatrix& o) { return entry_array(o.entries()); },
           "Known entries as an (n, 3) array of i, j, v.")
      .def(py::self == py::self);

  py::class_<EntrySet>(m, "EntrySet")
      .def("__len__", &EntrySet::size)
      .def("entries", [](const EntrySet& s) { return entry_array(s.entries); });

  py::class_<CoordinateSet>(m, "CoordinateSet")
      .def(py::init<Eigen::MatrixXd>(), py::arg("points"))
      .def_property_readonly("points", &CoordinateSet::points)
      .def("__len__", &CoordinateSet::size);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("d", &TrainConfig::d)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("eta", &TrainConfig::eta)
      .def_readwrite("beta1", &TrainConfig::beta1)
      .def_readwrite("beta2", &TrainConfig::beta2)
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("mu", &TrainConfig::mu)
      .def_readwrite("k_nn", &TrainConfig::k_nn)
      .def_readwrite("tol", &TrainConfig::tol)
      .def_readwrite("seed", &TrainConfig::seed)
      .def("validate", &TrainConfig::validate);

  py::class_<FactorModel>(m, "FactorModel")
      .def_readonly("x", &FactorModel::x)
      .def_readonly("y", &FactorModel::y)
      .def_readonly("config", &FactorModel::config)
      .def_readonly("epochs", &FactorModel::epochs)
      .def_readonly("train_rmse", &FactorModel::train_rmse)
      .def("predict", &predict, py::arg("i"), py::arg("j"))
      .def("recover", &recover);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("full_updates", &TrainResult::full_updates)
      .def_readonly("cheap_updates", &TrainResult::cheap_updates)
      .def_property_readonly("trace", [](const TrainResult& r) {
        std::vector<std::tuple<std::size_t, double, double>> out;
        for (const auto& t : r.trace) out.emplace_back(t.epoch, t.rmse, t.objective);
        return out;
      });

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("rows", &SynthSpec::rows)
      .def_readwrite("cols", &SynthSpec::cols)
      .def_readwrite("rank", &SynthSpec::rank)
      .def_readwrite("spatial_rounds", &SynthSpec::spatial_rounds)
      .def_readwrite("temporal_rounds", &SynthSpec::temporal_rounds)
      .def_readwrite("noise", &SynthSpec::noise)
      .def_readwrite("box", &SynthSpec::box)
      .def_readwrite("smoothing_k", &SynthSpec::smoothing_k)
      .def_readwrite("seed", &SynthSpec::seed);

  py::class_<EvalRecord>(m, "EvalRecord")
      .def_readonly("dataset", &EvalRecord::dataset)
      .def_readonly("rate", &EvalRecord::rate)
      .def_readonly("model", &EvalRecord::model)
      .def_readonly("seed", &EvalRecord::seed)
      .def_readonly("d", &EvalRecord::d)
      .def_readonly("rmse", &EvalRecord::rmse)
      .def_readonly("epochs", &EvalRecord::epochs)
      .def_readonly("wall_ms", &EvalRecord::wall_ms);

  m.def("generate", [](const SynthSpec& s) {
    auto d = generate(s);
    return py::make_tuple(d.matrix, d.coords);
  }, py::arg("spec"), "Synthetic (matrix, coords) pair.");
  m.def("smoke_dataset", [] {
    auto d = smoke_dataset();
    return py::make_tuple(d.matrix, d.coords);
  });
  m.def("split_by_sampling_rate", &split_by_sampling_rate, py::arg("matrix"), py::arg("rate"),
        py::arg("seed"));
  m.def("train",
        py::overload_cast<const ObservedMatrix&, const CoordinateSet&, const TrainConfig&>(&train),
        py::arg("matrix"), py::arg("coords"), py::arg("config") = TrainConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("rmse", &rmse, py::arg("model"), py::arg("test"));
  m.def("sweep_sampling",
        [](const ObservedMatrix& full, const CoordinateSet& coords, const std::vector<double>& rates,
           const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg, bool with_baseline,
           std::size_t threads) {
          SweepOptions o;
          o.threads = threads;
          o.on_divergence = DivergencePolicy::kRecord;
          o.models = {lfa_rtd(cfg)};
          if (with_baseline) o.models.push_back(plain_lfa(cfg));
          py::gil_scoped_release release;
          return sweep_sampling(full, coords, rates, seeds, cfg, o).records;
        },
        py::arg("full"), py::arg("coords"), py::arg("rates"), py::arg("seeds"),
        py::arg("config") = TrainConfig{}, py::arg("with_baseline") = true,
        py::arg("threads") = 0);
}
