#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mvlstm/attention.hpp"
#include "mvlstm/baseline.hpp"
#include "mvlstm/grad.hpp"
#include "mvlstm/granger.hpp"
#include "mvlstm/io.hpp"
#include "mvlstm/synth.hpp"
#include "mvlstm/train.hpp"

namespace py = pybind11;
using namespace mvlstm;

namespace {

Matrix to_matrix(const std::vector<Vec>& rows) {
  if (rows.empty()) throw std::invalid_argument("window must have at least one row");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) {
      throw std::invalid_argument("window rows have unequal lengths");
    }
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_mvlstm, m) {
  m.doc() = "multi-variable LSTM core: forecasting, variable attention, Granger analysis";

  py::class_<CellShape>(m, "CellShape")
      .def(py::init([](std::size_t n_vars, std::size_t per_var_dim, std::size_t window) {
             CellShape s{n_vars, per_var_dim, window};
             s.validate();
             return s;
           }),
           py::arg("n_vars"), py::arg("per_var_dim"), py::arg("window"))
      .def_readonly("n_vars", &CellShape::n_vars)
      .def_readonly("per_var_dim", &CellShape::per_var_dim)
      .def_readonly("window", &CellShape::window)
      .def_property_readonly("flat_dim", &CellShape::flat_dim);

  py::class_<MvLstmParams>(m, "MvLstmParams")
      .def_static("zeros", &MvLstmParams::zeros, py::arg("shape"))
      .def_static("random", &MvLstmParams::random, py::arg("shape"), py::arg("seed"))
      .def_readonly("shape", &MvLstmParams::shape)
      .def_property_readonly("count", &MvLstmParams::count)
      .def("to_flat", &to_flat)
      .def("from_flat", &from_flat, py::arg("flat"));

  m.def("network_forward",
        [](const MvLstmParams& params, const std::vector<Vec>& window) {
          const ForwardResult r = network_forward(params, to_matrix(window));
          return py::make_tuple(r.prediction, r.alpha);
        },
        py::arg("params"), py::arg("window"),
        "Returns (prediction, attention weights) for a T x N window.");

  m.def("forward_predict",
        [](const MvLstmParams& params, const std::vector<Vec>& window) {
          return forward_predict(params, to_matrix(window));
        },
        py::arg("params"), py::arg("window"));

  m.def("fd_check",
        [](const MvLstmParams& params, const std::vector<Vec>& window, double target,
           double epsilon) { return fd_check(params, to_matrix(window), target, epsilon); },
        py::arg("params"), py::arg("window"), py::arg("target"), py::arg("epsilon") = 1e-5,
        "Max relative error between analytic gradients and central finite differences.");

  m.def("softmax", &softmax, py::arg("logits"));
  m.def("rmse", &rmse, py::arg("pred"), py::arg("truth"));
  m.def("mae", &mae, py::arg("pred"), py::arg("truth"));

  py::class_<SeriesFrame>(m, "SeriesFrame")
      .def_static("from_columns", &SeriesFrame::from_columns, py::arg("names"), py::arg("columns"))
      .def_readonly("columns", &SeriesFrame::columns)
      .def_readonly("values", &SeriesFrame::values)
      .def_property_readonly("n_rows", &SeriesFrame::n_rows)
      .def_property_readonly("target_name", [](const SeriesFrame& f) { return f.target_name(); });

  py::class_<SplitFractions>(m, "SplitFractions")
      .def(py::init([](double train, double val, double test) {
             return SplitFractions{train, val, test};
           }),
           py::arg("train") = 0.7, py::arg("val") = 0.15, py::arg("test") = 0.15)
      .def_readwrite("train", &SplitFractions::train)
      .def_readwrite("val", &SplitFractions::val)
      .def_readwrite("test", &SplitFractions::test);

  py::class_<NormStats>(m, "NormStats")
      .def_readonly("mean", &NormStats::mean)
      .def_readonly("stddev", &NormStats::stddev);

  py::class_<WindowedDataset>(m, "WindowedDataset")
      .def_property_readonly("n_train", [](const WindowedDataset& d) { return d.train.size(); })
      .def_property_readonly("n_val", [](const WindowedDataset& d) { return d.val.size(); })
      .def_property_readonly("n_test", [](const WindowedDataset& d) { return d.test.size(); })
      .def_readonly("stats", &WindowedDataset::stats)
      .def_readonly("columns", &WindowedDataset::columns)
      .def_readonly("window_len", &WindowedDataset::window_len);

  m.def("make_windows",
        [](const SeriesFrame& frame, std::size_t window, const SplitFractions& splits) {
          return make_windows(frame, window, splits);
        },
        py::arg("frame"), py::arg("window"), py::arg("splits") = SplitFractions{});

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("window", &TrainConfig::window)
      .def_readwrite("per_var_dim", &TrainConfig::per_var_dim)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("clip_norm", &TrainConfig::clip_norm)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("splits", &TrainConfig::splits)
      .def_readwrite("threads", &TrainConfig::threads);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("train_loss", &FitResult::train_loss)
      .def_readonly("val_loss", &FitResult::val_loss)
      .def_readonly("best_epoch", &FitResult::best_epoch)
      .def_readonly("test_rmse", &FitResult::test_rmse)
      .def_readonly("test_mae", &FitResult::test_mae)
      .def_readonly("test_alphas", &FitResult::test_alphas);

  m.def("fit", &fit, py::arg("dataset"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<GrangerResult>(m, "GrangerResult")
      .def_readonly("var_index", &GrangerResult::var_index)
      .def_readonly("var_name", &GrangerResult::var_name)
      .def_readonly("f_stat", &GrangerResult::f_stat)
      .def_readonly("df_num", &GrangerResult::df_num)
      .def_readonly("df_den", &GrangerResult::df_den)
      .def_readonly("p_value", &GrangerResult::p_value)
      .def_readonly("causal", &GrangerResult::causal)
      .def_readonly("error", &GrangerResult::error);

  m.def("granger_test", &granger_test, py::arg("y"), py::arg("x"), py::arg("p"),
        py::arg("level") = 0.05);
  m.def("granger_rank", &granger_rank, py::arg("frame"), py::arg("p") = 5,
        py::arg("level") = 0.05);

  py::class_<ExoProcess>(m, "ExoProcess")
      .def(py::init([](double rho, double stddev) { return ExoProcess{rho, stddev}; }),
           py::arg("rho") = 0.0, py::arg("stddev") = 1.0)
      .def_readwrite("rho", &ExoProcess::rho)
      .def_readwrite("stddev", &ExoProcess::stddev);

  py::class_<ArxSpec>(m, "ArxSpec")
      .def(py::init<>())
      .def_readwrite("n_exo", &ArxSpec::n_exo)
      .def_readwrite("exo_coef", &ArxSpec::exo_coef)
      .def_readwrite("self_coef", &ArxSpec::self_coef)
      .def_readwrite("noise_std", &ArxSpec::noise_std)
      .def_readwrite("exo", &ArxSpec::exo)
      .def_readwrite("length", &ArxSpec::length)
      .def_readwrite("seed", &ArxSpec::seed)
      .def_readwrite("y_init", &ArxSpec::y_init);

  m.def("generate", &generate, py::arg("spec"));
  m.def("ground_truth_rank", [](const ArxSpec& spec) {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& e : ground_truth_rank(spec)) out.emplace_back(e.var_index, e.score);
    return out;
  });

  py::class_<VariableStats>(m, "VariableStats")
      .def_readonly("index", &VariableStats::index)
      .def_readonly("name", &VariableStats::name)
      .def_readonly("mean_alpha", &VariableStats::mean_alpha)
      .def_readonly("std_alpha", &VariableStats::std_alpha)
      .def_readonly("histogram", &VariableStats::histogram);

  m.def("rank_variables", &rank_variables, py::arg("weights_per_instance"), py::arg("names"),
        py::arg("bins") = 20);

  m.def("persistence_forecast",
        [](const std::vector<Vec>& window) { return persistence_forecast(to_matrix(window)); },
        py::arg("window"));

  m.def("save_model",
        [](const std::string& path, const MvLstmParams& params, const NormStats& stats,
           const std::vector<std::string>& columns) {
          save_model(path, ModelFile{params, stats, columns});
        },
        py::arg("path"), py::arg("params"), py::arg("stats"), py::arg("columns"));
  m.def("load_model", [](const std::string& path) {
    ModelFile model = load_model(path);
    return py::make_tuple(model.params, model.stats, model.columns);
  });
  m.def("load_csv", &load_csv, py::arg("path"), py::arg("target"));
  m.def("save_csv", &save_csv, py::arg("frame"), py::arg("path"));

  py::class_<CsvLoadResult>(m, "CsvLoadResult")
      .def_readonly("frame", &CsvLoadResult::frame)
      .def_readonly("rows_dropped", &CsvLoadResult::rows_dropped)
      .def_readonly("rows_total", &CsvLoadResult::rows_total);
}
