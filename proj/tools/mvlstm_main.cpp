#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvlstm/baseline.hpp"
#include "mvlstm/grad.hpp"
#include "mvlstm/io.hpp"
#include "mvlstm/rng.hpp"

namespace {

using namespace mvlstm;

// Outputs written so far in this invocation; discarded on failure so a
// failed run leaves no partial files behind.
struct OutputTracker {
  std::vector<std::string> paths;

  void add(const std::string& p) { paths.push_back(p); }
  void discard() {
    for (const auto& p : paths) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
};

std::size_t env_threads() {
  const char* raw = std::getenv("MVLSTM_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == nullptr || *end != '\0' || v < 0) {
    throw std::invalid_argument("MVLSTM_THREADS must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

SeriesFrame load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw std::invalid_argument("no input CSV given (config key 'input' or --input)");
  if (cfg.target.empty()) throw std::invalid_argument("no target column given (config key 'target' or --target)");
  CsvLoadResult loaded = load_csv(cfg.input, cfg.target);
  if (loaded.rows_dropped > 0) {
    std::cerr << "mvlstm: note: dropped " << loaded.rows_dropped << " of " << loaded.rows_total
              << " rows with missing values\n";
  }
  return std::move(loaded.frame);
}

std::string schema_text(const std::vector<std::string>& cols) {
  std::string s = "[";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i > 0) s += ",";
    s += cols[i];
  }
  return s + "]";
}

void check_schema(const ModelFile& model, const SeriesFrame& frame) {
  if (model.columns != frame.columns) {
    throw std::invalid_argument("schema mismatch: model trained on " +
                                schema_text(model.columns) + " but data has " +
                                schema_text(frame.columns));
  }
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::invalid_argument("cannot create output directory: " + dir);
}

int cmd_train(RunConfig cfg, OutputTracker& tracker) {
  SeriesFrame frame = load_input(cfg);
  WindowedDataset dataset = make_windows(frame, cfg.train.window, cfg.train.splits);
  cfg.train.threads = env_threads();
  FitResult result = fit(dataset, cfg.train);

  ensure_output_dir(cfg.output_dir);
  const std::string model_path = cfg.output_dir + "/model.mvlstm";
  const std::string metrics_path = cfg.output_dir + "/metrics.json";
  const std::string curve_path = cfg.output_dir + "/loss_curve.csv";
  tracker.add(model_path);
  tracker.add(metrics_path);
  tracker.add(curve_path);

  save_model(model_path, ModelFile{result.params, dataset.stats, dataset.columns});
  write_metrics_json(result, metrics_path);
  write_loss_curve_csv(result, curve_path);

  std::cout << "trained: test_rmse=" << format_double(result.test_rmse)
            << " test_mae=" << format_double(result.test_mae)
            << " epochs=" << result.train_loss.size() << " model=" << model_path << "\n";
  return 0;
}

int cmd_eval(RunConfig cfg, const std::string& model_path, const std::string& baseline,
             std::size_t lag, OutputTracker& tracker) {
  SeriesFrame frame = load_input(cfg);

  Vec preds, truth;
  std::string predictor;
  if (!model_path.empty() && !baseline.empty()) {
    throw std::invalid_argument("eval takes either --model or --baseline, not both");
  }
  if (!model_path.empty()) {
    ModelFile model = load_model(model_path);
    check_schema(model, frame);
    WindowedDataset dataset =
        make_windows(frame, model.params.shape.window, cfg.train.splits, model.stats);
    for (const Window& w : dataset.test) {
      preds.push_back(forward_predict(model.params, w.x));
      truth.push_back(w.y);
    }
    predictor = "mvlstm";
  } else if (baseline == "persistence") {
    WindowedDataset dataset = make_windows(frame, cfg.train.window, cfg.train.splits);
    for (const Window& w : dataset.test) {
      preds.push_back(persistence_forecast(w.x));
      truth.push_back(w.y);
    }
    predictor = "persistence";
  } else if (baseline == "linear") {
    WindowedDataset dataset = make_windows(frame, cfg.train.window, cfg.train.splits);
    LinearArxModel model = fit_linear_arx(dataset, lag);
    for (const Window& w : dataset.test) {
      preds.push_back(predict_linear_arx(model, w.x));
      truth.push_back(w.y);
    }
    predictor = "linear_arx";
  } else {
    throw std::invalid_argument("eval needs --model or --baseline {persistence, linear}");
  }

  const double r = rmse(preds, truth);
  const double m = mae(preds, truth);
  ensure_output_dir(cfg.output_dir);
  const std::string eval_path = cfg.output_dir + "/eval.json";
  tracker.add(eval_path);
  {
    std::ofstream out(eval_path);
    if (!out) throw std::invalid_argument("cannot write file: " + eval_path);
    out << "{\n  \"predictor\": \"" << predictor << "\",\n  \"test_rmse\": "
        << format_double(r) << ",\n  \"test_mae\": " << format_double(m)
        << ",\n  \"n_test\": " << preds.size() << "\n}\n";
  }
  std::cout << "eval: predictor=" << predictor << " test_rmse=" << format_double(r)
            << " test_mae=" << format_double(m) << " n_test=" << preds.size() << "\n";
  return 0;
}

int cmd_interpret(RunConfig cfg, const std::string& model_path, OutputTracker& tracker) {
  if (model_path.empty()) throw std::invalid_argument("interpret needs --model");
  ModelFile model = load_model(model_path);
  SeriesFrame frame = load_input(cfg);
  check_schema(model, frame);

  WindowedDataset dataset =
      make_windows(frame, model.params.shape.window, cfg.train.splits, model.stats);
  std::vector<Vec> alphas;
  alphas.reserve(dataset.test.size());
  for (const Window& w : dataset.test) {
    alphas.push_back(network_forward(model.params, w.x).alpha);
  }

  const auto granger = granger_rank(frame, cfg.granger_lag, cfg.granger_level);
  const InterpretReport report =
      build_interpret_report(alphas, dataset.columns, granger, cfg.bins);

  ensure_output_dir(cfg.output_dir);
  const std::string json_path = cfg.output_dir + "/report.json";
  tracker.add(json_path);
  write_interpret_json(report, json_path);
  if (cfg.format == "csv") {
    for (const auto& p : write_interpret_csvs(report, cfg.output_dir)) tracker.add(p);
  }

  std::cout << "interpret: instances=" << report.n_instances
            << " top=" << (report.attention.empty() ? "-" : report.attention.front().name)
            << " agreement=" << report.agreement.overlap << "/" << report.agreement.k
            << " report=" << json_path << "\n";
  return 0;
}

int cmd_granger(RunConfig cfg, OutputTracker& tracker) {
  SeriesFrame frame = load_input(cfg);
  const auto results = granger_rank(frame, cfg.granger_lag, cfg.granger_level);

  std::size_t ok = 0;
  for (const auto& r : results) {
    if (r.error.empty()) ++ok;
  }
  ensure_output_dir(cfg.output_dir);
  const std::string path = cfg.output_dir + "/granger.csv";
  tracker.add(path);
  write_granger_csv(results, path);
  std::cout << "granger: tested=" << results.size() << " ok=" << ok << " out=" << path << "\n";
  if (ok == 0) {
    throw std::invalid_argument("granger test failed for every exogenous column");
  }
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path,
              OutputTracker& tracker) {
  const ArxSpec spec = load_arx_spec(spec_path);
  const SeriesFrame frame = generate(spec);
  tracker.add(out_path);
  save_csv(frame, out_path);
  std::cout << "synth: rows=" << frame.n_rows() << " cols=" << frame.n_cols()
            << " out=" << out_path << "\n";
  return 0;
}

int cmd_gradcheck() {
  constexpr double kTol = 1e-4;
  const std::size_t n_list[] = {2, 3, 5};
  const std::size_t d_list[] = {1, 2, 4};
  const std::size_t t_list[] = {1, 5, 10};
  double worst = 0.0;
  for (std::size_t n : n_list) {
    for (std::size_t d : d_list) {
      for (std::size_t t : t_list) {
        const CellShape shape{n, d, t};
        const std::uint64_t seed = 1000 * n + 100 * d + t;
        const MvLstmParams params = MvLstmParams::random(shape, seed);
        Rng rng(seed ^ 0xABCDEF12345ULL);
        Matrix window(t, n);
        for (double& v : window.data) v = rng.gaussian();
        const double target = rng.gaussian();
        const double err = fd_check(params, window, target, 1e-5);
        worst = std::max(worst, err);
        std::cout << "gradcheck N=" << n << " d=" << d << " T=" << t
                  << " max_rel_err=" << format_double(err) << "\n";
      }
    }
  }
  std::cout << "gradcheck: max relative error " << format_double(worst) << " over 27 shapes ("
            << (worst <= kTol ? "pass" : "FAIL") << ", tolerance " << kTol << ")\n";
  if (worst > kTol) {
    throw std::logic_error("analytic gradients disagree with finite differences");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-variable LSTM forecasting, variable attention and Granger analysis"};
  app.require_subcommand(1);

  std::string config_path, input, target, output_dir, format, model_path, baseline;
  std::string spec_path, out_path;
  std::size_t window = 0, dim = 0, bins = 0, lag = 0, batch = 0, epochs = 0, patience = 0;
  double lr = 0.0, level = 0.0, clip = 0.0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_train_opts) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--input", input, "input CSV path (overrides config)");
    sub->add_option("--target", target, "target column name (overrides config)");
    sub->add_option("--output-dir", output_dir, "output directory (overrides config)");
    sub->add_option("--format", format, "report format: json or csv");
    sub->add_option("--bins", bins, "histogram bin count");
    sub->add_option("--lag", lag, "Granger lag order");
    sub->add_option("--level", level, "Granger significance level");
    if (with_train_opts) {
      sub->add_option("--window", window, "window length T");
      sub->add_option("--dim", dim, "hidden units per variable d");
      sub->add_option("--lr", lr, "learning rate");
      sub->add_option("--seed", seed, "RNG seed");
      sub->add_option("--batch", batch, "mini-batch size");
      sub->add_option("--epochs", epochs, "max epochs");
      sub->add_option("--patience", patience, "early-stopping patience");
      sub->add_option("--clip", clip, "gradient clip norm");
    }
  };

  CLI::App* train_cmd = app.add_subcommand("train", "fit a model on a CSV time series");
  add_common(train_cmd, true);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model or baseline on the test split");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--model", model_path, "trained model file");
  eval_cmd->add_option("--baseline", baseline, "persistence or linear");

  CLI::App* interpret_cmd =
      app.add_subcommand("interpret", "attention report with Granger comparison");
  add_common(interpret_cmd, false);
  interpret_cmd->add_option("--model", model_path, "trained model file")->required();

  CLI::App* granger_cmd = app.add_subcommand("granger", "rank exogenous variables by F statistic");
  add_common(granger_cmd, false);

  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic ARX series");
  synth_cmd->add_option("--spec", spec_path, "ARX spec JSON")->required();
  synth_cmd->add_option("--out", out_path, "output CSV path")->required();

  app.add_subcommand("gradcheck", "compare analytic gradients against finite differences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "mvlstm: error: " << e.what() << "\n";
    return 1;
  }

  OutputTracker tracker;
  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    auto given = [&](const std::string& name) {
      const CLI::Option* opt = sub->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--input")) cfg.input = input;
    if (given("--target")) cfg.target = target;
    if (given("--output-dir")) cfg.output_dir = output_dir;
    if (given("--format")) cfg.format = format;
    if (given("--bins")) cfg.bins = bins;
    if (given("--lag")) cfg.granger_lag = lag;
    if (given("--level")) cfg.granger_level = level;
    if (given("--window")) cfg.train.window = window;
    if (given("--dim")) cfg.train.per_var_dim = dim;
    if (given("--lr")) cfg.train.learning_rate = lr;
    if (given("--seed")) cfg.train.seed = seed;
    if (given("--batch")) cfg.train.batch_size = batch;
    if (given("--epochs")) cfg.train.max_epochs = epochs;
    if (given("--patience")) cfg.train.patience = patience;
    if (given("--clip")) cfg.train.clip_norm = clip;

    if (sub == train_cmd) return cmd_train(std::move(cfg), tracker);
    if (sub == eval_cmd) return cmd_eval(std::move(cfg), model_path, baseline, cfg.granger_lag, tracker);
    if (sub == interpret_cmd) return cmd_interpret(std::move(cfg), model_path, tracker);
    if (sub == granger_cmd) return cmd_granger(std::move(cfg), tracker);
    if (sub->get_name() == "synth") return cmd_synth(spec_path, out_path, tracker);
    if (sub->get_name() == "gradcheck") return cmd_gradcheck();
    throw std::logic_error("unhandled subcommand");
  } catch (const std::invalid_argument& e) {
    tracker.discard();
    std::cerr << "mvlstm: error: " << e.what() << "\n";
    return 1;
  } catch (const std::logic_error& e) {
    // invariant violations only; user and data errors are invalid_argument
    tracker.discard();
    std::cerr << "mvlstm: internal: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    tracker.discard();
    std::cerr << "mvlstm: error: " << e.what() << "\n";
    return 1;
  }
}
