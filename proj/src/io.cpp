#include "mvlstm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mvlstm {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" ||
         cell == "na" || cell == "?";
}

bool parse_number(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_integer(const std::string& cell, long long& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

const std::vector<std::string> kUciHeader = {
    "No", "year", "month", "day", "hour", "pm2.5", "DEWP",
    "TEMP", "PRES", "cbwd", "Iws", "Is", "Ir"};

// Series kept, in order: dew point, temperature, pressure, wind direction,
// wind speed, snow hours, rain hours, then the pm2.5 target.
const std::vector<std::string> kUciVariables = {"DEWP", "TEMP", "PRES", "cbwd",
                                                "Iws",  "Is",   "Ir",   "pm2.5"};

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  RawTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV: " + path);
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw std::invalid_argument(path + ": row " + std::to_string(table.rows.size() + 2) +
                                  " has " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void check_order(const std::string& path, const std::vector<std::string>& index_cells) {
  long long prev_num = 0;
  std::string prev_str;
  bool numeric = true;
  for (std::size_t i = 0; i < index_cells.size(); ++i) {
    long long value = 0;
    if (i == 0) {
      numeric = parse_integer(index_cells[i], value);
      if (numeric) prev_num = value;
      prev_str = index_cells[i];
      continue;
    }
    if (numeric && parse_integer(index_cells[i], value)) {
      if (value <= prev_num) {
        throw std::invalid_argument(path + ": index column is not strictly increasing at row " +
                                    std::to_string(i + 2));
      }
      prev_num = value;
    } else {
      numeric = false;
      if (index_cells[i] <= prev_str) {
        throw std::invalid_argument(path + ": index column is not strictly increasing at row " +
                                    std::to_string(i + 2));
      }
    }
    prev_str = index_cells[i];
  }
}

// Collapse the UCI Beijing schema onto its eight data series.
RawTable adapt_uci(const RawTable& in) {
  RawTable out;
  out.header.push_back("No");
  for (const std::string& v : kUciVariables) out.header.push_back(v);

  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < in.header.size(); ++j) col[in.header[j]] = j;
  std::map<std::string, std::size_t> wind_codes;

  for (const auto& row : in.rows) {
    std::vector<std::string> cells;
    cells.push_back(row[col.at("No")]);
    for (const std::string& v : kUciVariables) {
      std::string cell = row[col.at(v)];
      if (v == "cbwd" && !is_missing(cell)) {
        auto [it, inserted] = wind_codes.try_emplace(cell, wind_codes.size());
        cell = std::to_string(it->second);
      }
      cells.push_back(std::move(cell));
    }
    out.rows.push_back(std::move(cells));
  }
  return out;
}

json parse_json_file(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw std::invalid_argument("invalid JSON in " + path);
  return j;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw std::invalid_argument(path + ": unknown key '" + key + "'");
    }
  }
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f64(std::string& out, double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof(bits));
  append_u64(out, bits);
}

std::uint32_t read_u32(const std::string& buf, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
  return v;
}

std::uint64_t read_u64(const std::string& buf, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
  return v;
}

double read_f64(const std::string& buf, std::size_t pos) {
  const std::uint64_t bits = read_u64(buf, pos);
  double d = 0.0;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

CsvLoadResult load_csv(const std::string& path, const std::string& target) {
  RawTable table = read_table(path);
  if (table.header == kUciHeader) table = adapt_uci(table);
  if (table.header.size() < 3) {
    throw std::invalid_argument(path + ": need an index column, one exogenous column and a target");
  }

  std::vector<std::string> names(table.header.begin() + 1, table.header.end());
  const auto target_it = std::find(names.begin(), names.end(), target);
  if (target_it == names.end()) {
    throw std::invalid_argument(path + ": target column '" + target + "' not found");
  }
  // move the target to the last position
  std::rotate(target_it, target_it + 1, names.end());

  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < table.header.size(); ++j) col[table.header[j]] = j;

  CsvLoadResult result;
  result.rows_total = table.rows.size();

  std::vector<Vec> values(names.size());
  std::vector<std::size_t> segments;
  std::vector<std::string> index_cells;
  std::size_t segment = 0;
  bool last_dropped = false;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    bool missing = false;
    Vec parsed(names.size());
    for (std::size_t v = 0; v < names.size(); ++v) {
      const std::string& cell = row[col.at(names[v])];
      if (is_missing(cell)) {
        missing = true;
        break;
      }
      if (!parse_number(cell, parsed[v])) {
        throw std::invalid_argument(path + ": row " + std::to_string(r + 2) + " column '" +
                                    names[v] + "' is not numeric: '" + cell + "'");
      }
    }
    if (missing) {
      ++result.rows_dropped;
      last_dropped = true;
      continue;
    }
    if (last_dropped && !values[0].empty()) ++segment;
    last_dropped = false;
    for (std::size_t v = 0; v < names.size(); ++v) values[v].push_back(parsed[v]);
    segments.push_back(segment);
    index_cells.push_back(row[0]);
  }

  if (values[0].empty()) {
    throw std::invalid_argument(path + ": no usable rows after dropping " +
                                std::to_string(result.rows_dropped) + " incomplete rows");
  }
  check_order(path, index_cells);

  result.frame.columns = std::move(names);
  result.frame.values = std::move(values);
  result.frame.segment_of = std::move(segments);
  result.frame.validate();
  return result;
}

void save_csv(const SeriesFrame& frame, const std::string& path) {
  frame.validate();
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "t";
  for (const std::string& name : frame.columns) out << "," << name;
  out << "\n";
  for (std::size_t r = 0; r < frame.n_rows(); ++r) {
    out << (r + 1);
    for (std::size_t c = 0; c < frame.n_cols(); ++c) {
      out << "," << format_double(frame.values[c][r]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void save_model(const std::string& path, const ModelFile& model) {
  model.params.validate();
  const CellShape& shape = model.params.shape;
  if (model.columns.size() != shape.n_vars) {
    throw std::invalid_argument("save_model: column names do not match n_vars");
  }
  if (model.stats.mean.size() != shape.n_vars || model.stats.stddev.size() != shape.n_vars) {
    throw std::invalid_argument("save_model: normalization stats do not match n_vars");
  }

  json header;
  header["schema_version"] = 1;
  header["shape"] = {{"n_vars", shape.n_vars},
                     {"per_var_dim", shape.per_var_dim},
                     {"window", shape.window}};
  header["columns"] = model.columns;
  header["normalization"] = {{"mean", model.stats.mean}, {"stddev", model.stats.stddev}};
  json blocks = json::array();
  const auto names = param_block_names(shape);
  const auto spans = param_spans(model.params);
  std::size_t count = 0;
  for (std::size_t b = 0; b < spans.size(); ++b) {
    blocks.push_back({{"name", names[b]}, {"size", spans[b].size()}});
    count += spans[b].size();
  }
  header["param_blocks"] = blocks;
  header["param_count"] = count;
  const std::string header_text = header.dump();

  std::string buf;
  buf += "MVLM";
  append_u32(buf, 1);
  append_u64(buf, header_text.size());
  buf += header_text;
  for (const auto& span : spans) {
    for (double v : span) append_f64(buf, v);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed while writing " + path);
}

ModelFile load_model(const std::string& path) {
  const std::string buf = read_file(path);
  if (buf.size() < 16 || buf.compare(0, 4, "MVLM") != 0) {
    throw std::invalid_argument(path + ": not a model file (bad magic)");
  }
  const std::uint32_t version = read_u32(buf, 4);
  if (version != 1) {
    throw std::invalid_argument(path + ": unsupported model version " + std::to_string(version));
  }
  const std::uint64_t header_len = read_u64(buf, 8);
  if (16 + header_len > buf.size()) {
    throw std::invalid_argument(path + ": truncated model header");
  }
  json header = json::parse(buf.substr(16, header_len), nullptr, false);
  if (header.is_discarded()) throw std::invalid_argument(path + ": invalid model header");

  ModelFile model;
  CellShape shape;
  shape.n_vars = header.at("shape").at("n_vars").get<std::size_t>();
  shape.per_var_dim = header.at("shape").at("per_var_dim").get<std::size_t>();
  shape.window = header.at("shape").at("window").get<std::size_t>();
  model.params = MvLstmParams::zeros(shape);
  model.columns = header.at("columns").get<std::vector<std::string>>();
  model.stats.mean = header.at("normalization").at("mean").get<Vec>();
  model.stats.stddev = header.at("normalization").at("stddev").get<Vec>();

  const std::size_t count = header.at("param_count").get<std::size_t>();
  if (count != model.params.count()) {
    throw std::invalid_argument(path + ": parameter count does not match shape");
  }
  const std::size_t payload = 16 + header_len;
  if (buf.size() != payload + 8 * count) {
    throw std::invalid_argument(path + ": truncated parameter payload");
  }
  std::size_t pos = payload;
  for (auto& span : param_spans(model.params)) {
    for (double& v : span) {
      v = read_f64(buf, pos);
      pos += 8;
    }
  }
  model.params.validate();
  if (model.columns.size() != shape.n_vars) {
    throw std::invalid_argument(path + ": column names do not match n_vars");
  }
  return model;
}

RunConfig load_run_config(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) throw std::invalid_argument(path + ": config must be a JSON object");
  reject_unknown_keys(j,
                      {"input", "target", "output_dir", "format", "bins", "granger_lag",
                       "granger_level", "window", "dim", "learning_rate", "batch_size",
                       "max_epochs", "patience", "clip_norm", "seed", "splits"},
                      path);

  RunConfig cfg;
  if (j.contains("input")) cfg.input = j.at("input").get<std::string>();
  if (j.contains("target")) cfg.target = j.at("target").get<std::string>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
  if (j.contains("bins")) cfg.bins = j.at("bins").get<std::size_t>();
  if (j.contains("granger_lag")) cfg.granger_lag = j.at("granger_lag").get<std::size_t>();
  if (j.contains("granger_level")) cfg.granger_level = j.at("granger_level").get<double>();
  if (j.contains("window")) cfg.train.window = j.at("window").get<std::size_t>();
  if (j.contains("dim")) cfg.train.per_var_dim = j.at("dim").get<std::size_t>();
  if (j.contains("learning_rate")) cfg.train.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("batch_size")) cfg.train.batch_size = j.at("batch_size").get<std::size_t>();
  if (j.contains("max_epochs")) cfg.train.max_epochs = j.at("max_epochs").get<std::size_t>();
  if (j.contains("patience")) cfg.train.patience = j.at("patience").get<std::size_t>();
  if (j.contains("clip_norm")) cfg.train.clip_norm = j.at("clip_norm").get<double>();
  if (j.contains("seed")) cfg.train.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("splits")) {
    const auto s = j.at("splits").get<std::vector<double>>();
    if (s.size() != 3) throw std::invalid_argument(path + ": splits must have 3 fractions");
    cfg.train.splits = SplitFractions{s[0], s[1], s[2]};
  }
  if (cfg.format != "json" && cfg.format != "csv") {
    throw std::invalid_argument(path + ": format must be json or csv");
  }
  if (!cfg.input.empty() && !std::filesystem::exists(cfg.input)) {
    throw std::invalid_argument(path + ": input path does not exist: " + cfg.input);
  }
  return cfg;
}

ArxSpec load_arx_spec(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) throw std::invalid_argument(path + ": spec must be a JSON object");
  reject_unknown_keys(
      j, {"exo_coef", "self_coef", "noise_std", "exo", "length", "seed", "y_init"}, path);

  ArxSpec spec;
  spec.exo_coef = j.at("exo_coef").get<std::vector<Vec>>();
  spec.n_exo = spec.exo_coef.size();
  if (j.contains("self_coef")) spec.self_coef = j.at("self_coef").get<Vec>();
  if (j.contains("noise_std")) spec.noise_std = j.at("noise_std").get<double>();
  if (j.contains("exo")) {
    for (const auto& e : j.at("exo")) {
      reject_unknown_keys(e, {"rho", "stddev"}, path);
      ExoProcess proc;
      if (e.contains("rho")) proc.rho = e.at("rho").get<double>();
      if (e.contains("stddev")) proc.stddev = e.at("stddev").get<double>();
      spec.exo.push_back(proc);
    }
  }
  spec.length = j.at("length").get<std::size_t>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("y_init")) spec.y_init = j.at("y_init").get<double>();
  spec.validate();
  return spec;
}

InterpretReport build_interpret_report(const std::vector<Vec>& test_alphas,
                                       const std::vector<std::string>& columns,
                                       const std::vector<GrangerResult>& granger,
                                       std::size_t bins) {
  InterpretReport report;
  report.n_instances = test_alphas.size();
  report.bins = bins;
  report.attention = rank_variables(test_alphas, columns, bins);
  report.granger = granger;

  const std::string target = columns.back();
  std::set<std::string> causal;
  for (const GrangerResult& g : granger) {
    if (g.error.empty() && g.causal) causal.insert(g.var_name);
  }
  report.agreement.k = causal.size();
  for (const VariableStats& v : report.attention) {
    if (v.name == target) continue;
    if (report.agreement.attention_top.size() < report.agreement.k) {
      report.agreement.attention_top.push_back(v.name);
    }
  }
  for (const std::string& name : report.agreement.attention_top) {
    if (causal.contains(name)) ++report.agreement.overlap;
  }
  report.agreement.granger_causal.assign(causal.begin(), causal.end());
  return report;
}

namespace {

json granger_to_json(const GrangerResult& g) {
  json j;
  j["variable"] = g.var_name;
  if (!g.error.empty()) {
    j["error"] = g.error;
    return j;
  }
  j["f_stat"] = g.f_stat;
  j["df_num"] = g.df_num;
  j["df_den"] = g.df_den;
  j["p_value"] = g.p_value;
  j["causal"] = g.causal;
  j["lag"] = g.lag;
  j["level"] = g.level;
  return j;
}

}  // namespace

void write_interpret_json(const InterpretReport& report, const std::string& path) {
  json j;
  j["n_instances"] = report.n_instances;
  j["bins"] = report.bins;
  json attention = json::array();
  for (const VariableStats& v : report.attention) {
    json edges = json::array();
    for (std::size_t b = 0; b <= report.bins; ++b) {
      edges.push_back(static_cast<double>(b) / static_cast<double>(report.bins));
    }
    attention.push_back({{"variable", v.name},
                         {"mean_alpha", v.mean_alpha},
                         {"std_alpha", v.std_alpha},
                         {"bin_edges", edges},
                         {"counts", v.histogram}});
  }
  j["attention"] = attention;
  json granger = json::array();
  for (const GrangerResult& g : report.granger) granger.push_back(granger_to_json(g));
  j["granger"] = granger;
  j["agreement"] = {{"k", report.agreement.k},
                    {"overlap", report.agreement.overlap},
                    {"attention_top", report.agreement.attention_top},
                    {"granger_causal", report.agreement.granger_causal}};

  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed while writing " + path);
}

std::vector<std::string> write_interpret_csvs(const InterpretReport& report,
                                              const std::string& dir) {
  std::vector<std::string> written;
  const auto summary_path = dir + "/attention_summary.csv";
  {
    std::ofstream out(summary_path);
    if (!out) throw std::invalid_argument("cannot write file: " + summary_path);
    out << "variable,mean_alpha,std_alpha\n";
    for (const VariableStats& v : report.attention) {
      out << v.name << "," << format_double(v.mean_alpha) << ","
          << format_double(v.std_alpha) << "\n";
    }
  }
  written.push_back(summary_path);
  for (const VariableStats& v : report.attention) {
    const auto path = dir + "/attention_hist_" + v.name + ".csv";
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < v.histogram.size(); ++b) {
      const double lo = static_cast<double>(b) / static_cast<double>(report.bins);
      const double hi = static_cast<double>(b + 1) / static_cast<double>(report.bins);
      out << format_double(lo) << "," << format_double(hi) << "," << v.histogram[b] << "\n";
    }
    written.push_back(path);
  }
  return written;
}

void write_granger_csv(const std::vector<GrangerResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "variable,f_stat,p_value,verdict,error\n";
  for (const GrangerResult& g : results) {
    if (g.error.empty()) {
      out << g.var_name << "," << format_double(g.f_stat) << "," << format_double(g.p_value)
          << "," << (g.causal ? "causal" : "non-causal") << ",\n";
    } else {
      std::string msg = g.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << g.var_name << ",,,," << msg << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void write_metrics_json(const FitResult& fit, const std::string& path) {
  json j;
  j["test_rmse"] = fit.test_rmse;
  j["test_mae"] = fit.test_mae;
  j["best_epoch"] = fit.best_epoch;
  j["epochs_run"] = fit.train_loss.size();
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void write_loss_curve_csv(const FitResult& fit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < fit.train_loss.size(); ++e) {
    out << e << "," << format_double(fit.train_loss[e]) << ","
        << format_double(fit.val_loss[e]) << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

}  // namespace mvlstm
