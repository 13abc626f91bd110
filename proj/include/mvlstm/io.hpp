#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mvlstm/attention.hpp"
#include "mvlstm/granger.hpp"
#include "mvlstm/series.hpp"
#include "mvlstm/synth.hpp"
#include "mvlstm/train.hpp"

namespace mvlstm {

// ---------------------------------------------------------------------------
// CSV ingestion. Dialect: comma-separated, first row header, UTF-8, decimal
// point, no thousands separators; one line per time step; column 1 is a
// strictly increasing integer or ISO-8601 timestamp used only for ordering
// validation. Rows containing a missing marker (empty, NA, NaN, nan, ?) are
// dropped; a dropped row starts a new segment so windows never span the gap.
//
// A file whose header matches the UCI Beijing PM2.5 schema
// (No,year,month,day,hour,pm2.5,DEWP,TEMP,PRES,cbwd,Iws,Is,Ir) is adapted:
// the calendar fields are folded into the index, the categorical wind
// direction is coded by order of first appearance, and the remaining eight
// series become the frame.
// ---------------------------------------------------------------------------

struct CsvLoadResult {
  SeriesFrame frame;
  std::size_t rows_dropped = 0;
  std::size_t rows_total = 0;
};

CsvLoadResult load_csv(const std::string& path, const std::string& target);

// Writes a frame with an integer index column "t" (1-based), variable
// columns in order, target last. Values round-trip exactly.
void save_csv(const SeriesFrame& frame, const std::string& path);

// ---------------------------------------------------------------------------
// Model container. Byte layout, integers little-endian:
//   bytes 0..3   magic "MVLM"
//   bytes 4..7   u32 format version (1)
//   bytes 8..15  u64 byte length of the JSON header
//   JSON header  shape, column names, normalization stats, and the canonical
//                parameter block list with sizes
//   payload      param_count raw little-endian IEEE-754 doubles in canonical
//                block order (w_x, w_h[0..N-1], b_j, w_gates, b_gates, w_e,
//                b_e, w_out, b_out)
// ---------------------------------------------------------------------------

struct ModelFile {
  MvLstmParams params;
  NormStats stats;
  std::vector<std::string> columns;  // target last
};

void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration (JSON). Unknown keys are rejected.
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string input;
  std::string target;
  std::string output_dir = "out";
  std::string format = "json";  // json | csv
  std::size_t bins = 20;
  std::size_t granger_lag = 5;
  double granger_level = 0.05;
  TrainConfig train;
};

RunConfig load_run_config(const std::string& path);

ArxSpec load_arx_spec(const std::string& path);

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

struct AgreementSummary {
  std::size_t k = 0;        // number of Granger-causal exogenous variables
  std::size_t overlap = 0;  // |top-k by attention  ∩  causal set|
  std::vector<std::string> attention_top;
  std::vector<std::string> granger_causal;
};

struct InterpretReport {
  std::vector<VariableStats> attention;  // all variables, ranked
  std::vector<GrangerResult> granger;    // exogenous variables, ranked
  AgreementSummary agreement;
  std::size_t n_instances = 0;
  std::size_t bins = 0;
};

InterpretReport build_interpret_report(const std::vector<Vec>& test_alphas,
                                       const std::vector<std::string>& columns,
                                       const std::vector<GrangerResult>& granger,
                                       std::size_t bins);

void write_interpret_json(const InterpretReport& report, const std::string& path);
// One histogram CSV per variable plus a summary CSV, written into `dir`.
std::vector<std::string> write_interpret_csvs(const InterpretReport& report,
                                              const std::string& dir);

void write_granger_csv(const std::vector<GrangerResult>& results, const std::string& path);

void write_metrics_json(const FitResult& fit, const std::string& path);
void write_loss_curve_csv(const FitResult& fit, const std::string& path);

// Shortest exact decimal representation (round-trips bit-for-bit).
std::string format_double(double v);

}  // namespace mvlstm
