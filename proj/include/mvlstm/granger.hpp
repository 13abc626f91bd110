#pragma once

#include <string>
#include <vector>

#include "mvlstm/linalg.hpp"
#include "mvlstm/series.hpp"

namespace mvlstm {

struct OlsFit {
  Vec coef;
  double rss = 0.0;
};

// Least squares via Householder QR; rejects rank-deficient designs
// (relative pivot tolerance 1e-10), naming the dependent column.
OlsFit ols(const Matrix& design, const Vec& response);

// F statistics with a residual sum of squares under this value are reported
// as this capped sentinel with a causal verdict.
inline constexpr double kGrangerFCap = 1e12;
inline constexpr double kGrangerRssFloor = 1e-12;

struct GrangerResult {
  std::size_t var_index = 0;
  std::string var_name;
  double f_stat = 0.0;
  std::size_t df_num = 0;  // p
  std::size_t df_den = 0;  // T_eff - 2p - 1
  double p_value = 1.0;
  bool causal = false;
  std::size_t lag = 0;
  double level = 0.05;
  std::string error;  // set when this column's test failed
};

// Bivariate Granger test of "x helps predict y": restricted model regresses
// y_t on an intercept and y lags 1..p, the full model adds x lags 1..p;
// F = ((RSS_r - RSS_f)/p) / (RSS_f/(T_eff - 2p - 1)) with T_eff = len - p.
GrangerResult granger_test(const Vec& y, const Vec& x, std::size_t p, double level);

// Tests every exogenous column against the target; failures are kept as
// per-column error entries after the ranked results.
std::vector<GrangerResult> granger_rank(const SeriesFrame& frame, std::size_t p,
                                        double level);

// Upper tail of the F distribution via the regularized incomplete beta.
double f_survival(double f, double df_num, double df_den);
double reg_incomplete_beta(double a, double b, double x);

}  // namespace mvlstm
