#include "mvlstm/granger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvlstm {

namespace {

constexpr double kPivotTol = 1e-10;

bool is_constant(const Vec& v) {
  for (double x : v) {
    if (x != v[0]) return false;
  }
  return true;
}

}  // namespace

OlsFit ols(const Matrix& design, const Vec& response) {
  const std::size_t rows = design.rows;
  const std::size_t cols = design.cols;
  if (rows < cols || cols == 0) {
    throw std::invalid_argument("ols: design must have at least as many rows as columns");
  }
  if (response.size() != rows) {
    throw std::invalid_argument("ols: response length does not match design rows");
  }

  // Householder QR, reducing [A | y] in place.
  Matrix a = design;
  Vec y = response;

  double max_col_norm = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += a(i, j) * a(i, j);
    max_col_norm = std::max(max_col_norm, std::sqrt(s));
  }
  if (max_col_norm == 0.0) {
    throw std::invalid_argument("ols: design column 0 is linearly dependent (all zero)");
  }

  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < rows; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm <= kPivotTol * max_col_norm) {
      throw std::invalid_argument("ols: design column " + std::to_string(k) +
                                  " is linearly dependent (pivot below tolerance)");
    }
    const double alpha = a(k, k) >= 0.0 ? -norm : norm;
    Vec v(rows - k);
    v[0] = a(k, k) - alpha;
    for (std::size_t i = k + 1; i < rows; ++i) v[i - k] = a(i, k);
    double vnorm_sq = 0.0;
    for (double x : v) vnorm_sq += x * x;
    a(k, k) = alpha;
    for (std::size_t i = k + 1; i < rows; ++i) a(i, k) = 0.0;
    if (vnorm_sq == 0.0) continue;

    for (std::size_t j = k + 1; j < cols; ++j) {
      double proj = 0.0;
      for (std::size_t i = k; i < rows; ++i) proj += v[i - k] * a(i, j);
      const double scale = 2.0 * proj / vnorm_sq;
      for (std::size_t i = k; i < rows; ++i) a(i, j) -= scale * v[i - k];
    }
    double proj = 0.0;
    for (std::size_t i = k; i < rows; ++i) proj += v[i - k] * y[i];
    const double scale = 2.0 * proj / vnorm_sq;
    for (std::size_t i = k; i < rows; ++i) y[i] -= scale * v[i - k];
  }

  // Back-substitution on R beta = Q^T y.
  OlsFit fit;
  fit.coef.assign(cols, 0.0);
  for (std::size_t kk = cols; kk >= 1; --kk) {
    const std::size_t k = kk - 1;
    double acc = y[k];
    for (std::size_t j = k + 1; j < cols; ++j) acc -= a(k, j) * fit.coef[j];
    fit.coef[k] = acc / a(k, k);
  }

  // Residuals against the original system.
  double rss = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double pred = 0.0;
    for (std::size_t j = 0; j < cols; ++j) pred += design(i, j) * fit.coef[j];
    const double r = response[i] - pred;
    rss += r * r;
  }
  fit.rss = rss;
  return fit;
}

GrangerResult granger_test(const Vec& y, const Vec& x, std::size_t p, double level) {
  if (p < 1) throw std::invalid_argument("granger_test: lag order must be >= 1");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("granger_test: significance level must be in (0, 1)");
  }
  if (y.size() != x.size()) {
    throw std::invalid_argument("granger_test: series lengths differ");
  }
  const std::size_t len = y.size();
  if (len <= 3 * p + 1) {
    throw std::invalid_argument("granger_test: series length " + std::to_string(len) +
                                " too short for lag order " + std::to_string(p));
  }
  if (is_constant(y)) throw std::invalid_argument("granger_test: target series is constant");
  if (is_constant(x)) throw std::invalid_argument("granger_test: candidate series is constant");

  const std::size_t t_eff = len - p;
  const std::size_t df_den = t_eff - 2 * p - 1;

  Matrix restricted(t_eff, 1 + p);
  Matrix full(t_eff, 1 + 2 * p);
  Vec response(t_eff);
  for (std::size_t r = 0; r < t_eff; ++r) {
    const std::size_t t = p + r;
    response[r] = y[t];
    restricted(r, 0) = 1.0;
    full(r, 0) = 1.0;
    for (std::size_t l = 1; l <= p; ++l) {
      restricted(r, l) = y[t - l];
      full(r, l) = y[t - l];
      full(r, p + l) = x[t - l];
    }
  }

  const OlsFit fit_r = ols(restricted, response);
  const OlsFit fit_f = ols(full, response);

  GrangerResult res;
  res.df_num = p;
  res.df_den = df_den;
  res.lag = p;
  res.level = level;

  if (fit_f.rss < kGrangerRssFloor) {
    res.f_stat = kGrangerFCap;
    res.p_value = 0.0;
    res.causal = true;
    return res;
  }

  const double rss_gap = std::max(0.0, fit_r.rss - fit_f.rss);
  res.f_stat = (rss_gap / static_cast<double>(p)) /
               (fit_f.rss / static_cast<double>(df_den));
  res.p_value = f_survival(res.f_stat, static_cast<double>(p),
                           static_cast<double>(df_den));
  res.causal = res.p_value < level;
  return res;
}

std::vector<GrangerResult> granger_rank(const SeriesFrame& frame, std::size_t p,
                                        double level) {
  frame.validate();
  const std::size_t target = frame.target_index();
  std::vector<GrangerResult> ranked;
  std::vector<GrangerResult> failed;
  for (std::size_t c = 0; c < frame.n_cols(); ++c) {
    if (c == target) continue;
    GrangerResult res;
    try {
      res = granger_test(frame.values[target], frame.values[c], p, level);
    } catch (const std::exception& e) {
      res.error = e.what();
    }
    res.var_index = c;
    res.var_name = frame.columns[c];
    (res.error.empty() ? ranked : failed).push_back(std::move(res));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const GrangerResult& a, const GrangerResult& b) {
                     if (a.f_stat != b.f_stat) return a.f_stat > b.f_stat;
                     return a.var_index < b.var_index;
                   });
  ranked.insert(ranked.end(), std::make_move_iterator(failed.begin()),
                std::make_move_iterator(failed.end()));
  return ranked;
}

namespace {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("reg_incomplete_beta: parameters must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double f_survival(double f, double df_num, double df_den) {
  if (!(df_num > 0.0) || !(df_den > 0.0)) {
    throw std::invalid_argument("f_survival: degrees of freedom must be positive");
  }
  if (f <= 0.0) return 1.0;
  const double x = df_den / (df_den + df_num * f);
  return reg_incomplete_beta(df_den / 2.0, df_num / 2.0, x);
}

}  // namespace mvlstm
