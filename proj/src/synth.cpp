#include "mvlstm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mvlstm/rng.hpp"

namespace mvlstm {

std::size_t ArxSpec::max_lag() const {
  std::size_t lag = std::max<std::size_t>(1, self_coef.size());
  for (const Vec& c : exo_coef) lag = std::max(lag, c.size());
  return lag;
}

double companion_spectral_radius(const Vec& self_coef) {
  const std::size_t p = self_coef.size();
  if (p == 0) return 0.0;
  if (p == 1) return std::abs(self_coef[0]);

  Matrix a(p, p);
  for (std::size_t j = 0; j < p; ++j) a(0, j) = self_coef[j];
  for (std::size_t i = 1; i < p; ++i) a(i, i - 1) = 1.0;

  // Gelfand: ||A^(2^k)||^(1/2^k) -> spectral radius; normalize after each
  // squaring and accumulate the scale factors in log space.
  double log_radius = 0.0;
  for (int iter = 1; iter <= 48; ++iter) {
    Matrix sq(p, p);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t k = 0; k < p; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < p; ++j) sq(i, j) += aik * a(k, j);
      }
    }
    double norm_sq = 0.0;
    for (double v : sq.data) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) return 0.0;  // nilpotent
    log_radius += std::ldexp(std::log(norm), -iter);
    for (double& v : sq.data) v /= norm;
    a = std::move(sq);
  }
  return std::exp(log_radius);
}

void ArxSpec::validate() const {
  if (n_exo == 0) throw std::invalid_argument("ArxSpec: need at least one exogenous variable");
  if (exo_coef.size() != n_exo) {
    throw std::invalid_argument("ArxSpec: coefficient rows (" + std::to_string(exo_coef.size()) +
                                ") do not match n_exo (" + std::to_string(n_exo) + ")");
  }
  if (!exo.empty() && exo.size() != n_exo) {
    throw std::invalid_argument("ArxSpec: exogenous process specs do not match n_exo");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("ArxSpec: noise std must be finite and >= 0");
  }
  for (std::size_t k = 0; k < exo.size(); ++k) {
    if (std::abs(exo[k].rho) >= 1.0) {
      throw std::invalid_argument("ArxSpec: exogenous AR(1) coefficient for variable " +
                                  std::to_string(k + 1) + " has magnitude " +
                                  std::to_string(std::abs(exo[k].rho)) +
                                  " >= 1 (unstable)");
    }
    if (!(exo[k].stddev > 0.0)) {
      throw std::invalid_argument("ArxSpec: exogenous stddev must be positive");
    }
  }
  const double radius = companion_spectral_radius(self_coef);
  if (radius >= 1.0) {
    throw std::invalid_argument("ArxSpec: autoregressive root magnitude " +
                                std::to_string(radius) + " is outside the unit circle");
  }
  if (length < 10 * max_lag()) {
    throw std::invalid_argument("ArxSpec: length " + std::to_string(length) +
                                " must be at least 10x the maximum lag (" +
                                std::to_string(10 * max_lag()) + ")");
  }
}

SeriesFrame generate(const ArxSpec& spec) {
  spec.validate();
  const std::size_t burn = 10 * spec.max_lag();
  const std::size_t total = burn + spec.length;
  Rng rng(spec.seed);

  std::vector<Vec> exo_full(spec.n_exo);
  for (std::size_t k = 0; k < spec.n_exo; ++k) {
    const ExoProcess proc = spec.exo.empty() ? ExoProcess{} : spec.exo[k];
    const double innov = proc.stddev * std::sqrt(1.0 - proc.rho * proc.rho);
    Vec& col = exo_full[k];
    col.resize(total);
    double prev = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
      prev = proc.rho * prev + innov * rng.gaussian();
      col[t] = prev;
    }
  }

  Vec y_full(total, 0.0);
  for (std::size_t t = 0; t < total; ++t) {
    double value = (t == 0) ? spec.y_init : 0.0;
    for (std::size_t l = 0; l < spec.self_coef.size(); ++l) {
      if (t >= l + 1) value += spec.self_coef[l] * y_full[t - l - 1];
    }
    for (std::size_t k = 0; k < spec.n_exo; ++k) {
      const Vec& coefs = spec.exo_coef[k];
      for (std::size_t l = 0; l < coefs.size(); ++l) {
        if (t >= l + 1) value += coefs[l] * exo_full[k][t - l - 1];
      }
    }
    if (spec.noise_std > 0.0) value += spec.noise_std * rng.gaussian();
    y_full[t] = value;
  }

  std::vector<std::string> names;
  std::vector<Vec> cols;
  for (std::size_t k = 0; k < spec.n_exo; ++k) {
    names.push_back("x" + std::to_string(k + 1));
    cols.emplace_back(exo_full[k].begin() + static_cast<std::ptrdiff_t>(burn),
                      exo_full[k].end());
  }
  names.push_back("y");
  cols.emplace_back(y_full.begin() + static_cast<std::ptrdiff_t>(burn), y_full.end());
  return SeriesFrame::from_columns(std::move(names), std::move(cols));
}

std::vector<GroundTruthEntry> ground_truth_rank(const ArxSpec& spec) {
  spec.validate();
  std::vector<GroundTruthEntry> entries(spec.n_exo);
  for (std::size_t k = 0; k < spec.n_exo; ++k) {
    entries[k].var_index = k;
    const double stddev = spec.exo.empty() ? 1.0 : spec.exo[k].stddev;
    double score = 0.0;
    for (double c : spec.exo_coef[k]) score += std::abs(c) * stddev;
    entries[k].score = score;
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const GroundTruthEntry& a, const GroundTruthEntry& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.var_index < b.var_index;
                   });
  return entries;
}

}  // namespace mvlstm
