#pragma once

#include <cstdint>
#include <vector>

#include "mvlstm/series.hpp"

namespace mvlstm {

// Exogenous driver: AR(1) with coefficient rho (0 = i.i.d. gaussian) and
// marginal standard deviation stddev.
struct ExoProcess {
  double rho = 0.0;
  double stddev = 1.0;
};

struct ArxSpec {
  std::size_t n_exo = 0;
  std::vector<Vec> exo_coef;  // [variable][lag], lag 1 first
  Vec self_coef;              // target lags, lag 1 first
  double noise_std = 0.0;
  std::vector<ExoProcess> exo;  // one per exogenous variable
  std::size_t length = 0;
  std::uint64_t seed = 0;
  double y_init = 0.0;  // target value at the first pre-burn-in step

  std::size_t max_lag() const;
  void validate() const;  // stability and length checks
};

// Spectral radius estimate of the autoregressive companion matrix
// (norm growth under repeated squaring).
double companion_spectral_radius(const Vec& self_coef);

// Draws exogenous columns first (independently of the target), then the
// target recursion; a burn-in of 10x the maximum lag is discarded.
// Deterministic under the seed.
SeriesFrame generate(const ArxSpec& spec);

struct GroundTruthEntry {
  std::size_t var_index = 0;  // exogenous variable, 0-based
  double score = 0.0;         // sum over lags of |coef| * process stddev
};

// Exogenous variables ordered by their contribution score, descending;
// ties broken by index ascending.
std::vector<GroundTruthEntry> ground_truth_rank(const ArxSpec& spec);

}  // namespace mvlstm
