#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "capaboost/layers.hpp"

namespace capaboost {

// Monte-Carlo verification that sums of independently sampled low-rank
// Gaussian products have additive rank.
struct RankTrialConfig {
  std::size_t d_dim = 64;   // ambient dimension
  std::size_t r = 8;        // factor rank (0 allowed: zero matrices)
  int trials = 1000;
  std::uint64_t seed = 0;   // trial k uses RngStream(seed + k)
  double rel_tol = 1e-8;
};

enum class RankRegime { Additive, Boundary, Saturated };  // 2r<d, 2r==d, 2r>d

struct RankTrialReport {
  RankTrialConfig cfg;
  int trials_run = 0;
  int successes = 0;      // rank(X+Y) == rank(X) + rank(Y)
  int svd_failures = 0;   // numeric errors, counted separately from failures
  std::map<std::size_t, int> rank_x_hist;
  std::map<std::size_t, int> rank_y_hist;
  std::map<std::size_t, int> rank_sum_hist;
  RankRegime regime = RankRegime::Additive;

  // Fraction of completed (non-error) trials that were additive.
  double success_rate() const;
};

// Per trial: X = Xcol Xrow and Y = Ycol Yrow with i.i.d. N(0, 1) factor
// entries (draw order Xcol, Xrow, Ycol, Yrow), then the numerical ranks of
// X, Y and X + Y at cfg.rel_tol.
RankTrialReport theorem1_trial(const RankTrialConfig& cfg);

// Rank table over a (r, d) grid of Gaussian-initialized layers.
//
// The d = 1 row is the plain unmasked low-rank baseline the table is
// normalized against; d >= 2 rows use distinct Bernoulli(density) masks.
struct RankSweepConfig {
  std::size_t d1 = 768;
  std::size_t d2 = 768;
  std::vector<std::size_t> r_values = {8, 16, 32, 64};
  std::vector<int> d_values = {1, 2, 4};
  double density = 0.5;
  int seeds_per_cell = 3;
  std::uint64_t base_seed = 0;
  double rel_tol = 1e-8;
  std::size_t reference_r = 8;  // parameter factors are relative to d=1 at this r
};

struct RankSweepCell {
  std::size_t r = 0;
  int d = 1;
  std::vector<std::size_t> ranks;   // one per seed
  std::size_t expected_rank = 0;    // min(d*r, d1, d2)
  bool all_match_expected = false;
  double param_factor = 0.0;        // expected stored params vs the reference cell
};

std::vector<RankSweepCell> layer_rank_sweep(const RankSweepConfig& cfg);

}  // namespace capaboost
