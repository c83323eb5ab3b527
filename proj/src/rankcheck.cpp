#include "capaboost/rankcheck.hpp"

#include <algorithm>

#include "capaboost/accounting.hpp"
#include "capaboost/errors.hpp"
#include "capaboost/svd.hpp"

namespace capaboost {

double RankTrialReport::success_rate() const {
  const int completed = trials_run - svd_failures;
  if (completed <= 0) return 0.0;
  return static_cast<double>(successes) / static_cast<double>(completed);
}

RankTrialReport theorem1_trial(const RankTrialConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("theorem1_trial: trials must be >= 1");
  if (cfg.d_dim == 0) throw ConfigError("theorem1_trial: d_dim must be positive");
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0)) {
    throw ConfigError("theorem1_trial: rel_tol must lie in (0, 1)");
  }

  RankTrialReport report;
  report.cfg = cfg;
  if (2 * cfg.r < cfg.d_dim) {
    report.regime = RankRegime::Additive;
  } else if (2 * cfg.r == cfg.d_dim) {
    report.regime = RankRegime::Boundary;
  } else {
    report.regime = RankRegime::Saturated;
  }

  for (int k = 0; k < cfg.trials; ++k) {
    RngStream stream(cfg.seed + static_cast<std::uint64_t>(k));
    Matrix x(cfg.d_dim, cfg.d_dim), y(cfg.d_dim, cfg.d_dim);
    if (cfg.r > 0) {
      const Matrix x_col = gaussian(cfg.d_dim, cfg.r, stream);
      const Matrix x_row = gaussian(cfg.r, cfg.d_dim, stream);
      const Matrix y_col = gaussian(cfg.d_dim, cfg.r, stream);
      const Matrix y_row = gaussian(cfg.r, cfg.d_dim, stream);
      x = matmul(x_col, x_row);
      y = matmul(y_col, y_row);
    }
    ++report.trials_run;
    try {
      const std::size_t rank_x = numerical_rank(x, cfg.rel_tol);
      const std::size_t rank_y = numerical_rank(y, cfg.rel_tol);
      const std::size_t rank_sum = numerical_rank(add(x, y), cfg.rel_tol);
      ++report.rank_x_hist[rank_x];
      ++report.rank_y_hist[rank_y];
      ++report.rank_sum_hist[rank_sum];
      if (rank_sum == rank_x + rank_y) ++report.successes;
    } catch (const NumericError&) {
      ++report.svd_failures;
    }
  }
  return report;
}

std::vector<RankSweepCell> layer_rank_sweep(const RankSweepConfig& cfg) {
  if (cfg.r_values.empty() || cfg.d_values.empty()) {
    throw ConfigError("layer_rank_sweep: empty grid");
  }
  if (cfg.seeds_per_cell < 1) {
    throw ConfigError("layer_rank_sweep: need at least one seed per cell");
  }

  auto cell_config = [&](std::size_t r, int d, std::uint64_t mask_seed) {
    LayerConfig layer;
    layer.d1 = cfg.d1;
    layer.d2 = cfg.d2;
    layer.r = r;
    layer.d = d;
    layer.policy = PolicyKind::Diff;
    // d = 1 is the unmasked baseline row of the table.
    layer.pattern = d == 1 ? MaskPattern{BernoulliPattern{1.0}}
                           : MaskPattern{BernoulliPattern{cfg.density}};
    layer.mask_seed = mask_seed;
    layer.b_init = BInit::Gaussian;  // rank-study initialization
    layer.init_seed = mix64(mask_seed);
    return layer;
  };

  const LayerConfig reference = cell_config(cfg.reference_r, 1, cfg.base_seed);

  std::vector<RankSweepCell> cells;
  std::uint64_t trial_index = 0;
  const Matrix w_pre(cfg.d1, cfg.d2);  // irrelevant for the incremental rank
  for (int d : cfg.d_values) {
    for (std::size_t r : cfg.r_values) {
      RankSweepCell cell;
      cell.r = r;
      cell.d = d;
      cell.expected_rank =
          std::min({static_cast<std::size_t>(d) * r, cfg.d1, cfg.d2});
      for (int s = 0; s < cfg.seeds_per_cell; ++s) {
        // 64 seeds of headroom per trial keeps the 2d mask slots disjoint.
        const std::uint64_t mask_seed = cfg.base_seed + trial_index * 64;
        ++trial_index;
        const CapaBoostLayer layer(cell_config(r, d, mask_seed), w_pre);
        cell.ranks.push_back(
            numerical_rank(layer.effective_weight(0), cfg.rel_tol));
      }
      cell.all_match_expected =
          std::all_of(cell.ranks.begin(), cell.ranks.end(),
                      [&](std::size_t rank) { return rank == cell.expected_rank; });
      cell.param_factor = expected_stored_params(cell_config(r, d, 0)) /
                          expected_stored_params(reference);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace capaboost
