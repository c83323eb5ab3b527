#include "capaboost/accounting.hpp"

#include <cmath>

#include "capaboost/errors.hpp"

namespace capaboost {

namespace {

// Exact number of positions covered by at least one mask.
std::size_t union_count(const std::vector<Matrix>& masks) {
  const std::size_t total = masks.front().size();
  std::size_t covered = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    for (const Matrix& m : masks) {
      if (m.data()[idx] != 0.0) {
        ++covered;
        break;
      }
    }
  }
  return covered;
}

}  // namespace

double pattern_density(const MaskPattern& pattern) {
  if (const auto* bernoulli = std::get_if<BernoulliPattern>(&pattern)) {
    return bernoulli->density;
  }
  const auto& ntom = std::get<NtoMPattern>(pattern);
  return static_cast<double>(ntom.n) / static_cast<double>(ntom.m);
}

double stored_fraction(const LayerConfig& cfg) {
  const double rho = pattern_density(cfg.pattern);
  switch (cfg.policy) {
    case PolicyKind::Diff:
      return expected_stored_fraction(1.0 - rho, cfg.d);
    case PolicyKind::Same:
      return rho;
    case PolicyKind::Dropout:
      return 1.0;
  }
  throw ConfigError("accounting: unknown mask policy");
}

std::size_t dense_trainable_count(const LayerConfig& cfg) {
  return cfg.d1 * cfg.r + cfg.r * cfg.d2 + (cfg.use_bias ? cfg.d2 : 0);
}

double expected_stored_params(const LayerConfig& cfg) {
  const double factors = static_cast<double>(cfg.d1 * cfg.r + cfg.r * cfg.d2);
  const double bias = cfg.use_bias ? static_cast<double>(cfg.d2) : 0.0;
  return factors * stored_fraction(cfg) + bias;
}

std::size_t realized_stored_params(const LayerConfig& cfg) {
  const std::size_t bias = cfg.use_bias ? cfg.d2 : 0;
  if (cfg.policy == PolicyKind::Dropout) {
    return dense_trainable_count(cfg);
  }
  const auto masks_b = masks_for_policy(layer_mask_policy(cfg, false), cfg.d,
                                        cfg.pattern, cfg.d1, cfg.r, 0);
  const auto masks_a = masks_for_policy(layer_mask_policy(cfg, true), cfg.d,
                                        cfg.pattern, cfg.r, cfg.d2, 0);
  return union_count(masks_b) + union_count(masks_a) + bias;
}

double macs_per_token(const LayerConfig& cfg, FlopMode mode) {
  const double rho = pattern_density(cfg.pattern);
  const double dense_factor_macs =
      static_cast<double>(cfg.d1 * cfg.r + cfg.r * cfg.d2);
  switch (mode) {
    case FlopMode::Train:
    case FlopMode::InferUnmerged:
      return static_cast<double>(cfg.d) * rho * dense_factor_macs;
    case FlopMode::InferMerged: {
      if (cfg.nonlinearity != Nonlinearity::None) {
        throw ContractError("macs_per_token: nonlinear layers cannot be merged");
      }
      return stored_fraction(cfg) * static_cast<double>(cfg.d1 * cfg.d2);
    }
  }
  throw ConfigError("macs_per_token: unknown mode");
}

std::int64_t flop_count(const LayerConfig& cfg, FlopMode mode) {
  return static_cast<std::int64_t>(std::llround(2.0 * macs_per_token(cfg, mode)));
}

AccountingReport make_accounting_report(const LayerConfig& cfg,
                                        const LayerConfig& reference) {
  AccountingReport report;
  report.dense_params = dense_trainable_count(cfg);
  report.expected_stored_params = expected_stored_params(cfg);
  report.realized_stored_params = realized_stored_params(cfg);
  report.optimizer_state_params = dense_trainable_count(cfg);
  report.train_flops_per_token = flop_count(cfg, FlopMode::Train);
  report.infer_unmerged_flops_per_token = flop_count(cfg, FlopMode::InferUnmerged);
  report.infer_merged_flops_per_token =
      cfg.nonlinearity == Nonlinearity::None
          ? flop_count(cfg, FlopMode::InferMerged)
          : 0;

  report.param_factor =
      expected_stored_params(cfg) / expected_stored_params(reference);
  report.train_flop_factor = macs_per_token(cfg, FlopMode::Train) /
                             macs_per_token(reference, FlopMode::Train);
  report.infer_unmerged_flop_factor =
      macs_per_token(cfg, FlopMode::InferUnmerged) /
      macs_per_token(reference, FlopMode::InferUnmerged);
  if (cfg.nonlinearity == Nonlinearity::None &&
      reference.nonlinearity == Nonlinearity::None) {
    report.infer_merged_flop_factor =
        macs_per_token(cfg, FlopMode::InferMerged) /
        macs_per_token(reference, FlopMode::InferMerged);
  }
  return report;
}

}  // namespace capaboost
