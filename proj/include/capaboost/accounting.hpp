#pragma once

#include <cstdint>

#include "capaboost/layers.hpp"

namespace capaboost {

// FLOP convention: 1 multiply-accumulate = 2 FLOPs, stated in every rendered
// report header. Only the incremental (trainable) path is counted; the frozen
// base matmul is common to every method and cancels from all factors.
enum class FlopMode {
  Train,          // per-branch sparse factors: d * rho * (d1 r + r d2) MACs
  InferMerged,    // union-sparse merged weight: (1 - sigma^d) * d1 d2 MACs
  InferUnmerged,  // same per-branch path as training
};

struct AccountingReport {
  // Parameter counts.
  std::size_t dense_params = 0;            // trainable entries in dense B, A (+ bias)
  double expected_stored_params = 0.0;     // closed form: dense * (1 - sigma^d)
  std::size_t realized_stored_params = 0;  // exact count from materialized mask unions
  std::size_t optimizer_state_params = 0;  // the optimizer still tracks dense B, A

  // FLOPs per input token (1 MAC = 2 FLOPs).
  std::int64_t train_flops_per_token = 0;
  std::int64_t infer_merged_flops_per_token = 0;
  std::int64_t infer_unmerged_flops_per_token = 0;

  // Factors relative to the reference configuration.
  double param_factor = 0.0;
  double train_flop_factor = 0.0;
  double infer_merged_flop_factor = 0.0;
  double infer_unmerged_flop_factor = 0.0;
};

// Per-entry keep probability of the pattern (Bernoulli density, or n/m).
double pattern_density(const MaskPattern& pattern);

// Closed-form fraction of factor entries that must be stored under the
// layer's policy: Diff -> 1 - sigma^d, Same -> rho, Dropout -> 1 (every entry
// is hit by some step's mask).
double stored_fraction(const LayerConfig& cfg);

std::size_t dense_trainable_count(const LayerConfig& cfg);

// dense * stored_fraction, bias (never masked) counted fully.
double expected_stored_params(const LayerConfig& cfg);

// Exact union count from the masks the config deterministically generates
// (step 0). Dropout reports the dense count.
std::size_t realized_stored_params(const LayerConfig& cfg);

// Exact expected MAC count as a real number (factors are ratios of these).
double macs_per_token(const LayerConfig& cfg, FlopMode mode);

// Rounded integer FLOPs under the 2-FLOPs-per-MAC convention.
std::int64_t flop_count(const LayerConfig& cfg, FlopMode mode);

AccountingReport make_accounting_report(const LayerConfig& cfg,
                                        const LayerConfig& reference);

}  // namespace capaboost
