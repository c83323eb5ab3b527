#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "capaboost/matrix.hpp"

namespace capaboost {

enum class MaskAxis { Rows, Cols };

// Each entry is independently 1 with probability `density`.
struct BernoulliPattern {
  double density = 0.5;
};

// Exactly n ones inside every aligned group of m entries along the chosen
// axis (e.g. 2:4). The masked axis length must be divisible by m.
struct NtoMPattern {
  std::size_t n = 2;
  std::size_t m = 4;
  MaskAxis axis = MaskAxis::Rows;
};

using MaskPattern = std::variant<BernoulliPattern, NtoMPattern>;

// Fully determines one binary matrix: generate(spec) is a pure function.
struct MaskSpec {
  MaskPattern pattern;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
};

// Materialize the binary mask described by spec. Entries are 0.0 or 1.0.
//
// Bernoulli masks consume uniforms row-major from RngStream(seed). N:M masks
// walk groups in a fixed order (outer index first, then group) and pick the
// n kept positions per group with a partial Fisher-Yates shuffle.
Matrix generate(const MaskSpec& spec);

// Fraction of ones.
double density(const Matrix& mask);

// Fraction of positions where at least one mask is 1 — the entries that must
// be stored once branches share the underlying weight.
double union_stored_fraction(std::span<const Matrix> masks);

// Closed form 1 - sparsity^d for d independently generated masks.
double expected_stored_fraction(double sparsity, int d);

// --- Mask policies (the three ablation arms) ---------------------------------

// d distinct static masks, one per parallel module.
struct DiffMask {
  std::vector<std::uint64_t> seeds;  // pairwise distinct, at least d of them
};

// One static mask shared by all d modules.
struct SameMask {
  std::uint64_t seed = 0;
};

// Masks resampled every training step from (base_seed, step).
struct DropoutMask {
  std::uint64_t base_seed = 0;
};

using MaskPolicy = std::variant<DiffMask, SameMask, DropoutMask>;

// Default DiffMask seeding: base_seed + i for module index i, so a whole
// experiment is reproducible from one scalar.
std::vector<std::uint64_t> diff_mask_seeds(std::uint64_t base_seed, int count);

// Per-step seed for the Dropout policy: mix64(base ^ mix64(step + 1)) + slot.
std::uint64_t dropout_seed(std::uint64_t base_seed, std::int64_t step, int slot);

// The d masks of shape rows x cols for one tensor under the given policy.
// step only influences DropoutMask; the static policies ignore it.
std::vector<Matrix> masks_for_policy(const MaskPolicy& policy, int d,
                                     const MaskPattern& pattern,
                                     std::size_t rows, std::size_t cols,
                                     std::int64_t step);

}  // namespace capaboost
