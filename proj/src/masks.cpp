#include "capaboost/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "capaboost/errors.hpp"
#include "capaboost/rng.hpp"

namespace capaboost {

namespace {

Matrix generate_bernoulli(const BernoulliPattern& p, std::size_t rows,
                          std::size_t cols, std::uint64_t seed) {
  if (!(p.density >= 0.0 && p.density <= 1.0)) {
    throw ConfigError("Bernoulli mask: density must lie in [0, 1]");
  }
  RngStream stream(seed);
  Matrix mask(rows, cols);
  for (double& v : mask.data()) {
    v = stream.uniform01() < p.density ? 1.0 : 0.0;
  }
  return mask;
}

// Select n of m positions uniformly via partial Fisher-Yates.
void fill_group(std::vector<std::size_t>& scratch, std::size_t n, std::size_t m,
                RngStream& stream, std::vector<std::size_t>& picked) {
  scratch.resize(m);
  std::iota(scratch.begin(), scratch.end(), 0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t swap_with = t + stream.uniform_below(m - t);
    std::swap(scratch[t], scratch[swap_with]);
  }
  picked.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(n));
}

Matrix generate_ntom(const NtoMPattern& p, std::size_t rows, std::size_t cols,
                     std::uint64_t seed) {
  if (p.n == 0 || p.m == 0 || p.n > p.m) {
    throw ConfigError("N:M mask: need 0 < n <= m");
  }
  const std::size_t axis_len = p.axis == MaskAxis::Rows ? rows : cols;
  if (axis_len % p.m != 0) {
    throw ConfigError("N:M mask: axis length " + std::to_string(axis_len) +
                      " not divisible by m=" + std::to_string(p.m));
  }
  RngStream stream(seed);
  Matrix mask(rows, cols);
  std::vector<std::size_t> scratch, picked;
  const std::size_t groups = axis_len / p.m;
  if (p.axis == MaskAxis::Rows) {
    // Groups run down each column; columns visited left to right.
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t g = 0; g < groups; ++g) {
        fill_group(scratch, p.n, p.m, stream, picked);
        for (std::size_t offset : picked) mask(g * p.m + offset, j) = 1.0;
      }
    }
  } else {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t g = 0; g < groups; ++g) {
        fill_group(scratch, p.n, p.m, stream, picked);
        for (std::size_t offset : picked) mask(i, g * p.m + offset) = 1.0;
      }
    }
  }
  return mask;
}

void check_binary(const Matrix& m, const char* op) {
  for (double v : m.data()) {
    if (v != 0.0 && v != 1.0) {
      throw ConfigError(std::string(op) + ": mask entries must be 0 or 1");
    }
  }
}

}  // namespace

Matrix generate(const MaskSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0) {
    throw ConfigError("generate: mask dimensions must be positive");
  }
  if (const auto* bernoulli = std::get_if<BernoulliPattern>(&spec.pattern)) {
    return generate_bernoulli(*bernoulli, spec.rows, spec.cols, spec.seed);
  }
  return generate_ntom(std::get<NtoMPattern>(spec.pattern), spec.rows,
                       spec.cols, spec.seed);
}

double density(const Matrix& mask) {
  check_binary(mask, "density");
  double ones = 0.0;
  for (double v : mask.data()) ones += v;
  return ones / static_cast<double>(mask.size());
}

double union_stored_fraction(std::span<const Matrix> masks) {
  if (masks.empty()) throw ConfigError("union_stored_fraction: no masks");
  const std::size_t rows = masks.front().rows();
  const std::size_t cols = masks.front().cols();
  for (const Matrix& m : masks) {
    if (m.rows() != rows || m.cols() != cols) {
      throw ShapeError("union_stored_fraction: mask shapes differ");
    }
    check_binary(m, "union_stored_fraction");
  }
  std::size_t covered = 0;
  const std::size_t total = rows * cols;
  for (std::size_t idx = 0; idx < total; ++idx) {
    for (const Matrix& m : masks) {
      if (m.data()[idx] != 0.0) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

double expected_stored_fraction(double sparsity, int d) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw ConfigError("expected_stored_fraction: sparsity must lie in [0, 1]");
  }
  if (d < 1) throw ConfigError("expected_stored_fraction: d must be >= 1");
  return 1.0 - std::pow(sparsity, d);
}

std::vector<std::uint64_t> diff_mask_seeds(std::uint64_t base_seed, int count) {
  if (count < 1) throw ConfigError("diff_mask_seeds: count must be >= 1");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) seeds[static_cast<std::size_t>(i)] = base_seed + static_cast<std::uint64_t>(i);
  return seeds;
}

std::uint64_t dropout_seed(std::uint64_t base_seed, std::int64_t step, int slot) {
  return mix64(base_seed ^ mix64(static_cast<std::uint64_t>(step) + 1)) +
         static_cast<std::uint64_t>(slot);
}

std::vector<Matrix> masks_for_policy(const MaskPolicy& policy, int d,
                                     const MaskPattern& pattern,
                                     std::size_t rows, std::size_t cols,
                                     std::int64_t step) {
  if (d < 1) throw ConfigError("masks_for_policy: d must be >= 1");
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(d));

  if (const auto* diff = std::get_if<DiffMask>(&policy)) {
    if (diff->seeds.size() < static_cast<std::size_t>(d)) {
      throw ConfigError("DiffMask: fewer seeds than parallel modules");
    }
    std::unordered_set<std::uint64_t> unique(diff->seeds.begin(),
                                             diff->seeds.begin() + d);
    if (unique.size() != static_cast<std::size_t>(d)) {
      throw ConfigError("DiffMask: seeds must be pairwise distinct");
    }
    for (int i = 0; i < d; ++i) {
      out.push_back(generate({pattern, rows, cols, diff->seeds[static_cast<std::size_t>(i)]}));
    }
  } else if (const auto* same = std::get_if<SameMask>(&policy)) {
    Matrix mask = generate({pattern, rows, cols, same->seed});
    for (int i = 0; i < d; ++i) out.push_back(mask);
  } else {
    const auto& dropout = std::get<DropoutMask>(policy);
    for (int i = 0; i < d; ++i) {
      out.push_back(generate({pattern, rows, cols, dropout_seed(dropout.base_seed, step, i)}));
    }
  }
  return out;
}

}  // namespace capaboost
