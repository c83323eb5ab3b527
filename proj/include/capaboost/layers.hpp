#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "capaboost/masks.hpp"
#include "capaboost/matrix.hpp"

namespace capaboost {

enum class Nonlinearity { None, ReLU, GeLU };

// B starts at zero for training runs (fine-tuning then starts exactly at the
// frozen base function); Gaussian for rank studies.
enum class BInit { Zero, Gaussian };

enum class PolicyKind { Diff, Same, Dropout };

struct LayerConfig {
  std::size_t d1 = 64;
  std::size_t d2 = 64;
  std::size_t r = 8;
  int d = 1;                                 // parallel tied modules
  PolicyKind policy = PolicyKind::Diff;
  MaskPattern pattern = BernoulliPattern{0.5};
  std::uint64_t mask_seed = 0;
  Nonlinearity nonlinearity = Nonlinearity::None;
  bool use_bias = false;
  double scale = 1.0;                        // applied to the incremental sum
  BInit b_init = BInit::Zero;
  std::uint64_t init_seed = 0;
};

struct LayerGradients {
  Matrix grad_b;                 // d1 x r
  Matrix grad_a;                 // r x d2
  std::vector<double> grad_bias;  // length d2, empty when the layer has no bias
};

// The mask policy a config induces for one side of the factor pair (see the
// slot-seeding scheme documented on CapaBoostLayer).
MaskPolicy layer_mask_policy(const LayerConfig& cfg, bool a_side);

// Plain LoRA: z = x (w_pre + scale * B A). Kept as an independent
// implementation so the d=1 reduction tests compare two code paths.
class LoraLayer {
 public:
  LoraLayer(Matrix w_pre, Matrix factor_b, Matrix factor_a, double scale = 1.0);

  const Matrix& w_pre() const { return w_pre_; }
  const Matrix& factor_b() const { return b_; }
  const Matrix& factor_a() const { return a_; }

  Matrix forward(const Matrix& x) const;
  LayerGradients backward(const Matrix& x, const Matrix& upstream) const;
  Matrix merge() const;  // w_pre + scale * B A

 private:
  Matrix w_pre_, b_, a_;
  double scale_;
};

// d parallel weight-tied modules sharing one (B, A) pair, diversified by
// static binary masks:
//
//   linear     z = x w_pre + scale * sum_i x (B o m_bi)(A o m_ai)  (+ bias)
//   nonlinear  z = x w_pre + scale * sum_i f(x (B o m_bi)) (A o m_ai)  (+ bias)
//
// Mask slots: the layer owns 2d logical mask streams, indices 0..d-1 for the
// B side and d..2d-1 for the A side. With the Diff policy slot k seeds as
// mask_seed + k; Same uses mask_seed (B) and mask_seed + 1 (A); Dropout uses
// base seeds mask_seed (B) and mask_seed + 1 (A) fed through dropout_seed.
//
// Masks are regenerated from their specs on every call; nothing about them is
// stored, so a layer is fully described by its config plus parameter values.
//
// forward/backward are pure functions of (layer, x, step). Under the Dropout
// policy backward must be paired with the forward that produced its upstream
// gradient: the layer tracks the last forward step and throws ContractError
// on a mismatch.
class CapaBoostLayer {
 public:
  // Draws A (and B when configured Gaussian) from RngStream(init_seed);
  // bias starts at zero. w_pre must be d1 x d2 and is frozen thereafter.
  CapaBoostLayer(LayerConfig cfg, Matrix w_pre);

  CapaBoostLayer(const CapaBoostLayer& other);
  CapaBoostLayer& operator=(const CapaBoostLayer& other);

  const LayerConfig& config() const { return cfg_; }
  const Matrix& w_pre() const { return w_pre_; }
  const Matrix& factor_b() const { return b_; }
  const Matrix& factor_a() const { return a_; }
  const std::vector<double>& bias() const { return bias_; }

  // Training replaces parameter values wholesale (shapes must match).
  void set_trainables(Matrix factor_b, Matrix factor_a,
                      std::vector<double> bias);

  std::vector<Matrix> masks_b(std::int64_t step) const;
  std::vector<Matrix> masks_a(std::int64_t step) const;
  std::vector<MaskSpec> mask_specs_b(std::int64_t step) const;
  std::vector<MaskSpec> mask_specs_a(std::int64_t step) const;

  // E = sum_i (B o m_bi)(A o m_ai), unscaled. Linear layers only.
  Matrix effective_weight(std::int64_t step) const;

  Matrix forward(const Matrix& x, std::int64_t step) const;
  LayerGradients backward(const Matrix& x, const Matrix& upstream,
                          std::int64_t step) const;

  // w_pre + scale * effective_weight; linear layers only (an adapter-style
  // branch cannot be folded into a dense weight).
  Matrix merge(std::int64_t step) const;

 private:
  LayerConfig cfg_;
  Matrix w_pre_, b_, a_;
  std::vector<double> bias_;
  MaskPolicy policy_b_, policy_a_;
  mutable std::atomic<std::int64_t> last_forward_step_{-1};
};

}  // namespace capaboost
