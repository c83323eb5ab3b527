#include "capaboost/layers.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "capaboost/errors.hpp"

namespace capaboost {

namespace {

// tanh-approximation GeLU: 0.5 h (1 + tanh(sqrt(2/pi) (h + 0.044715 h^3))).
constexpr double kGeluCoeff = 0.044715;

double gelu_tanh(double h) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  const double u = c * (h + kGeluCoeff * h * h * h);
  return 0.5 * h * (1.0 + std::tanh(u));
}

double gelu_tanh_prime(double h) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  const double u = c * (h + kGeluCoeff * h * h * h);
  const double t = std::tanh(u);
  const double sech2 = 1.0 - t * t;
  return 0.5 * (1.0 + t) + 0.5 * h * sech2 * c * (1.0 + 3.0 * kGeluCoeff * h * h);
}

double apply_nonlinearity(Nonlinearity f, double h) {
  switch (f) {
    case Nonlinearity::ReLU:
      return h > 0.0 ? h : 0.0;
    case Nonlinearity::GeLU:
      return gelu_tanh(h);
    case Nonlinearity::None:
      return h;
  }
  return h;
}

double nonlinearity_prime(Nonlinearity f, double h) {
  switch (f) {
    case Nonlinearity::ReLU:
      return h > 0.0 ? 1.0 : 0.0;
    case Nonlinearity::GeLU:
      return gelu_tanh_prime(h);
    case Nonlinearity::None:
      return 1.0;
  }
  return 1.0;
}

Matrix map_elementwise(const Matrix& m, Nonlinearity f, bool derivative) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out.data()[i] = derivative ? nonlinearity_prime(f, m.data()[i])
                               : apply_nonlinearity(f, m.data()[i]);
  }
  return out;
}

void add_in_place(Matrix& target, const Matrix& term, double factor) {
  for (std::size_t i = 0; i < target.size(); ++i) {
    target.data()[i] += factor * term.data()[i];
  }
}

std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) sums[j] += m(i, j);
  return sums;
}

void validate_config(const LayerConfig& cfg) {
  if (cfg.d1 == 0 || cfg.d2 == 0) throw ConfigError("layer: dims must be positive");
  if (cfg.r == 0 || cfg.r > std::min(cfg.d1, cfg.d2)) {
    throw ConfigError("layer: need 1 <= r <= min(d1, d2)");
  }
  if (cfg.d < 1) throw ConfigError("layer: d must be >= 1");
  if (!std::isfinite(cfg.scale)) throw ConfigError("layer: scale must be finite");
}

}  // namespace

MaskPolicy layer_mask_policy(const LayerConfig& cfg, bool a_side) {
  switch (cfg.policy) {
    case PolicyKind::Diff: {
      const std::uint64_t base =
          cfg.mask_seed + (a_side ? static_cast<std::uint64_t>(cfg.d) : 0);
      return DiffMask{diff_mask_seeds(base, cfg.d)};
    }
    case PolicyKind::Same:
      return SameMask{cfg.mask_seed + (a_side ? 1 : 0)};
    case PolicyKind::Dropout:
      return DropoutMask{cfg.mask_seed + (a_side ? 1 : 0)};
  }
  throw ConfigError("layer: unknown mask policy");
}

// --- LoraLayer ---------------------------------------------------------------

LoraLayer::LoraLayer(Matrix w_pre, Matrix factor_b, Matrix factor_a, double scale)
    : w_pre_(std::move(w_pre)),
      b_(std::move(factor_b)),
      a_(std::move(factor_a)),
      scale_(scale) {
  const std::size_t r = b_.cols();
  if (a_.rows() != r) throw ShapeError("LoraLayer: B and A inner dims disagree");
  if (w_pre_.rows() != b_.rows() || w_pre_.cols() != a_.cols()) {
    throw ShapeError("LoraLayer: w_pre shape must be d1 x d2");
  }
  if (r > std::min(w_pre_.rows(), w_pre_.cols())) {
    throw ConfigError("LoraLayer: r must not exceed min(d1, d2)");
  }
}

Matrix LoraLayer::forward(const Matrix& x) const {
  if (x.cols() != w_pre_.rows()) throw ShapeError("LoraLayer::forward: x cols != d1");
  Matrix z = matmul(x, w_pre_);
  add_in_place(z, matmul(matmul(x, b_), a_), scale_);
  return z;
}

LayerGradients LoraLayer::backward(const Matrix& x, const Matrix& upstream) const {
  if (x.cols() != w_pre_.rows()) throw ShapeError("LoraLayer::backward: x cols != d1");
  if (upstream.rows() != x.rows() || upstream.cols() != w_pre_.cols()) {
    throw ShapeError("LoraLayer::backward: upstream shape mismatch");
  }
  const Matrix xt_up = matmul(transpose(x), upstream);  // d1 x d2
  LayerGradients grads;
  grads.grad_b = scaled(matmul(xt_up, transpose(a_)), scale_);
  grads.grad_a = scaled(matmul(transpose(b_), xt_up), scale_);
  return grads;
}

Matrix LoraLayer::merge() const {
  Matrix merged = w_pre_;
  add_in_place(merged, matmul(b_, a_), scale_);
  return merged;
}

// --- CapaBoostLayer ----------------------------------------------------------

CapaBoostLayer::CapaBoostLayer(LayerConfig cfg, Matrix w_pre)
    : cfg_(cfg), w_pre_(std::move(w_pre)) {
  validate_config(cfg_);
  if (w_pre_.rows() != cfg_.d1 || w_pre_.cols() != cfg_.d2) {
    throw ShapeError("CapaBoostLayer: w_pre must be d1 x d2");
  }
  RngStream stream(cfg_.init_seed);
  if (cfg_.b_init == BInit::Gaussian) {
    b_ = gaussian(cfg_.d1, cfg_.r, stream);
    a_ = gaussian(cfg_.r, cfg_.d2, stream);
  } else {
    b_ = Matrix(cfg_.d1, cfg_.r);
    // Variance 1/r keeps the incremental output scale independent of r.
    a_ = scaled(gaussian(cfg_.r, cfg_.d2, stream),
                1.0 / std::sqrt(static_cast<double>(cfg_.r)));
  }
  if (cfg_.use_bias) bias_.assign(cfg_.d2, 0.0);
  policy_b_ = layer_mask_policy(cfg_, /*a_side=*/false);
  policy_a_ = layer_mask_policy(cfg_, /*a_side=*/true);
}

CapaBoostLayer::CapaBoostLayer(const CapaBoostLayer& other)
    : cfg_(other.cfg_),
      w_pre_(other.w_pre_),
      b_(other.b_),
      a_(other.a_),
      bias_(other.bias_),
      policy_b_(other.policy_b_),
      policy_a_(other.policy_a_),
      last_forward_step_(other.last_forward_step_.load(std::memory_order_relaxed)) {}

CapaBoostLayer& CapaBoostLayer::operator=(const CapaBoostLayer& other) {
  if (this == &other) return *this;
  cfg_ = other.cfg_;
  w_pre_ = other.w_pre_;
  b_ = other.b_;
  a_ = other.a_;
  bias_ = other.bias_;
  policy_b_ = other.policy_b_;
  policy_a_ = other.policy_a_;
  last_forward_step_.store(other.last_forward_step_.load(std::memory_order_relaxed),
                           std::memory_order_relaxed);
  return *this;
}

void CapaBoostLayer::set_trainables(Matrix factor_b, Matrix factor_a,
                                    std::vector<double> bias) {
  if (factor_b.rows() != cfg_.d1 || factor_b.cols() != cfg_.r ||
      factor_a.rows() != cfg_.r || factor_a.cols() != cfg_.d2) {
    throw ShapeError("set_trainables: factor shapes must match the config");
  }
  if (cfg_.use_bias ? bias.size() != cfg_.d2 : !bias.empty()) {
    throw ShapeError("set_trainables: bias length mismatch");
  }
  b_ = std::move(factor_b);
  a_ = std::move(factor_a);
  bias_ = std::move(bias);
}

std::vector<Matrix> CapaBoostLayer::masks_b(std::int64_t step) const {
  return masks_for_policy(policy_b_, cfg_.d, cfg_.pattern, cfg_.d1, cfg_.r, step);
}

std::vector<Matrix> CapaBoostLayer::masks_a(std::int64_t step) const {
  return masks_for_policy(policy_a_, cfg_.d, cfg_.pattern, cfg_.r, cfg_.d2, step);
}

std::vector<MaskSpec> CapaBoostLayer::mask_specs_b(std::int64_t step) const {
  std::vector<MaskSpec> specs;
  for (int i = 0; i < cfg_.d; ++i) {
    std::uint64_t seed = 0;
    if (const auto* diff = std::get_if<DiffMask>(&policy_b_)) {
      seed = diff->seeds[static_cast<std::size_t>(i)];
    } else if (const auto* same = std::get_if<SameMask>(&policy_b_)) {
      seed = same->seed;
    } else {
      seed = dropout_seed(std::get<DropoutMask>(policy_b_).base_seed, step, i);
    }
    specs.push_back({cfg_.pattern, cfg_.d1, cfg_.r, seed});
  }
  return specs;
}

std::vector<MaskSpec> CapaBoostLayer::mask_specs_a(std::int64_t step) const {
  std::vector<MaskSpec> specs;
  for (int i = 0; i < cfg_.d; ++i) {
    std::uint64_t seed = 0;
    if (const auto* diff = std::get_if<DiffMask>(&policy_a_)) {
      seed = diff->seeds[static_cast<std::size_t>(i)];
    } else if (const auto* same = std::get_if<SameMask>(&policy_a_)) {
      seed = same->seed;
    } else {
      seed = dropout_seed(std::get<DropoutMask>(policy_a_).base_seed, step, i);
    }
    specs.push_back({cfg_.pattern, cfg_.r, cfg_.d2, seed});
  }
  return specs;
}

Matrix CapaBoostLayer::effective_weight(std::int64_t step) const {
  if (cfg_.nonlinearity != Nonlinearity::None) {
    throw ContractError(
        "effective_weight: branches only collapse to one matrix for linear layers");
  }
  const auto mb = masks_b(step);
  const auto ma = masks_a(step);
  Matrix e(cfg_.d1, cfg_.d2);
  for (int i = 0; i < cfg_.d; ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    add_in_place(e, matmul(hadamard(b_, mb[idx]), hadamard(a_, ma[idx])), 1.0);
  }
  return e;
}

Matrix CapaBoostLayer::forward(const Matrix& x, std::int64_t step) const {
  if (x.cols() != cfg_.d1) throw ShapeError("forward: x cols != d1");
  const auto mb = masks_b(step);
  const auto ma = masks_a(step);
  Matrix z = matmul(x, w_pre_);
  for (int i = 0; i < cfg_.d; ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    Matrix h = matmul(x, hadamard(b_, mb[idx]));  // batch x r
    if (cfg_.nonlinearity != Nonlinearity::None) {
      h = map_elementwise(h, cfg_.nonlinearity, /*derivative=*/false);
    }
    add_in_place(z, matmul(h, hadamard(a_, ma[idx])), cfg_.scale);
  }
  if (cfg_.use_bias) {
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += bias_[j];
  }
  last_forward_step_.store(step, std::memory_order_relaxed);
  return z;
}

LayerGradients CapaBoostLayer::backward(const Matrix& x, const Matrix& upstream,
                                        std::int64_t step) const {
  if (x.cols() != cfg_.d1) throw ShapeError("backward: x cols != d1");
  if (upstream.rows() != x.rows() || upstream.cols() != cfg_.d2) {
    throw ShapeError("backward: upstream must be batch x d2");
  }
  if (cfg_.policy == PolicyKind::Dropout &&
      last_forward_step_.load(std::memory_order_relaxed) != step) {
    throw ContractError(
        "backward: step does not match the preceding forward under Dropout");
  }
  const auto mb = masks_b(step);
  const auto ma = masks_a(step);
  const Matrix xt = transpose(x);

  LayerGradients grads;
  grads.grad_b = Matrix(cfg_.d1, cfg_.r);
  grads.grad_a = Matrix(cfg_.r, cfg_.d2);

  if (cfg_.nonlinearity == Nonlinearity::None) {
    const Matrix xt_up = matmul(xt, upstream);  // d1 x d2
    for (int i = 0; i < cfg_.d; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i);
      const Matrix bi = hadamard(b_, mb[idx]);
      const Matrix ai = hadamard(a_, ma[idx]);
      add_in_place(grads.grad_b,
                   hadamard(matmul(xt_up, transpose(ai)), mb[idx]), cfg_.scale);
      add_in_place(grads.grad_a,
                   hadamard(matmul(transpose(bi), xt_up), ma[idx]), cfg_.scale);
    }
  } else {
    for (int i = 0; i < cfg_.d; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i);
      const Matrix bi = hadamard(b_, mb[idx]);
      const Matrix ai = hadamard(a_, ma[idx]);
      const Matrix pre_act = matmul(x, bi);  // batch x r
      const Matrix activated =
          map_elementwise(pre_act, cfg_.nonlinearity, /*derivative=*/false);
      const Matrix act_prime =
          map_elementwise(pre_act, cfg_.nonlinearity, /*derivative=*/true);
      add_in_place(grads.grad_a,
                   hadamard(matmul(transpose(activated), upstream), ma[idx]),
                   cfg_.scale);
      const Matrix d_pre =
          hadamard(matmul(upstream, transpose(ai)), act_prime);  // batch x r
      add_in_place(grads.grad_b, hadamard(matmul(xt, d_pre), mb[idx]),
                   cfg_.scale);
    }
  }
  if (cfg_.use_bias) grads.grad_bias = column_sums(upstream);
  return grads;
}

Matrix CapaBoostLayer::merge(std::int64_t step) const {
  if (cfg_.nonlinearity != Nonlinearity::None) {
    throw ContractError("merge: adapter-style layers cannot be merged");
  }
  Matrix merged = w_pre_;
  add_in_place(merged, effective_weight(step), cfg_.scale);
  return merged;
}

}  // namespace capaboost
