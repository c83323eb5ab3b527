#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "capaboost/accounting.hpp"
#include "capaboost/layers.hpp"

namespace capaboost {

// y = x (w_pre + dW*) + noise, where dW* = U V / sqrt(d1 * R*) has numerical
// rank exactly R*. The normalization keeps outputs O(1) regardless of dims.
struct LowRankTeacherSpec {
  std::size_t d1 = 64;
  std::size_t d2 = 64;
  std::size_t teacher_rank = 16;
  double noise_std = 0.0;
  std::size_t train_samples = 128;
  std::size_t eval_samples = 256;
  std::uint64_t data_seed = 0;
};

// Gaussian blobs around class centers; the layer acts as the classifier head
// over a zero frozen base. Secondary smoke-test task.
struct ClassificationSpec {
  std::size_t input_dim = 16;
  std::size_t classes = 4;
  std::size_t train_samples = 256;
  std::size_t eval_samples = 128;
  double center_spread = 3.0;
  std::uint64_t data_seed = 0;
};

using TaskSpec = std::variant<LowRankTeacherSpec, ClassificationSpec>;

enum class TaskKind { Regression, Classification };

struct SyntheticTask {
  TaskKind kind = TaskKind::Regression;
  Matrix w_pre;        // frozen base the layer wraps
  Matrix delta_true;   // regression only: the teacher increment
  Matrix x_train, y_train;  // classification y is one-hot
  Matrix x_eval, y_eval;
};

SyntheticTask make_task(const TaskSpec& spec);

struct SgdConfig {
  double lr = 0.1;
  double momentum = 0.0;
};

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using OptimizerConfig = std::variant<SgdConfig, AdamConfig>;

// Holds per-parameter moment buffers; apply() replaces the layer's trainables.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, const LayerConfig& shapes);
  void apply(CapaBoostLayer& layer, const LayerGradients& grads);

 private:
  OptimizerConfig cfg_;
  Matrix m_b_, v_b_, m_a_, v_a_;
  std::vector<double> m_bias_, v_bias_;
  long t_ = 0;
};

struct TrainConfig {
  int epochs = 500;
  OptimizerConfig optimizer = AdamConfig{};
  std::size_t batch_size = 0;  // 0 = full batch
  double rank_rel_tol = 1e-8;
};

struct ExperimentResult {
  LayerConfig layer;
  TaskSpec task;
  TrainConfig training;
  std::vector<double> train_curve;  // one entry per epoch
  std::vector<double> eval_curve;
  double final_train_loss = 0.0;
  double final_eval_loss = 0.0;
  std::optional<std::size_t> final_rank;  // linear layers only
  AccountingReport accounting;
  std::string status = "ok";  // "ok" or "diverged@<epoch>"
  bool w_pre_unchanged = false;
  double wall_time_ms = 0.0;  // the only nondeterministic field
};

// Full training run: builds the task and layer from their specs, optimizes
// the MSE (regression) or softmax cross-entropy (classification) of the
// incremental model with w_pre frozen, realizing masks per policy each step.
ExperimentResult train(const LayerConfig& layer_cfg, const TaskSpec& task_spec,
                       const TrainConfig& train_cfg);

// The three mask-policy arms across a density axis (Fig-3a-shaped data).
struct DensitySweepConfig {
  std::vector<double> densities = {0.2, 0.4, 0.5, 0.6, 0.8, 1.0};
  std::size_t r = 8;
  int d = 2;
  int seeds = 5;
  std::uint64_t base_seed = 0;
  TaskSpec task = LowRankTeacherSpec{};
  TrainConfig training;
};

// (r, d) capacity grid (Fig-3b-shaped data).
struct DimensionSweepConfig {
  std::vector<std::size_t> r_values = {8, 16, 32, 64};
  std::vector<int> d_values = {1, 2, 3};
  double density = 0.5;
  int seeds = 5;
  std::uint64_t base_seed = 0;
  TaskSpec task = LowRankTeacherSpec{};
  TrainConfig training;
};

std::vector<ExperimentResult> density_sweep(const DensitySweepConfig& cfg);
std::vector<ExperimentResult> dimension_sweep(const DimensionSweepConfig& cfg);

// Deterministic per-run seed derivation shared by the sweep drivers: run k
// offsets the task's data seed by k, places mask slots at base + k * 64 and
// decorrelates the weight stream through mix64.
struct RunSeeds {
  std::uint64_t data_seed;
  std::uint64_t mask_seed;
  std::uint64_t init_seed;
};
RunSeeds derive_run_seeds(std::uint64_t base_seed, std::uint64_t run_index);

}  // namespace capaboost
