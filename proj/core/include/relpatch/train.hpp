#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relpatch/augment.hpp"
#include "relpatch/data.hpp"
#include "relpatch/heads.hpp"
#include "relpatch/model.hpp"

namespace relpatch {

/// pretrain: SSL tasks only, positional embeddings off by default.
/// finetune: classification only, initialized from a checkpoint.
/// downstream: classification plus SSL tasks, trained jointly from scratch.
enum class Regime { pretrain, finetune, downstream };

Regime parse_regime(const std::string& name);
std::string regime_name(Regime r);

struct TrainPlan {
  Regime regime = Regime::pretrain;
  ModelConfig model;
  TaskSet tasks;  // default-filled per regime by validate()
  int epochs = 100;
  int warmup_epochs = 10;
  double lr_max = 5e-4;
  int batch_size = 128;
  std::uint64_t seed = 0;
  bool shuffle_patches = false;
  int megapatch_m = 0;  // 0 = regular lattice, else M x M mega-patches
  /// Unset picks the regime default: off in pretrain, on otherwise.
  std::optional<bool> use_pos_embed;
  AugmentConfig augment;
  std::string init_checkpoint;
  std::string out_dir;  // empty = keep results in memory only
  bool deterministic = true;

  /// Fills task defaults, resolves the PE toggle into `model`, and enforces
  /// the regime rules. Throws ConfigError on any violation.
  void validate();
  bool pos_embed_enabled() const;
  /// Token count the absolute-position head classifies over.
  int n_positions() const;
};

/// One metrics row. Metrics a run does not produce are NaN; the CSV prints
/// them as "nan".
struct EpochMetrics {
  int epoch = 0;
  std::string split;  // "train" or "eval"
  double lr = 0.0;
  double loss_total, loss_sp_rel, loss_abs_pos, loss_dist, loss_angle, loss_cls;
  double acc_sp_rel, acc_abs_pos, acc_cls, mse_dist, mse_angle;

  EpochMetrics();
};

std::string metrics_csv(const std::vector<EpochMetrics>& rows);

struct RunReport {
  std::vector<EpochMetrics> history;
  std::string checkpoint_path;  // empty when out_dir was empty
  std::string metrics_path;
};

template <typename S>
struct ShuffledBatch {
  Tensor<S> rows;
  TargetSet targets;
  std::vector<int> perm;
};

/// Applies one fresh uniform permutation to the token rows and relabels the
/// targets to match.
template <typename S>
ShuffledBatch<S> shuffle_batch(const Tensor<S>& rows, const TargetSet& targets,
                               std::mt19937_64& rng);

/// Encoder plus SSL heads restored from a checkpoint. has_ssl is false for
/// classification-only checkpoints.
struct LoadedModel {
  EncoderF encoder;
  SslHeads<float> heads;
  bool has_ssl = false;
};

LoadedModel load_model(const std::string& path,
                       std::optional<bool> use_pos_embed = std::nullopt);

/// Clean-pass metrics (no augmentation; shuffle and mega-patch sampling
/// follow the plan under a fixed evaluation seed, so repeated calls agree).
EpochMetrics evaluate(EncoderF& enc, SslHeads<float>& heads, const Dataset& data,
                      const TrainPlan& plan, int epoch = 0, double lr = 0.0);

/// Executes the plan: per-epoch training rows plus an evaluation row, final
/// checkpoint and metrics CSV under out_dir. Bit-reproducible per seed.
/// A 0-epoch plan produces the initial evaluation only.
RunReport run(const TrainPlan& plan, const Dataset& train_set, const Dataset& eval_set);

}  // namespace relpatch
