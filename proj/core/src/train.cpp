#include "relpatch/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "relpatch/checkpoint.hpp"
#include "relpatch/optimizer.hpp"
#include "relpatch/rng.hpp"
#include "relpatch/schedule.hpp"

namespace relpatch {

namespace {

// Sub-seed streams; evaluation gets its own so repeated calls agree.
enum : std::uint64_t { kInit = 1, kOrder = 2, kShuffle = 3, kAugment = 4, kMega = 5,
                       kEvalShuffle = 100, kEvalMega = 101 };

std::vector<GridPos> lattice_positions(const PatchGrid& grid) {
  std::vector<GridPos> pos(static_cast<size_t>(grid.n_tokens()));
  for (int i = 0; i < grid.n_tokens(); ++i) pos[static_cast<size_t>(i)] = position_of(i, grid);
  return pos;
}

/// Shared train/eval front end: augment (train only), tokenize, permute.
TensorF prepare_rows(const ImageRecord& rec, const TrainPlan& plan, const PatchGrid& grid,
                     const TargetSet& lattice, bool training, std::mt19937_64& aug_rng,
                     std::mt19937_64& mega_rng, std::mt19937_64& shuffle_rng,
                     TargetSet& targets_out) {
  TensorF image = rec.pixels;
  if (training && plan.augment.enabled && plan.tasks.classification)
    image = augment_classification(image, plan.augment, aug_rng);

  TensorF rows;
  TargetSet t;
  if (plan.megapatch_m > 0) {
    auto layout = sample_megapatch_layout(grid, plan.megapatch_m, mega_rng);
    auto [r, pos] = extract_megapatches(image, layout, grid);
    rows = r;
    t = build_target_set(PatchGrid(plan.megapatch_m, plan.megapatch_m, 1, 1), pos);
  } else {
    rows = patchify(image, grid);
    t = lattice;
  }
  if (training && plan.augment.enabled && plan.tasks.any_ssl())
    rows = augment_patch_rows(rows, grid.channels, grid.patch_size, plan.augment, aug_rng);
  if (plan.shuffle_patches) {
    auto sh = shuffle_batch(rows, t, shuffle_rng);
    rows = sh.rows;
    t = std::move(sh.targets);
  }
  targets_out = std::move(t);
  return rows;
}

struct Accumulator {
  double total = 0, sp = 0, abs = 0, dist = 0, ang = 0, cls = 0;
  double a_sp = 0, a_abs = 0, a_cls = 0;
  int n = 0;

  void mean_into(EpochMetrics& row, const TaskSet& tasks, bool with_acc) const {
    row.loss_total = total / n;
    if (tasks.sp_rel) row.loss_sp_rel = sp / n;
    if (tasks.abs_pos) row.loss_abs_pos = abs / n;
    if (tasks.dist) row.loss_dist = row.mse_dist = dist / n;
    if (tasks.angle) row.loss_angle = row.mse_angle = ang / n;
    if (tasks.classification) row.loss_cls = cls / n;
    if (with_acc) {
      if (tasks.sp_rel) row.acc_sp_rel = a_sp / n;
      if (tasks.abs_pos) row.acc_abs_pos = a_abs / n;
      if (tasks.classification) row.acc_cls = a_cls / n;
    }
  }
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Regime parse_regime(const std::string& name) {
  if (name == "pretrain") return Regime::pretrain;
  if (name == "finetune") return Regime::finetune;
  if (name == "downstream") return Regime::downstream;
  throw ConfigError("unknown regime '" + name + "'");
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::pretrain: return "pretrain";
    case Regime::finetune: return "finetune";
    default: return "downstream";
  }
}

bool TrainPlan::pos_embed_enabled() const {
  return use_pos_embed.value_or(regime != Regime::pretrain);
}

int TrainPlan::n_positions() const {
  return megapatch_m > 0 ? megapatch_m * megapatch_m : model.grid().n_tokens();
}

void TrainPlan::validate() {
  model.validate();
  augment.validate();
  if (epochs < 0) throw ConfigError("plan: epochs must be >= 0");
  if (warmup_epochs < 0) throw ConfigError("plan: warmup_epochs must be >= 0");
  if (epochs > 0 && warmup_epochs >= epochs)
    throw ConfigError("plan: warmup_epochs must be < epochs");
  if (batch_size < 1) throw ConfigError("plan: batch_size must be >= 1");
  if (lr_max <= 0) throw ConfigError("plan: lr_max must be positive");

  switch (regime) {
    case Regime::pretrain:
      if (tasks.classification)
        throw ConfigError("plan: pretrain has no classification; use the downstream regime");
      if (!tasks.any_ssl()) tasks.sp_rel = tasks.abs_pos = true;
      break;
    case Regime::finetune:
      if (tasks.any_ssl())
        throw ConfigError("plan: finetune trains classification only");
      tasks.classification = true;
      if (init_checkpoint.empty())
        throw ConfigError("plan: finetune requires an init checkpoint");
      break;
    case Regime::downstream:
      tasks.classification = true;
      if (!tasks.any_ssl()) tasks.sp_rel = tasks.abs_pos = true;
      break;
  }
  if (tasks.classification && !model.use_class_token)
    throw ConfigError("plan: classification requires the class token");
  model.use_pos_embed = pos_embed_enabled();

  if (megapatch_m != 0) {
    if (!tasks.any_ssl())
      throw ConfigError("plan: mega-patches only apply to the auxiliary tasks");
    const auto g = model.grid();
    if (megapatch_m < 2 || megapatch_m > std::min(g.n_rows(), g.n_cols()))
      throw ConfigError("plan: megapatch_m must lie in [2, min(lattice rows, cols)]");
  }
  if ((tasks.dist || tasks.angle) && n_positions() < 2)
    throw ConfigError("plan: distance/angle need at least two tokens");
}

EpochMetrics::EpochMetrics() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  loss_total = loss_sp_rel = loss_abs_pos = loss_dist = loss_angle = loss_cls = nan;
  acc_sp_rel = acc_abs_pos = acc_cls = mse_dist = mse_angle = nan;
}

std::string metrics_csv(const std::vector<EpochMetrics>& rows) {
  std::string out =
      "epoch,split,lr,loss_total,loss_sp_rel,loss_abs_pos,loss_dist,loss_angle,loss_cls,"
      "acc_sp_rel,acc_abs_pos,acc_cls,mse_dist,mse_angle\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch) + "," + r.split + "," + fmt(r.lr);
    for (double v : {r.loss_total, r.loss_sp_rel, r.loss_abs_pos, r.loss_dist, r.loss_angle,
                     r.loss_cls, r.acc_sp_rel, r.acc_abs_pos, r.acc_cls, r.mse_dist, r.mse_angle})
      out += "," + fmt(v);
    out += "\n";
  }
  return out;
}

template <typename S>
ShuffledBatch<S> shuffle_batch(const Tensor<S>& rows, const TargetSet& targets,
                               std::mt19937_64& rng) {
  if (rows.rank() != 2 || rows.dim(0) != targets.n)
    throw DimError("shuffle_batch: rows and targets disagree on N");
  std::vector<int> perm(static_cast<size_t>(targets.n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return {permute_rows(rows, perm), permute_targets(targets, perm), std::move(perm)};
}

template ShuffledBatch<float> shuffle_batch<float>(const Tensor<float>&, const TargetSet&,
                                                   std::mt19937_64&);
template ShuffledBatch<double> shuffle_batch<double>(const Tensor<double>&, const TargetSet&,
                                                     std::mt19937_64&);

LoadedModel load_model(const std::string& path, std::optional<bool> use_pos_embed) {
  auto ckpt = load_checkpoint(path);
  ModelConfig cfg = ckpt.config;
  if (use_pos_embed) cfg.use_pos_embed = *use_pos_embed;
  LoadedModel lm{EncoderF(cfg), {}, false};
  load_into(ckpt, lm.encoder.parameters(), true);
  if (const auto* abs_w = ckpt.find("ssl.abs_pos.w")) {
    lm.heads = SslHeads<float>(cfg.dim, abs_w->tensor.dim(1));
    load_into(ckpt, lm.heads.parameters(), true);
    lm.has_ssl = true;
  }
  return lm;
}

EpochMetrics evaluate(EncoderF& enc, SslHeads<float>& heads, const Dataset& data,
                      const TrainPlan& plan, int epoch, double lr) {
  if (!plan.tasks.any()) throw ConfigError("evaluate: no active tasks");
  if (data.empty()) throw ArgError("evaluate: empty dataset");
  NoGradGuard ng;

  const PatchGrid grid = enc.config().grid();
  const TargetSet lattice = build_target_set(grid, lattice_positions(grid));
  auto aug_rng = make_rng(0);  // unused: evaluation never augments
  auto mega_rng = make_rng(derive_seed(plan.seed, kEvalMega));
  auto shuffle_rng = make_rng(derive_seed(plan.seed, kEvalShuffle));

  Accumulator acc;
  for (const auto& rec : data) {
    TargetSet t;
    TensorF rows =
        prepare_rows(rec, plan, grid, lattice, false, aug_rng, mega_rng, shuffle_rng, t);
    auto out = enc.forward(rows);
    const auto& z = out.patch_tokens;
    const int n = t.n;

    double total = 0;
    if (plan.tasks.sp_rel) {
      auto s = pairwise_scores(z, heads.sp_rel);
      const double l = static_cast<double>(loss_sp_rel(s, t.rel).item());
      acc.sp += l;
      total += l;
      acc.a_sp += pairwise_argmax_accuracy(s, t.rel);
    }
    if (plan.tasks.abs_pos) {
      auto lg = abs_pos_logits(z, heads.abs_pos);
      const double l = static_cast<double>(loss_abs_pos(lg, t.abs_pos).item());
      acc.abs += l;
      total += l;
      acc.a_abs += argmax_accuracy(lg, t.abs_pos);
    }
    if (plan.tasks.dist) {
      const double l =
          static_cast<double>(loss_dist(pairwise_scores(z, heads.dist), t.dist).item());
      acc.dist += l;
      total += l;
    }
    if (plan.tasks.angle) {
      const double l =
          static_cast<double>(loss_angle(pairwise_scores(z, heads.angle), t.ang).item());
      acc.ang += l;
      total += l;
    }
    if (plan.tasks.classification) {
      auto lg = reshape(out.class_logits, {1, enc.config().num_classes});
      const double l = static_cast<double>(softmax_ce(lg, {rec.label}).item());
      acc.cls += l;
      total += l;
      acc.a_cls += argmax_accuracy(lg, {rec.label});
    }
    acc.total += total;
    ++acc.n;
  }

  EpochMetrics row;
  row.epoch = epoch;
  row.split = "eval";
  row.lr = lr;
  acc.mean_into(row, plan.tasks, true);
  return row;
}

RunReport run(const TrainPlan& plan_in, const Dataset& train_set, const Dataset& eval_set) {
  TrainPlan plan = plan_in;
  plan.validate();
  if (train_set.empty()) throw ArgError("run: empty training set");
  if (eval_set.empty()) throw ArgError("run: empty evaluation set");

  const ModelConfig cfg = plan.model;
  EncoderF enc(cfg);
  auto init_rng = make_rng(derive_seed(plan.seed, kInit));
  enc.init_weights(init_rng);
  SslHeads<float> heads(cfg.dim, plan.n_positions());
  heads.init_weights(init_rng);

  if (!plan.init_checkpoint.empty()) {
    auto ckpt = load_checkpoint(plan.init_checkpoint);
    if (!same_architecture(ckpt.config, cfg))
      throw ConfigError("run: checkpoint '" + plan.init_checkpoint +
                        "' does not match the planned architecture");
    load_into(ckpt, enc.parameters(), true);
    if (plan.tasks.any_ssl()) load_into(ckpt, heads.parameters(), false);
  }

  auto params = enc.parameters();
  if (plan.tasks.any_ssl()) {
    auto hp = heads.parameters();
    params.insert(params.end(), hp.begin(), hp.end());
  }

  const PatchGrid grid = cfg.grid();
  const TargetSet lattice = build_target_set(grid, lattice_positions(grid));
  const int n = static_cast<int>(train_set.size());
  const int spe = (n + plan.batch_size - 1) / plan.batch_size;
  const std::int64_t total_steps = static_cast<std::int64_t>(plan.epochs) * spe;
  const std::int64_t warmup_steps = static_cast<std::int64_t>(plan.warmup_epochs) * spe;

  auto order_rng = make_rng(derive_seed(plan.seed, kOrder));
  auto shuffle_rng = make_rng(derive_seed(plan.seed, kShuffle));
  auto aug_rng = make_rng(derive_seed(plan.seed, kAugment));
  auto mega_rng = make_rng(derive_seed(plan.seed, kMega));

  AdamW<float> opt;
  RunReport report;
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  if (plan.epochs == 0)
    report.history.push_back(evaluate(enc, heads, eval_set, plan, 0, 0.0));

  std::int64_t step = 0;
  for (int epoch = 1; epoch <= plan.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    Accumulator acc;
    double lr = 0.0;
    for (int start = 0; start < n; start += plan.batch_size) {
      const int bsz = std::min(plan.batch_size, n - start);
      lr = lr_at(step, total_steps, warmup_steps, plan.lr_max);
      for (auto& p : params) p.tensor.zero_grad();

      for (int k = 0; k < bsz; ++k) {
        const auto& rec = train_set[static_cast<size_t>(order[static_cast<size_t>(start + k)])];
        TargetSet t;
        TensorF rows =
            prepare_rows(rec, plan, grid, lattice, true, aug_rng, mega_rng, shuffle_rng, t);
        auto out = enc.forward(rows);
        auto lb = total_loss(out.patch_tokens, out.class_logits, t, heads, plan.tasks,
                             plan.tasks.classification ? std::optional<int>(rec.label)
                                                       : std::nullopt);
        const double v = static_cast<double>(lb.total.item());
        if (!std::isfinite(v))
          throw NumericError("run: non-finite loss at epoch " + std::to_string(epoch) +
                             " step " + std::to_string(step) + " (lr=" + fmt(lr) + ")");
        mul_scalar(lb.total, 1.0f / static_cast<float>(bsz)).backward();

        acc.total += v;
        if (lb.sp_rel) acc.sp += *lb.sp_rel;
        if (lb.abs_pos) acc.abs += *lb.abs_pos;
        if (lb.dist) acc.dist += *lb.dist;
        if (lb.angle) acc.ang += *lb.angle;
        if (lb.cls) acc.cls += *lb.cls;
        ++acc.n;
      }
      opt.step(params, lr);
      ++step;
    }

    EpochMetrics row;
    row.epoch = epoch;
    row.split = "train";
    row.lr = lr;
    acc.mean_into(row, plan.tasks, false);
    report.history.push_back(row);
    report.history.push_back(evaluate(enc, heads, eval_set, plan, epoch, lr));
  }

  if (!plan.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(plan.out_dir);
    report.checkpoint_path = (fs::path(plan.out_dir) / "checkpoint.rlvt").string();
    save_checkpoint(report.checkpoint_path, cfg, params);
    report.metrics_path = (fs::path(plan.out_dir) / "metrics.csv").string();
    std::ofstream csv(report.metrics_path, std::ios::binary);
    if (!csv) throw IoError("cannot write " + report.metrics_path);
    csv << metrics_csv(report.history);
  }
  return report;
}

}  // namespace relpatch
