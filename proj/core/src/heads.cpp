#include "relpatch/heads.hpp"

#include <cmath>

namespace relpatch {

TaskSet TaskSet::parse(const std::string& csv) {
  TaskSet t;
  size_t at = 0;
  while (at <= csv.size()) {
    size_t end = csv.find(',', at);
    if (end == std::string::npos) end = csv.size();
    std::string name = csv.substr(at, end - at);
    if (name == "sp_rel")
      t.sp_rel = true;
    else if (name == "abs_pos")
      t.abs_pos = true;
    else if (name == "dist")
      t.dist = true;
    else if (name == "angle")
      t.angle = true;
    else if (name == "cls" || name == "classification")
      t.classification = true;
    else if (!name.empty())
      throw ConfigError("unknown task '" + name + "'");
    at = end + 1;
  }
  if (!t.any()) throw ConfigError("task list '" + csv + "' selects nothing");
  return t;
}

std::string TaskSet::to_string() const {
  std::string out;
  auto put = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  put(sp_rel, "sp_rel");
  put(abs_pos, "abs_pos");
  put(dist, "dist");
  put(angle, "angle");
  put(classification, "cls");
  return out;
}

template <typename S>
PairwiseHead<S>::PairwiseHead(int k, int dim) {
  if (k < 1 || dim < 1) throw ArgError("PairwiseHead: channels and dim must be positive");
  for (int i = 0; i < k; ++i) w.push_back(Tensor<S>::zeros({dim, dim}, true));
}

template <typename S>
LinearHead<S>::LinearHead(int dim, int k) {
  if (k < 1 || dim < 1) throw ArgError("LinearHead: dim and classes must be positive");
  w = Tensor<S>::zeros({dim, k}, true);
  b = Tensor<S>::zeros({k}, true);
}

template <typename S>
SslHeads<S>::SslHeads(int dim, int n_positions)
    : sp_rel(9, dim), dist(1, dim), angle(1, dim), abs_pos(dim, n_positions) {}

template <typename S>
void SslHeads<S>::init_weights(std::mt19937_64& rng) {
  const S std_dev = S(0.02);
  for (auto& m : sp_rel.w) fill_trunc_normal(m, std_dev, rng);
  for (auto& m : dist.w) fill_trunc_normal(m, std_dev, rng);
  for (auto& m : angle.w) fill_trunc_normal(m, std_dev, rng);
  fill_trunc_normal(abs_pos.w, std_dev, rng);
}

template <typename S>
std::vector<NamedTensor<S>> SslHeads<S>::parameters() {
  std::vector<NamedTensor<S>> out;
  for (size_t i = 0; i < sp_rel.w.size(); ++i)
    out.push_back({"ssl.sp_rel.w" + std::to_string(i), sp_rel.w[i]});
  out.push_back({"ssl.dist.w0", dist.w[0]});
  out.push_back({"ssl.angle.w0", angle.w[0]});
  out.push_back({"ssl.abs_pos.w", abs_pos.w});
  out.push_back({"ssl.abs_pos.b", abs_pos.b});
  return out;
}

template <typename S>
Tensor<S> pairwise_scores(const Tensor<S>& z, const PairwiseHead<S>& head) {
  if (z.rank() != 2 || head.channels() < 1 || z.dim(1) != head.w[0].dim(0))
    throw DimError("pairwise_scores: tokens must be N x D matching the head");
  const int n = z.dim(0), d = z.dim(1);
  const S scale = S(1) / std::sqrt(static_cast<S>(d));
  std::vector<Tensor<S>> channels;
  channels.reserve(head.w.size());
  for (const auto& wk : head.w) {
    auto a = mul_scalar(matmul_nt(matmul(z, wk), z), scale);  // z W_k z^T
    channels.push_back(reshape(a, {n * n, 1}));
  }
  return reshape(concat_cols(channels), {n, n, head.channels()});
}

template <typename S>
Tensor<S> abs_pos_logits(const Tensor<S>& z, const LinearHead<S>& head) {
  if (z.rank() != 2 || z.dim(1) != head.w.dim(0))
    throw DimError("abs_pos_logits: tokens must be N x D matching the head");
  return add_rowwise(matmul(z, head.w), head.b);
}

template <typename S>
Tensor<S> loss_sp_rel(const Tensor<S>& scores, const std::vector<int>& rel) {
  if (scores.rank() != 3 || scores.dim(2) != 9 || scores.dim(0) != scores.dim(1))
    throw DimError("loss_sp_rel: scores must be N x N x 9");
  const int n = scores.dim(0);
  if (static_cast<int>(rel.size()) != n * n)
    throw DimError("loss_sp_rel: " + std::to_string(rel.size()) + " labels for " +
                   std::to_string(n * n) + " pairs");
  return softmax_ce(reshape(scores, {n * n, 9}), rel);
}

template <typename S>
Tensor<S> loss_abs_pos(const Tensor<S>& logits, const std::vector<int>& abs_pos) {
  if (logits.rank() != 2) throw DimError("loss_abs_pos: logits must be N x K");
  return softmax_ce(logits, abs_pos);
}

namespace {

template <typename S>
Tensor<S> pairwise_mse(const Tensor<S>& scores, const std::vector<double>& target,
                       const char* op) {
  if (scores.rank() != 3 || scores.dim(2) != 1 || scores.dim(0) != scores.dim(1))
    throw DimError(std::string(op) + ": scores must be N x N x 1");
  const int n = scores.dim(0);
  if (static_cast<int>(target.size()) != n * n)
    throw DimError(std::string(op) + ": target size mismatch");
  std::vector<S> tv(target.begin(), target.end());
  return mse(reshape(scores, {n, n}), Tensor<S>::from_values({n, n}, std::move(tv)));
}

}  // namespace

template <typename S>
Tensor<S> loss_dist(const Tensor<S>& scores, const std::vector<double>& target) {
  return pairwise_mse(scores, target, "loss_dist");
}

template <typename S>
Tensor<S> loss_angle(const Tensor<S>& scores, const std::vector<double>& target) {
  return pairwise_mse(scores, target, "loss_angle");
}

template <typename S>
LossBreakdown<S> total_loss(const Tensor<S>& patch_tokens, const Tensor<S>& class_logits,
                            const TargetSet& targets, SslHeads<S>& heads, const TaskSet& tasks,
                            std::optional<int> class_label) {
  if (!tasks.any()) throw ConfigError("total_loss: no active tasks");
  if (tasks.any_ssl() && patch_tokens.dim(0) != targets.n)
    throw ConfigError("total_loss: " + std::to_string(patch_tokens.dim(0)) + " tokens but " +
                      std::to_string(targets.n) + " targets");
  if ((tasks.dist || tasks.angle) && targets.n < 2)
    throw ConfigError("total_loss: distance and angle are undefined on a single-token grid");

  LossBreakdown<S> out;
  std::vector<Tensor<S>> terms;
  if (tasks.sp_rel) {
    auto l = loss_sp_rel(pairwise_scores(patch_tokens, heads.sp_rel), targets.rel);
    out.sp_rel = static_cast<double>(l.item());
    terms.push_back(l);
  }
  if (tasks.abs_pos) {
    auto l = loss_abs_pos(abs_pos_logits(patch_tokens, heads.abs_pos), targets.abs_pos);
    out.abs_pos = static_cast<double>(l.item());
    terms.push_back(l);
  }
  if (tasks.dist) {
    auto l = loss_dist(pairwise_scores(patch_tokens, heads.dist), targets.dist);
    out.dist = static_cast<double>(l.item());
    terms.push_back(l);
  }
  if (tasks.angle) {
    auto l = loss_angle(pairwise_scores(patch_tokens, heads.angle), targets.ang);
    out.angle = static_cast<double>(l.item());
    terms.push_back(l);
  }
  if (tasks.classification) {
    if (!class_label) throw ConfigError("total_loss: classification requires a label");
    if (!class_logits.defined())
      throw ConfigError("total_loss: classification requires a class token output");
    auto l = softmax_ce(reshape(class_logits, {1, class_logits.dim(0)}), {*class_label});
    out.cls = static_cast<double>(l.item());
    terms.push_back(l);
  }
  out.total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) out.total = add(out.total, terms[i]);
  return out;
}

template <typename S>
double argmax_accuracy(const Tensor<S>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2 || static_cast<int>(labels.size()) != logits.dim(0))
    throw DimError("argmax_accuracy: logits rows must match labels");
  const int n = logits.dim(0), k = logits.dim(1);
  auto lv = logits.values();
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (lv[static_cast<size_t>(i) * k + j] > lv[static_cast<size_t>(i) * k + best]) best = j;
    if (best == labels[static_cast<size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / n;
}

template <typename S>
double pairwise_argmax_accuracy(const Tensor<S>& scores, const std::vector<int>& labels) {
  if (scores.rank() != 3 || scores.dim(0) != scores.dim(1))
    throw DimError("pairwise_argmax_accuracy: scores must be N x N x K");
  const int n = scores.dim(0), k = scores.dim(2);
  if (static_cast<int>(labels.size()) != n * n)
    throw DimError("pairwise_argmax_accuracy: label count mismatch");
  if (n < 2) return 0.0;
  auto sv = scores.values();
  int hits = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const size_t base = (static_cast<size_t>(i) * n + j) * k;
      int best = 0;
      for (int c = 1; c < k; ++c)
        if (sv[base + c] > sv[base + best]) best = c;
      if (best == labels[static_cast<size_t>(i) * n + j]) ++hits;
    }
  return static_cast<double>(hits) / (static_cast<double>(n) * n - n);
}

#define RELPATCH_INSTANTIATE(S)                                                              \
  template struct PairwiseHead<S>;                                                          \
  template struct LinearHead<S>;                                                            \
  template struct SslHeads<S>;                                                              \
  template Tensor<S> pairwise_scores<S>(const Tensor<S>&, const PairwiseHead<S>&);          \
  template Tensor<S> abs_pos_logits<S>(const Tensor<S>&, const LinearHead<S>&);             \
  template Tensor<S> loss_sp_rel<S>(const Tensor<S>&, const std::vector<int>&);             \
  template Tensor<S> loss_abs_pos<S>(const Tensor<S>&, const std::vector<int>&);            \
  template Tensor<S> loss_dist<S>(const Tensor<S>&, const std::vector<double>&);            \
  template Tensor<S> loss_angle<S>(const Tensor<S>&, const std::vector<double>&);           \
  template LossBreakdown<S> total_loss<S>(const Tensor<S>&, const Tensor<S>&,               \
                                          const TargetSet&, SslHeads<S>&, const TaskSet&,   \
                                          std::optional<int>);                              \
  template double argmax_accuracy<S>(const Tensor<S>&, const std::vector<int>&);           \
  template double pairwise_argmax_accuracy<S>(const Tensor<S>&, const std::vector<int>&);

RELPATCH_INSTANTIATE(float)
RELPATCH_INSTANTIATE(double)

#undef RELPATCH_INSTANTIATE

}  // namespace relpatch
