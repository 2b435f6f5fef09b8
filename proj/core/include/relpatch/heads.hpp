#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "relpatch/model.hpp"
#include "relpatch/targets.hpp"

namespace relpatch {

/// Which objectives are active in a run.
struct TaskSet {
  bool sp_rel = false;
  bool abs_pos = false;
  bool dist = false;
  bool angle = false;
  bool classification = false;

  bool any() const { return sp_rel || abs_pos || dist || angle || classification; }
  bool any_ssl() const { return sp_rel || abs_pos || dist || angle; }

  /// Comma-separated names: sp_rel,abs_pos,dist,angle,cls.
  static TaskSet parse(const std::string& csv);
  std::string to_string() const;
};

/// Bilinear pairwise scorer: channel k of the output is z W_k z^T / sqrt(D).
/// Nine channels for the spatial-relation task, one for each regression.
template <typename S>
struct PairwiseHead {
  std::vector<Tensor<S>> w;  // K matrices, each D x D

  PairwiseHead() = default;
  PairwiseHead(int k, int dim);
  int channels() const { return static_cast<int>(w.size()); }
};

/// Per-token linear classifier over the N lattice positions.
template <typename S>
struct LinearHead {
  Tensor<S> w;  // D x K
  Tensor<S> b;  // K

  LinearHead() = default;
  LinearHead(int dim, int k);
};

/// All four SSL heads, sized for one lattice. n_positions is the token count
/// the absolute-position head classifies over (M*M under mega-patches).
template <typename S>
struct SslHeads {
  PairwiseHead<S> sp_rel;
  PairwiseHead<S> dist;
  PairwiseHead<S> angle;
  LinearHead<S> abs_pos;

  SslHeads() = default;
  SslHeads(int dim, int n_positions);
  void init_weights(std::mt19937_64& rng);
  std::vector<NamedTensor<S>> parameters();
};

/// Raw pairwise scores, N x N x K. No softmax, no squashing.
template <typename S>
Tensor<S> pairwise_scores(const Tensor<S>& z, const PairwiseHead<S>& head);

/// Position logits, N x K.
template <typename S>
Tensor<S> abs_pos_logits(const Tensor<S>& z, const LinearHead<S>& head);

/// Mean cross-entropy over all N^2 ordered pairs (diagonal included).
template <typename S>
Tensor<S> loss_sp_rel(const Tensor<S>& scores, const std::vector<int>& rel);

/// Mean cross-entropy over tokens against their lattice indices.
template <typename S>
Tensor<S> loss_abs_pos(const Tensor<S>& logits, const std::vector<int>& abs_pos);

/// Mean squared error over all N^2 pairs.
template <typename S>
Tensor<S> loss_dist(const Tensor<S>& scores, const std::vector<double>& target);
template <typename S>
Tensor<S> loss_angle(const Tensor<S>& scores, const std::vector<double>& target);

/// Per-task loss values plus their unit-weight sum as a graph scalar.
template <typename S>
struct LossBreakdown {
  Tensor<S> total;
  std::optional<double> sp_rel, abs_pos, dist, angle, cls;
};

/// Assembles every active task's loss for one image. class_logits and
/// class_label are only read when classification is active.
template <typename S>
LossBreakdown<S> total_loss(const Tensor<S>& patch_tokens, const Tensor<S>& class_logits,
                            const TargetSet& targets, SslHeads<S>& heads, const TaskSet& tasks,
                            std::optional<int> class_label = std::nullopt);

/// Fraction of rows whose argmax matches the label.
template <typename S>
double argmax_accuracy(const Tensor<S>& logits, const std::vector<int>& labels);

/// Argmax accuracy of N x N x K pairwise scores over the off-diagonal pairs.
/// Self-pairs are skipped: their two inputs are identical, so they are
/// classifiable without any spatial signal and would dilute the metric.
/// Returns 0 when there are no off-diagonal pairs.
template <typename S>
double pairwise_argmax_accuracy(const Tensor<S>& scores, const std::vector<int>& labels);

}  // namespace relpatch
