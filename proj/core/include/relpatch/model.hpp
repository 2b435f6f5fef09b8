#pragma once

#include <random>
#include <string>
#include <vector>

#include "relpatch/grid.hpp"
#include "relpatch/tensor.hpp"

namespace relpatch {

struct ModelConfig {
  int img_h = 32;
  int img_w = 32;
  int patch_size = 4;
  int channels = 3;
  int depth = 12;
  int heads = 6;
  int dim = 384;
  int mlp_ratio = 4;
  int num_classes = 10;
  bool use_pos_embed = true;
  bool use_class_token = true;

  void validate() const;
  PatchGrid grid() const { return PatchGrid(img_h, img_w, channels, patch_size); }
  int n_tokens() const { return grid().n_tokens() + (use_class_token ? 1 : 0); }
  int head_dim() const { return dim / heads; }
};

/// Named presets: vit-s-4, vit-s-8, vit-s-16, vit-s-14, vit-s-32 (ViT-S at
/// those patch sizes), tiny (desk-scale CI default), micro (gradient-check
/// scale).
ModelConfig preset_config(const std::string& name);

template <typename S>
struct NamedTensor {
  std::string name;
  Tensor<S> tensor;
};

/// Exact count of learnable scalars in a parameter list.
template <typename S>
std::int64_t param_count(const std::vector<NamedTensor<S>>& params);

/// Draws from N(0, std^2) resampling anything beyond two standard deviations.
template <typename S>
void fill_trunc_normal(Tensor<S>& t, S std_dev, std::mt19937_64& rng);

template <typename S>
struct EncoderBlock {
  Tensor<S> ln1_g, ln1_b;
  Tensor<S> qkv_w, qkv_b;    // D x 3D fused query/key/value projection
  Tensor<S> proj_w, proj_b;  // D x D attention output projection
  Tensor<S> ln2_g, ln2_b;
  Tensor<S> fc1_w, fc1_b;    // D x (ratio*D)
  Tensor<S> fc2_w, fc2_b;    // (ratio*D) x D
};

/// Pre-norm ViT encoder. The positional table is allocated at (N+1) x D even
/// when disabled so checkpoints keep one shape across regimes; row 0 belongs
/// to the class token.
template <typename S>
class Encoder {
public:
  explicit Encoder(ModelConfig cfg);

  /// Truncated-normal weights (std 0.02), zero biases, unit LN gains.
  void init_weights(std::mt19937_64& rng);

  /// Projects patch rows, prepends the class token and adds positions when
  /// enabled. Output is n_tokens() x D.
  Tensor<S> embed(const Tensor<S>& patch_rows) const;

  /// One residual MSA + residual MLP block. When attn_out is non-null the
  /// post-softmax attention matrix of every head is appended to it.
  Tensor<S> block_forward(const Tensor<S>& z, const EncoderBlock<S>& blk,
                          std::vector<Tensor<S>>* attn_out = nullptr) const;

  struct Output {
    Tensor<S> patch_tokens;  // N x D after the final layer norm
    Tensor<S> class_logits;  // undefined when the class token is disabled
  };
  Output forward(const Tensor<S>& patch_rows, std::vector<Tensor<S>>* attn_out = nullptr) const;

  /// Stable-named parameter handles in a fixed order (optimizer, checkpoint).
  std::vector<NamedTensor<S>> parameters();
  std::int64_t param_count();

  const ModelConfig& config() const { return cfg_; }

  Tensor<S> patch_embed;  // (P*P*C) x D, no bias
  Tensor<S> pos_embed;    // (N+1) x D
  Tensor<S> class_token;  // 1 x D
  std::vector<EncoderBlock<S>> blocks;
  Tensor<S> final_ln_g, final_ln_b;
  Tensor<S> head_w, head_b;  // classifier over the class token

private:
  ModelConfig cfg_;
};

using EncoderF = Encoder<float>;
using EncoderD = Encoder<double>;

}  // namespace relpatch
