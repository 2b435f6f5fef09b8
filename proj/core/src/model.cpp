#include "relpatch/model.hpp"

#include <cmath>

namespace relpatch {

void ModelConfig::validate() const {
  if (depth < 0) throw ConfigError("model: depth must be non-negative");
  if (dim < 1 || heads < 1) throw ConfigError("model: dim and heads must be positive");
  if (dim % heads != 0)
    throw ConfigError("model: dim " + std::to_string(dim) + " not divisible by heads " +
                      std::to_string(heads));
  if (mlp_ratio < 1) throw ConfigError("model: mlp_ratio must be positive");
  if (num_classes < 1) throw ConfigError("model: num_classes must be positive");
  grid();  // validates image/patch divisibility
}

ModelConfig preset_config(const std::string& name) {
  ModelConfig c;
  if (name == "vit-s-4") {
    c.img_h = c.img_w = 32;
    c.patch_size = 4;
  } else if (name == "vit-s-8") {
    c.img_h = c.img_w = 64;
    c.patch_size = 8;
  } else if (name == "vit-s-16") {
    c.img_h = c.img_w = 224;
    c.patch_size = 16;
  } else if (name == "vit-s-14") {
    c.img_h = c.img_w = 224;
    c.patch_size = 14;
  } else if (name == "vit-s-32") {
    c.img_h = c.img_w = 224;
    c.patch_size = 32;
  } else if (name == "tiny") {
    c.img_h = c.img_w = 16;
    c.patch_size = 4;
    c.depth = 4;
    c.heads = 4;
    c.dim = 96;
  } else if (name == "micro") {
    c.img_h = c.img_w = 4;
    c.patch_size = 2;
    c.depth = 2;
    c.heads = 2;
    c.dim = 16;
  } else {
    throw ConfigError("unknown model preset '" + name + "'");
  }
  c.validate();
  return c;
}

template <typename S>
std::int64_t param_count(const std::vector<NamedTensor<S>>& params) {
  std::int64_t total = 0;
  for (const auto& p : params) total += p.tensor.size();
  return total;
}

template <typename S>
void fill_trunc_normal(Tensor<S>& t, S std_dev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, static_cast<double>(std_dev));
  for (auto& v : t.values()) {
    double draw;
    do {
      draw = dist(rng);
    } while (std::abs(draw) > 2.0 * static_cast<double>(std_dev));
    v = static_cast<S>(draw);
  }
}

template <typename S>
Encoder<S>::Encoder(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int d = cfg_.dim, n = cfg_.grid().n_tokens(), hidden = cfg_.mlp_ratio * d;
  patch_embed = Tensor<S>::zeros({cfg_.grid().patch_dim(), d}, true);
  pos_embed = Tensor<S>::zeros({n + 1, d}, true);
  class_token = Tensor<S>::zeros({1, d}, true);
  blocks.resize(static_cast<size_t>(cfg_.depth));
  for (auto& b : blocks) {
    b.ln1_g = Tensor<S>::constant({d}, S(1), true);
    b.ln1_b = Tensor<S>::zeros({d}, true);
    b.qkv_w = Tensor<S>::zeros({d, 3 * d}, true);
    b.qkv_b = Tensor<S>::zeros({3 * d}, true);
    b.proj_w = Tensor<S>::zeros({d, d}, true);
    b.proj_b = Tensor<S>::zeros({d}, true);
    b.ln2_g = Tensor<S>::constant({d}, S(1), true);
    b.ln2_b = Tensor<S>::zeros({d}, true);
    b.fc1_w = Tensor<S>::zeros({d, hidden}, true);
    b.fc1_b = Tensor<S>::zeros({hidden}, true);
    b.fc2_w = Tensor<S>::zeros({hidden, d}, true);
    b.fc2_b = Tensor<S>::zeros({d}, true);
  }
  final_ln_g = Tensor<S>::constant({d}, S(1), true);
  final_ln_b = Tensor<S>::zeros({d}, true);
  head_w = Tensor<S>::zeros({d, cfg_.num_classes}, true);
  head_b = Tensor<S>::zeros({cfg_.num_classes}, true);
}

template <typename S>
void Encoder<S>::init_weights(std::mt19937_64& rng) {
  const S std_dev = S(0.02);
  fill_trunc_normal(patch_embed, std_dev, rng);
  fill_trunc_normal(pos_embed, std_dev, rng);
  fill_trunc_normal(class_token, std_dev, rng);
  for (auto& b : blocks) {
    fill_trunc_normal(b.qkv_w, std_dev, rng);
    fill_trunc_normal(b.proj_w, std_dev, rng);
    fill_trunc_normal(b.fc1_w, std_dev, rng);
    fill_trunc_normal(b.fc2_w, std_dev, rng);
  }
  fill_trunc_normal(head_w, std_dev, rng);
}

template <typename S>
Tensor<S> Encoder<S>::embed(const Tensor<S>& patch_rows) const {
  if (patch_rows.rank() != 2 || patch_rows.dim(1) != cfg_.grid().patch_dim())
    throw DimError("embed: patch rows must be N x " + std::to_string(cfg_.grid().patch_dim()));
  const int n = patch_rows.dim(0);
  Tensor<S> z = matmul(patch_rows, patch_embed);
  if (cfg_.use_class_token) z = concat_rows({class_token, z});
  if (cfg_.use_pos_embed) {
    auto pos = cfg_.use_class_token ? slice_rows(pos_embed, 0, n + 1)
                                    : slice_rows(pos_embed, 1, n);
    z = add(z, pos);
  }
  return z;
}

template <typename S>
Tensor<S> Encoder<S>::block_forward(const Tensor<S>& z, const EncoderBlock<S>& blk,
                                    std::vector<Tensor<S>>* attn_out) const {
  const int d = cfg_.dim, dh = cfg_.head_dim();
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  auto h = layernorm(z, blk.ln1_g, blk.ln1_b);
  auto qkv = add_rowwise(matmul(h, blk.qkv_w), blk.qkv_b);
  std::vector<Tensor<S>> head_outs;
  head_outs.reserve(static_cast<size_t>(cfg_.heads));
  for (int hd = 0; hd < cfg_.heads; ++hd) {
    auto q = slice_cols(qkv, hd * dh, dh);
    auto k = slice_cols(qkv, d + hd * dh, dh);
    auto v = slice_cols(qkv, 2 * d + hd * dh, dh);
    auto attn = softmax_rows(mul_scalar(matmul_nt(q, k), scale));
    if (attn_out) attn_out->push_back(attn);
    head_outs.push_back(matmul(attn, v));
  }
  auto msa = add_rowwise(matmul(concat_cols(head_outs), blk.proj_w), blk.proj_b);
  auto z1 = add(z, msa);

  auto h2 = layernorm(z1, blk.ln2_g, blk.ln2_b);
  auto mlp = add_rowwise(
      matmul(gelu(add_rowwise(matmul(h2, blk.fc1_w), blk.fc1_b)), blk.fc2_w), blk.fc2_b);
  return add(z1, mlp);
}

template <typename S>
typename Encoder<S>::Output Encoder<S>::forward(const Tensor<S>& patch_rows,
                                                std::vector<Tensor<S>>* attn_out) const {
  Tensor<S> z = embed(patch_rows);
  for (const auto& blk : blocks) z = block_forward(z, blk, attn_out);
  Tensor<S> y = layernorm(z, final_ln_g, final_ln_b);
  Output out;
  if (cfg_.use_class_token) {
    out.patch_tokens = slice_rows(y, 1, y.dim(0) - 1);
    out.class_logits = reshape(
        add_rowwise(matmul(slice_rows(y, 0, 1), head_w), head_b), {cfg_.num_classes});
  } else {
    out.patch_tokens = y;
  }
  return out;
}

template <typename S>
std::vector<NamedTensor<S>> Encoder<S>::parameters() {
  std::vector<NamedTensor<S>> out;
  out.push_back({"patch_embed", patch_embed});
  out.push_back({"pos_embed", pos_embed});
  out.push_back({"class_token", class_token});
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = "blocks." + std::to_string(i) + ".";
    auto& b = blocks[i];
    out.push_back({p + "ln1_g", b.ln1_g});
    out.push_back({p + "ln1_b", b.ln1_b});
    out.push_back({p + "qkv_w", b.qkv_w});
    out.push_back({p + "qkv_b", b.qkv_b});
    out.push_back({p + "proj_w", b.proj_w});
    out.push_back({p + "proj_b", b.proj_b});
    out.push_back({p + "ln2_g", b.ln2_g});
    out.push_back({p + "ln2_b", b.ln2_b});
    out.push_back({p + "fc1_w", b.fc1_w});
    out.push_back({p + "fc1_b", b.fc1_b});
    out.push_back({p + "fc2_w", b.fc2_w});
    out.push_back({p + "fc2_b", b.fc2_b});
  }
  out.push_back({"final_ln_g", final_ln_g});
  out.push_back({"final_ln_b", final_ln_b});
  out.push_back({"head_w", head_w});
  out.push_back({"head_b", head_b});
  return out;
}

template <typename S>
std::int64_t Encoder<S>::param_count() {
  return relpatch::param_count(parameters());
}

#define RELPATCH_INSTANTIATE(S)                                                  \
  template std::int64_t param_count<S>(const std::vector<NamedTensor<S>>&);      \
  template void fill_trunc_normal<S>(Tensor<S>&, S, std::mt19937_64&);           \
  template class Encoder<S>;

RELPATCH_INSTANTIATE(float)
RELPATCH_INSTANTIATE(double)

#undef RELPATCH_INSTANTIATE

}  // namespace relpatch
