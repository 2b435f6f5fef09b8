#pragma once

#include <string>
#include <vector>

#include "relpatch/model.hpp"

namespace relpatch {

/// On-disk model snapshot. Binary layout, all integers little-endian:
///   magic "RLVT", version u16,
///   config block: img_h, img_w, patch_size, channels, depth, heads, dim,
///     mlp_ratio, num_classes as i32, then use_pos_embed / use_class_token
///     as u8 flags,
///   tensor table: count u32, then per tensor name_len u32, name bytes,
///     rank u32, each dim u32, values as float32.
struct Checkpoint {
  ModelConfig config;
  std::vector<NamedTensor<float>> tensors;

  const NamedTensor<float>* find(const std::string& name) const;
};

template <typename S>
void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const std::vector<NamedTensor<S>>& params);

Checkpoint load_checkpoint(const std::string& path);

/// Copies checkpoint values into every parameter whose name is present.
/// Shape mismatch is an error; returns how many parameters were filled.
/// Pass require_all to insist that every given parameter is found.
template <typename S>
size_t load_into(const Checkpoint& ckpt, std::vector<NamedTensor<S>> params,
                 bool require_all = true);

/// True when two configs describe the same weight shapes (toggles such as
/// positional-embedding use may differ).
bool same_architecture(const ModelConfig& a, const ModelConfig& b);

}  // namespace relpatch
