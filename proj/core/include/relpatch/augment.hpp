#pragma once

#include <random>

#include "relpatch/tensor.hpp"

namespace relpatch {

/// Stochastic augmentation knobs. All strengths follow the usual conventions:
/// brightness/contrast/saturation factors are drawn from [1-s, 1+s], hue is a
/// rotation in [-h, h] turns. Saturation, hue and grayscale only apply to
/// three-channel images. A [1,1] crop scale range disables cropping.
struct AugmentConfig {
  bool enabled = true;
  double crop_scale_min = 0.2;
  double crop_scale_max = 1.0;
  double jitter_brightness = 0.4;
  double jitter_contrast = 0.4;
  double jitter_saturation = 0.4;
  double jitter_hue = 0.1;
  double jitter_prob = 0.8;
  double grayscale_prob = 0.2;

  void validate() const;
};

/// Whole-image path: random resized crop back to the input size, then a
/// coin-flip horizontal mirror. Output stays {C,H,W} in [0,1].
TensorF augment_classification(const TensorF& image, const AugmentConfig& cfg,
                               std::mt19937_64& rng);

/// Per-patch path: random resized crop, color jitter with probability
/// jitter_prob, grayscale with probability grayscale_prob. Input and output
/// are {C,P,P} in [0,1].
TensorF augment_patch(const TensorF& patch, const AugmentConfig& cfg, std::mt19937_64& rng);

/// Applies augment_patch to every row of a {N, P*P*C} patch matrix.
TensorF augment_patch_rows(const TensorF& rows, int channels, int patch_size,
                           const AugmentConfig& cfg, std::mt19937_64& rng);

}  // namespace relpatch
