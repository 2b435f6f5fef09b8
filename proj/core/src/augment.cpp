#include "relpatch/augment.hpp"

#include <algorithm>
#include <cmath>

#include "relpatch/errors.hpp"

namespace relpatch {

namespace {

constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;

void check_chw(const TensorF& t, const char* who) {
  if (t.rank() != 3) throw DimError(std::string(who) + ": expected a {C,H,W} image");
}

TensorF crop(const TensorF& img, int y0, int x0, int h, int w) {
  const int c = img.dim(0), ih = img.dim(1), iw = img.dim(2);
  std::vector<float> out(static_cast<size_t>(c) * h * w);
  auto v = img.values();
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out[(static_cast<size_t>(ch) * h + y) * w + x] =
            v[(static_cast<size_t>(ch) * ih + (y0 + y)) * iw + (x0 + x)];
  return TensorF::from_values({c, h, w}, std::move(out));
}

/// Random resized crop: area scale from [smin,smax], aspect log-uniform in
/// [3/4, 4/3], bilinear back to the source size. A degenerate [1,1] scale
/// range disables cropping entirely.
TensorF random_resized_crop(const TensorF& img, double smin, double smax, std::mt19937_64& rng) {
  if (smin == 1.0 && smax == 1.0) return img;
  const int h = img.dim(1), w = img.dim(2);
  std::uniform_real_distribution<double> scale(smin, smax);
  std::uniform_real_distribution<double> log_aspect(std::log(3.0 / 4.0), std::log(4.0 / 3.0));
  const double area = scale(rng) * h * w;
  const double aspect = std::exp(log_aspect(rng));
  int cw = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1, w);
  int ch = std::clamp(static_cast<int>(std::lround(std::sqrt(area / aspect))), 1, h);
  std::uniform_int_distribution<int> oy(0, h - ch), ox(0, w - cw);
  const int y0 = oy(rng), x0 = ox(rng);
  if (y0 == 0 && x0 == 0 && ch == h && cw == w) return img;
  return bilinear_resize(crop(img, y0, x0, ch, cw), h, w);
}

TensorF hflip(const TensorF& img) {
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  std::vector<float> out(img.values().begin(), img.values().end());
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y) {
      float* row = out.data() + (static_cast<size_t>(ch) * h + y) * w;
      std::reverse(row, row + w);
    }
  return TensorF::from_values({c, h, w}, std::move(out));
}

void scale_around(std::vector<float>& v, double pivot, double factor) {
  for (auto& x : v) x = static_cast<float>(pivot + factor * (x - pivot));
}

/// In-place hue rotation by `turns` of a full cycle, via HSV.
void rotate_hue(std::vector<float>& v, int h, int w, double turns) {
  const size_t plane = static_cast<size_t>(h) * w;
  for (size_t i = 0; i < plane; ++i) {
    double r = v[i], g = v[plane + i], b = v[2 * plane + i];
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    if (d <= 0.0) continue;
    double hue;  // in [0,6)
    if (mx == r)
      hue = std::fmod((g - b) / d + 6.0, 6.0);
    else if (mx == g)
      hue = (b - r) / d + 2.0;
    else
      hue = (r - g) / d + 4.0;
    hue = std::fmod(hue + 6.0 * turns + 6.0, 6.0);
    const int sector = static_cast<int>(hue);
    const double f = hue - sector;
    const double p = mn;
    const double q = mx - d * f;
    const double t = mn + d * f;
    switch (sector) {
      case 0: r = mx, g = t, b = p; break;
      case 1: r = q, g = mx, b = p; break;
      case 2: r = p, g = mx, b = t; break;
      case 3: r = p, g = q, b = mx; break;
      case 4: r = t, g = p, b = mx; break;
      default: r = mx, g = p, b = q; break;
    }
    v[i] = static_cast<float>(r);
    v[plane + i] = static_cast<float>(g);
    v[2 * plane + i] = static_cast<float>(b);
  }
}

std::vector<double> luma(const std::vector<float>& v, int h, int w) {
  const size_t plane = static_cast<size_t>(h) * w;
  std::vector<double> g(plane);
  for (size_t i = 0; i < plane; ++i)
    g[i] = kLumaR * v[i] + kLumaG * v[plane + i] + kLumaB * v[2 * plane + i];
  return g;
}

/// Brightness -> contrast -> saturation -> hue, each factor drawn whether or
/// not the step can apply so the rng stream is channel-count independent.
void color_jitter(std::vector<float>& v, int c, int h, int w, const AugmentConfig& cfg,
                  std::mt19937_64& rng) {
  auto factor = [&](double s) {
    std::uniform_real_distribution<double> d(std::max(0.0, 1.0 - s), 1.0 + s);
    return d(rng);
  };
  scale_around(v, 0.0, factor(cfg.jitter_brightness));

  const double contrast = factor(cfg.jitter_contrast);
  const double saturation = factor(cfg.jitter_saturation);
  std::uniform_real_distribution<double> hue_d(-cfg.jitter_hue, cfg.jitter_hue);
  const double hue = hue_d(rng);

  if (c == 3) {
    auto g = luma(v, h, w);
    double mean = 0.0;
    for (double x : g) mean += x;
    mean /= static_cast<double>(g.size());
    scale_around(v, mean, contrast);

    g = luma(v, h, w);
    const size_t plane = static_cast<size_t>(h) * w;
    for (size_t i = 0; i < plane; ++i)
      for (int ch = 0; ch < 3; ++ch) {
        auto& x = v[static_cast<size_t>(ch) * plane + i];
        x = static_cast<float>(g[i] + saturation * (x - g[i]));
      }
    rotate_hue(v, h, w, hue);
  } else {
    double mean = 0.0;
    for (float x : v) mean += x;
    mean /= static_cast<double>(v.size());
    scale_around(v, mean, contrast);
  }
}

void to_grayscale(std::vector<float>& v, int h, int w) {
  auto g = luma(v, h, w);
  const size_t plane = static_cast<size_t>(h) * w;
  for (size_t i = 0; i < plane; ++i)
    for (int ch = 0; ch < 3; ++ch)
      v[static_cast<size_t>(ch) * plane + i] = static_cast<float>(g[i]);
}

void clamp01(std::vector<float>& v) {
  for (auto& x : v) x = std::clamp(x, 0.0f, 1.0f);
}

}  // namespace

void AugmentConfig::validate() const {
  if (!(0.0 < crop_scale_min && crop_scale_min <= crop_scale_max && crop_scale_max <= 1.0))
    throw ConfigError("augment: need 0 < crop_scale_min <= crop_scale_max <= 1");
  if (jitter_brightness < 0 || jitter_contrast < 0 || jitter_saturation < 0 || jitter_hue < 0)
    throw ConfigError("augment: jitter strengths must be non-negative");
  if (jitter_prob < 0 || jitter_prob > 1 || grayscale_prob < 0 || grayscale_prob > 1)
    throw ConfigError("augment: probabilities must lie in [0,1]");
}

TensorF augment_classification(const TensorF& image, const AugmentConfig& cfg,
                               std::mt19937_64& rng) {
  check_chw(image, "augment_classification");
  if (!cfg.enabled) return image;
  cfg.validate();
  TensorF out = random_resized_crop(image, cfg.crop_scale_min, cfg.crop_scale_max, rng);
  std::bernoulli_distribution coin(0.5);
  if (coin(rng)) out = hflip(out);
  std::vector<float> v(out.values().begin(), out.values().end());
  clamp01(v);
  return TensorF::from_values({out.dim(0), out.dim(1), out.dim(2)}, std::move(v));
}

TensorF augment_patch(const TensorF& patch, const AugmentConfig& cfg, std::mt19937_64& rng) {
  check_chw(patch, "augment_patch");
  if (!cfg.enabled) return patch;
  cfg.validate();
  TensorF out = random_resized_crop(patch, cfg.crop_scale_min, cfg.crop_scale_max, rng);
  const int c = out.dim(0), h = out.dim(1), w = out.dim(2);
  std::vector<float> v(out.values().begin(), out.values().end());
  std::bernoulli_distribution jitter_coin(cfg.jitter_prob), gray_coin(cfg.grayscale_prob);
  if (jitter_coin(rng)) color_jitter(v, c, h, w, cfg, rng);
  if (gray_coin(rng) && c == 3) to_grayscale(v, h, w);
  clamp01(v);
  return TensorF::from_values({c, h, w}, std::move(v));
}

TensorF augment_patch_rows(const TensorF& rows, int channels, int patch_size,
                           const AugmentConfig& cfg, std::mt19937_64& rng) {
  if (rows.rank() != 2 || rows.dim(1) != channels * patch_size * patch_size)
    throw DimError("augment_patch_rows: rows are not flattened {C,P,P} patches");
  if (!cfg.enabled) return rows;
  const int n = rows.dim(0), d = rows.dim(1);
  std::vector<float> out(static_cast<size_t>(n) * d);
  auto v = rows.values();
  for (int i = 0; i < n; ++i) {
    std::vector<float> one(v.begin() + static_cast<size_t>(i) * d,
                           v.begin() + static_cast<size_t>(i + 1) * d);
    auto aug =
        augment_patch(TensorF::from_values({channels, patch_size, patch_size}, std::move(one)),
                      cfg, rng);
    std::copy(aug.values().begin(), aug.values().end(), out.begin() + static_cast<size_t>(i) * d);
  }
  return TensorF::from_values({n, d}, std::move(out));
}

}  // namespace relpatch
