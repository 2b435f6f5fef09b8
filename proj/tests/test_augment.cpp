#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "relpatch/augment.hpp"
#include "relpatch/errors.hpp"
#include "relpatch/rng.hpp"

using namespace relpatch;

namespace {

TensorF random_image(int c, int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(static_cast<size_t>(c) * h * w);
  for (auto& x : v) x = u(rng);
  return TensorF::from_values({c, h, w}, std::move(v));
}

}  // namespace

TEST_CASE("disabled augmentation is the identity") {
  auto rng = make_rng(1);
  auto img = random_image(3, 8, 8, rng);
  AugmentConfig cfg;
  cfg.enabled = false;
  auto out = augment_classification(img, cfg, rng);
  auto outp = augment_patch(img, cfg, rng);
  for (int i = 0; i < img.size(); ++i) {
    CHECK(out.values()[i] == img.values()[i]);
    CHECK(outp.values()[i] == img.values()[i]);
  }
}

TEST_CASE("outputs stay inside [0,1] over many draws") {
  auto rng = make_rng(2);
  AugmentConfig cfg;  // full default strength
  for (int trial = 0; trial < 1000; ++trial) {
    auto img = random_image(3, 6, 6, rng);
    auto out = trial % 2 == 0 ? augment_patch(img, cfg, rng)
                              : augment_classification(img, cfg, rng);
    CHECK(out.shape() == img.shape());
    for (int i = 0; i < out.size(); ++i) {
      CHECK(out.values()[i] >= 0.0f);
      CHECK(out.values()[i] <= 1.0f);
    }
  }
}

TEST_CASE("forced grayscale yields equal channels") {
  auto rng = make_rng(3);
  AugmentConfig cfg;
  cfg.crop_scale_min = cfg.crop_scale_max = 1.0;  // keep geometry fixed
  cfg.jitter_prob = 0.0;
  cfg.grayscale_prob = 1.0;
  auto img = random_image(3, 4, 4, rng);
  auto out = augment_patch(img, cfg, rng);
  const int plane = 16;
  for (int i = 0; i < plane; ++i) {
    CHECK(out.values()[i] == out.values()[plane + i]);
    CHECK(out.values()[i] == out.values()[2 * plane + i]);
  }
}

TEST_CASE("same seed, same augmentation") {
  AugmentConfig cfg;
  auto base = make_rng(4);
  auto img = random_image(3, 8, 8, base);
  auto r1 = make_rng(77), r2 = make_rng(77);
  auto a = augment_patch(img, cfg, r1);
  auto b = augment_patch(img, cfg, r2);
  for (int i = 0; i < a.size(); ++i) CHECK(a.values()[i] == b.values()[i]);
}

TEST_CASE("whole-image path with unit crop is the image or its mirror") {
  auto rng = make_rng(5);
  auto img = random_image(3, 4, 6, rng);
  AugmentConfig cfg;
  cfg.crop_scale_min = cfg.crop_scale_max = 1.0;
  bool saw_flip = false, saw_same = false;
  for (int t = 0; t < 40; ++t) {
    auto out = augment_classification(img, cfg, rng);
    bool same = true, flip = true;
    for (int c = 0; c < 3 && (same || flip); ++c)
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) {
          const float v = out.values()[(c * 4 + y) * 6 + x];
          if (v != img.values()[(c * 4 + y) * 6 + x]) same = false;
          if (v != img.values()[(c * 4 + y) * 6 + (5 - x)]) flip = false;
        }
    CHECK((same || flip));
    saw_same |= same;
    saw_flip |= flip;
  }
  CHECK(saw_same);
  CHECK(saw_flip);
}

TEST_CASE("single-channel images skip the color branches safely") {
  auto rng = make_rng(6);
  auto img = random_image(1, 5, 5, rng);
  AugmentConfig cfg;
  cfg.grayscale_prob = 1.0;
  for (int t = 0; t < 50; ++t) {
    auto out = augment_patch(img, cfg, rng);
    CHECK(out.shape() == img.shape());
    for (int i = 0; i < out.size(); ++i) {
      CHECK(out.values()[i] >= 0.0f);
      CHECK(out.values()[i] <= 1.0f);
    }
  }
}

TEST_CASE("augment_patch_rows augments every row independently") {
  auto rng = make_rng(7);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(4 * 12);
  for (auto& x : v) x = u(rng);
  auto rows = TensorF::from_values({4, 12}, std::move(v));
  AugmentConfig cfg;
  auto out = augment_patch_rows(rows, 3, 2, cfg, rng);
  CHECK(out.shape() == rows.shape());
  CHECK_THROWS_AS(augment_patch_rows(rows, 3, 3, cfg, rng), DimError);

  cfg.enabled = false;
  auto id = augment_patch_rows(rows, 3, 2, cfg, rng);
  for (int i = 0; i < rows.size(); ++i) CHECK(id.values()[i] == rows.values()[i]);
}

TEST_CASE("config validation rejects nonsense") {
  auto rng = make_rng(8);
  auto img = random_image(3, 4, 4, rng);
  AugmentConfig cfg;
  cfg.crop_scale_min = 0.0;
  CHECK_THROWS_AS(augment_patch(img, cfg, rng), ConfigError);
  cfg = {};
  cfg.crop_scale_min = 0.8;
  cfg.crop_scale_max = 0.5;
  CHECK_THROWS_AS(augment_patch(img, cfg, rng), ConfigError);
  cfg = {};
  cfg.jitter_prob = 1.5;
  CHECK_THROWS_AS(augment_patch(img, cfg, rng), ConfigError);
  cfg = {};
  cfg.jitter_hue = -0.1;
  CHECK_THROWS_AS(augment_patch(img, cfg, rng), ConfigError);
}
