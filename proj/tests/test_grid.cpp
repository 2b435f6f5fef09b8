#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "relpatch/grad_check.hpp"
#include "relpatch/grid.hpp"
#include "support/test_util.hpp"

using namespace relpatch;
using testutil::randn;

TEST_CASE("PatchGrid validates its geometry") {
  CHECK_THROWS_AS(PatchGrid(33, 32, 3, 4), DimError);
  CHECK_THROWS_AS(PatchGrid(32, 30, 3, 4), DimError);
  CHECK_THROWS_AS(PatchGrid(32, 32, 0, 4), ArgError);
  PatchGrid g(32, 32, 3, 4);
  CHECK(g.n_rows() == 8);
  CHECK(g.n_cols() == 8);
  CHECK(g.n_tokens() == 64);
  CHECK(g.patch_dim() == 48);
}

TEST_CASE("position_of follows raster order and is a bijection") {
  PatchGrid g3(3, 3, 1, 1);
  CHECK(position_of(0, g3) == GridPos{0, 0});
  CHECK(position_of(8, g3) == GridPos{2, 2});
  CHECK_THROWS_AS(position_of(9, g3), IndexError);
  CHECK_THROWS_AS(position_of(-1, g3), IndexError);

  PatchGrid g8(8, 8, 1, 1);
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < 64; ++i) {
    GridPos p = position_of(i, g8);
    CHECK(index_of(p, g8) == i);
    seen.insert({p.x, p.y});
  }
  CHECK(seen.size() == 64);
}

TEST_CASE("patchify raster order on a pixel-per-patch grid") {
  PatchGrid g(2, 2, 1, 1);
  auto img = TensorD::from_values({1, 2, 2}, {10, 11, 12, 13});
  auto rows = patchify(img, g);
  CHECK(rows.shape() == std::vector<int>{4, 1});
  for (int i = 0; i < 4; ++i) CHECK(rows.values()[i] == 10 + i);
}

TEST_CASE("patchify yields 64 rows for a 32x32 image at patch size 4") {
  PatchGrid g(32, 32, 3, 4);
  std::mt19937_64 rng(31);
  auto img = randn<float>({3, 32, 32}, rng);
  auto rows = patchify(img, g);
  CHECK(rows.shape() == std::vector<int>{64, 48});
}

TEST_CASE("patchify and unpatchify are exact inverses") {
  std::mt19937_64 rng(32);
  for (auto [h, w, c, p] : {std::tuple{8, 8, 3, 2}, {6, 9, 1, 3}, {4, 4, 2, 4}}) {
    PatchGrid g(h, w, c, p);
    auto img = randn<float>({c, h, w}, rng);
    auto back = unpatchify(patchify(img, g), g);
    for (int i = 0; i < img.size(); ++i) CHECK(back.values()[i] == img.values()[i]);

    auto rows = randn<float>({g.n_tokens(), g.patch_dim()}, rng);
    auto rows2 = patchify(unpatchify(rows, g), g);
    for (int i = 0; i < rows.size(); ++i) CHECK(rows2.values()[i] == rows.values()[i]);
  }
  CHECK_THROWS_AS(patchify(TensorF::zeros({3, 8, 8}), PatchGrid(8, 8, 1, 2)), DimError);
}

TEST_CASE("patchify gradient vs finite differences") {
  std::mt19937_64 rng(33);
  PatchGrid g(4, 6, 2, 2);
  auto img = randn<double>({2, 4, 6}, rng);
  auto w = randn<double>({g.n_tokens(), g.patch_dim()}, rng);
  auto f = [&] { return sum(mul(patchify(img, g), w)); };
  CHECK(grad_check(f, {{"img", img}}).max_relative_error < 1e-6);
}

TEST_CASE("sample_megapatch_layout basic shapes") {
  PatchGrid g(32, 32, 3, 4);
  std::mt19937_64 rng(34);

  auto one = sample_megapatch_layout(g, 1, rng);
  CHECK(one.row_cuts.empty());
  CHECK(one.col_cuts.empty());

  auto five = sample_megapatch_layout(g, 5, rng);
  CHECK(five.row_cuts.size() == 4);
  CHECK(five.col_cuts.size() == 4);

  CHECK_THROWS_AS(sample_megapatch_layout(g, 0, rng), ArgError);
  CHECK_THROWS_AS(sample_megapatch_layout(g, 9, rng), ArgError);
}

TEST_CASE("sampled layouts always satisfy the lattice invariants") {
  PatchGrid g(32, 32, 3, 4);
  std::mt19937_64 rng(35);
  for (int m = 1; m <= 8; ++m)
    for (int trial = 0; trial < 200; ++trial) {
      auto lay = sample_megapatch_layout(g, m, rng);
      CHECK(static_cast<int>(lay.row_cuts.size()) == m - 1);
      for (const auto& cuts : {lay.row_cuts, lay.col_cuts}) {
        int prev = 0;
        for (int c : cuts) {
          CHECK(c > prev);
          CHECK(c >= 1);
          CHECK(c <= 7);
          prev = c;
        }
      }
    }
}

TEST_CASE("cut pairs on G=8 M=3 are uniform over unordered pairs") {
  PatchGrid g(8, 8, 1, 1);
  std::mt19937_64 rng(36);
  std::map<std::pair<int, int>, int> counts;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    auto lay = sample_megapatch_layout(g, 3, rng);
    counts[{lay.row_cuts[0], lay.row_cuts[1]}]++;
  }
  CHECK(counts.size() == 21);  // C(7,2) unordered pairs of {1..7}
  const double p = 1.0 / 21, mean = draws * p;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (const auto& [pair, c] : counts) CHECK(std::abs(c - mean) <= 3 * sigma);
}

TEST_CASE("extract_megapatches with M=1 is a full-image downsize") {
  PatchGrid g(16, 16, 3, 4);
  std::mt19937_64 rng(37);
  auto img = randn<float>({3, 16, 16}, rng);
  MegaPatchLayout lay{1, {}, {}};
  auto [rows, pos] = extract_megapatches(img, lay, g);
  CHECK(rows.shape() == std::vector<int>{1, 48});
  CHECK(pos.size() == 1);
  CHECK(pos[0] == GridPos{0, 0});
  auto want = bilinear_resize(img, 4, 4);
  for (int i = 0; i < 48; ++i) CHECK(rows.values()[i] == doctest::Approx(want.values()[i]));
}

TEST_CASE("uniform cuts give equal mega-patches that match manual crops") {
  PatchGrid g(64, 64, 1, 8);  // 8x8 patch lattice
  std::mt19937_64 rng(38);
  auto img = randn<double>({1, 64, 64}, rng);
  MegaPatchLayout lay{4, {2, 4, 6}, {2, 4, 6}};
  auto [rows, pos] = extract_megapatches(img, lay, g);
  CHECK(rows.shape() == std::vector<int>{16, 64});
  CHECK(pos[5] == GridPos{1, 1});
  for (int my = 0; my < 4; ++my)
    for (int mx = 0; mx < 4; ++mx) {
      std::vector<double> crop(16 * 16);
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
          crop[y * 16 + x] = img.values()[(my * 16 + y) * 64 + mx * 16 + x];
      auto want = bilinear_resize(TensorD::from_values({1, 16, 16}, crop), 8, 8);
      for (int k = 0; k < 64; ++k)
        CHECK(rows.values()[(my * 4 + mx) * 64 + k] ==
              doctest::Approx(want.values()[k]).epsilon(1e-12));
    }
}

TEST_CASE("random layouts cover every pixel exactly once") {
  PatchGrid g(24, 24, 1, 4);  // 6x6 lattice
  std::mt19937_64 rng(39);
  auto img = TensorD::zeros({1, 24, 24});
  for (int m : {1, 2, 3, 4, 6})
    for (int trial = 0; trial < 100; ++trial) {
      auto lay = sample_megapatch_layout(g, m, rng);
      std::vector<int> hits(24 * 24, 0);
      auto yb = [&](int idx) { return idx == 0 ? 0 : idx == m ? 24 : lay.row_cuts[idx - 1] * 4; };
      auto xb = [&](int idx) { return idx == 0 ? 0 : idx == m ? 24 : lay.col_cuts[idx - 1] * 4; };
      for (int my = 0; my < m; ++my)
        for (int mx = 0; mx < m; ++mx)
          for (int y = yb(my); y < yb(my + 1); ++y)
            for (int x = xb(mx); x < xb(mx + 1); ++x) hits[y * 24 + x]++;
      for (int h : hits) CHECK(h == 1);
      auto [rows, pos] = extract_megapatches(img, lay, g);
      CHECK(rows.dim(0) == m * m);
      CHECK(static_cast<int>(pos.size()) == m * m);
    }
}

TEST_CASE("extract_megapatches positions follow mega raster order") {
  PatchGrid g(12, 12, 1, 3);
  std::mt19937_64 rng(40);
  auto img = randn<float>({1, 12, 12}, rng);
  auto lay = sample_megapatch_layout(g, 3, rng);
  auto [rows, pos] = extract_megapatches(img, lay, g);
  for (int i = 0; i < 9; ++i) {
    CHECK(pos[i].x == i % 3);
    CHECK(pos[i].y == i / 3);
  }
}
