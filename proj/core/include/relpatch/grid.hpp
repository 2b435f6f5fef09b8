#pragma once

#include <random>
#include <utility>
#include <vector>

#include "relpatch/tensor.hpp"

namespace relpatch {

/// Regular patch lattice over an image. Token order is raster order: token i
/// sits at column i mod n_cols, row i div n_cols.
struct PatchGrid {
  int img_h = 0;
  int img_w = 0;
  int channels = 0;
  int patch_size = 0;

  PatchGrid() = default;
  PatchGrid(int img_h, int img_w, int channels, int patch_size);

  int n_rows() const { return img_h / patch_size; }
  int n_cols() const { return img_w / patch_size; }
  int n_tokens() const { return n_rows() * n_cols(); }
  int patch_dim() const { return patch_size * patch_size * channels; }
};

/// Lattice coordinate of a token: x grows rightward, y grows downward.
struct GridPos {
  int x = 0;
  int y = 0;
  friend bool operator==(GridPos a, GridPos b) { return a.x == b.x && a.y == b.y; }
};

/// An M x M partition of the patch lattice. Cuts are grid-line indices
/// (strictly increasing, in [1, G-1]), so every region boundary lands on a
/// patch boundary in pixels.
struct MegaPatchLayout {
  int m = 1;
  std::vector<int> row_cuts;
  std::vector<int> col_cuts;
};

GridPos position_of(int i, const PatchGrid& grid);
int index_of(GridPos pos, const PatchGrid& grid);

/// Splits {C,H,W} into N rows of flattened P x P patches (channel-major
/// within a row). Differentiable.
template <typename S>
Tensor<S> patchify(const Tensor<S>& image, const PatchGrid& grid);

/// Inverse of patchify.
template <typename S>
Tensor<S> unpatchify(const Tensor<S>& patches, const PatchGrid& grid);

/// Draws M-1 distinct cut positions per axis, uniformly without replacement
/// from {1..G-1}, returned sorted.
MegaPatchLayout sample_megapatch_layout(const PatchGrid& grid, int m, std::mt19937_64& rng);

/// Cuts the image along the layout, resizes every region to P x P bilinearly
/// and flattens it to one token row. Positions are mega-lattice coordinates
/// in raster order.
template <typename S>
std::pair<Tensor<S>, std::vector<GridPos>> extract_megapatches(const Tensor<S>& image,
                                                               const MegaPatchLayout& layout,
                                                               const PatchGrid& grid);

}  // namespace relpatch
