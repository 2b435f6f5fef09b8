#include "relpatch/grid.hpp"

#include <algorithm>
#include <numeric>

namespace relpatch {

PatchGrid::PatchGrid(int img_h, int img_w, int channels, int patch_size)
    : img_h(img_h), img_w(img_w), channels(channels), patch_size(patch_size) {
  if (img_h <= 0 || img_w <= 0 || channels <= 0 || patch_size <= 0)
    throw ArgError("PatchGrid: all dimensions must be positive");
  if (img_h % patch_size != 0 || img_w % patch_size != 0)
    throw DimError("PatchGrid: image " + std::to_string(img_h) + "x" + std::to_string(img_w) +
                   " not divisible by patch size " + std::to_string(patch_size));
}

GridPos position_of(int i, const PatchGrid& grid) {
  if (i < 0 || i >= grid.n_tokens())
    throw IndexError("position_of: token " + std::to_string(i) + " out of [0," +
                     std::to_string(grid.n_tokens()) + ")");
  return {i % grid.n_cols(), i / grid.n_cols()};
}

int index_of(GridPos pos, const PatchGrid& grid) {
  if (pos.x < 0 || pos.x >= grid.n_cols() || pos.y < 0 || pos.y >= grid.n_rows())
    throw IndexError("index_of: position (" + std::to_string(pos.x) + "," +
                     std::to_string(pos.y) + ") outside lattice");
  return pos.y * grid.n_cols() + pos.x;
}

namespace {

// Flat offsets into {C,H,W} for each element of patch row i, channel-major.
std::vector<std::int64_t> patch_offsets(int i, const PatchGrid& g) {
  const int p = g.patch_size;
  const GridPos pos{i % g.n_cols(), i / g.n_cols()};
  std::vector<std::int64_t> off;
  off.reserve(static_cast<size_t>(g.patch_dim()));
  for (int c = 0; c < g.channels; ++c)
    for (int py = 0; py < p; ++py)
      for (int px = 0; px < p; ++px) {
        const std::int64_t y = static_cast<std::int64_t>(pos.y) * p + py;
        const std::int64_t x = static_cast<std::int64_t>(pos.x) * p + px;
        off.push_back((static_cast<std::int64_t>(c) * g.img_h + y) * g.img_w + x);
      }
  return off;
}

}  // namespace

template <typename S>
Tensor<S> patchify(const Tensor<S>& image, const PatchGrid& grid) {
  if (image.rank() != 3 || image.dim(0) != grid.channels || image.dim(1) != grid.img_h ||
      image.dim(2) != grid.img_w)
    throw DimError("patchify: image does not match grid geometry");
  const int n = grid.n_tokens(), d = grid.patch_dim();
  std::vector<S> out(static_cast<size_t>(n) * d);
  auto iv = image.values();
  for (int i = 0; i < n; ++i) {
    auto off = patch_offsets(i, grid);
    for (int k = 0; k < d; ++k) out[static_cast<size_t>(i) * d + k] = iv[off[static_cast<size_t>(k)]];
  }
  Tensor<S> r = make_tensor<S>({n, d}, std::move(out));
  auto ii = image.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {image}, [ii, ri, grid, n, d] {
    ii->ensure_grad();
    for (int i = 0; i < n; ++i) {
      auto off = patch_offsets(i, grid);
      for (int k = 0; k < d; ++k)
        ii->grad[static_cast<size_t>(off[static_cast<size_t>(k)])] +=
            ri->grad[static_cast<size_t>(i) * d + k];
    }
  });
  return r;
}

template <typename S>
Tensor<S> unpatchify(const Tensor<S>& patches, const PatchGrid& grid) {
  const int n = grid.n_tokens(), d = grid.patch_dim();
  if (patches.rank() != 2 || patches.dim(0) != n || patches.dim(1) != d)
    throw DimError("unpatchify: patch matrix does not match grid geometry");
  std::vector<S> out(static_cast<size_t>(grid.channels) * grid.img_h * grid.img_w);
  auto pv = patches.values();
  for (int i = 0; i < n; ++i) {
    auto off = patch_offsets(i, grid);
    for (int k = 0; k < d; ++k) out[static_cast<size_t>(off[static_cast<size_t>(k)])] =
        pv[static_cast<size_t>(i) * d + k];
  }
  Tensor<S> r = make_tensor<S>({grid.channels, grid.img_h, grid.img_w}, std::move(out));
  auto pi = patches.impl();
  auto* ri = r.impl().get();
  detail::attach(r, {patches}, [pi, ri, grid, n, d] {
    pi->ensure_grad();
    for (int i = 0; i < n; ++i) {
      auto off = patch_offsets(i, grid);
      for (int k = 0; k < d; ++k)
        pi->grad[static_cast<size_t>(i) * d + k] +=
            ri->grad[static_cast<size_t>(off[static_cast<size_t>(k)])];
    }
  });
  return r;
}

MegaPatchLayout sample_megapatch_layout(const PatchGrid& grid, int m, std::mt19937_64& rng) {
  if (m < 1) throw ArgError("sample_megapatch_layout: M must be at least 1");
  const int g_rows = grid.n_rows(), g_cols = grid.n_cols();
  if (m > g_rows || m > g_cols)
    throw ArgError("sample_megapatch_layout: M = " + std::to_string(m) +
                   " exceeds lattice side " + std::to_string(std::min(g_rows, g_cols)));
  auto draw = [&](int g) {
    std::vector<int> lines(static_cast<size_t>(g - 1));
    std::iota(lines.begin(), lines.end(), 1);
    std::vector<int> cuts;
    std::sample(lines.begin(), lines.end(), std::back_inserter(cuts),
                static_cast<size_t>(m - 1), rng);
    return cuts;  // std::sample preserves order, already sorted
  };
  MegaPatchLayout layout;
  layout.m = m;
  layout.row_cuts = draw(g_rows);
  layout.col_cuts = draw(g_cols);
  return layout;
}

template <typename S>
std::pair<Tensor<S>, std::vector<GridPos>> extract_megapatches(const Tensor<S>& image,
                                                               const MegaPatchLayout& layout,
                                                               const PatchGrid& grid) {
  if (image.rank() != 3 || image.dim(0) != grid.channels || image.dim(1) != grid.img_h ||
      image.dim(2) != grid.img_w)
    throw DimError("extract_megapatches: image does not match grid geometry");
  const int m = layout.m;
  if (static_cast<int>(layout.row_cuts.size()) != m - 1 ||
      static_cast<int>(layout.col_cuts.size()) != m - 1)
    throw ArgError("extract_megapatches: layout has wrong cut count for M = " + std::to_string(m));
  auto boundaries = [&](const std::vector<int>& cuts, int g, int p) {
    std::vector<int> b{0};
    int prev = 0;
    for (int line : cuts) {
      if (line <= prev || line >= g)
        throw ArgError("extract_megapatches: cut lines must be strictly increasing in [1,G-1]");
      b.push_back(line * p);
      prev = line;
    }
    b.push_back(g * p);
    return b;  // pixel boundaries, length m+1
  };
  const auto yb = boundaries(layout.row_cuts, grid.n_rows(), grid.patch_size);
  const auto xb = boundaries(layout.col_cuts, grid.n_cols(), grid.patch_size);

  const int p = grid.patch_size, c = grid.channels;
  auto iv = image.values();
  std::vector<Tensor<S>> rows;
  std::vector<GridPos> positions;
  rows.reserve(static_cast<size_t>(m) * m);
  positions.reserve(static_cast<size_t>(m) * m);
  for (int my = 0; my < m; ++my)
    for (int mx = 0; mx < m; ++mx) {
      const int y0 = yb[static_cast<size_t>(my)], y1 = yb[static_cast<size_t>(my) + 1];
      const int x0 = xb[static_cast<size_t>(mx)], x1 = xb[static_cast<size_t>(mx) + 1];
      const int rh = y1 - y0, rw = x1 - x0;
      std::vector<S> region(static_cast<size_t>(c) * rh * rw);
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < rh; ++y)
          for (int x = 0; x < rw; ++x)
            region[(static_cast<size_t>(ch) * rh + y) * rw + x] =
                iv[(static_cast<size_t>(ch) * grid.img_h + y0 + y) * grid.img_w + x0 + x];
      auto resized = bilinear_resize(make_tensor<S>({c, rh, rw}, std::move(region)), p, p);
      rows.push_back(reshape(resized, {1, grid.patch_dim()}));
      positions.push_back({mx, my});
    }
  return {concat_rows(rows), std::move(positions)};
}

#define RELPATCH_INSTANTIATE(S)                                                       \
  template Tensor<S> patchify<S>(const Tensor<S>&, const PatchGrid&);                 \
  template Tensor<S> unpatchify<S>(const Tensor<S>&, const PatchGrid&);               \
  template std::pair<Tensor<S>, std::vector<GridPos>> extract_megapatches<S>(         \
      const Tensor<S>&, const MegaPatchLayout&, const PatchGrid&);

RELPATCH_INSTANTIATE(float)
RELPATCH_INSTANTIATE(double)

#undef RELPATCH_INSTANTIATE

}  // namespace relpatch
