#include "relpatch/targets.hpp"

#include <cmath>

namespace relpatch {

RelationLabel RelationLabel::from_class(int k) {
  if (k < 0 || k > 8) throw IndexError("RelationLabel: class " + std::to_string(k));
  return {static_cast<RelX>(k % 3), static_cast<RelY>(k / 3)};
}

RelationLabel spatial_relation(GridPos p_i, GridPos p_j) {
  RelationLabel r;
  r.sx = p_j.x < p_i.x ? RelX::Left : p_j.x == p_i.x ? RelX::Center : RelX::Right;
  r.sy = p_j.y < p_i.y ? RelY::Top : p_j.y == p_i.y ? RelY::Center : RelY::Bottom;
  return r;
}

double distance_target(GridPos p_i, GridPos p_j, double d_max) {
  if (d_max <= 0) throw NumericError("distance_target: d_max must be positive");
  const double dx = p_i.x - p_j.x, dy = p_i.y - p_j.y;
  return 2.0 * std::sqrt(dx * dx + dy * dy) / d_max - 1.0;
}

namespace {

double raw_angle(GridPos p_i, GridPos p_j, const AngleConfig& cfg) {
  if (cfg.eps <= 0) throw ArgError("angle target: eps must be positive");
  const double ax = p_i.x + cfg.shift_x, ay = p_i.y + cfg.shift_y;
  const double bx = p_j.x + cfg.shift_x, by = p_j.y + cfg.shift_y;
  if (ax <= 0 || ay <= 0 || bx <= 0 || by <= 0)
    throw ArgError("angle target: shift must make positions strictly positive");
  const double cosv =
      (ax * bx + ay * by) / (std::sqrt(ax * ax + ay * ay) * std::sqrt(bx * bx + by * by) + cfg.eps);
  return std::acos(cosv);
}

}  // namespace

double angle_target(GridPos p_i, GridPos p_j, const AngleConfig& cfg, double alpha_max) {
  if (alpha_max <= 0) throw NumericError("angle_target: alpha_max must be positive");
  return 2.0 * raw_angle(p_i, p_j, cfg) / alpha_max - 1.0;
}

double max_distance(const PatchGrid& grid) {
  const double dx = grid.n_cols() - 1, dy = grid.n_rows() - 1;
  return std::sqrt(dx * dx + dy * dy);
}

double max_angle(const PatchGrid& grid, const AngleConfig& cfg) {
  const int n = grid.n_tokens();
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      best = std::max(best, raw_angle(position_of(i, grid), position_of(j, grid), cfg));
  return best;
}

TargetSet build_target_set(const PatchGrid& grid, const std::vector<GridPos>& positions,
                           const AngleConfig& cfg) {
  const int n = static_cast<int>(positions.size());
  if (n != grid.n_tokens())
    throw DimError("build_target_set: " + std::to_string(n) + " positions for a lattice of " +
                   std::to_string(grid.n_tokens()));
  TargetSet t;
  t.n = n;
  t.d_max = max_distance(grid);
  t.alpha_max = max_angle(grid, cfg);
  t.rel.resize(static_cast<size_t>(n) * n);
  t.dist.resize(static_cast<size_t>(n) * n);
  t.ang.resize(static_cast<size_t>(n) * n);
  t.abs_pos.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    t.abs_pos[static_cast<size_t>(i)] = i;
    for (int j = 0; j < n; ++j) {
      const size_t at = static_cast<size_t>(i) * n + j;
      t.rel[at] = spatial_relation(positions[static_cast<size_t>(i)],
                                   positions[static_cast<size_t>(j)])
                      .class_index();
      if (i == j) {
        // eps keeps the raw formulas a hair away from their limits; the
        // self-pair targets are the exact limits by convention.
        t.dist[at] = -1.0;
        t.ang[at] = -1.0;
      } else {
        t.dist[at] = distance_target(positions[static_cast<size_t>(i)],
                                     positions[static_cast<size_t>(j)], t.d_max);
        t.ang[at] = angle_target(positions[static_cast<size_t>(i)],
                                 positions[static_cast<size_t>(j)], cfg, t.alpha_max);
      }
    }
  }
  return t;
}

TargetSet permute_targets(const TargetSet& t, const std::vector<int>& perm) {
  const int n = t.n;
  if (static_cast<int>(perm.size()) != n)
    throw ArgError("permute_targets: permutation length " + std::to_string(perm.size()) +
                   " for N = " + std::to_string(n));
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<size_t>(p)])
      throw ArgError("permute_targets: not a bijection on {0.." + std::to_string(n - 1) + "}");
    seen[static_cast<size_t>(p)] = 1;
  }
  TargetSet out;
  out.n = n;
  out.d_max = t.d_max;
  out.alpha_max = t.alpha_max;
  out.rel.resize(t.rel.size());
  out.dist.resize(t.dist.size());
  out.ang.resize(t.ang.size());
  out.abs_pos.resize(t.abs_pos.size());
  for (int i = 0; i < n; ++i) {
    out.abs_pos[static_cast<size_t>(i)] = t.abs_pos[static_cast<size_t>(perm[static_cast<size_t>(i)])];
    for (int j = 0; j < n; ++j) {
      const size_t to = static_cast<size_t>(i) * n + j;
      const size_t from = static_cast<size_t>(perm[static_cast<size_t>(i)]) * n +
                          perm[static_cast<size_t>(j)];
      out.rel[to] = t.rel[from];
      out.dist[to] = t.dist[from];
      out.ang[to] = t.ang[from];
    }
  }
  return out;
}

}  // namespace relpatch
