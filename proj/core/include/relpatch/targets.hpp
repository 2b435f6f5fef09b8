#pragma once

#include <vector>

#include "relpatch/grid.hpp"

namespace relpatch {

/// Horizontal relation of token j relative to token i.
enum class RelX { Left = 0, Center = 1, Right = 2 };
/// Vertical relation of token j relative to token i.
enum class RelY { Top = 0, Center = 1, Bottom = 2 };

/// One of the nine joint spatial relations, encoded 3 * y + x.
struct RelationLabel {
  RelX sx = RelX::Center;
  RelY sy = RelY::Center;

  int class_index() const { return 3 * static_cast<int>(sy) + static_cast<int>(sx); }
  static RelationLabel from_class(int k);
  friend bool operator==(RelationLabel a, RelationLabel b) { return a.sx == b.sx && a.sy == b.sy; }
};

/// Parameters of the angle target. The shift moves zero-based lattice
/// coordinates into the strictly positive quadrant so arccos is defined.
struct AngleConfig {
  double shift_x = 1.0;
  double shift_y = 1.0;
  double eps = 1e-8;
};

/// All pairwise regression / classification targets for one token layout.
/// Matrices are row-major N x N, indexed [i * n + j] for the (i, j) pair.
struct TargetSet {
  int n = 0;
  std::vector<int> rel;       // class indices in [0, 8]; diagonal is 4
  std::vector<double> dist;   // in [-1, 1]; diagonal is exactly -1
  std::vector<double> ang;    // in [-1, 1]; diagonal is exactly -1
  std::vector<int> abs_pos;   // abs_pos[i] = i before any permutation
  double d_max = 0.0;
  double alpha_max = 0.0;
};

RelationLabel spatial_relation(GridPos p_i, GridPos p_j);

/// Euclidean lattice distance mapped onto [-1, 1] by 2 d / d_max - 1.
double distance_target(GridPos p_i, GridPos p_j, double d_max);

/// arccos of the cosine between shifted positions, mapped onto [-1, 1]
/// by 2 a / alpha_max - 1.
double angle_target(GridPos p_i, GridPos p_j, const AngleConfig& cfg, double alpha_max);

/// Diagonal of the largest lattice: ||(n_cols - 1, n_rows - 1)||.
double max_distance(const PatchGrid& grid);

/// Largest raw angle over all distinct lattice position pairs, found by
/// exhaustive scan. Zero for a single-token lattice.
double max_angle(const PatchGrid& grid, const AngleConfig& cfg);

/// Builds every target for the given token positions. Only the lattice shape
/// of `grid` is read, so mega-patch layouts pass PatchGrid(M, M, 1, 1) with
/// their mega-lattice coordinates.
TargetSet build_target_set(const PatchGrid& grid, const std::vector<GridPos>& positions,
                           const AngleConfig& cfg = {});

/// Relabels targets after the token stream was shuffled by perm:
/// out.rel[i][j] = in.rel[perm[i]][perm[j]], out.abs_pos[i] = perm[i].
TargetSet permute_targets(const TargetSet& t, const std::vector<int>& perm);

}  // namespace relpatch
