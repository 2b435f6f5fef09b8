#pragma once

// Brute-force re-derivation of the pairwise targets, written element by
// element against the documented conventions and kept deliberately free of
// library helpers. Formulas are transcribed term by term so that results are
// bit-comparable with the library on integer lattice inputs.

#include <cmath>
#include <utility>
#include <vector>

namespace testoracle {

struct OracleTargets {
  int n = 0;
  std::vector<int> rel;
  std::vector<double> dist;
  std::vector<double> ang;
  std::vector<int> abs_pos;
  double d_max = 0.0;
  double alpha_max = 0.0;
};

inline OracleTargets oracle_targets(const std::vector<std::pair<int, int>>& pos, int lattice_rows,
                                    int lattice_cols, double shift_x = 1.0, double shift_y = 1.0,
                                    double eps = 1e-8) {
  OracleTargets t;
  const int n = static_cast<int>(pos.size());
  t.n = n;

  const double mx = lattice_cols - 1, my = lattice_rows - 1;
  t.d_max = std::sqrt(mx * mx + my * my);

  auto raw_ang = [&](std::pair<int, int> a, std::pair<int, int> b) {
    const double ax = a.first + shift_x, ay = a.second + shift_y;
    const double bx = b.first + shift_x, by = b.second + shift_y;
    const double cosv = (ax * bx + ay * by) /
                        (std::sqrt(ax * ax + ay * ay) * std::sqrt(bx * bx + by * by) + eps);
    return std::acos(cosv);
  };

  t.alpha_max = 0.0;
  for (int ly = 0; ly < lattice_rows; ++ly)
    for (int lx = 0; lx < lattice_cols; ++lx)
      for (int ky = 0; ky < lattice_rows; ++ky)
        for (int kx = 0; kx < lattice_cols; ++kx) {
          if (lx == kx && ly == ky) continue;
          double a = raw_ang({lx, ly}, {kx, ky});
          if (a > t.alpha_max) t.alpha_max = a;
        }

  for (int i = 0; i < n; ++i) {
    t.abs_pos.push_back(i);
    for (int j = 0; j < n; ++j) {
      int sx = 1, sy = 1;
      if (pos[j].first < pos[i].first) sx = 0;
      if (pos[j].first > pos[i].first) sx = 2;
      if (pos[j].second < pos[i].second) sy = 0;
      if (pos[j].second > pos[i].second) sy = 2;
      t.rel.push_back(3 * sy + sx);

      if (i == j) {
        t.dist.push_back(-1.0);
        t.ang.push_back(-1.0);
      } else {
        const double dx = pos[i].first - pos[j].first;
        const double dy = pos[i].second - pos[j].second;
        t.dist.push_back(2.0 * std::sqrt(dx * dx + dy * dy) / t.d_max - 1.0);
        t.ang.push_back(2.0 * raw_ang(pos[i], pos[j]) / t.alpha_max - 1.0);
      }
    }
  }
  return t;
}

}  // namespace testoracle
