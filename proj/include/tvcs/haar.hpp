#pragma once

// Recursive Haar pyramid with unnormalized coefficients: averages for the
// smooth part and half-differences for the details, so that
//   ||x||^2 = sum_l 2^l ||z_l||^2 + 2^L y^2          (1-D)
//   ||X||^2 = sum_l 2^(dl) sum_i ||Z_(l,i)||^2 + 2^(dL) Y^2   (d-D).

#include "tvcs/core.hpp"

#include <vector>

namespace tvcs {

struct HaarPyramid {
  std::vector<Vector> levels;  ///< levels[l-1] = z^(l), length N / 2^l
  double coarse = 0.0;         ///< y^(L)
  int n = 0;

  int depth() const { return static_cast<int>(levels.size()); }
  /// sum_l 2^l ||z_l||^2 + 2^L y^2
  double weighted_energy() const;
};

struct HaarPyramidND {
  int side = 0;
  int dims = 0;
  /// levels[l-1][o] holds Z^(l, orientations(dims)[o]) on a grid of side
  /// N / 2^l, row-major.
  std::vector<std::vector<Vector>> levels;
  double coarse = 0.0;

  int depth() const { return static_cast<int>(levels.size()); }
  double weighted_energy() const;

  /// Non-zero bit vectors of length d in lexicographic order. Bit a selects
  /// the [1 -1] filter along axis a (axis 0 has stride 1).
  static std::vector<std::vector<int>> orientations(int dims);
};

/// log2(n) if n is a power of two >= 2, otherwise throws UnsupportedLength.
int haar_depth(int n);

HaarPyramid haar_decompose_1d(const Signal& x);
Signal haar_reconstruct_1d(const HaarPyramid& p);

/// Expanded level-l detail component zhat^(l) (length N).
Vector haar_detail_component(const HaarPyramid& p, int level);
/// Expanded level-l smooth part yhat^(l); level 0 is x itself.
Vector haar_smooth_part(const Signal& x, int level);

/// (||D yhat^(0)||_1, ..., ||D yhat^(L)||_1); non-increasing.
std::vector<double> coarse_path_tv(const Signal& x);

/// g^(l): the pairing of g with the level-l Haar atoms, so that
/// <zhat^(l), g> = <z^(l), g^(l)>. Entries are N(0, 2^l) for white g.
Vector haar_level_pairing(const Vector& g, int level);

HaarPyramidND haar_decompose_nd(const MultiSignal& x);
MultiSignal haar_reconstruct_nd(const HaarPyramidND& p);

/// Expanded level-l smooth part Yhat^(l) at full resolution.
Vector haar_smooth_part_nd(const MultiSignal& x, int level);

/// Per-axis coarse path: result[a][l] = ||D_a Yhat^(l)||_1 for l = 0..L.
std::vector<std::vector<double>> coarse_path_tv_nd(const MultiSignal& x);

}  // namespace tvcs
