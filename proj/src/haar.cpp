#include "tvcs/haar.hpp"

#include "tvcs/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvcs {

int haar_depth(int n) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw UnsupportedLength("Haar pyramid needs a power-of-two length, got " + std::to_string(n));
  int depth = 0;
  while ((1 << depth) < n) ++depth;
  return depth;
}

double HaarPyramid::weighted_energy() const {
  double e = 0.0;
  for (int l = 1; l <= depth(); ++l) e += std::ldexp(levels[l - 1].squaredNorm(), l);
  return e + std::ldexp(coarse * coarse, depth());
}

HaarPyramid haar_decompose_1d(const Signal& x) {
  const int n = static_cast<int>(x.size());
  const int depth = haar_depth(n);
  HaarPyramid p;
  p.n = n;
  Vector y = x.values();
  for (int l = 1; l <= depth; ++l) {
    const Eigen::Index half = y.size() / 2;
    Vector next(half), z(half);
    for (Eigen::Index i = 0; i < half; ++i) {
      next[i] = 0.5 * (y[2 * i] + y[2 * i + 1]);
      z[i] = 0.5 * (y[2 * i] - y[2 * i + 1]);
    }
    p.levels.push_back(std::move(z));
    y = std::move(next);
  }
  p.coarse = y[0];
  return p;
}

Signal haar_reconstruct_1d(const HaarPyramid& p) {
  const int depth = haar_depth(p.n);
  if (p.depth() != depth) throw InvalidArgument("haar_reconstruct_1d: level count mismatch");
  Vector y = Vector::Constant(1, p.coarse);
  for (int l = depth; l >= 1; --l) {
    const Vector& z = p.levels[l - 1];
    if (z.size() != y.size()) throw InvalidArgument("haar_reconstruct_1d: bad level size");
    Vector finer(2 * y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      finer[2 * i] = y[i] + z[i];
      finer[2 * i + 1] = y[i] - z[i];
    }
    y = std::move(finer);
  }
  return Signal(std::move(y));
}

Vector haar_detail_component(const HaarPyramid& p, int level) {
  if (level < 1 || level > p.depth()) throw InvalidArgument("haar_detail_component: bad level");
  const Eigen::Index half = Eigen::Index(1) << (level - 1);
  const Vector& z = p.levels[level - 1];
  Vector out(p.n);
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    out.segment(2 * half * j, half).setConstant(z[j]);
    out.segment(2 * half * j + half, half).setConstant(-z[j]);
  }
  return out;
}

namespace {

// y^(level) without expansion.
Vector smooth_coefficients(const Vector& x, int level) {
  Vector y = x;
  for (int l = 0; l < level; ++l) {
    Vector next(y.size() / 2);
    for (Eigen::Index i = 0; i < next.size(); ++i) next[i] = 0.5 * (y[2 * i] + y[2 * i + 1]);
    y = std::move(next);
  }
  return y;
}

}  // namespace

Vector haar_smooth_part(const Signal& x, int level) {
  const int depth = haar_depth(static_cast<int>(x.size()));
  if (level < 0 || level > depth) throw InvalidArgument("haar_smooth_part: bad level");
  const Vector y = smooth_coefficients(x.values(), level);
  const Eigen::Index block = Eigen::Index(1) << level;
  Vector out(x.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) out.segment(block * j, block).setConstant(y[j]);
  return out;
}

std::vector<double> coarse_path_tv(const Signal& x) {
  const int depth = haar_depth(static_cast<int>(x.size()));
  std::vector<double> path;
  Vector y = x.values();
  for (int l = 0; l <= depth; ++l) {
    double tv = 0.0;
    for (Eigen::Index i = 0; i + 1 < y.size(); ++i) tv += std::abs(y[i + 1] - y[i]);
    path.push_back(tv);
    if (l < depth) y = smooth_coefficients(y, 1);
  }
  return path;
}

Vector haar_level_pairing(const Vector& g, int level) {
  const int depth = haar_depth(static_cast<int>(g.size()));
  if (level < 1 || level > depth) throw InvalidArgument("haar_level_pairing: bad level");
  const Eigen::Index half = Eigen::Index(1) << (level - 1);
  Vector out(g.size() / (2 * half));
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out[j] = g.segment(2 * half * j, half).sum() - g.segment(2 * half * j + half, half).sum();
  return out;
}

// ---------------------------------------------------------------------------
// d-dimensional pyramid

std::vector<std::vector<int>> HaarPyramidND::orientations(int dims) {
  std::vector<std::vector<int>> out;
  for (int mask = 1; mask < (1 << dims); ++mask) {
    std::vector<int> bits(dims);
    for (int a = 0; a < dims; ++a) bits[a] = (mask >> a) & 1;
    out.push_back(std::move(bits));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double HaarPyramidND::weighted_energy() const {
  double e = 0.0;
  for (int l = 1; l <= depth(); ++l) {
    double level = 0.0;
    for (const auto& z : levels[l - 1]) level += z.squaredNorm();
    e += std::ldexp(level, dims * l);
  }
  return e + std::ldexp(coarse * coarse, dims * depth());
}

namespace {

struct ChildTable {
  // offsets[c][j]: flat index in the finer grid of child j of coarse cell c.
  std::vector<std::vector<Eigen::Index>> offsets;
};

ChildTable child_table(int coarse_side, int dims) {
  const int fine_side = 2 * coarse_side;
  const Eigen::Index cells = GridShape{coarse_side, dims}.total();
  ChildTable t;
  t.offsets.assign(static_cast<std::size_t>(cells), std::vector<Eigen::Index>(std::size_t(1) << dims));
  for (Eigen::Index c = 0; c < cells; ++c) {
    for (int j = 0; j < (1 << dims); ++j) {
      Eigen::Index rem = c, flat = 0, stride = 1;
      for (int a = 0; a < dims; ++a) {
        const Eigen::Index k = rem % coarse_side;
        rem /= coarse_side;
        flat += (2 * k + ((j >> a) & 1)) * stride;
        stride *= fine_side;
      }
      t.offsets[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = flat;
    }
  }
  return t;
}

// Sign of filter H^(o) at child offset j: [1 -1] puts + on the lower sample.
double filter_sign(const std::vector<int>& o, int j) {
  double s = 1.0;
  for (std::size_t a = 0; a < o.size(); ++a)
    if (o[a] && ((j >> a) & 1)) s = -s;
  return s;
}

}  // namespace

HaarPyramidND haar_decompose_nd(const MultiSignal& x) {
  const int depth = haar_depth(x.side());
  const int dims = x.dims();
  const auto orient = HaarPyramidND::orientations(dims);
  const double scale = std::ldexp(1.0, -dims);
  HaarPyramidND p;
  p.side = x.side();
  p.dims = dims;
  Vector y = x.values();
  int side = x.side();
  for (int l = 1; l <= depth; ++l) {
    side /= 2;
    const auto table = child_table(side, dims);
    const Eigen::Index cells = static_cast<Eigen::Index>(table.offsets.size());
    Vector next = Vector::Zero(cells);
    std::vector<Vector> z(orient.size(), Vector::Zero(cells));
    for (Eigen::Index c = 0; c < cells; ++c) {
      const auto& kids = table.offsets[static_cast<std::size_t>(c)];
      for (int j = 0; j < (1 << dims); ++j) {
        const double v = y[kids[static_cast<std::size_t>(j)]];
        next[c] += v;
        for (std::size_t o = 0; o < orient.size(); ++o) z[o][c] += filter_sign(orient[o], j) * v;
      }
    }
    next *= scale;
    for (auto& zo : z) zo *= scale;
    p.levels.push_back(std::move(z));
    y = std::move(next);
  }
  p.coarse = y[0];
  return p;
}

MultiSignal haar_reconstruct_nd(const HaarPyramidND& p) {
  const int depth = haar_depth(p.side);
  if (p.depth() != depth) throw InvalidArgument("haar_reconstruct_nd: level count mismatch");
  const auto orient = HaarPyramidND::orientations(p.dims);
  Vector y = Vector::Constant(1, p.coarse);
  int side = 1;
  for (int l = depth; l >= 1; --l) {
    const auto table = child_table(side, p.dims);
    const auto& z = p.levels[l - 1];
    if (z.size() != orient.size()) throw InvalidArgument("haar_reconstruct_nd: orientation count");
    Vector finer(GridShape{2 * side, p.dims}.total());
    for (Eigen::Index c = 0; c < y.size(); ++c) {
      const auto& kids = table.offsets[static_cast<std::size_t>(c)];
      for (int j = 0; j < (1 << p.dims); ++j) {
        double v = y[c];
        for (std::size_t o = 0; o < orient.size(); ++o) v += filter_sign(orient[o], j) * z[o][c];
        finer[kids[static_cast<std::size_t>(j)]] = v;
      }
    }
    y = std::move(finer);
    side *= 2;
  }
  return MultiSignal(std::move(y), p.side, p.dims);
}

Vector haar_smooth_part_nd(const MultiSignal& x, int level) {
  const int depth = haar_depth(x.side());
  if (level < 0 || level > depth) throw InvalidArgument("haar_smooth_part_nd: bad level");
  const int dims = x.dims();
  // Block averages over cubes of side 2^level.
  const int coarse_side = x.side() >> level;
  const Eigen::Index total = x.size();
  Vector sums = Vector::Zero(GridShape{coarse_side, dims}.total());
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(total));
  for (Eigen::Index f = 0; f < total; ++f) {
    Eigen::Index rem = f, c = 0, stride = 1;
    for (int a = 0; a < dims; ++a) {
      c += ((rem % x.side()) >> level) * stride;
      rem /= x.side();
      stride *= coarse_side;
    }
    owner[static_cast<std::size_t>(f)] = c;
    sums[c] += x.values()[f];
  }
  sums *= std::ldexp(1.0, -dims * level);
  Vector out(total);
  for (Eigen::Index f = 0; f < total; ++f) out[f] = sums[owner[static_cast<std::size_t>(f)]];
  return out;
}

std::vector<std::vector<double>> coarse_path_tv_nd(const MultiSignal& x) {
  const int depth = haar_depth(x.side());
  const GridShape shape{x.side(), x.dims()};
  const Eigen::Index block = shape.total() / x.side() * (x.side() - 1);
  std::vector<std::vector<double>> path(static_cast<std::size_t>(x.dims()));
  for (int l = 0; l <= depth; ++l) {
    const GradField g = diff(haar_smooth_part_nd(x, l), shape);
    for (int a = 0; a < x.dims(); ++a)
      path[static_cast<std::size_t>(a)].push_back(g.values.segment(a * block, block).lpNorm<1>());
  }
  return path;
}

}  // namespace tvcs
