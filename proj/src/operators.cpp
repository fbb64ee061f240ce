#include "tvcs/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace tvcs {

SupportSet::SupportSet(std::vector<int> indices) : indices_(std::move(indices)) {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0) throw InvalidArgument("SupportSet: negative index");
    if (i > 0 && indices_[i] <= indices_[i - 1])
      throw InvalidArgument("SupportSet: indices must be strictly increasing");
  }
}

bool SupportSet::contains(int i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

SparseMatrix difference_matrix(const GridShape& shape) {
  if (shape.side < 2 || shape.dims < 1) throw InvalidArgument("difference_matrix: bad shape");
  const Eigen::Index total = shape.total();
  const Eigen::Index per_axis = total / shape.side * (shape.side - 1);
  SparseMatrix d(per_axis * shape.dims, total);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(2 * d.rows()));
  Eigen::Index row = 0;
  Eigen::Index stride = 1;
  for (int axis = 0; axis < shape.dims; ++axis) {
    for (Eigen::Index flat = 0; flat < total; ++flat) {
      if ((flat / stride) % shape.side == shape.side - 1) continue;
      entries.emplace_back(row, flat + stride, 1.0);
      entries.emplace_back(row, flat, -1.0);
      ++row;
    }
    stride *= shape.side;
  }
  d.setFromTriplets(entries.begin(), entries.end());
  return d;
}

GradField diff(const Vector& x, const GridShape& shape) {
  if (x.size() != shape.total()) throw InvalidArgument("diff: size does not match shape");
  if (shape.dims == 1) return GradField{x.tail(x.size() - 1) - x.head(x.size() - 1)};
  const Eigen::Index total = shape.total();
  Vector g(total / shape.side * (shape.side - 1) * shape.dims);
  Eigen::Index row = 0;
  Eigen::Index stride = 1;
  for (int axis = 0; axis < shape.dims; ++axis) {
    for (Eigen::Index flat = 0; flat < total; ++flat) {
      if ((flat / stride) % shape.side == shape.side - 1) continue;
      g[row++] = x[flat + stride] - x[flat];
    }
    stride *= shape.side;
  }
  return GradField{std::move(g)};
}

GradField diff_1d(const Signal& x) { return diff(x.values(), GridShape::line(int(x.size()))); }

GradField diff_nd(const MultiSignal& x) {
  return diff(x.values(), GridShape{x.side(), x.dims()});
}

double tv_norm(const Vector& x, const GridShape& shape) {
  return diff(x, shape).values.lpNorm<1>();
}
double tv_norm(const Signal& x) { return diff_1d(x).values.lpNorm<1>(); }
double tv_norm(const MultiSignal& x) { return diff_nd(x).values.lpNorm<1>(); }

int count_nonzeros(const GradField& g, double tol) {
  return static_cast<int>((g.values.array().abs() > tol).count());
}

double ksum_largest(const GradField& g, int k) {
  if (k < 0 || k > g.size()) throw InvalidArgument("ksum_largest: k out of range");
  std::vector<double> mags(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(g.values[i]);
  std::nth_element(mags.begin(), mags.begin() + k, mags.end(), std::greater<>());
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += mags[static_cast<std::size_t>(i)];
  return s;
}

Restriction restrict_to(const GradField& g, const SupportSet& support) {
  Restriction r;
  std::size_t next = 0;
  const auto& idx = support.indices();
  if (!idx.empty() && idx.back() >= g.size())
    throw InvalidArgument("restrict: support index " + std::to_string(idx.back()) +
                          " out of bounds");
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (next < idx.size() && idx[next] == i) {
      r.on_support += std::abs(g.values[i]);
      ++next;
    } else {
      r.off_support += std::abs(g.values[i]);
    }
  }
  return r;
}

RelaxedNullSets relaxed_null_sets(int n, const SupportSet& support) {
  if (n < 2) throw InvalidArgument("relaxed_null_sets: n must be at least 2");
  const int k = static_cast<int>(support.size());
  if (!support.empty() && support.indices().back() > n - 2)
    throw InvalidArgument("relaxed_null_sets: support index out of bounds");
  if (n - 1 < 3 * k) throw SparsityTooLarge("relaxed_null_sets: need n-1 >= 3|K|");

  std::vector<bool> used(static_cast<std::size_t>(n), false);
  RelaxedNullSets sets;
  for (int i : support.indices()) used[i] = used[i + 1] = true;
  for (int i = 0; i < n; ++i)
    if (used[i]) sets.dk.push_back(i);
  for (int i = 0; i + 1 < n; ++i) {
    if (used[i] || used[i + 1]) continue;
    sets.kb.push_back(i);
    used[i] = used[i + 1] = true;
  }
  return sets;
}

double relaxed_null_margin(const Signal& x, const SupportSet& support) {
  const auto sets = relaxed_null_sets(static_cast<int>(x.size()), support);
  double margin = 0.0;
  for (int i : sets.kb) margin += std::abs(x[i + 1] - x[i]);
  for (int i : sets.dk) margin -= 2.0 * std::abs(x[i]);
  return margin;
}

double difference_operator_norm(const GridShape& shape, int iterations, const SeedSpec& seed) {
  const SparseMatrix d = difference_matrix(shape);
  Rng rng(seed);
  Vector v = rng.gaussian_vector(d.cols());
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = d.transpose() * (d * v);
    estimate = std::sqrt(v.dot(w));
    const double nw = w.norm();
    if (nw == 0.0) break;
    v = w / nw;
  }
  return estimate;
}

}  // namespace tvcs
