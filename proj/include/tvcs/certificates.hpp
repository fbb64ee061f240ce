#pragma once

// Exact and statistical checks of null-space conditions for TV
// minimization.

#include "tvcs/core.hpp"
#include "tvcs/operators.hpp"

namespace tvcs {

struct CertReport {
  bool holds = false;
  SupportSet worst_support;
  /// max over supports and null directions of
  /// ||(Dz)_K||_1 / ||(Dz)_Kc||_1; +inf when unbounded or when a nonzero null
  /// vector has zero TV.
  double worst_ratio = 0.0;
  long work = 0;  ///< number of LPs solved
};

inline constexpr int kCertificateMaxN = 14;
inline constexpr int kCertificateMaxK = 3;

/// Exact verdict by enumerating every support |K| <= k and sign pattern and
/// solving  max s^T (Dz)_K  s.t.  ||(Dz)_Kc||_1 <= 1, z in null(A).
/// Throws ScaleGuard for N > 14 or k > 3.
CertReport null_space_condition(const MeasurementEnsemble& a, int k, int workers = 0);

/// Same enumeration with threshold c in (0, 1].
CertReport balanced_condition(const MeasurementEnsemble& a, int k, double c, int workers = 0);

/// Upper estimate of beta = min ||D H w||_1 / (sqrt(N) ||H w||_2) by
/// normalized projected subgradient descent on the unit sphere. Restart r
/// starts from H^T g with g ~ N(0, I_N) drawn from seed.child(r).
double almost_euclidean_beta(const NullBasis& h, int restarts, const SeedSpec& seed);

/// Lower estimate of sup over unit null vectors of max_{|K|<=k} ||(Dz)_K||_1
/// from random starts refined by projected supergradient ascent.
double partial_tv_sup(const NullBasis& h, int k, int trials, const SeedSpec& seed);

struct DeviationEstimate {
  double gamma = 0.0;
  int n = 0;
  long samples = 0;
  long hits = 0;
  double probability = 0.0;
  /// ln(p)/n with p clamped to 3/samples when there are no hits.
  double empirical_log_prob_per_n = 0.0;
  /// Largest exponent E(T) over T in [2, 64]; ln P / n <= -E asymptotically.
  double bound_exponent = 0.0;
  int best_t = 0;
  /// Smallest E(T) over the same range (the loosest member of the family).
  double loosest_exponent = 0.0;
};

/// E(T) = -(H(1/T) + (1 - 1/T) ln(T gamma / sqrt(2 pi))), H the natural-log
/// binary entropy.
double deviation_exponent(double gamma, int t);

/// Monte Carlo estimate of P(sum |x[i+1]-x[i]| <= gamma n) for x ~ N(0, I_n).
DeviationEstimate tv_small_prob(int n, double gamma, long samples, const SeedSpec& seed,
                                int workers = 0);

}  // namespace tvcs
