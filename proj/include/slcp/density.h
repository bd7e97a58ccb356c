#pragma once

#include <vector>

#include "slcp/common.h"
#include "slcp/random.h"

namespace slcp {

// One coordinate of a product density on a box: either uniform on [lo, hi] or
// a mean-zero normal with standard deviation sigma truncated to [lo, hi].
class Marginal {
 public:
  enum class Kind { kUniform, kTruncatedNormal };

  static Marginal Uniform(double lo, double hi);
  static Marginal TruncatedNormal(double sigma, double lo, double hi);

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double sigma() const { return sigma_; }

  double Pdf(double x) const;
  double Cdf(double x) const;
  // 1 - Cdf(x), computed without cancellation in the upper tail.
  double Ccdf(double x) const;
  double Probability(double a, double b) const;
  // Inverse of Cdf and of Ccdf; both map (0, 1) into [lo, hi].
  double Quantile(double u) const;
  double UpperQuantile(double v) const;
  // Inverse-CDF draw restricted to [a, b] (a full-support draw by default).
  double Sample(Rng& rng) const { return SampleIn(rng, lo_, hi_); }
  double SampleIn(Rng& rng, double a, double b) const;

 private:
  Marginal(Kind kind, double sigma, double lo, double hi);

  Kind kind_;
  double sigma_;
  double lo_;
  double hi_;
  // Standard-normal CDF and CCDF at the truncation points.
  double cdf_lo_ = 0.0;
  double cdf_hi_ = 1.0;
  double ccdf_lo_ = 1.0;
  double ccdf_hi_ = 0.0;
  double mass_ = 1.0;
};

// Product density over a box support.
class Density {
 public:
  Density(Box support, std::vector<Marginal> marginals);
  static Density Uniform(const Box& support);
  static Density TruncatedNormal(const Box& support, double sigma);

  const Box& support() const { return support_; }
  int dim() const { return support_.dim(); }
  const Marginal& marginal(int k) const { return marginals_[static_cast<std::size_t>(k)]; }

  double Pdf(const Vector& xi) const;
  double Probability(const Box& cell) const;
  Vector Sample(Rng& rng) const;
  Vector SampleIn(Rng& rng, const Box& cell) const;
  // Maps a point of the unit cube, coordinate-wise, through the conditional
  // quantile of the cell. Used by quadrature in probability coordinates.
  Vector MapFromUnit(const Vector& unit, const Box& cell) const;

 private:
  Box support_;
  std::vector<Marginal> marginals_;
};

}  // namespace slcp
