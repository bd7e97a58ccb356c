#include "slcp/density.h"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace slcp {
namespace {

const boost::math::normal_distribution<double>& StandardNormal() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return dist;
}

double Phi(double z) { return boost::math::cdf(StandardNormal(), z); }
double PhiC(double z) { return boost::math::cdf(boost::math::complement(StandardNormal(), z)); }

double PhiInv(double p) { return boost::math::quantile(StandardNormal(), p); }
double PhiCInv(double q) {
  return boost::math::quantile(boost::math::complement(StandardNormal(), q));
}

}  // namespace

Marginal::Marginal(Kind kind, double sigma, double lo, double hi)
    : kind_(kind), sigma_(sigma), lo_(lo), hi_(hi) {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "marginal requires lo < hi");
  if (kind == Kind::kTruncatedNormal) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::kInvalidArgument, "truncated normal requires sigma > 0");
    }
    cdf_lo_ = Phi(lo / sigma);
    cdf_hi_ = Phi(hi / sigma);
    ccdf_lo_ = PhiC(lo / sigma);
    ccdf_hi_ = PhiC(hi / sigma);
    // Mass from whichever side is free of cancellation.
    mass_ = (lo >= 0.0) ? ccdf_lo_ - ccdf_hi_
            : (hi <= 0.0) ? cdf_hi_ - cdf_lo_
                          : 1.0 - cdf_lo_ - ccdf_hi_;
  }
}

Marginal Marginal::Uniform(double lo, double hi) { return Marginal(Kind::kUniform, 0.0, lo, hi); }

Marginal Marginal::TruncatedNormal(double sigma, double lo, double hi) {
  return Marginal(Kind::kTruncatedNormal, sigma, lo, hi);
}

double Marginal::Pdf(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  if (kind_ == Kind::kUniform) return 1.0 / (hi_ - lo_);
  return boost::math::pdf(StandardNormal(), x / sigma_) / (sigma_ * mass_);
}

double Marginal::Cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  if (kind_ == Kind::kUniform) return (x - lo_) / (hi_ - lo_);
  if (x <= 0.0) return (Phi(x / sigma_) - cdf_lo_) / mass_;
  return 1.0 - Ccdf(x);
}

double Marginal::Ccdf(double x) const {
  if (x <= lo_) return 1.0;
  if (x >= hi_) return 0.0;
  if (kind_ == Kind::kUniform) return (hi_ - x) / (hi_ - lo_);
  if (x >= 0.0) return (PhiC(x / sigma_) - ccdf_hi_) / mass_;
  return 1.0 - Cdf(x);
}

double Marginal::Probability(double a, double b) const {
  a = std::max(a, lo_);
  b = std::min(b, hi_);
  if (!(a < b)) return 0.0;
  if (kind_ == Kind::kUniform) return (b - a) / (hi_ - lo_);
  if (a >= 0.0) return (PhiC(a / sigma_) - PhiC(b / sigma_)) / mass_;
  if (b <= 0.0) return (Phi(b / sigma_) - Phi(a / sigma_)) / mass_;
  return (1.0 - Phi(a / sigma_) - PhiC(b / sigma_)) / mass_;
}

double Marginal::Quantile(double u) const {
  if (u <= 0.0) return lo_;
  if (u >= 1.0) return hi_;
  if (kind_ == Kind::kUniform) return lo_ + u * (hi_ - lo_);
  if (u > 0.5) return UpperQuantile(1.0 - u);
  const double p = cdf_lo_ + u * mass_;
  return std::clamp(sigma_ * PhiInv(p), lo_, hi_);
}

double Marginal::UpperQuantile(double v) const {
  if (v <= 0.0) return hi_;
  if (v >= 1.0) return lo_;
  if (kind_ == Kind::kUniform) return hi_ - v * (hi_ - lo_);
  if (v > 0.5) return Quantile(1.0 - v);
  const double q = ccdf_hi_ + v * mass_;
  return std::clamp(sigma_ * PhiCInv(q), lo_, hi_);
}

double Marginal::SampleIn(Rng& rng, double a, double b) const {
  const double u = rng.Uniform();
  if (kind_ == Kind::kUniform) return std::clamp(a + u * (b - a), a, b);
  // Work in whichever tail coordinate keeps resolution near the cell.
  if (0.5 * (a + b) <= 0.0) {
    const double ca = Cdf(a);
    const double cb = Cdf(b);
    return std::clamp(Quantile(ca + u * (cb - ca)), a, b);
  }
  const double va = Ccdf(a);
  const double vb = Ccdf(b);
  return std::clamp(UpperQuantile(vb + u * (va - vb)), a, b);
}

Density::Density(Box support, std::vector<Marginal> marginals)
    : support_(std::move(support)), marginals_(std::move(marginals)) {
  if (static_cast<int>(marginals_.size()) != support_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "one marginal per support coordinate required");
  }
  for (int k = 0; k < support_.dim(); ++k) {
    const Marginal& m = marginals_[static_cast<std::size_t>(k)];
    if (m.lo() != support_.lo[k] || m.hi() != support_.hi[k]) {
      throw Error(ErrorCode::kInvalidArgument, "marginal range must equal the support box");
    }
  }
}

Density Density::Uniform(const Box& support) {
  std::vector<Marginal> ms;
  for (int k = 0; k < support.dim(); ++k) ms.push_back(Marginal::Uniform(support.lo[k], support.hi[k]));
  return Density(support, std::move(ms));
}

Density Density::TruncatedNormal(const Box& support, double sigma) {
  std::vector<Marginal> ms;
  for (int k = 0; k < support.dim(); ++k) {
    ms.push_back(Marginal::TruncatedNormal(sigma, support.lo[k], support.hi[k]));
  }
  return Density(support, std::move(ms));
}

double Density::Pdf(const Vector& xi) const {
  double p = 1.0;
  for (int k = 0; k < dim(); ++k) p *= marginal(k).Pdf(xi[k]);
  return p;
}

double Density::Probability(const Box& cell) const {
  double p = 1.0;
  for (int k = 0; k < dim(); ++k) p *= marginal(k).Probability(cell.lo[k], cell.hi[k]);
  return p;
}

Vector Density::Sample(Rng& rng) const {
  Vector xi(dim());
  for (int k = 0; k < dim(); ++k) xi[k] = marginal(k).Sample(rng);
  return xi;
}

Vector Density::SampleIn(Rng& rng, const Box& cell) const {
  Vector xi(dim());
  for (int k = 0; k < dim(); ++k) xi[k] = marginal(k).SampleIn(rng, cell.lo[k], cell.hi[k]);
  return xi;
}

Vector Density::MapFromUnit(const Vector& unit, const Box& cell) const {
  Vector xi(dim());
  for (int k = 0; k < dim(); ++k) {
    const Marginal& m = marginal(k);
    const double a = cell.lo[k];
    const double b = cell.hi[k];
    double x;
    if (m.kind() == Marginal::Kind::kUniform) {
      x = a + unit[k] * (b - a);
    } else if (0.5 * (a + b) <= 0.0) {
      const double ca = m.Cdf(a);
      x = m.Quantile(ca + unit[k] * (m.Cdf(b) - ca));
    } else {
      const double vb = m.Ccdf(b);
      x = m.UpperQuantile(vb + (1.0 - unit[k]) * (m.Ccdf(a) - vb));
    }
    xi[k] = std::clamp(x, a, b);
  }
  return xi;
}

}  // namespace slcp
