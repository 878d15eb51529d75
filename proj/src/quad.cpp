#include "tacgap/quad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tacgap/errors.hpp"

namespace tacgap {

IntervalUnion::IntervalUnion(std::vector<Interval> pieces) : pieces_(std::move(pieces)) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Interval& p = pieces_[i];
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi)) throw DomainModelError("interval endpoints must be finite");
    if (!(p.lo < p.hi)) {
      throw DomainModelError("interval piece " + std::to_string(i) + " must satisfy lo < hi");
    }
    if (i > 0 && !(pieces_[i - 1].hi < p.lo)) {
      throw DomainModelError("interval pieces must be sorted and pairwise disjoint");
    }
  }
}

double IntervalUnion::total_length() const {
  double len = 0.0;
  for (const Interval& p : pieces_) len += p.length();
  return len;
}

bool IntervalUnion::contains(double x) const {
  return std::any_of(pieces_.begin(), pieces_.end(), [x](const Interval& p) { return p.lo <= x && x <= p.hi; });
}

QuadRule gauss_legendre(int n) {
  if (n < 1 || n > kMaxGaussLegendre) {
    throw ParameterError("gauss_legendre: n must lie in [1, " + std::to_string(kMaxGaussLegendre) + "]");
  }
  QuadRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Roots of P_n by Newton iteration from the Tricomi-type initial guess;
    // the recurrence runs in long double so weights keep ~1e-16 accuracy.
    long double z = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 1.0L;
    for (int iter = 0; iter < 20; ++iter) {
      long double p0 = 1.0L;
      long double p1 = 0.0L;
      for (int j = 1; j <= n; ++j) {
        const long double p2 = p1;
        p1 = p0;
        p0 = ((2.0L * j - 1.0L) * z * p1 - (j - 1.0L) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0L);
      const long double step = p0 / dp;
      z -= step;
      if (std::fabs(step) < 1e-15L) {
        // Refresh the derivative at the converged root.
        p0 = 1.0L;
        p1 = 0.0L;
        for (int j = 1; j <= n; ++j) {
          const long double p2 = p1;
          p1 = p0;
          p0 = ((2.0L * j - 1.0L) * z * p1 - (j - 1.0L) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0L);
        break;
      }
    }
    const long double w = 2.0L / ((1.0L - z * z) * dp * dp);
    // z is the i-th largest root; store in increasing order.
    rule.nodes[n - 1 - i] = static_cast<double>(z);
    rule.nodes[i] = -static_cast<double>(z);
    rule.weights[n - 1 - i] = static_cast<double>(w);
    rule.weights[i] = static_cast<double>(w);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  rule.domain = IntervalUnion(-1.0, 1.0);
  return rule;
}

QuadRule map_affine(const QuadRule& rule, double lo, double hi) {
  if (!(lo < hi)) throw ParameterError("map_affine: requires lo < hi");
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  QuadRule out;
  out.nodes.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    out.nodes.push_back(mid + half * rule.nodes[i]);
    out.weights.push_back(half * rule.weights[i]);
  }
  out.domain = IntervalUnion(lo, hi);
  return out;
}

double airy_tail_cutoff(double lo, double tol) {
  if (!(tol > 0.0 && tol <= 1e-4)) throw ParameterError("semi_infinite_rule: tol must lie in (0, 1e-4]");
  // exp(-2/3 T^{3/2}) < tol  <=>  T > (1.5 ln(1/tol))^{2/3}
  const double t_star = std::pow(1.5 * std::log(1.0 / tol), 2.0 / 3.0) * (1.0 + 1e-12);
  return std::clamp(std::max(t_star, 1.0), lo + 6.0, lo + 40.0);
}

QuadRule semi_infinite_rule(double lo, double tol, int n) {
  if (n < 8) throw ParameterError("semi_infinite_rule: n must be at least 8");
  if (!std::isfinite(lo)) throw ParameterError("semi_infinite_rule: lo must be finite");
  const double t = airy_tail_cutoff(lo, tol);
  return map_affine(gauss_legendre(n), lo, t);
}

QuadRule composite_rule(const IntervalUnion& domain, int n_per) {
  if (n_per < 4) throw ParameterError("composite_rule: n_per must be at least 4");
  const QuadRule base = gauss_legendre(n_per);
  QuadRule out;
  for (const Interval& p : domain.pieces()) {
    const QuadRule piece = map_affine(base, p.lo, p.hi);
    out.nodes.insert(out.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    out.weights.insert(out.weights.end(), piece.weights.begin(), piece.weights.end());
  }
  out.domain = domain;
  return out;
}

QuadRule concatenate(std::span<const QuadRule> rules) {
  QuadRule out;
  std::vector<Interval> pieces;
  for (const QuadRule& r : rules) {
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    pieces.insert(pieces.end(), r.domain.pieces().begin(), r.domain.pieces().end());
  }
  out.domain = IntervalUnion(std::move(pieces));
  return out;
}

}  // namespace tacgap
