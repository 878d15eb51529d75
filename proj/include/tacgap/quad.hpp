#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace tacgap {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double length() const { return hi - lo; }
};

// Sorted, pairwise disjoint finite intervals. Construction validates and
// throws DomainModelError on overlapping, unsorted or degenerate pieces.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> pieces);
  IntervalUnion(double lo, double hi) : IntervalUnion(std::vector<Interval>{{lo, hi}}) {}

  [[nodiscard]] const std::vector<Interval>& pieces() const { return pieces_; }
  [[nodiscard]] bool empty() const { return pieces_.empty(); }
  [[nodiscard]] double total_length() const;
  [[nodiscard]] bool contains(double x) const;

 private:
  std::vector<Interval> pieces_;
};

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  IntervalUnion domain;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }

  // Left-to-right weighted sum of f, accumulated per domain piece and the
  // piece sums then added in order, so a union integrates to exactly the sum
  // of its pieces.
  template <class F>
  double integrate(F&& f) const {
    const std::vector<Interval>& pieces = domain.pieces();
    double total = 0.0;
    double partial = 0.0;
    std::size_t piece = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      while (piece + 1 < pieces.size() && nodes[i] > pieces[piece].hi) {
        total += partial;
        partial = 0.0;
        ++piece;
      }
      partial += weights[i] * f(nodes[i]);
    }
    return total + partial;
  }
};

inline constexpr int kMaxGaussLegendre = 512;

// n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 512.
QuadRule gauss_legendre(int n);

// Transplants a [-1, 1] rule onto [lo, hi].
QuadRule map_affine(const QuadRule& rule, double lo, double hi);

// Truncation point T for [lo, inf) such that exp(-2/3 max(T,1)^{3/2}) < tol,
// clamped to [lo + 6, lo + 40].
double airy_tail_cutoff(double lo, double tol);

// n-point rule on [lo, airy_tail_cutoff(lo, tol)]. tol in (0, 1e-4], n >= 8.
QuadRule semi_infinite_rule(double lo, double tol, int n);

// Per-piece Gauss-Legendre rules concatenated in piece order. n_per >= 4.
QuadRule composite_rule(const IntervalUnion& domain, int n_per);

// Concatenation of rules over disjoint, increasing domains.
QuadRule concatenate(std::span<const QuadRule> rules);

}  // namespace tacgap
