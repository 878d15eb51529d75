#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tacgap/quad.hpp"

namespace tacgap {

struct KernelFn {
  std::function<double(double, double)> eval;
  bool symmetric_hint = false;
};

inline constexpr double kDefaultTailTol = 1e-14;

// Integration domain of an operator: a finite union of intervals optionally
// followed by a semi-infinite tail [tail_lo, inf) truncated by the Airy-tail
// bound. Each finite piece and the tail receive n nodes.
struct Domain {
  IntervalUnion finite;
  std::optional<double> tail_lo;
  double tail_tol = kDefaultTailTol;

  static Domain semi_infinite(double lo, double tol = kDefaultTailTol);
  static Domain of(IntervalUnion u);

  [[nodiscard]] bool empty() const { return finite.empty() && !tail_lo; }
  [[nodiscard]] bool contains(double x) const;
  [[nodiscard]] QuadRule rule(int n) const;
};

struct NystromSystem {
  QuadRule rule;
  Eigen::MatrixXd matrix;  // A(i,j) = sqrt(w_i) K(x_i, x_j) sqrt(w_j)
};

// Row-major assembly; EvaluationError on a non-finite sample or when a kernel
// flagged symmetric is not.
NystromSystem nystrom(const KernelFn& kernel, const QuadRule& rule);

struct Determinant {
  double value = 1.0;
  double log_value = 0.0;  // log |value|
  int sign = 1;
};

// det(I - a) by LU with partial pivoting; log accumulated from the pivots.
// DegenerateDeterminantError when a pivot falls below 1e-300.
Determinant det_identity_minus(const Eigen::MatrixXd& a);

struct DetResult {
  double value = 1.0;
  double log_value = 0.0;
  int sign = 1;
  double err_estimate = 0.0;  // |det_n - det_2n|
  int n_used = 0;
};

// det(I - K|domain) at n nodes per piece, with the error estimate taken from
// a recomputation at 2n. n >= 8.
DetResult fredholm_det(const KernelFn& kernel, const Domain& domain, int n);

// Discrete resolvent (I - A)^{-1} A. ResolventError when I - A is singular to
// working precision.
Eigen::MatrixXd discrete_resolvent(const Eigen::MatrixXd& a);

// max |(I - A)(I + R) - I|
double resolvent_identity_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& r);

struct ResolventBundle {
  NystromSystem system;
  Eigen::MatrixXd resolvent;  // (I - A)^{-1} A on the grid
  std::vector<double> probes;
  Eigen::MatrixXd probe_values;  // R(probes[a], probes[b])
};

// Resolvent R = (Id - K)^{-1} K on the grid, and at arbitrary probe pairs
// through the Nystrom extension
//   R(p, q) = K(p, q) + sum_ij sqrt(w_i) K(p, x_i) [(I - A)^{-1}]_ij sqrt(w_j) K(x_j, q).
ResolventBundle resolvent_bundle(const KernelFn& kernel, const Domain& domain, int n,
                                 std::span<const double> probe_points);

// d/ds ln det(Id - K|[s, inf)) = R(s, s). n >= 16.
double endpoint_log_derivative(const KernelFn& kernel, double s, int n);

}  // namespace tacgap
