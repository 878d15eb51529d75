#include "tacgap/fredholm.hpp"

#include <cmath>
#include <string>

#include "tacgap/errors.hpp"

namespace tacgap {

Domain Domain::semi_infinite(double lo, double tol) {
  Domain d;
  d.tail_lo = lo;
  d.tail_tol = tol;
  return d;
}

Domain Domain::of(IntervalUnion u) {
  Domain d;
  d.finite = std::move(u);
  return d;
}

bool Domain::contains(double x) const { return finite.contains(x) || (tail_lo && x >= *tail_lo); }

QuadRule Domain::rule(int n) const {
  std::vector<QuadRule> parts;
  if (!finite.empty()) parts.push_back(composite_rule(finite, n));
  if (tail_lo) {
    if (!finite.empty() && !(finite.pieces().back().hi < *tail_lo)) {
      throw DomainModelError("semi-infinite tail must start after the last finite piece");
    }
    parts.push_back(semi_infinite_rule(*tail_lo, tail_tol, n));
  }
  if (parts.size() == 1) return std::move(parts.front());
  return concatenate(parts);
}

NystromSystem nystrom(const KernelFn& kernel, const QuadRule& rule) {
  const auto n = static_cast<Eigen::Index>(rule.size());
  NystromSystem sys{rule, Eigen::MatrixXd(n, n)};
  std::vector<double> sw(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) sw[i] = std::sqrt(rule.weights[i]);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double k = kernel.eval(rule.nodes[i], rule.nodes[j]);
      if (!std::isfinite(k)) {
        throw EvaluationError("kernel returned a non-finite value at (" + std::to_string(rule.nodes[i]) + ", " +
                              std::to_string(rule.nodes[j]) + ")");
      }
      sys.matrix(i, j) = sw[i] * k * sw[j];
    }
  }
  if (kernel.symmetric_hint) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const double kij = sys.matrix(i, j) / (sw[i] * sw[j]);
        const double kji = sys.matrix(j, i) / (sw[i] * sw[j]);
        if (std::fabs(kij - kji) > 1e-12 * (1.0 + std::fabs(kij))) {
          throw EvaluationError("kernel flagged symmetric is not symmetric on the grid");
        }
      }
    }
  }
  return sys;
}

Determinant det_identity_minus(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return {};
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - a;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  Determinant d;
  d.sign = static_cast<int>(lu.permutationP().determinant());
  d.log_value = 0.0;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double pivot = packed(i, i);
    if (!(std::fabs(pivot) >= 1e-300)) {
      throw DegenerateDeterminantError("det(I - A): pivot below 1e-300 at row " + std::to_string(i));
    }
    if (pivot < 0) d.sign = -d.sign;
    d.log_value += std::log(std::fabs(pivot));
  }
  d.value = d.sign * std::exp(d.log_value);
  return d;
}

DetResult fredholm_det(const KernelFn& kernel, const Domain& domain, int n) {
  if (n < 8) throw ParameterError("fredholm_det: n must be at least 8");
  DetResult out;
  out.n_used = n;
  if (domain.empty()) return out;
  const Determinant coarse = det_identity_minus(nystrom(kernel, domain.rule(n)).matrix);
  const Determinant fine = det_identity_minus(nystrom(kernel, domain.rule(2 * n)).matrix);
  out.value = coarse.value;
  out.log_value = coarse.log_value;
  out.sign = coarse.sign;
  out.err_estimate = std::fabs(coarse.value - fine.value);
  return out;
}

Eigen::MatrixXd discrete_resolvent(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return {};
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - a;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    throw ResolventError("I - A is numerically singular (rcond " + std::to_string(rcond) +
                         "); the gap probability is ~0 for this configuration");
  }
  return lu.solve(a);
}

double resolvent_identity_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& r) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 0.0;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  return ((id - a) * (id + r) - id).cwiseAbs().maxCoeff();
}

ResolventBundle resolvent_bundle(const KernelFn& kernel, const Domain& domain, int n,
                                 std::span<const double> probe_points) {
  if (n < 8) throw ParameterError("resolvent_bundle: n must be at least 8");
  for (double p : probe_points) {
    if (!domain.contains(p)) throw ParameterError("resolvent_bundle: probe point " + std::to_string(p) + " outside domain");
  }
  ResolventBundle out;
  out.system = nystrom(kernel, domain.rule(n));
  const Eigen::MatrixXd& a = out.system.matrix;
  out.resolvent = discrete_resolvent(a);
  out.probes.assign(probe_points.begin(), probe_points.end());

  const QuadRule& rule = out.system.rule;
  const auto m = static_cast<Eigen::Index>(rule.size());
  const auto np = static_cast<Eigen::Index>(probe_points.size());
  // Rows: sqrt(w_i) K(p, x_i); columns: sqrt(w_j) K(x_j, q).
  Eigen::MatrixXd left(np, m), right(m, np);
  for (Eigen::Index p = 0; p < np; ++p) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sw = std::sqrt(rule.weights[i]);
      left(p, i) = sw * kernel.eval(probe_points[p], rule.nodes[i]);
      right(i, p) = sw * kernel.eval(rule.nodes[i], probe_points[p]);
    }
  }
  // (I - A)^{-1} = I + R~
  const Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(m, m) + out.resolvent;
  out.probe_values = left * inv * right;
  for (Eigen::Index p = 0; p < np; ++p) {
    for (Eigen::Index q = 0; q < np; ++q) out.probe_values(p, q) += kernel.eval(probe_points[p], probe_points[q]);
  }
  return out;
}

double endpoint_log_derivative(const KernelFn& kernel, double s, int n) {
  if (n < 16) throw ParameterError("endpoint_log_derivative: n must be at least 16");
  const double probe[] = {s};
  return resolvent_bundle(kernel, Domain::semi_infinite(s), n, probe).probe_values(0, 0);
}

}  // namespace tacgap
