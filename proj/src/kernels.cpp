#include "tacgap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tacgap/errors.hpp"

namespace tacgap {

TacnodeParams TacnodeParams::make(double sigma, double tau) {
  if (!std::isfinite(sigma) || !std::isfinite(tau)) throw ParameterError("tacnode parameters must be finite");
  if (sigma < 0.0 || sigma > kMaxSigma) throw ParameterError("sigma must lie in [0, 5]");
  if (std::fabs(tau) > kMaxAbsTau) throw ParameterError("|tau| must not exceed 4");
  return {sigma, tau, kTwoToTwoThirds * sigma};
}

// ---------------------------------------------------------------------------
// Airy kernel

double airy_kernel(double z, double w) {
  if (!std::isfinite(z) || !std::isfinite(w)) throw DomainError("airy_kernel: non-finite argument");
  const double d = z - w;
  if (std::fabs(d) < kConfluentThreshold) {
    // K(m + e, m - e) = Ai'^2 - m Ai^2 + e^2 (-2/3 m^2 Ai^2 + Ai Ai'/3 + 2/3 m Ai'^2) + O(e^4)
    const double m = 0.5 * (z + w);
    const double e = 0.5 * d;
    const AiryPair a = airy(m);
    const double diag = a.ai_prime * a.ai_prime - m * a.ai * a.ai;
    const double curv = -2.0 / 3.0 * m * m * a.ai * a.ai + a.ai * a.ai_prime / 3.0 +
                        2.0 / 3.0 * m * a.ai_prime * a.ai_prime;
    return diag + e * e * curv;
  }
  const AiryPair a = airy(z);
  const AiryPair b = airy(w);
  return (a.ai * b.ai_prime - a.ai_prime * b.ai) / d;
}

double airy_kernel_integral(double z, double w, double tol) {
  if (!(z >= -10.0 && w >= -10.0)) throw ParameterError("airy_kernel_integral: requires z, w >= -10");
  if (!(tol >= 1e-13)) throw ParameterError("airy_kernel_integral: tol must be at least 1e-13");
  // Substitute v = u + min(z, w) so the Airy-tail cutoff applies to the
  // actual Airy argument.
  const double lo = std::min(z, w);
  const double dz = z - lo;
  const double dw = w - lo;
  const double rule_tol = std::min(tol, 1e-4);
  auto integrate = [&](int n) {
    const QuadRule rule = semi_infinite_rule(lo, rule_tol, n);
    return rule.integrate([&](double v) { return airy(v + dz).ai * airy(v + dw).ai; });
  };
  int n = 32;
  double prev = integrate(n);
  for (int doubling = 0; doubling < 4; ++doubling) {
    n *= 2;
    const double next = integrate(n);
    if (std::fabs(next - prev) <= tol) return next;
    prev = next;
  }
  throw AccuracyError("airy_kernel_integral: no convergence after 4 doublings");
}

KernelFn airy_kernel_fn() { return {[](double z, double w) { return airy_kernel(z, w); }, true}; }

double k_tau_tau(const TacnodeParams& p, double x, double y, bool gauge_stripped) {
  const double shift = p.sigma + p.tau * p.tau;
  const double k = airy_kernel(shift - x, shift - y);
  if (gauge_stripped || k == 0.0) return k;
  return k * std::exp(p.tau * (y - x));
}

KernelFn k_tau_tau_fn(const TacnodeParams& p, bool gauge_stripped) {
  return {[p, gauge_stripped](double x, double y) { return k_tau_tau(p, x, y, gauge_stripped); },
          gauge_stripped};
}

// ---------------------------------------------------------------------------
// Script-A functions

namespace {

// Upper limit for the w-integral: beyond it the integrand envelope
//   exp(tau c w - 2/3 (a + c w)_+^{3/2} - 2/3 (w + z_min)_+^{3/2})
// stays below tol/100 of its peak for every offset u.
double script_a_cutoff(double tau, std::span<const double> us, double z_min, double tol) {
  const double drop = std::log(tol) - std::log(100.0);
  double cutoff = 6.0;
  for (double u : us) {
    const double a = -u + tau * tau;
    auto envelope = [&](double w) {
      const double x1 = std::max(a + kCbrt2 * w, 0.0);
      const double x2 = std::max(w + z_min, 0.0);
      return tau * kCbrt2 * w - 2.0 / 3.0 * (x1 * std::sqrt(x1) + x2 * std::sqrt(x2));
    };
    constexpr double kStep = 0.1;
    constexpr double kScanEnd = 80.0;
    double peak = -1e300;
    for (double w = 0.0; w <= kScanEnd; w += kStep) peak = std::max(peak, envelope(w));
    double last_above = 0.0;
    for (double w = 0.0; w <= kScanEnd; w += kStep) {
      if (envelope(w) >= peak + drop) last_above = w;
    }
    cutoff = std::max(cutoff, last_above + 0.5);
  }
  return std::min(cutoff, 80.0);
}

struct ScaledTable {
  std::vector<ScaledReal> values;  // row-major, us x zs
  std::vector<double> log_scale;   // log sum |terms|, for convergence tests
};

// int_0^cutoff exp(tau(-u + c w)) Ai(-u + c w + tau^2) Ai(w + z) dw on an
// n_w-point rule, for every (u, z).
ScaledTable script_a_integrals(double tau, std::span<const double> us, std::span<const double> zs, double cutoff,
                               int n_w) {
  const QuadRule rule = map_affine(gauss_legendre(n_w), 0.0, cutoff);
  const std::size_t nu = us.size(), nz = zs.size(), nw = rule.size();
  std::vector<ScaledReal> shifted(nu * nw);
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t m = 0; m < nw; ++m) {
      shifted[i * nw + m] = shifted_airy_stripped(tau, -us[i] + kCbrt2 * rule.nodes[m]);
    }
  }
  std::vector<ScaledReal> tail(nw * nz);
  for (std::size_t m = 0; m < nw; ++m) {
    for (std::size_t k = 0; k < nz; ++k) tail[m * nz + k] = airy_scaled(rule.nodes[m] + zs[k]).ai;
  }
  std::vector<double> log_w(nw);
  for (std::size_t m = 0; m < nw; ++m) log_w[m] = std::log(rule.weights[m]);

  ScaledTable out;
  out.values.resize(nu * nz);
  out.log_scale.resize(nu * nz);
  std::vector<double> lg(nw);
  std::vector<int> sg(nw);
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t k = 0; k < nz; ++k) {
      double lmax = -std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < nw; ++m) {
        const ScaledReal& a = shifted[i * nw + m];
        const ScaledReal& b = tail[m * nz + k];
        sg[m] = a.sign * b.sign;
        lg[m] = a.log_mag + b.log_mag + log_w[m];
        if (sg[m] != 0) lmax = std::max(lmax, lg[m]);
      }
      if (!std::isfinite(lmax)) {
        out.values[i * nz + k] = ScaledReal::zero();
        out.log_scale[i * nz + k] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double s = 0.0, abs_sum = 0.0;
      for (std::size_t m = 0; m < nw; ++m) {
        if (sg[m] == 0) continue;
        const double t = std::exp(lg[m] - lmax);
        s += sg[m] * t;
        abs_sum += t;
      }
      out.values[i * nz + k] =
          s == 0.0 ? ScaledReal::zero() : ScaledReal::from_log(s > 0 ? 1 : -1, lmax + std::log(std::fabs(s)));
      out.log_scale[i * nz + k] = lmax + std::log(abs_sum);
    }
  }
  return out;
}

struct ScaledScriptA {
  std::vector<ScaledReal> values;
  bool cancelled = false;
  double max_digits_lost = 0.0;
  int n_w = 0;
  double cutoff = 0.0;
};

ScaledScriptA script_a_scaled(double tau, std::span<const double> us, std::span<const double> zs, double tol) {
  if (!(tol > 0.0 && tol <= 1e-4)) throw ParameterError("script_a: aux_tol must lie in (0, 1e-4]");
  if (std::fabs(tau) > kMaxAbsTau) throw ParameterError("script_a: |tau| must not exceed 4");
  ScaledScriptA out;
  if (us.empty() || zs.empty()) return out;
  const double z_min = *std::min_element(zs.begin(), zs.end());
  out.cutoff = script_a_cutoff(tau, us, z_min, tol);

  constexpr int kFirstNodes = 64;
  constexpr int kMaxNodes = 1024;
  ScaledTable prev = script_a_integrals(tau, us, zs, out.cutoff, kFirstNodes);
  const double log_tol = std::log(tol);
  bool converged = false;
  int n_w = kFirstNodes;
  while (n_w < kMaxNodes) {
    n_w *= 2;
    ScaledTable next = script_a_integrals(tau, us, zs, out.cutoff, n_w);
    converged = true;
    for (std::size_t e = 0; e < next.values.size() && converged; ++e) {
      const ScaledReal diff = subtract(next.values[e], prev.values[e]);
      if (!diff.is_zero() && diff.log_mag > log_tol + next.log_scale[e]) converged = false;
    }
    prev = std::move(next);
    if (converged) break;
  }
  if (!converged) throw AccuracyError("script_a: w-integral did not reach aux_tol within 1024 nodes");
  out.n_w = n_w;

  const std::size_t nz = zs.size();
  out.values.resize(us.size() * nz);
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t k = 0; k < nz; ++k) {
      const ScaledReal first = shifted_airy_stripped(tau, us[i] + kCbrt2 * zs[k]);
      const CheckedSum v = add_checked(first, negate(prev.values[i * nz + k]));
      out.values[i * nz + k] = v.value;
      out.cancelled = out.cancelled || v.cancelled;
      if (std::isfinite(v.digits_lost)) out.max_digits_lost = std::max(out.max_digits_lost, v.digits_lost);
    }
  }
  return out;
}

}  // namespace

ScriptAValue script_a(const TacnodeParams& p, double u, double z, double aux_tol) {
  if (!std::isfinite(u) || !std::isfinite(z)) throw DomainError("script_a: non-finite argument");
  if (z < p.sigma_tilde - 5.0) throw ParameterError("script_a: requires z >= sigma~ - 5");
  const double us[] = {u};
  const double zs[] = {z};
  const ScaledScriptA s = script_a_scaled(p.tau, us, zs, aux_tol);
  return {s.values.front(), s.cancelled, s.max_digits_lost, s.n_w};
}

ScriptATable script_a_table(double tau, std::span<const double> us, std::span<const double> zs, double tol) {
  const ScaledScriptA s = script_a_scaled(tau, us, zs, tol);
  ScriptATable out;
  out.values.resize(static_cast<Eigen::Index>(us.size()), static_cast<Eigen::Index>(zs.size()));
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t k = 0; k < zs.size(); ++k) {
      const ScaledReal& v = s.values[i * zs.size() + k];
      if (!v.is_zero() && v.log_mag > 700.0) {
        throw AccuracyError("script_a: value exceeds the double range; parameters outside the supported envelope");
      }
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v.to_real();
    }
  }
  out.cancelled = s.cancelled;
  out.max_digits_lost = s.max_digits_lost;
  out.n_w = s.n_w;
  out.w_cutoff = s.cutoff;
  return out;
}

// ---------------------------------------------------------------------------
// Tacnode context

TacnodeContext TacnodeContext::build(const TacnodeParams& p, std::span<const double> probe_us, int n_aux,
                                     double aux_tol) {
  if (n_aux < 24) throw ParameterError("tacnode_context: n_aux must be at least 24");
  TacnodeContext ctx;
  ctx.params_ = p;
  ctx.aux_rule_ = semi_infinite_rule(p.sigma_tilde, kAuxTailTol, n_aux);
  ctx.airy_block_ = nystrom(airy_kernel_fn(), ctx.aux_rule_).matrix;
  ctx.resolvent_ = discrete_resolvent(ctx.airy_block_);
  const double residual = resolvent_identity_residual(ctx.airy_block_, ctx.resolvent_);
  if (!(residual <= 1e-10)) {
    throw ResolventError("tacnode_context: discrete resolvent identity residual " + std::to_string(residual));
  }
  ctx.probe_us_.assign(probe_us.begin(), probe_us.end());
  ctx.sorted_.resize(ctx.probe_us_.size());
  std::iota(ctx.sorted_.begin(), ctx.sorted_.end(), std::size_t{0});
  std::sort(ctx.sorted_.begin(), ctx.sorted_.end(),
            [&](std::size_t a, std::size_t b) { return ctx.probe_us_[a] < ctx.probe_us_[b]; });

  const std::vector<double>& zs = ctx.aux_rule_.nodes;
  const ScriptATable plus = script_a_table(p.tau, ctx.probe_us_, zs, aux_tol);
  const ScriptATable minus = script_a_table(-p.tau, ctx.probe_us_, zs, aux_tol);
  ctx.a_plus_ = plus.values;
  ctx.a_minus_ = minus.values;
  ctx.cancelled_ = plus.cancelled || minus.cancelled;
  return ctx;
}

Eigen::Index TacnodeContext::probe_index(double u) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), u,
                             [&](std::size_t idx, double v) { return probe_us_[idx] < v; });
  auto close = [&](std::size_t idx) { return std::fabs(probe_us_[idx] - u) <= 1e-12 * (1.0 + std::fabs(u)); };
  if (it != sorted_.end() && close(*it)) return static_cast<Eigen::Index>(*it);
  if (it != sorted_.begin() && close(*std::prev(it))) return static_cast<Eigen::Index>(*std::prev(it));
  throw ParameterError("tacnode_eval: offset " + std::to_string(u) + " is not a probe of this context");
}

TacnodeContext tacnode_context(const TacnodeParams& p, std::span<const double> probe_us, int n_aux,
                               double aux_tol) {
  return TacnodeContext::build(p, probe_us, n_aux, aux_tol);
}

double tacnode_eval(const TacnodeContext& ctx, double x, double y) {
  const TacnodeParams& p = ctx.params();
  const Eigen::Index ix = ctx.probe_index(x - p.sigma);
  const Eigen::Index iy = ctx.probe_index(y - p.sigma);
  const QuadRule& aux = ctx.aux_rule();
  const auto n = static_cast<Eigen::Index>(aux.size());
  Eigen::VectorXd plus(n), minus(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double sw = std::sqrt(aux.weights[k]);
    plus(k) = ctx.a_plus()(ix, k) * sw;
    minus(k) = ctx.a_minus()(iy, k) * sw;
  }
  const double single = plus.dot(minus);
  const double double_term = minus.dot(ctx.resolvent() * plus);
  return k_tau_tau(p, x, y, false) + kCbrt2 * (single + double_term);
}

Eigen::MatrixXd tacnode_matrix(const TacnodeContext& ctx, const QuadRule& dom_rule) {
  const TacnodeParams& p = ctx.params();
  const auto n = static_cast<Eigen::Index>(dom_rule.size());
  if (static_cast<std::size_t>(n) != ctx.probe_us().size()) {
    throw ParameterError("tacnode_matrix: context probes do not match the domain rule");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::fabs(dom_rule.nodes[i] - p.sigma - ctx.probe_us()[i]) > 1e-12 * (1.0 + std::fabs(dom_rule.nodes[i]))) {
      throw ParameterError("tacnode_matrix: context probes do not match the domain rule");
    }
  }
  const QuadRule& aux = ctx.aux_rule();
  const Eigen::VectorXd aux_sw =
      Eigen::Map<const Eigen::VectorXd>(aux.weights.data(), static_cast<Eigen::Index>(aux.size())).cwiseSqrt();
  const Eigen::MatrixXd plus = ctx.a_plus() * aux_sw.asDiagonal();
  const Eigen::MatrixXd minus = ctx.a_minus() * aux_sw.asDiagonal();
  const Eigen::Index m = plus.cols();
  const Eigen::MatrixXd inv_t = Eigen::MatrixXd::Identity(m, m) + ctx.resolvent().transpose();
  Eigen::MatrixXd k = kCbrt2 * (plus * inv_t * minus.transpose());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double swi = std::sqrt(dom_rule.weights[i]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double swj = std::sqrt(dom_rule.weights[j]);
      k(i, j) = swi * (k(i, j) + k_tau_tau(p, dom_rule.nodes[i], dom_rule.nodes[j], false)) * swj;
    }
  }
  if (!k.allFinite()) throw EvaluationError("tacnode_matrix: non-finite kernel entry");
  return k;
}

// ---------------------------------------------------------------------------
// Block system

Eigen::MatrixXd BlockSystem::assembled(double lambda) const {
  const Eigen::Index na = top_left.rows();
  const Eigen::Index nd = bottom_right.rows();
  Eigen::MatrixXd h(na + nd, na + nd);
  h.topLeftCorner(na, na) = top_left;
  h.topRightCorner(na, nd) = -lambda * upper;
  h.bottomLeftCorner(nd, na) = -(1.0 / lambda) * lower;
  h.bottomRightCorner(nd, nd) = bottom_right;
  return h;
}

BlockSystem block_system(const TacnodeParams& p, const IntervalUnion& domain, int n_dom, int n_aux,
                         double aux_tol) {
  if (n_aux < 24) throw ParameterError("block_system: n_aux must be at least 24");
  BlockSystem b;
  b.params = p;
  b.aux_rule = semi_infinite_rule(p.sigma_tilde, kAuxTailTol, n_aux);
  b.dom_rule = domain.empty() ? QuadRule{} : composite_rule(domain, n_dom);
  b.top_left = nystrom(airy_kernel_fn(), b.aux_rule).matrix;
  b.bottom_right = nystrom(k_tau_tau_fn(p, false), b.dom_rule).matrix;

  const auto na = static_cast<Eigen::Index>(b.aux_rule.size());
  const auto nd = static_cast<Eigen::Index>(b.dom_rule.size());
  b.upper = Eigen::MatrixXd::Zero(na, nd);
  b.lower = Eigen::MatrixXd::Zero(nd, na);
  if (nd == 0) return b;

  std::vector<double> us(b.dom_rule.size());
  for (std::size_t i = 0; i < us.size(); ++i) us[i] = b.dom_rule.nodes[i] - p.sigma;
  const ScriptATable plus = script_a_table(p.tau, us, b.aux_rule.nodes, aux_tol);
  const ScriptATable minus = script_a_table(-p.tau, us, b.aux_rule.nodes, aux_tol);
  b.cancelled = plus.cancelled || minus.cancelled;
  for (Eigen::Index k = 0; k < na; ++k) {
    const double swk = std::sqrt(b.aux_rule.weights[k]);
    for (Eigen::Index j = 0; j < nd; ++j) {
      const double swj = std::sqrt(b.dom_rule.weights[j]);
      b.upper(k, j) = kTwoToOneSixth * swk * minus.values(j, k) * swj;
      b.lower(j, k) = kTwoToOneSixth * swj * plus.values(j, k) * swk;
    }
  }
  return b;
}

}  // namespace tacgap
