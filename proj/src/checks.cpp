#include "tacgap/checks.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>

#include "tacgap/fredholm.hpp"
#include "tacgap/kernels.hpp"
#include "tacgap/probes.hpp"
#include "tacgap/quad.hpp"
#include "tacgap/specfun.hpp"

namespace tacgap {

namespace {

std::string fmt(const char* label, double worst, double bound) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s %.3g (bound %.3g)", label, worst, bound);
  return buf;
}

CheckResult bounded(std::string name, const char* label, double worst, double bound) {
  return {std::move(name), worst <= bound, fmt(label, worst, bound)};
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

CheckResult airy_switch_continuity() {
  double worst = 0.0;
  for (double x = 8.5; x <= 9.5; x += 0.125) {
    const AiryPair lp = detail::airy_lattice(x);
    const ScaledAiryPair ap = detail::airy_asymptotic_positive(x);
    worst = std::max(worst, std::fabs(lp.ai / ap.ai.to_real() - 1.0));
    worst = std::max(worst, std::fabs(lp.ai_prime / ap.ai_prime.to_real() - 1.0));
    const AiryPair ln = detail::airy_lattice(-x);
    const AiryPair an = detail::airy_asymptotic_negative(-x);
    worst = std::max(worst, std::fabs(ln.ai - an.ai) / (1.0 + std::fabs(ln.ai)));
    worst = std::max(worst, std::fabs(ln.ai_prime - an.ai_prime) / (1.0 + std::fabs(ln.ai_prime)));
  }
  return bounded("specfun: series/asymptotic overlap on |x| in [8.5, 9.5]", "max mismatch", worst, 1e-12);
}

CheckResult airy_ode_residual() {
  constexpr double h = 1e-2;
  double worst = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.25) {
    const double d2 = (-airy(x + 2 * h).ai + 16 * airy(x + h).ai - 30 * airy(x).ai + 16 * airy(x - h).ai -
                       airy(x - 2 * h).ai) / (12 * h * h);
    const double xa = x * airy(x).ai;
    worst = std::max(worst, std::fabs(d2 - xa) / (1.0 + std::fabs(xa)));
  }
  return bounded("specfun: Ai'' = x Ai on [-10, 10]", "max residual", worst, 1e-6);
}

// Values in the double range are tested against 1e-14; far outside it the
// log representation itself only resolves eps * |log_mag|, which is the bound
// used there.
CheckResult scaled_real_algebra() {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> decade(-10.0, 10.0);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_real_distribution<double> wide(-300.0, 300.0);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  double worst_wide = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double va = 0.0, vb = 0.0;
    while (va == 0.0) va = mantissa(rng) * std::pow(10.0, decade(rng));
    while (vb == 0.0) vb = mantissa(rng) * std::pow(10.0, decade(rng));
    const ScaledReal b = ScaledReal::from_real(vb);
    const ScaledReal c = multiply(ScaledReal::from_real(va), divide(b, ScaledReal::from_real(va)));
    worst = std::max(worst, std::fabs(c.to_real() - vb) / std::fabs(vb));

    const ScaledReal wa = ScaledReal::from_log(coin(rng) ? 1 : -1, wide(rng));
    const ScaledReal wb = ScaledReal::from_log(coin(rng) ? 1 : -1, wide(rng));
    const ScaledReal wc = multiply(wa, divide(wb, wa));
    const double scale = 4.0 * 2.220446049250313e-16 * (1.0 + std::fabs(wa.log_mag) + std::fabs(wb.log_mag));
    const double err = wc.sign != wb.sign ? 1.0 : std::fabs(std::expm1(wc.log_mag - wb.log_mag)) / scale;
    worst_wide = std::max(worst_wide, err);
  }
  const bool ok = worst <= 1e-14 && worst_wide <= 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "max relative error %.3g (bound 1e-14); wide-exponent error / (4 eps |log|) %.3g (bound 1)",
                worst, worst_wide);
  return {"specfun: multiply(a, divide(b, a)) = b", ok, buf};
}

CheckResult shifted_product() {
  double worst = 0.0;
  for (double tau = -2.0; tau <= 2.0; tau += 1.0) {
    for (double x = -2.0; x <= 2.0; x += 1.0) {
      for (double y = -2.0; y <= 2.0; y += 1.0) {
        const double lhs = multiply(shifted_airy(tau, x), shifted_airy(-tau, y)).to_real();
        const double rhs = std::exp(tau * (x - y)) * airy(x + tau * tau).ai * airy(y + tau * tau).ai;
        worst = std::max(worst, std::fabs(lhs - rhs) / std::fabs(rhs));
      }
    }
  }
  return bounded("specfun: Ai^(tau)(x) Ai^(-tau)(y) product", "max relative error", worst, 1e-12);
}

CheckResult gauss_exactness() {
  double worst = 0.0;
  for (int n : {4, 8, 16}) {
    const QuadRule r = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      const double q = r.integrate([k](double x) { return std::pow(x, k); });
      const double exact = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
      worst = std::max(worst, std::fabs(q - exact));
    }
  }
  return bounded("quad: Gauss-Legendre degree exactness", "max error", worst, 1e-13);
}

CheckResult composite_additivity() {
  const IntervalUnion u({{0.0, 1.0}, {2.0, 3.0}});
  auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
  const double whole = composite_rule(u, 12).integrate(f);
  const double parts = composite_rule(IntervalUnion(0.0, 1.0), 12).integrate(f) +
                       composite_rule(IntervalUnion(2.0, 3.0), 12).integrate(f);
  return bounded("quad: composite rule additivity", "difference", std::fabs(whole - parts), 0.0);
}

CheckResult rank_one_det() {
  const KernelFn one{[](double, double) { return 1.0; }, true};
  const DetResult d = fredholm_det(one, Domain::of(IntervalUnion(0.0, 0.5)), 16);
  return bounded("fredholm: det(I - 1|[0,1/2]) = 1/2", "error", std::fabs(d.value - 0.5), 1e-12);
}

CheckResult airy_resolvent_identity() {
  const NystromSystem sys = nystrom(airy_kernel_fn(), Domain::semi_infinite(2.0).rule(48));
  const double res = resolvent_identity_residual(sys.matrix, discrete_resolvent(sys.matrix));
  return bounded("fredholm: resolvent identity, Airy kernel on [2, inf)", "residual", res, 1e-10);
}

CheckResult dual_kernel() {
  double worst = 0.0;
  for (double z = -5.0; z <= 5.0; z += 2.5) {
    for (double w = -5.0; w <= 5.0; w += 2.5) {
      worst = std::max(worst, std::fabs(airy_kernel(z, w) - airy_kernel_integral(z, w, 1e-12)));
    }
  }
  return bounded("kernels: divided-difference vs integral Airy kernel", "max difference", worst, 1e-9);
}

CheckResult time_reversal() {
  const double sigma = 1.0, tau = 0.5;
  const std::vector<double> xs = {-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<double> us;
  for (double x : xs) us.push_back(x - sigma);
  const TacnodeContext fwd = tacnode_context(TacnodeParams::make(sigma, tau), us, 48);
  const TacnodeContext bwd = tacnode_context(TacnodeParams::make(sigma, -tau), us, 48);
  double worst = 0.0;
  for (double x : xs) {
    for (double y : xs) {
      const double k = tacnode_eval(fwd, x, y);
      worst = std::max(worst, std::fabs(k - tacnode_eval(bwd, y, x)) / (1.0 + std::fabs(k)));
    }
  }
  return bounded("kernels: K_tac(tau; x, y) = K_tac(-tau; y, x)", "max mismatch", worst, 1e-10);
}

CheckResult f2_monotone() {
  double prev = -1.0;
  bool ok = true;
  for (double s = -6.0; s <= 2.0; s += 2.0) {
    const DetResult d = f2(s, 32);
    ok = ok && d.value >= prev - d.err_estimate;
    prev = d.value;
  }
  return {"probes: F2 nondecreasing on {-6, ..., 2}", ok, ok ? "monotone" : "decrease found"};
}

CheckResult p_routes() {
  const double a = hastings_p(0.0, 48, PMethod::resolvent);
  const double b = hastings_p(0.0, 48, PMethod::finite_diff);
  return bounded("probes: p(0) by resolvent and finite difference", "difference", std::fabs(a - b), 1e-6);
}

CheckResult two_routes() {
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  const IntervalUnion dom(-2.0, 2.0);
  const double d = tacnode_gap_direct(p, dom, 24, 40).value;
  const double b = tacnode_gap_block(p, dom, 24, 40).value;
  return bounded("probes: direct and block tacnode gap", "relative difference", std::fabs(d - b) / std::fabs(d), 1e-6);
}

CheckResult gauge() {
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  const BlockSystem b = block_system(p, IntervalUnion(-2.0, 2.0), 24, 40);
  const double l1 = det_identity_minus(b.assembled(1.0)).log_value;
  const double l10 = det_identity_minus(b.assembled(10.0)).log_value;
  return bounded("kernels: off-diagonal block scaling by (10, 1/10)", "log-det change", std::fabs(l1 - l10), 1e-10);
}

}  // namespace

std::vector<CheckResult> run_invariant_checks() {
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> suite = {
      {"airy_switch_continuity", airy_switch_continuity},
      {"airy_ode_residual", airy_ode_residual},
      {"scaled_real_algebra", scaled_real_algebra},
      {"shifted_product", shifted_product},
      {"gauss_exactness", gauss_exactness},
      {"composite_additivity", composite_additivity},
      {"rank_one_det", rank_one_det},
      {"airy_resolvent_identity", airy_resolvent_identity},
      {"dual_kernel", dual_kernel},
      {"time_reversal", time_reversal},
      {"f2_monotone", f2_monotone},
      {"p_routes", p_routes},
      {"two_routes", two_routes},
      {"gauge", gauge},
  };
  std::vector<CheckResult> out;
  out.reserve(suite.size());
  for (const auto& [name, body] : suite) out.push_back(guarded(name, body));
  return out;
}

}  // namespace tacgap
