#include "tacgap/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "tacgap/errors.hpp"

namespace tacgap {

// ---------------------------------------------------------------------------
// ScaledReal

ScaledReal ScaledReal::from_real(double v) {
  if (!std::isfinite(v)) throw DomainError("ScaledReal::from_real: non-finite value");
  if (v == 0.0) return {};
  return {v > 0 ? 1 : -1, std::log(std::fabs(v))};
}

ScaledReal ScaledReal::from_log(int sign, double log_mag) {
  if (sign == 0) return {};
  if (std::isnan(log_mag)) throw DomainError("ScaledReal::from_log: NaN log magnitude");
  if (log_mag == -std::numeric_limits<double>::infinity()) return {};
  return {sign > 0 ? 1 : -1, log_mag};
}

double ScaledReal::to_real() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_mag);
}

ScaledReal multiply(ScaledReal a, ScaledReal b) {
  if (a.sign == 0 || b.sign == 0) return {};
  return {a.sign * b.sign, a.log_mag + b.log_mag};
}

ScaledReal divide(ScaledReal a, ScaledReal b) {
  if (b.sign == 0) throw DomainError("ScaledReal divide by zero");
  if (a.sign == 0) return {};
  return {a.sign * b.sign, a.log_mag - b.log_mag};
}

ScaledReal negate(ScaledReal a) { return {-a.sign, a.log_mag}; }

CheckedSum add_checked(ScaledReal a, ScaledReal b) {
  if (a.sign == 0) return {b, false, 0.0};
  if (b.sign == 0) return {a, false, 0.0};
  const bool a_larger = a.log_mag >= b.log_mag;
  const ScaledReal& big = a_larger ? a : b;
  const ScaledReal& small = a_larger ? b : a;
  const double d = small.log_mag - big.log_mag;  // <= 0
  if (a.sign == b.sign) {
    return {{big.sign, big.log_mag + std::log1p(std::exp(d))}, false, 0.0};
  }
  if (d == 0.0) {
    return {{}, true, std::numeric_limits<double>::infinity()};
  }
  // |big| - |small| = |big| * (1 - e^d)
  const double log_factor = d > -std::numbers::ln2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
  CheckedSum out;
  out.value = {big.sign, big.log_mag + log_factor};
  out.digits_lost = -log_factor / std::numbers::ln10;
  out.cancelled = out.digits_lost > kCancellationDigits;
  return out;
}

ScaledReal add(ScaledReal a, ScaledReal b) { return add_checked(a, b).value; }
ScaledReal subtract(ScaledReal a, ScaledReal b) { return add_checked(a, negate(b)).value; }

// ---------------------------------------------------------------------------
// Airy function

namespace {

using quad = __float128;

constexpr double kLatticeLo = -9.5;
constexpr double kLatticeStep = 0.25;
constexpr int kLatticeSize = 77;  // covers [-9.5, 9.5]

// Ai(0) and -Ai'(0) split as double-double so the quad series sees ~32 digits.
quad ai0() { return quad(0.3550280538878172) + quad(2.05233632436212e-17); }
quad minus_aip0() { return quad(0.2588194037928068) + quad(-2.522243111610832e-17); }

quad qabs(quad v) { return v < 0 ? -v : v; }

// Maclaurin pair: Ai = c1 f - c2 g, both series and their derivatives summed
// in quad precision so the cancellation at |x| ~ 9 stays below 1e-17.
struct LongPair {
  long double ai;
  long double aip;
};

LongPair maclaurin_quad(double xd) {
  const quad x = xd;
  const quad x3 = x * x * x;
  const quad eps = 1e-33;
  quad f = 1, g = x, fp = 0, gp = 1;
  quad tf = 1, tg = x, tfp = x * x / 2, tgp = 1;
  fp = tfp;
  for (int k = 1; k < 200; ++k) {
    const quad k3 = 3 * k;
    tf *= x3 / ((k3 - 1) * k3);
    tg *= x3 / (k3 * (k3 + 1));
    f += tf;
    g += tg;
    if (k >= 2) {
      tfp *= x3 / ((k3 - 3) * (k3 - 1));
      fp += tfp;
    }
    tgp *= x3 / (k3 * (k3 - 2));
    gp += tgp;
    const quad scale = qabs(f) + qabs(g) + qabs(fp) + qabs(gp);
    if (qabs(tf) + qabs(tg) + qabs(tfp) + qabs(tgp) < eps * scale && k > 3) break;
  }
  const quad c1 = ai0();
  const quad c2 = minus_aip0();
  return {static_cast<long double>(c1 * f - c2 * g), static_cast<long double>(c1 * fp - c2 * gp)};
}

struct Lattice {
  std::array<LongPair, kLatticeSize> values{};
  Lattice() {
    for (int j = 0; j < kLatticeSize; ++j) values[j] = maclaurin_quad(kLatticeLo + kLatticeStep * j);
  }
};

const Lattice& lattice() {
  static const Lattice table;
  return table;
}

// Taylor re-expansion about an anchor x0 using y'' = x y, i.e.
// y^(n+2)(x0) = x0 y^(n)(x0) + n y^(n-1)(x0).
// With a_n = y^(n)(x0) h^n / n!: a_{n+2} = (x0 h^2 a_n + h^3 a_{n-1}) / ((n+1)(n+2)).
AiryPair taylor_from_anchor(long double x0, LongPair anchor, long double h) {
  if (h == 0.0L) return {static_cast<double>(anchor.ai), static_cast<double>(anchor.aip)};
  const long double h2 = h * h;
  const long double h3 = h2 * h;
  long double a_prev = 0.0L;  // a_{n-1}
  long double a_n = anchor.ai;
  long double a_next = anchor.aip * h;
  long double y = a_n;
  long double yp_h = a_next;  // h * y'(x0+h) = sum (n+1) a_{n+1}
  const long double scale = std::fabs(anchor.ai) + std::fabs(anchor.aip * h) + 1e-300L;
  for (int n = 0; n < 80; ++n) {
    const long double a_next2 = (x0 * h2 * a_n + h3 * a_prev) / ((n + 1.0L) * (n + 2.0L));
    y += a_next;
    yp_h += (n + 2.0L) * a_next2;
    a_prev = a_n;
    a_n = a_next;
    a_next = a_next2;
    if (n >= 2 && std::fabs(a_n) + std::fabs(a_next) < 1e-22L * scale) break;
  }
  return {static_cast<double>(y), static_cast<double>(yp_h / h)};
}

// Coefficients u_k, v_k of the large-argument expansions.
struct AsymptoticCoefficients {
  static constexpr int kCount = 60;
  std::array<long double, kCount> u{};
  std::array<long double, kCount> v{};
  AsymptoticCoefficients() {
    u[0] = 1.0L;
    v[0] = 1.0L;
    for (int k = 1; k < kCount; ++k) {
      const long double kk = k;
      u[k] = u[k - 1] * (6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1) / ((2 * kk - 1) * 216 * kk);
      v[k] = -(6 * kk + 1) / (6 * kk - 1) * u[k];
    }
  }
};

const AsymptoticCoefficients& coefficients() {
  static const AsymptoticCoefficients c;
  return c;
}

// Sum of sign(k) * c_k / zeta^k over the indices k = first, first+stride, ...,
// truncated at the smallest term. sign alternates every step when
// alternate is set.
long double asymptotic_sum(const std::array<long double, AsymptoticCoefficients::kCount>& c, long double zeta,
                           int first, int stride) {
  long double sum = 0.0L;
  long double last = std::numeric_limits<long double>::infinity();
  long double sgn = 1.0L;
  for (int k = first; k < AsymptoticCoefficients::kCount; k += stride) {
    const long double term = c[k] / std::pow(zeta, static_cast<long double>(k));
    if (std::fabs(term) > last) break;
    sum += sgn * term;
    last = std::fabs(term);
    if (last < 1e-20L * std::fabs(sum)) break;
    sgn = -sgn;
  }
  return sum;
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

}  // namespace

namespace detail {

AiryPair airy_lattice(double x) {
  const double pos = (x - kLatticeLo) / kLatticeStep;
  int j = static_cast<int>(std::lround(pos));
  if (j < 0) j = 0;
  if (j >= kLatticeSize) j = kLatticeSize - 1;
  const long double x0 = kLatticeLo + kLatticeStep * j;
  return taylor_from_anchor(x0, lattice().values[j], static_cast<long double>(x) - x0);
}

ScaledAiryPair airy_asymptotic_positive(double x) {
  const auto& c = coefficients();
  const long double xl = x;
  const long double zeta = 2.0L / 3.0L * xl * std::sqrt(xl);
  const long double su = asymptotic_sum(c.u, zeta, 0, 1);
  const long double sv = asymptotic_sum(c.v, zeta, 0, 1);
  const long double log_pref = -zeta - std::log(2.0L * std::sqrt(std::numbers::pi_v<long double>));
  const long double quarter = 0.25L * std::log(xl);
  ScaledAiryPair out;
  out.ai = ScaledReal::from_log(1, static_cast<double>(log_pref - quarter + std::log(su)));
  out.ai_prime = ScaledReal::from_log(-1, static_cast<double>(log_pref + quarter + std::log(sv)));
  return out;
}

AiryPair airy_asymptotic_negative(double x) {
  const auto& c = coefficients();
  const long double z = -static_cast<long double>(x);
  const long double zeta = 2.0L / 3.0L * z * std::sqrt(z);
  const long double theta = zeta - std::numbers::pi_v<long double> / 4;
  const long double cs = std::cos(theta);
  const long double sn = std::sin(theta);
  const long double u_even = asymptotic_sum(c.u, zeta, 0, 2);
  const long double u_odd = asymptotic_sum(c.u, zeta, 1, 2);
  const long double v_even = asymptotic_sum(c.v, zeta, 0, 2);
  const long double v_odd = asymptotic_sum(c.v, zeta, 1, 2);
  const long double sqrt_pi = std::sqrt(std::numbers::pi_v<long double>);
  const long double z14 = std::pow(z, 0.25L);
  const long double ai = (cs * u_even + sn * u_odd) / (sqrt_pi * z14);
  const long double aip = z14 * (sn * v_even - cs * v_odd) / sqrt_pi;
  return {static_cast<double>(ai), static_cast<double>(aip)};
}

}  // namespace detail

AiryPair airy(double x) {
  require_finite(x, "airy");
  if (x > kAirySwitch) {
    const ScaledAiryPair s = detail::airy_asymptotic_positive(x);
    return {s.ai.to_real(), s.ai_prime.to_real()};
  }
  if (x < -kAirySwitch) return detail::airy_asymptotic_negative(x);
  return detail::airy_lattice(x);
}

ScaledAiryPair airy_scaled(double x) {
  require_finite(x, "airy_scaled");
  if (x > kAirySwitch) return detail::airy_asymptotic_positive(x);
  const AiryPair p = airy(x);
  return {ScaledReal::from_real(p.ai), ScaledReal::from_real(p.ai_prime)};
}

ScaledReal shifted_airy_stripped(double tau, double x) {
  require_finite(tau, "shifted_airy");
  require_finite(x, "shifted_airy");
  if (std::fabs(tau) > 8.0) throw ParameterError("shifted_airy: |tau| must not exceed 8");
  return multiply(scaled_exp(tau * x), airy_scaled(x + tau * tau).ai);
}

ScaledReal shifted_airy(double tau, double x) {
  const ScaledReal stripped = shifted_airy_stripped(tau, x);
  return multiply(stripped, scaled_exp(2.0 / 3.0 * tau * tau * tau));
}

}  // namespace tacgap
