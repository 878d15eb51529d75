#pragma once

// Airy function Ai and its derivative, the exponentially shifted variant used
// by the tacnode kernel, and a sign/log-magnitude real type for quantities
// whose exponents leave the double range.

namespace tacgap {

// A real number carried as sign * exp(log_mag). sign == 0 is exact zero and
// log_mag is then ignored.
struct ScaledReal {
  int sign = 0;
  double log_mag = 0.0;

  static ScaledReal zero() { return {}; }
  static ScaledReal from_real(double v);
  static ScaledReal from_log(int sign, double log_mag);

  [[nodiscard]] double to_real() const;
  [[nodiscard]] bool is_zero() const { return sign == 0; }
};

ScaledReal multiply(ScaledReal a, ScaledReal b);
ScaledReal divide(ScaledReal a, ScaledReal b);  // DomainError on b == 0
ScaledReal negate(ScaledReal a);
ScaledReal add(ScaledReal a, ScaledReal b);
ScaledReal subtract(ScaledReal a, ScaledReal b);

// Sum together with a flag raised when the result lost more than
// kCancellationDigits decimal digits relative to the larger operand.
struct CheckedSum {
  ScaledReal value;
  bool cancelled = false;
  double digits_lost = 0.0;
};
inline constexpr double kCancellationDigits = 8.0;
CheckedSum add_checked(ScaledReal a, ScaledReal b);

inline ScaledReal operator*(ScaledReal a, ScaledReal b) { return multiply(a, b); }
inline ScaledReal operator/(ScaledReal a, ScaledReal b) { return divide(a, b); }
inline ScaledReal operator+(ScaledReal a, ScaledReal b) { return add(a, b); }
inline ScaledReal operator-(ScaledReal a, ScaledReal b) { return subtract(a, b); }
inline ScaledReal operator-(ScaledReal a) { return negate(a); }

// exp(x) as a ScaledReal, never overflowing.
inline ScaledReal scaled_exp(double x) { return ScaledReal::from_log(1, x); }

struct AiryPair {
  double ai = 0.0;
  double ai_prime = 0.0;
};

struct ScaledAiryPair {
  ScaledReal ai;
  ScaledReal ai_prime;
};

// Boundary between the quad-precision Maclaurin lattice and the asymptotic
// expansions, on both sides of the origin.
inline constexpr double kAirySwitch = 9.0;

// Ai(x), Ai'(x). Relative error below 1e-11 on [-15, 30]; underflows to zero
// for large positive x. DomainError on non-finite input.
AiryPair airy(double x);

// Same values in sign/log form; meaningful far past the double underflow
// threshold.
ScaledAiryPair airy_scaled(double x);

// Ai^(tau)(x) = exp(tau*x + 2 tau^3 / 3) * Ai(x + tau^2).
// ParameterError when |tau| > 8, DomainError on non-finite input.
ScaledReal shifted_airy(double tau, double x);

// exp(tau*x) * Ai(x + tau^2): shifted_airy without the exp(2 tau^3 / 3) factor,
// which cancels in every product of a +tau and a -tau factor.
ScaledReal shifted_airy_stripped(double tau, double x);

namespace detail {
// Branch evaluators, exposed for the switch-over continuity checks.
AiryPair airy_lattice(double x);
AiryPair airy_asymptotic_negative(double x);
ScaledAiryPair airy_asymptotic_positive(double x);
}  // namespace detail

}  // namespace tacgap
