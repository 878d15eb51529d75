#pragma once

// Kernels of the Airy and single-time tacnode processes.
//
// Conventions (all in original variables):
//   Ai^(tau)(x)     = exp(tau x + 2 tau^3/3) Ai(x + tau^2)
//   K_Ai(z, w)      = int_0^inf Ai(z+u) Ai(w+u) du
//   K1(x, y)        = exp(tau (y - x)) K_Ai(sigma - x + tau^2, sigma - y + tau^2)
//   A^tau_u(z)      = exp(tau (u + c z)) Ai(u + c z + tau^2)
//                     - int_0^inf exp(tau (-u + c w)) Ai(-u + c w + tau^2) Ai(w + z) dw,
//                     c = 2^{1/3}, i.e. the script-A function with exp(2 tau^3/3) removed
//   K_tac(x, y)     = K1(x, y) + c * int int A^tau_{x-sigma}(w) (Id - K_Ai)^{-1}(z, w) A^{-tau}_{y-sigma}(z)
// where the last integrals run over [sigma~, inf)^2, sigma~ = 2^{2/3} sigma, and
// (Id - K_Ai)^{-1} = delta + R with R the Airy resolvent on [sigma~, inf).

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tacgap/fredholm.hpp"
#include "tacgap/quad.hpp"
#include "tacgap/specfun.hpp"

namespace tacgap {

inline constexpr double kCbrt2 = 1.2599210498948731648;          // 2^{1/3}
inline constexpr double kTwoToTwoThirds = 1.5874010519681994748;  // 2^{2/3}
inline constexpr double kTwoToOneSixth = 1.1224620483093729814;   // 2^{1/6}

// Supported parameter envelope; keeps every exponent below ~300.
inline constexpr double kMaxSigma = 5.0;
inline constexpr double kMaxAbsTau = 4.0;

// Truncation tolerance of the auxiliary rule on [sigma~, inf).
inline constexpr double kAuxTailTol = 1e-14;
// Default self-refinement tolerance of the script-A w-integrals.
inline constexpr double kDefaultAuxTol = 1e-12;

struct TacnodeParams {
  double sigma = 0.0;
  double tau = 0.0;
  double sigma_tilde = 0.0;

  // ParameterError outside 0 <= sigma <= 5, |tau| <= 4.
  static TacnodeParams make(double sigma, double tau);
};

// Divided-difference form (Ai(z)Ai'(w) - Ai'(z)Ai(w)) / (z - w), switching to
// a second-order expansion about the midpoint when |z - w| < 1e-5.
double airy_kernel(double z, double w);

inline constexpr double kConfluentThreshold = 1e-5;

// Direct quadrature of the defining integral, doubling from 32 nodes until
// successive values agree to tol. z, w >= -10, tol >= 1e-13.
// AccuracyError after four doublings without convergence.
double airy_kernel_integral(double z, double w, double tol);

KernelFn airy_kernel_fn();

// K1(x, y); gauge_stripped drops the exp(tau (y - x)) factor.
double k_tau_tau(const TacnodeParams& p, double x, double y, bool gauge_stripped);

KernelFn k_tau_tau_fn(const TacnodeParams& p, bool gauge_stripped);

struct ScriptAValue {
  ScaledReal value;
  bool cancelled = false;     // more than 8 digits lost between the two terms
  double digits_lost = 0.0;
  int n_used = 0;             // nodes of the w-rule
};

// A^tau_u(z) with the exp(2 tau^3/3) factor stripped. Requires z >= sigma~ - 5.
ScriptAValue script_a(const TacnodeParams& p, double u, double z, double aux_tol = kDefaultAuxTol);

// A^tau_u(z) for every (u, z) pair; tau carries its sign, so the -tau table is
// script_a_table(-tau, ...). Values are returned as doubles (AccuracyError if
// one leaves the double range).
struct ScriptATable {
  Eigen::MatrixXd values;  // rows: us, columns: zs
  bool cancelled = false;
  double max_digits_lost = 0.0;
  int n_w = 0;
  double w_cutoff = 0.0;
};
ScriptATable script_a_table(double tau, std::span<const double> us, std::span<const double> zs, double tol);

// Precomputation cache for evaluating K_tac at fixed (sigma, tau) on a set of
// probe offsets u = x - sigma. Immutable after construction.
class TacnodeContext {
 public:
  static TacnodeContext build(const TacnodeParams& p, std::span<const double> probe_us, int n_aux,
                              double aux_tol = kDefaultAuxTol);

  [[nodiscard]] const TacnodeParams& params() const { return params_; }
  [[nodiscard]] const QuadRule& aux_rule() const { return aux_rule_; }
  [[nodiscard]] const Eigen::MatrixXd& airy_block() const { return airy_block_; }
  [[nodiscard]] const Eigen::MatrixXd& resolvent() const { return resolvent_; }
  [[nodiscard]] const Eigen::MatrixXd& a_plus() const { return a_plus_; }
  [[nodiscard]] const Eigen::MatrixXd& a_minus() const { return a_minus_; }
  [[nodiscard]] const std::vector<double>& probe_us() const { return probe_us_; }
  [[nodiscard]] bool cancelled() const { return cancelled_; }

  // Row of the probe tables for offset u; ParameterError if absent.
  [[nodiscard]] Eigen::Index probe_index(double u) const;

 private:
  TacnodeParams params_;
  QuadRule aux_rule_;
  Eigen::MatrixXd airy_block_;  // sqrt(w) K_Ai sqrt(w) on the aux rule
  Eigen::MatrixXd resolvent_;   // (I - A)^{-1} A
  Eigen::MatrixXd a_plus_;      // A^{+tau}_{u_i}(z_k)
  Eigen::MatrixXd a_minus_;     // A^{-tau}_{u_i}(z_k)
  std::vector<double> probe_us_;
  std::vector<std::size_t> sorted_;
  bool cancelled_ = false;
};

TacnodeContext tacnode_context(const TacnodeParams& p, std::span<const double> probe_us, int n_aux,
                               double aux_tol = kDefaultAuxTol);

// K_tac(x, y); x - sigma and y - sigma must be probes of ctx.
double tacnode_eval(const TacnodeContext& ctx, double x, double y);

// Symmetrically weighted Nystrom matrix of K_tac on dom_rule, whose nodes
// (shifted by -sigma) must be the probes of ctx in order.
Eigen::MatrixXd tacnode_matrix(const TacnodeContext& ctx, const QuadRule& dom_rule);

// Two-by-two block operator on L2([sigma~, T]) (+) L2(I):
//   det(I - H) = det [[I - A, B], [C, I - D]],
// A = Airy kernel, D = K1 (gauge intact), B = 2^{1/6} A^{-tau}, C = 2^{1/6} A^{+tau}.
// Its Schur complement with respect to the top-left block is I - K_tac.
struct BlockSystem {
  TacnodeParams params;
  QuadRule aux_rule;
  QuadRule dom_rule;
  Eigen::MatrixXd top_left;      // A
  Eigen::MatrixXd bottom_right;  // D
  Eigen::MatrixXd upper;         // B, n_aux x n_dom
  Eigen::MatrixXd lower;         // C, n_dom x n_aux
  bool cancelled = false;

  // H such that det(I - H) = det [[I - A, lambda B], [C / lambda, I - D]].
  [[nodiscard]] Eigen::MatrixXd assembled(double lambda = 1.0) const;
};

BlockSystem block_system(const TacnodeParams& p, const IntervalUnion& domain, int n_dom, int n_aux,
                         double aux_tol = kDefaultAuxTol);

}  // namespace tacgap
