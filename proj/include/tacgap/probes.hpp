#pragma once

// Gap probabilities, p(s), validity windows and the factorization sweeps.

#include <string>
#include <vector>

#include "tacgap/fredholm.hpp"
#include "tacgap/kernels.hpp"
#include "tacgap/quad.hpp"

namespace tacgap {

inline constexpr int kDefaultDomNodes = 48;
inline constexpr int kDefaultAuxNodes = 64;
inline constexpr double kWindowK1 = 0.9;
inline constexpr double kWindowK2 = 0.9;
inline constexpr double kWindowK3 = 0.9;
inline constexpr double kFiniteDiffStep = 1e-3;
// Smallest F2(sigma~) the block route divides by.
inline constexpr double kMinBlockDenominator = 1e-12;

// F2(s) = det(Id - K_Ai|[s, inf)). s >= -12, n >= 16.
DetResult f2(double s, int n = kDefaultDomNodes);

// det(Id - K_Ai|J) for J a finite union optionally followed by [tail, inf).
DetResult airy_gap(const Domain& j, int n = kDefaultDomNodes);

// det(Id - K_tac|I) through the resolvent form of the kernel. err_estimate
// compares against a rerun at (2 n_dom, 2 n_aux).
DetResult tacnode_gap_direct(const TacnodeParams& p, const IntervalUnion& domain, int n_dom = kDefaultDomNodes,
                             int n_aux = kDefaultAuxNodes, double aux_tol = kDefaultAuxTol);

// det of the block operator divided by det(I - A) on the same aux rule.
// ConditioningError when that denominator is below 1e-12.
DetResult tacnode_gap_block(const TacnodeParams& p, const IntervalUnion& domain, int n_dom = kDefaultDomNodes,
                            int n_aux = kDefaultAuxNodes, double aux_tol = kDefaultAuxTol, double lambda = 1.0);

enum class PMethod { finite_diff, resolvent };

// p(s) = d/ds ln F2(s). s >= -10.
double hastings_p(double s, int n = kDefaultDomNodes, PMethod method = PMethod::resolvent);

enum class WindowMode { sigma, tau };

struct WindowConstraint {
  std::string name;
  bool ok = false;
  double margin = 0.0;  // distance to the nearest violated bound; > 0 iff ok
};

struct WindowReport {
  std::vector<WindowConstraint> constraints;
  bool all_ok = true;
};

// Factorization hypotheses with K1 = K2 = K3 = 0.9:
//   sigma mode: s_l, t_l < K1 (sigma + tau^2)
//   tau mode adds 0 < 4 tau^2 - t_l < 7/3 K2 tau^2 and
//                 0 < tau^2 + 2 sigma - s_l < K3 (2 sigma + 2/3 tau^2).
WindowReport validity_window(const TacnodeParams& p, const std::vector<double>& s_cuts,
                             const std::vector<double>& t_cuts, WindowMode mode);
WindowReport validity_window(const TacnodeParams& p, double s, double t, WindowMode mode);

enum class SweepMode { sigma, tau, edge };

struct SweepConfig {
  SweepMode mode = SweepMode::sigma;
  // Edge mode only: which parameter the grid runs over.
  WindowMode edge_axis = WindowMode::sigma;
  double fixed = 0.0;         // tau in sigma mode, sigma in tau mode, the other parameter in edge mode
  std::vector<double> grid;   // strictly increasing

  // Sigma and tau modes. Left-edge cuts t_1 < ... < t_{2J+1} and right-edge
  // cuts s_1 < ... < s_{2K+1}; odd counts. The gap set is
  //   U_l [a(t_{2l-1}), a(t_{2l})]  U  [a(t_{2J+1}), b(s_{2K+1})]  U  U_l [b(s_{2l}), b(s_{2l-1})]
  // with a(t) = -sigma - tau^2 + t, b(s) = sigma + tau^2 - s, compared against
  // det(Id - K_Ai|J1) det(Id - K_Ai|J2), J1 built from t, J2 from s (each
  // ending in a semi-infinite piece). A single interval is t_cuts = {t}, s_cuts = {s}.
  std::vector<double> t_cuts = {0.0};
  std::vector<double> s_cuts = {0.0};

  // Edge mode. Offsets s_1 < ... < s_{2K}; the gap set is U [a(s_{2l-1}), a(s_{2l})].
  std::vector<double> edge_offsets;

  int n_dom = kDefaultDomNodes;
  int n_aux = kDefaultAuxNodes;
  int threads = 1;

  // ParameterError on malformed grids or cut lists.
  void validate() const;
};

struct SweepRow {
  double param = 0.0;
  double gap = 0.0;
  double f2_s = 0.0;      // sigma/tau modes
  double f2_t = 0.0;      // sigma/tau modes
  double airy_det = 0.0;  // edge mode
  double ratio = 0.0;
  double deviation = 0.0;      // |1 - ratio|
  double err_estimate = 0.0;   // resolution error of ratio
  bool window_ok = false;
};

struct SweepTable {
  SweepMode mode = SweepMode::sigma;
  std::vector<SweepRow> rows;
};

// Gap set of one sweep row.
IntervalUnion sweep_domain(const SweepConfig& cfg, const TacnodeParams& p);

SweepTable sweep(const SweepConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  int rows_used = 0;
};

// Least squares through (ln param, ln deviation) over rows with deviation
// above 10 err_estimate. InsufficientDataError below three such rows.
RateFit rate_fit(const SweepTable& table);

}  // namespace tacgap
