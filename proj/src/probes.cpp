#include "tacgap/probes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "tacgap/errors.hpp"

namespace tacgap {

DetResult f2(double s, int n) {
  if (!(s >= -12.0)) throw ParameterError("f2: s must be at least -12");
  if (n < 16) throw ParameterError("f2: n must be at least 16");
  return fredholm_det(airy_kernel_fn(), Domain::semi_infinite(s), n);
}

DetResult airy_gap(const Domain& j, int n) { return fredholm_det(airy_kernel_fn(), j, n); }

namespace {

Determinant direct_det(const TacnodeParams& p, const IntervalUnion& domain, int n_dom, int n_aux, double aux_tol) {
  const QuadRule rule = composite_rule(domain, n_dom);
  std::vector<double> us(rule.size());
  for (std::size_t i = 0; i < us.size(); ++i) us[i] = rule.nodes[i] - p.sigma;
  const TacnodeContext ctx = TacnodeContext::build(p, us, n_aux, aux_tol);
  return det_identity_minus(tacnode_matrix(ctx, rule));
}

Determinant block_det(const TacnodeParams& p, const IntervalUnion& domain, int n_dom, int n_aux, double aux_tol,
                      double lambda) {
  const BlockSystem b = block_system(p, domain, n_dom, n_aux, aux_tol);
  const Determinant den = det_identity_minus(b.top_left);
  if (!(den.sign > 0 && den.value >= kMinBlockDenominator)) {
    throw ConditioningError("tacnode_gap_block: F2(sigma~) below 1e-12");
  }
  const Determinant num = det_identity_minus(b.assembled(lambda));
  Determinant out;
  out.sign = num.sign;
  out.log_value = num.log_value - den.log_value;
  out.value = out.sign * std::exp(out.log_value);
  return out;
}

DetResult with_refinement(const Determinant& coarse, const Determinant& fine, int n) {
  DetResult r;
  r.value = coarse.value;
  r.log_value = coarse.log_value;
  r.sign = coarse.sign;
  r.err_estimate = std::fabs(coarse.value - fine.value);
  r.n_used = n;
  return r;
}

void check_resolutions(int n_dom, int n_aux) {
  if (n_dom < 8 || 2 * n_dom > kMaxGaussLegendre) throw ParameterError("n_dom must lie in [8, 256]");
  if (n_aux < 24 || 2 * n_aux > kMaxGaussLegendre) throw ParameterError("n_aux must lie in [24, 256]");
}

}  // namespace

DetResult tacnode_gap_direct(const TacnodeParams& p, const IntervalUnion& domain, int n_dom, int n_aux,
                             double aux_tol) {
  check_resolutions(n_dom, n_aux);
  if (domain.empty()) return DetResult{1.0, 0.0, 1, 0.0, n_dom};
  return with_refinement(direct_det(p, domain, n_dom, n_aux, aux_tol),
                         direct_det(p, domain, 2 * n_dom, 2 * n_aux, aux_tol), n_dom);
}

DetResult tacnode_gap_block(const TacnodeParams& p, const IntervalUnion& domain, int n_dom, int n_aux,
                            double aux_tol, double lambda) {
  check_resolutions(n_dom, n_aux);
  if (!(lambda != 0.0 && std::isfinite(lambda))) throw ParameterError("tacnode_gap_block: lambda must be finite and nonzero");
  return with_refinement(block_det(p, domain, n_dom, n_aux, aux_tol, lambda),
                         block_det(p, domain, 2 * n_dom, 2 * n_aux, aux_tol, lambda), n_dom);
}

double hastings_p(double s, int n, PMethod method) {
  if (!(s >= -10.0)) throw ParameterError("hastings_p: s must be at least -10");
  if (n < 16) throw ParameterError("hastings_p: n must be at least 16");
  if (method == PMethod::resolvent) return endpoint_log_derivative(airy_kernel_fn(), s, n);
  auto log_f2 = [&](double x) {
    return det_identity_minus(nystrom(airy_kernel_fn(), Domain::semi_infinite(x).rule(n)).matrix).log_value;
  };
  const double h = kFiniteDiffStep;
  return (-log_f2(s + 2 * h) + 8 * log_f2(s + h) - 8 * log_f2(s - h) + log_f2(s - 2 * h)) / (12 * h);
}

namespace {

WindowConstraint bounded(std::string name, double value, double lo, double hi) {
  const double margin = std::min(value - lo, hi - value);
  return {std::move(name), margin > 0.0, margin};
}

}  // namespace

WindowReport validity_window(const TacnodeParams& p, const std::vector<double>& s_cuts,
                             const std::vector<double>& t_cuts, WindowMode mode) {
  WindowReport r;
  const double tau2 = p.tau * p.tau;
  const double upper = kWindowK1 * (p.sigma + tau2);
  auto push = [&](WindowConstraint c) {
    r.all_ok = r.all_ok && c.ok;
    r.constraints.push_back(std::move(c));
  };
  for (std::size_t i = 0; i < s_cuts.size(); ++i) {
    push({"s" + std::to_string(i + 1) + " < K1(sigma+tau^2)", s_cuts[i] < upper, upper - s_cuts[i]});
  }
  for (std::size_t i = 0; i < t_cuts.size(); ++i) {
    push({"t" + std::to_string(i + 1) + " < K1(sigma+tau^2)", t_cuts[i] < upper, upper - t_cuts[i]});
  }
  if (mode == WindowMode::tau) {
    for (std::size_t i = 0; i < t_cuts.size(); ++i) {
      push(bounded("0 < 4tau^2 - t" + std::to_string(i + 1) + " < 7/3 K2 tau^2", 4.0 * tau2 - t_cuts[i], 0.0,
                   7.0 / 3.0 * kWindowK2 * tau2));
    }
    for (std::size_t i = 0; i < s_cuts.size(); ++i) {
      push(bounded("0 < tau^2 + 2sigma - s" + std::to_string(i + 1) + " < K3(2sigma + 2/3 tau^2)",
                   tau2 + 2.0 * p.sigma - s_cuts[i], 0.0, kWindowK3 * (2.0 * p.sigma + 2.0 / 3.0 * tau2)));
    }
  }
  return r;
}

WindowReport validity_window(const TacnodeParams& p, double s, double t, WindowMode mode) {
  return validity_window(p, std::vector<double>{s}, std::vector<double>{t}, mode);
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

void require_increasing(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw ParameterError(std::string(what) + " must be finite");
    if (i > 0 && !(v[i - 1] < v[i])) throw ParameterError(std::string(what) + " must be strictly increasing");
  }
}

TacnodeParams row_params(const SweepConfig& cfg, double param) {
  switch (cfg.mode) {
    case SweepMode::sigma:
      return TacnodeParams::make(param, cfg.fixed);
    case SweepMode::tau:
      return TacnodeParams::make(cfg.fixed, param);
    case SweepMode::edge:
      return cfg.edge_axis == WindowMode::sigma ? TacnodeParams::make(param, cfg.fixed)
                                                : TacnodeParams::make(cfg.fixed, param);
  }
  throw ParameterError("unknown sweep mode");
}

// J = U [c_{2l-1}, c_{2l}] U [c_last, inf) for an odd-length cut list.
Domain edge_domain(const std::vector<double>& cuts) {
  std::vector<Interval> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) pieces.push_back({cuts[i], cuts[i + 1]});
  Domain d = Domain::of(IntervalUnion(std::move(pieces)));
  d.tail_lo = cuts.back();
  return d;
}

SweepRow compute_row(const SweepConfig& cfg, double param) {
  const TacnodeParams p = row_params(cfg, param);
  const IntervalUnion domain = sweep_domain(cfg, p);
  const DetResult gap = tacnode_gap_direct(p, domain, cfg.n_dom, cfg.n_aux);
  SweepRow row;
  row.param = param;
  row.gap = gap.value;
  if (cfg.mode == SweepMode::edge) {
    std::vector<Interval> j;
    for (std::size_t i = 0; i + 1 < cfg.edge_offsets.size(); i += 2) {
      j.push_back({cfg.edge_offsets[i], cfg.edge_offsets[i + 1]});
    }
    const DetResult ref = airy_gap(Domain::of(IntervalUnion(std::move(j))), cfg.n_dom);
    row.airy_det = ref.value;
    row.ratio = gap.value / ref.value;
    row.err_estimate = gap.err_estimate / std::fabs(ref.value) + std::fabs(row.ratio) * ref.err_estimate / std::fabs(ref.value);
    row.window_ok = validity_window(p, {}, cfg.edge_offsets, WindowMode::sigma).all_ok;
  } else {
    const DetResult fs = airy_gap(edge_domain(cfg.s_cuts), cfg.n_dom);
    const DetResult ft = airy_gap(edge_domain(cfg.t_cuts), cfg.n_dom);
    row.f2_s = fs.value;
    row.f2_t = ft.value;
    row.ratio = gap.value / (fs.value * ft.value);
    row.err_estimate = gap.err_estimate / std::fabs(fs.value * ft.value) +
                       std::fabs(row.ratio) * (fs.err_estimate / std::fabs(fs.value) + ft.err_estimate / std::fabs(ft.value));
    const WindowMode wm = cfg.mode == SweepMode::sigma ? WindowMode::sigma : WindowMode::tau;
    row.window_ok = validity_window(p, cfg.s_cuts, cfg.t_cuts, wm).all_ok;
  }
  row.deviation = std::fabs(1.0 - row.ratio);
  return row;
}

}  // namespace

void SweepConfig::validate() const {
  if (grid.empty()) throw ParameterError("sweep: empty parameter grid");
  require_increasing(grid, "sweep grid");
  if (threads < 1) throw ParameterError("sweep: threads must be at least 1");
  if (mode == SweepMode::edge) {
    if (edge_offsets.empty() || edge_offsets.size() % 2 != 0) {
      throw ParameterError("sweep: edge offsets must come in lo:hi pairs");
    }
    require_increasing(edge_offsets, "edge offsets");
  } else {
    if (s_cuts.size() % 2 != 1 || t_cuts.size() % 2 != 1) {
      throw ParameterError("sweep: s and t cut lists must have odd length");
    }
    require_increasing(s_cuts, "s cuts");
    require_increasing(t_cuts, "t cuts");
  }
}

IntervalUnion sweep_domain(const SweepConfig& cfg, const TacnodeParams& p) {
  const double shift = p.sigma + p.tau * p.tau;
  auto a = [&](double t) { return -shift + t; };
  auto b = [&](double s) { return shift - s; };
  std::vector<Interval> pieces;
  if (cfg.mode == SweepMode::edge) {
    for (std::size_t i = 0; i + 1 < cfg.edge_offsets.size(); i += 2) {
      pieces.push_back({a(cfg.edge_offsets[i]), a(cfg.edge_offsets[i + 1])});
    }
    return IntervalUnion(std::move(pieces));
  }
  const std::vector<double>& t = cfg.t_cuts;
  const std::vector<double>& s = cfg.s_cuts;
  for (std::size_t i = 0; i + 1 < t.size(); i += 2) pieces.push_back({a(t[i]), a(t[i + 1])});
  pieces.push_back({a(t.back()), b(s.back())});
  for (std::size_t i = s.size() - 1; i >= 2; i -= 2) pieces.push_back({b(s[i - 1]), b(s[i - 2])});
  try {
    return IntervalUnion(std::move(pieces));
  } catch (const DomainModelError&) {
    throw ParameterError("sweep: cuts overlap at sigma = " + std::to_string(p.sigma) + ", tau = " +
                         std::to_string(p.tau));
  }
}

SweepTable sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepTable table;
  table.mode = cfg.mode;
  table.rows.resize(cfg.grid.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), cfg.grid.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) table.rows[i] = compute_row(cfg, cfg.grid[i]);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cfg.grid.size(); i = next++) {
        try {
          table.rows[i] = compute_row(cfg, cfg.grid[i]);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return table;
}

RateFit rate_fit(const SweepTable& table) {
  std::vector<double> xs, ys;
  for (const SweepRow& r : table.rows) {
    if (r.param > 0.0 && r.deviation > 10.0 * r.err_estimate && r.deviation > 0.0) {
      xs.push_back(std::log(r.param));
      ys.push_back(std::log(r.deviation));
    }
  }
  if (xs.size() < 3) throw InsufficientDataError("rate_fit: fewer than three rows above the noise floor");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("rate_fit: parameter values do not vary");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.rows_used = static_cast<int>(xs.size());
  return fit;
}

}  // namespace tacgap
