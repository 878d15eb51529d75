#include <doctest.h>

#include <cmath>
#include <limits>

#include "tacgap/errors.hpp"
#include "tacgap/kernels.hpp"
#include "tacgap/probes.hpp"

using namespace tacgap;

TEST_CASE("TacnodeParams envelope") {
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  CHECK(p.sigma_tilde == doctest::Approx(std::cbrt(4.0)).epsilon(2.3e-16));
  CHECK_THROWS_AS(TacnodeParams::make(-0.1, 0.0), ParameterError);
  CHECK_THROWS_AS(TacnodeParams::make(5.5, 0.0), ParameterError);
  CHECK_THROWS_AS(TacnodeParams::make(1.0, 4.5), ParameterError);
  CHECK_THROWS_AS(TacnodeParams::make(1.0, std::numeric_limits<double>::quiet_NaN()), ParameterError);
}

TEST_CASE("airy_kernel") {
  CHECK(std::fabs(airy_kernel(0.3, -1.2) - airy_kernel(-1.2, 0.3)) <= 1e-13);
  const double aip0 = airy(0.0).ai_prime;
  CHECK(airy_kernel(0.0, 0.0) == doctest::Approx(aip0 * aip0).epsilon(1e-15));
  CHECK(airy_kernel(0.0, 0.0) == doctest::Approx(0.066986).epsilon(1e-5));
  CHECK(std::fabs(airy_kernel(0.0, 1.0) - airy_kernel_integral(0.0, 1.0, 1e-12)) <= 1e-10);
  CHECK_THROWS_AS(airy_kernel(std::numeric_limits<double>::infinity(), 0.0), DomainError);
}

TEST_CASE("confluent branch agrees with the divided difference near the threshold") {
  for (double m : {-6.0, -2.5, 0.0, 1.7, 5.0}) {
    const double d = 1.0001 * kConfluentThreshold;
    const double divided = airy_kernel(m + d / 2, m - d / 2);
    const double confluent = airy_kernel(m + 0.9999 * d / 2, m - 0.9999 * d / 2);
    CHECK(std::fabs(divided - confluent) <= 1e-11 * (1.0 + std::fabs(divided)));
  }
}

TEST_CASE("airy_kernel_integral") {
  const double aip0 = airy(0.0).ai_prime;
  CHECK(std::fabs(airy_kernel_integral(0.0, 0.0, 1e-12) - aip0 * aip0) <= 1e-10);
  const double k55 = airy_kernel_integral(5.0, 5.0, 1e-13);
  CHECK(k55 >= 0.0);
  CHECK(k55 <= 10.0 * std::exp(-4.0 / 3.0 * std::pow(5.0, 1.5)));
  CHECK(std::fabs(airy_kernel_integral(1.0, 2.0, 1e-12) - airy_kernel_integral(2.0, 1.0, 1e-12)) <= 1e-12);
  CHECK_THROWS_AS(airy_kernel_integral(-11.0, 0.0, 1e-12), ParameterError);
  CHECK_THROWS_AS(airy_kernel_integral(0.0, 0.0, 1e-14), ParameterError);
}

TEST_CASE("dual representations on a 21x21 grid") {
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double z = -5.0 + 0.5 * i, w = -5.0 + 0.5 * j;
      worst = std::max(worst, std::fabs(airy_kernel(z, w) - airy_kernel_integral(z, w, 1e-12)));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("k_tau_tau") {
  const TacnodeParams zero_tau = TacnodeParams::make(1.3, 0.0);
  CHECK(k_tau_tau(zero_tau, 0.2, -0.7, false) == airy_kernel(1.3 - 0.2, 1.3 + 0.7));
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  const double prod = k_tau_tau(p, 0.2, -0.4, false) * k_tau_tau(p, -0.4, 0.2, false);
  const double k = airy_kernel(1.0 - 0.2 + 0.25, 1.0 + 0.4 + 0.25);
  CHECK(std::fabs(prod - k * k) <= 1e-12 * k * k);
  CHECK(k_tau_tau(p, 0.0, 0.0, false) == doctest::Approx(airy_kernel(1.25, 1.25)).epsilon(1e-15));
  CHECK(k_tau_tau(p, 0.2, -0.4, true) == doctest::Approx(k).epsilon(1e-15));
  CHECK(k_tau_tau(p, 0.2, -0.4, false) == doctest::Approx(std::exp(0.5 * (-0.6)) * k).epsilon(1e-14));
}

TEST_CASE("script_a") {
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  SUBCASE("refinement stability") {
    const ScriptAValue coarse = script_a(p, 0.0, 2.0, 1e-12);
    const double us[] = {0.0};
    const double zs[] = {2.0};
    const ScriptATable fine = script_a_table(0.5, us, zs, 1e-14);
    CHECK(fine.n_w >= coarse.n_used);
    CHECK(std::fabs(coarse.value.to_real() - fine.values(0, 0)) <= 1e-10);
  }
  SUBCASE("decay in z") { CHECK(std::fabs(script_a(p, 0.0, 15.0).value.to_real()) <= 1e-8); }
  SUBCASE("tau = 0, u = 0, z = 0 against direct quadrature") {
    const TacnodeParams p0 = TacnodeParams::make(0.0, 0.0);
    std::vector<Interval> pieces;
    for (int k = 0; k < 20; ++k) pieces.push_back({k + (k ? 1e-12 : 0.0), k + 1.0});
    const QuadRule r = composite_rule(IntervalUnion(pieces), 24);
    const double integral = r.integrate([](double w) { return airy(kCbrt2 * w).ai * airy(w).ai; });
    CHECK(std::fabs(script_a(p0, 0.0, 0.0).value.to_real() - (airy(0.0).ai - integral)) <= 1e-11);
  }
  SUBCASE("stripped factor: exp(2 tau^3 / 3) cancels between +tau and -tau") {
    const double us[] = {-0.4, 0.3};
    const double zs[] = {1.0, 2.5};
    const ScriptATable a = script_a_table(0.5, us, zs, 1e-12);
    CHECK(a.values.allFinite());
    CHECK(a.n_w >= 128);
    CHECK(a.w_cutoff >= 6.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(script_a(p, 0.0, p.sigma_tilde - 5.5), ParameterError);
    CHECK_THROWS_AS(script_a(p, 0.0, 2.0, 1e-3), ParameterError);
  }
}

TEST_CASE("tacnode context") {
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  const double us[] = {-1.0};
  SUBCASE("resolvent identity") {
    const TacnodeContext ctx = tacnode_context(p, us, 48);
    CHECK(resolvent_identity_residual(ctx.airy_block(), ctx.resolvent()) <= 1e-10);
    CHECK(ctx.a_plus().rows() == 1);
    CHECK(ctx.a_plus().cols() == 48);
  }
  SUBCASE("doubling n_aux") {
    const double a = tacnode_eval(tacnode_context(p, us, 48), 0.0, 0.0);
    const double b = tacnode_eval(tacnode_context(p, us, 96), 0.0, 0.0);
    CHECK(std::fabs(a - b) <= 1e-8);
  }
  SUBCASE("script-A tables are tiny at sigma = 4 for probes u >= 0") {
    const std::vector<double> probes = {0.0, 1.0, 2.0};
    const TacnodeContext ctx = tacnode_context(TacnodeParams::make(4.0, 0.0), probes, 48);
    CHECK(ctx.a_plus().cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(ctx.a_minus().cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(tacnode_context(p, us, 16), ParameterError);
    const TacnodeContext ctx = tacnode_context(p, us, 32);
    CHECK_THROWS_AS(tacnode_eval(ctx, 0.5, 0.0), ParameterError);
  }
}

TEST_CASE("tacnode_eval") {
  SUBCASE("time reversal at (1, 0.5, 0.3, -0.7)") {
    const double us[] = {0.3 - 1.0, -0.7 - 1.0};
    const TacnodeContext fwd = tacnode_context(TacnodeParams::make(1.0, 0.5), us, 64);
    const TacnodeContext bwd = tacnode_context(TacnodeParams::make(1.0, -0.5), us, 64);
    CHECK(std::fabs(tacnode_eval(fwd, 0.3, -0.7) - tacnode_eval(bwd, -0.7, 0.3)) <= 1e-10);
  }
  SUBCASE("time reversal on 5x5 grids") {
    const std::vector<double> xs = {-2.0, -1.0, 0.0, 1.0, 2.0};
    for (auto [sigma, tau] : {std::pair{1.0, 0.5}, std::pair{0.5, 1.0}}) {
      std::vector<double> us;
      for (double x : xs) us.push_back(x - sigma);
      const TacnodeContext fwd = tacnode_context(TacnodeParams::make(sigma, tau), us, 64);
      const TacnodeContext bwd = tacnode_context(TacnodeParams::make(sigma, -tau), us, 64);
      for (double x : xs) {
        for (double y : xs) {
          const double k = tacnode_eval(fwd, x, y);
          CHECK(std::fabs(k - tacnode_eval(bwd, y, x)) <= 1e-10 * (1.0 + std::fabs(k)));
        }
      }
    }
  }
  SUBCASE("nonnegative density") {
    const double us[] = {-3.0, -1.0, 1.0};
    const TacnodeContext ctx = tacnode_context(TacnodeParams::make(1.0, 0.5), us, 64);
    for (double x : {-2.0, 0.0, 2.0}) CHECK(tacnode_eval(ctx, x, x) >= -1e-10);
  }
  SUBCASE("correction is small at sigma = 3") {
    const TacnodeParams p = TacnodeParams::make(3.0, 0.0);
    const double us[] = {-3.0};
    const double k1 = k_tau_tau(p, 0.0, 0.0, false);
    CHECK(std::fabs(tacnode_eval(tacnode_context(p, us, 64), 0.0, 0.0) - k1) <= 1e-3 * (1.0 + std::fabs(k1)));
  }
}

TEST_CASE("tacnode_matrix requires the matching probe set") {
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  const QuadRule rule = composite_rule(IntervalUnion(-1.0, 1.0), 8);
  const double wrong[] = {0.0};
  CHECK_THROWS_AS(tacnode_matrix(tacnode_context(p, wrong, 32), rule), ParameterError);
}

TEST_CASE("block system") {
  const TacnodeParams p = TacnodeParams::make(1.0, 0.5);
  const IntervalUnion dom(-2.0, 2.0);
  const BlockSystem b = block_system(p, dom, 32, 48);
  CHECK(b.upper.rows() == 48);
  CHECK(b.upper.cols() == 32);
  CHECK(b.lower.rows() == 32);
  CHECK(b.lower.cols() == 48);
  SUBCASE("off-diagonal gauge invariance") {
    const double l1 = det_identity_minus(b.assembled(1.0)).log_value;
    const double l10 = det_identity_minus(b.assembled(10.0)).log_value;
    CHECK(std::fabs(l1 - l10) <= 1e-10);
  }
  SUBCASE("tau -> -tau leaves the determinant unchanged") {
    const BlockSystem m = block_system(TacnodeParams::make(1.0, -0.5), dom, 32, 48);
    const double d = det_identity_minus(b.assembled()).value;
    CHECK(std::fabs(d - det_identity_minus(m.assembled()).value) <= 1e-8);
  }
  SUBCASE("Schur complement reproduces the direct kernel") {
    const QuadRule rule = composite_rule(dom, 32);
    std::vector<double> us;
    for (double x : rule.nodes) us.push_back(x - p.sigma);
    const TacnodeContext ctx = tacnode_context(p, us, 48);
    const Eigen::MatrixXd direct = tacnode_matrix(ctx, rule);
    const Eigen::MatrixXd ia = Eigen::MatrixXd::Identity(48, 48) - b.top_left;
    const Eigen::MatrixXd schur = b.bottom_right + b.lower * ia.partialPivLu().solve(b.upper);
    CHECK((direct - schur).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("Schur consistency and gap range at the acceptance configurations") {
  struct Config {
    double sigma, tau;
    std::vector<Interval> pieces;
  };
  const Config configs[] = {{1.0, 0.5, {{-2.0, 2.0}}}, {2.0, 1.0, {{-3.0, 1.0}}}, {1.0, 0.5, {{-3.0, -1.0}, {0.0, 2.0}}}};
  for (const Config& c : configs) {
    const TacnodeParams p = TacnodeParams::make(c.sigma, c.tau);
    const IntervalUnion dom(c.pieces);
    const BlockSystem b = block_system(p, dom, 48, 64);
    const double log_block = det_identity_minus(b.assembled()).log_value;
    const double log_f2 = det_identity_minus(b.top_left).log_value;
    const DetResult direct = tacnode_gap_direct(p, dom);
    CHECK(std::fabs(log_block - log_f2 - direct.log_value) <= direct.err_estimate / direct.value + 1e-6);
    CHECK(direct.value >= -1e-9);
    CHECK(direct.value <= 1.0 + 1e-9);
  }
}
