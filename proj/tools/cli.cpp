#include "tacgap/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "tacgap/checks.hpp"
#include "tacgap/errors.hpp"
#include "tacgap/probes.hpp"

namespace tacgap::cli {

using Json = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double parse_real(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParameterError("not a finite number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (std::string_view p : split(text, ',')) out.push_back(parse_real(p));
  return out;
}

std::vector<double> parse_intervals(const std::string& text) {
  std::vector<double> flat;
  for (std::string_view piece : split(text, ',')) {
    const std::vector<std::string_view> ends = split(piece, ':');
    if (ends.size() != 2) throw ParameterError("interval '" + std::string(piece) + "' is not of the form lo:hi");
    flat.push_back(parse_real(ends[0]));
    flat.push_back(parse_real(ends[1]));
  }
  for (std::size_t i = 1; i < flat.size(); ++i) {
    if (!(flat[i - 1] < flat[i])) throw ParameterError("intervals must be strictly increasing and disjoint");
  }
  return flat;
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw ParameterError("--steps must be at least 1");
  if (steps == 1) {
    if (lo != hi) throw ParameterError("--steps 1 requires equal endpoints");
    return {lo};
  }
  if (!(lo < hi)) throw ParameterError("grid minimum must be below its maximum");
  std::vector<double> g(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) g[k] = lo + (hi - lo) * k / (steps - 1);
  g.back() = hi;
  return g;
}

namespace {

IntervalUnion to_union(const std::vector<double>& flat) {
  std::vector<Interval> pieces;
  for (std::size_t i = 0; i + 1 < flat.size(); i += 2) pieces.push_back({flat[i], flat[i + 1]});
  return IntervalUnion(std::move(pieces));
}

struct Common {
  int nodes = kDefaultDomNodes;
  int aux_nodes = kDefaultAuxNodes;
  int threads = 1;
  std::string out;
  std::string json_meta;
};

struct Output {
  std::string body;
  Json params = Json::object();
};

void add_common(CLI::App* sub, Common& c, bool tacnode) {
  sub->add_option("--nodes", c.nodes, "Quadrature nodes per interval piece")->capture_default_str();
  if (tacnode) sub->add_option("--aux-nodes", c.aux_nodes, "Nodes of the auxiliary rule on [sigma~, inf)")->capture_default_str();
  sub->add_option("--out", c.out, "CSV output path (default: standard output)");
  sub->add_option("--json-meta", c.json_meta, "Run metadata path (default: <out>.meta.json when --out is set)");
}

std::string sweep_csv(const SweepTable& t) {
  std::ostringstream os;
  if (t.mode == SweepMode::edge) {
    os << "param,gap,airy_det,ratio,deviation,err_estimate,window_ok\n";
  } else {
    os << "param,gap,f2_s,f2_t,ratio,deviation,err_estimate,window_ok\n";
  }
  for (const SweepRow& r : t.rows) {
    os << format_real(r.param) << ',' << format_real(r.gap) << ',';
    if (t.mode == SweepMode::edge) {
      os << format_real(r.airy_det) << ',';
    } else {
      os << format_real(r.f2_s) << ',' << format_real(r.f2_t) << ',';
    }
    os << format_real(r.ratio) << ',' << format_real(r.deviation) << ',' << format_real(r.err_estimate) << ','
       << (r.window_ok ? "true" : "false") << '\n';
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ParameterError("failed writing '" + path + "'");
}

std::string program_name(const std::string& arg0) {
  const std::size_t slash = arg0.find_last_of('/');
  return slash == std::string::npos ? arg0 : arg0.substr(slash + 1);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e) != nullptr) return kParameter;
  return kNumerical;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Gap probabilities of the Airy and tacnode determinantal processes", "tacgap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common c;

  // f2
  double f2_s = 0.0;
  CLI::App* f2_cmd = app.add_subcommand("f2", "Tracy-Widom F2(s) = det(Id - K_Ai|[s, inf))");
  f2_cmd->add_option("--s", f2_s, "Left endpoint s")->required();
  add_common(f2_cmd, c, false);

  // gap
  double gap_sigma = 0.0, gap_tau = 0.0;
  std::string gap_intervals, gap_route = "direct";
  CLI::App* gap_cmd = app.add_subcommand("gap", "Tacnode gap probability det(Id - K_tac|I)");
  gap_cmd->add_option("--sigma", gap_sigma, "Overlap parameter sigma")->required();
  gap_cmd->add_option("--tau", gap_tau, "Time parameter tau")->required();
  gap_cmd->add_option("--intervals", gap_intervals, "Gap set, lo:hi[,lo:hi...]")->required();
  gap_cmd->add_option("--route", gap_route, "direct, block or both")
      ->check(CLI::IsMember({"direct", "block", "both"}))
      ->capture_default_str();
  add_common(gap_cmd, c, true);

  // sweep-sigma / sweep-tau
  struct FactorSweep {
    double fixed = 0.5;
    double a = -0.3, b = 0.5;
    double lo = 1.0, hi = 3.0;
    int steps = 5;
    std::string t_cuts, s_cuts;
  } ss, st;
  auto add_factor = [&](CLI::App* sub, FactorSweep& f, const char* fixed_name, const char* axis) {
    sub->add_option(std::string("--") + fixed_name, f.fixed, std::string("Fixed ") + fixed_name)->capture_default_str();
    sub->add_option("--a", f.a, "Left offset: the interval starts at a - sigma - tau^2")->capture_default_str();
    sub->add_option("--b", f.b, "Right offset: the interval ends at -b + sigma + tau^2")->capture_default_str();
    sub->add_option(std::string("--") + axis + "-min", f.lo, "First grid value")->capture_default_str();
    sub->add_option(std::string("--") + axis + "-max", f.hi, "Last grid value")->capture_default_str();
    sub->add_option("--steps", f.steps, "Number of grid values")->capture_default_str();
    sub->add_option("--t-cuts", f.t_cuts, "Left-edge cuts t1,...,t_{2J+1} (replaces --a)");
    sub->add_option("--s-cuts", f.s_cuts, "Right-edge cuts s1,...,s_{2K+1} (replaces --b)");
    sub->add_option("--threads", c.threads, "Rows computed concurrently")->capture_default_str();
    add_common(sub, c, true);
  };
  CLI::App* ss_cmd = app.add_subcommand("sweep-sigma", "Factorization sweep as sigma grows");
  add_factor(ss_cmd, ss, "tau", "sigma");
  st.fixed = 0.5;
  CLI::App* st_cmd = app.add_subcommand("sweep-tau", "Factorization sweep as tau grows");
  add_factor(st_cmd, st, "sigma", "tau");

  // sweep-edge
  std::string edge_offsets;
  std::optional<double> edge_sigma, edge_tau, edge_tau_min, edge_tau_max, edge_sigma_min, edge_sigma_max;
  int edge_steps = 5;
  CLI::App* se_cmd = app.add_subcommand("sweep-edge", "Gap near the left edge against the Airy gap");
  se_cmd->add_option("--offsets", edge_offsets, "Edge offsets s1:s2[,s3:s4...]")->required();
  se_cmd->add_option("--sigma", edge_sigma, "Fixed sigma (tau grid)");
  se_cmd->add_option("--tau-min", edge_tau_min, "First tau");
  se_cmd->add_option("--tau-max", edge_tau_max, "Last tau");
  se_cmd->add_option("--tau", edge_tau, "Fixed tau (sigma grid)");
  se_cmd->add_option("--sigma-min", edge_sigma_min, "First sigma");
  se_cmd->add_option("--sigma-max", edge_sigma_max, "Last sigma");
  se_cmd->add_option("--steps", edge_steps, "Number of grid values")->capture_default_str();
  se_cmd->add_option("--threads", c.threads, "Rows computed concurrently")->capture_default_str();
  add_common(se_cmd, c, true);

  // p2
  double p_s = 0.0;
  std::string p_method = "resolvent";
  CLI::App* p_cmd = app.add_subcommand("p2", "p(s) = d/ds ln F2(s)");
  p_cmd->add_option("--s", p_s, "Point s")->required();
  p_cmd->add_option("--method", p_method, "resolvent, finite_diff or both")
      ->check(CLI::IsMember({"resolvent", "finite_diff", "both"}))
      ->capture_default_str();
  add_common(p_cmd, c, false);

  // check
  CLI::App* check_cmd = app.add_subcommand("check", "Run the invariant suite");
  check_cmd->add_option("--json-meta", c.json_meta, "Run metadata path");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kParameter;
  }

  Output result;
  int code = kOk;
  try {
    if (f2_cmd->parsed()) {
      const DetResult d = f2(f2_s, c.nodes);
      result.body = format_real(f2_s) + "," + format_real(d.value) + "," + format_real(d.err_estimate) + "\n";
      result.params["s"] = f2_s;
    } else if (gap_cmd->parsed()) {
      const TacnodeParams p = TacnodeParams::make(gap_sigma, gap_tau);
      const IntervalUnion dom = to_union(parse_intervals(gap_intervals));
      std::ostringstream os;
      if (gap_route == "both") {
        const DetResult d = tacnode_gap_direct(p, dom, c.nodes, c.aux_nodes);
        const DetResult b = tacnode_gap_block(p, dom, c.nodes, c.aux_nodes);
        const double rel = std::fabs(d.value - b.value) / std::fabs(d.value);
        os << "direct,direct_err,block,block_err,rel_diff\n"
           << format_real(d.value) << ',' << format_real(d.err_estimate) << ',' << format_real(b.value) << ','
           << format_real(b.err_estimate) << ',' << format_real(rel) << '\n';
      } else {
        const DetResult d = gap_route == "direct" ? tacnode_gap_direct(p, dom, c.nodes, c.aux_nodes)
                                                  : tacnode_gap_block(p, dom, c.nodes, c.aux_nodes);
        os << "value,err_estimate\n" << format_real(d.value) << ',' << format_real(d.err_estimate) << '\n';
      }
      result.body = os.str();
      result.params = {{"sigma", gap_sigma}, {"tau", gap_tau}, {"intervals", gap_intervals}, {"route", gap_route}};
    } else if (ss_cmd->parsed() || st_cmd->parsed()) {
      const bool sigma_mode = ss_cmd->parsed();
      const FactorSweep& f = sigma_mode ? ss : st;
      SweepConfig cfg;
      cfg.mode = sigma_mode ? SweepMode::sigma : SweepMode::tau;
      cfg.fixed = f.fixed;
      cfg.grid = linspace(f.lo, f.hi, f.steps);
      cfg.t_cuts = f.t_cuts.empty() ? std::vector<double>{f.a} : parse_list(f.t_cuts);
      cfg.s_cuts = f.s_cuts.empty() ? std::vector<double>{f.b} : parse_list(f.s_cuts);
      cfg.n_dom = c.nodes;
      cfg.n_aux = c.aux_nodes;
      cfg.threads = c.threads;
      result.body = sweep_csv(sweep(cfg));
      const char* fixed_name = sigma_mode ? "tau" : "sigma";
      const char* axis = sigma_mode ? "sigma" : "tau";
      result.params[fixed_name] = f.fixed;
      result.params["t_cuts"] = cfg.t_cuts;
      result.params["s_cuts"] = cfg.s_cuts;
      result.params[std::string(axis) + "_min"] = f.lo;
      result.params[std::string(axis) + "_max"] = f.hi;
      result.params["steps"] = f.steps;
    } else if (se_cmd->parsed()) {
      SweepConfig cfg;
      cfg.mode = SweepMode::edge;
      cfg.edge_offsets = parse_intervals(edge_offsets);
      const bool sigma_axis = edge_sigma_min || edge_sigma_max;
      if (sigma_axis) {
        if (!edge_sigma_min || !edge_sigma_max) throw ParameterError("sweep-edge: --sigma-min and --sigma-max go together");
        if (edge_sigma || edge_tau_min || edge_tau_max) {
          throw ParameterError("sweep-edge: give either --sigma with a tau range or --tau with a sigma range");
        }
        cfg.edge_axis = WindowMode::sigma;
        cfg.fixed = edge_tau.value_or(0.0);
        cfg.grid = linspace(*edge_sigma_min, *edge_sigma_max, edge_steps);
        result.params = {{"tau", cfg.fixed}, {"sigma_min", *edge_sigma_min}, {"sigma_max", *edge_sigma_max}};
      } else {
        if (!edge_sigma || !edge_tau_min || !edge_tau_max || edge_tau) {
          throw ParameterError("sweep-edge: give either --sigma with a tau range or --tau with a sigma range");
        }
        cfg.edge_axis = WindowMode::tau;
        cfg.fixed = *edge_sigma;
        cfg.grid = linspace(*edge_tau_min, *edge_tau_max, edge_steps);
        result.params = {{"sigma", cfg.fixed}, {"tau_min", *edge_tau_min}, {"tau_max", *edge_tau_max}};
      }
      result.params["offsets"] = edge_offsets;
      result.params["steps"] = edge_steps;
      cfg.n_dom = c.nodes;
      cfg.n_aux = c.aux_nodes;
      cfg.threads = c.threads;
      result.body = sweep_csv(sweep(cfg));
    } else if (p_cmd->parsed()) {
      std::ostringstream os;
      if (p_method == "both") {
        const double r = hastings_p(p_s, c.nodes, PMethod::resolvent);
        const double fd = hastings_p(p_s, c.nodes, PMethod::finite_diff);
        os << "s,p_resolvent,p_finite_diff,difference\n"
           << format_real(p_s) << ',' << format_real(r) << ',' << format_real(fd) << ',' << format_real(std::fabs(r - fd))
           << '\n';
      } else {
        const PMethod m = p_method == "resolvent" ? PMethod::resolvent : PMethod::finite_diff;
        os << "s,p\n" << format_real(p_s) << ',' << format_real(hastings_p(p_s, c.nodes, m)) << '\n';
      }
      result.body = os.str();
      result.params = {{"s", p_s}, {"method", p_method}};
    } else if (check_cmd->parsed()) {
      const std::vector<CheckResult> checks = run_invariant_checks();
      std::ostringstream os;
      int passed = 0;
      for (const CheckResult& r : checks) {
        passed += r.passed ? 1 : 0;
        os << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
      }
      os << passed << '/' << checks.size() << " checks passed\n";
      result.body = os.str();
      if (passed != static_cast<int>(checks.size())) code = kCheckFailed;
    }
  } catch (const std::exception& e) {
    const int rc = exit_code_for(e);
    err << "tacgap: " << (rc == kParameter ? "parameter" : "numerical") << " error: " << e.what() << '\n';
    return rc;
  }

  try {
    if (c.out.empty()) {
      out << result.body;
    } else {
      write_text(c.out, result.body);
    }
    std::string meta_path = c.json_meta;
    if (meta_path.empty() && !c.out.empty()) meta_path = c.out + ".meta.json";
    if (!meta_path.empty()) {
      std::string command = program_name(args.empty() ? "tacgap" : args[0]);
      for (std::size_t i = 1; i < args.size(); ++i) command += " " + args[i];
      Json meta;
      meta["command"] = command;
      meta["params"] = result.params;
      meta["nodes"] = {{"n_dom", c.nodes}, {"n_aux", c.aux_nodes}};
      meta["version"] = kVersion;
      meta["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_text(meta_path, meta.dump(2) + "\n");
    }
  } catch (const ParameterError& e) {
    err << "tacgap: " << e.what() << '\n';
    return kParameter;
  }
  return code;
}

}  // namespace tacgap::cli
