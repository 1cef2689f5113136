#include "degenlap/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "degenlap/barriers.hpp"
#include "degenlap/comparison.hpp"
#include "degenlap/config.hpp"
#include "degenlap/fixedpoint.hpp"
#include "degenlap/resolvent.hpp"
#include "degenlap/setup.hpp"
#include "degenlap/verify.hpp"

#ifndef DEGENLAP_VERSION
#define DEGENLAP_VERSION "0.0.0"
#endif

namespace degenlap::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("DEGENLAP_LOG");
  if (!env) return Level::Warn;
  const std::string v(env);
  if (v == "error" || v == "quiet" || v == "0") return Level::Error;
  if (v == "info" || v == "2") return Level::Info;
  if (v == "debug" || v == "3") return Level::Debug;
  return Level::Warn;
}

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<double> lambda;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<double> factor;
  std::optional<double> tol;
  std::optional<long> mesh_cells;
  std::vector<std::string> scenarios;
};

class Context {
 public:
  Context(std::string command, Options opts, std::ostream& out, std::ostream& err)
      : command_(std::move(command)), opts_(std::move(opts)), out_(out), err_(err),
        level_(log_level()) {}

  const std::string& command() const { return command_; }
  const Options& opts() const { return opts_; }
  std::ostream& out() { return out_; }

  void log(Level level, const std::string& msg) {
    if (static_cast<int>(level) <= static_cast<int>(level_)) err_ << "degenlap: " << msg << "\n";
  }

  const config::Config& cfg() {
    if (!cfg_) {
      cfg_ = opts_.config.empty() ? config::Config::parse("", "<defaults>")
                                  : config::Config::load(opts_.config);
      log(Level::Info, "config " + cfg_->origin());
    }
    return *cfg_;
  }

  setup::Setup& problem() {
    if (!setup_) {
      setup_ = setup::make_setup(cfg());
      if (opts_.mesh_cells) setup_->resolvent.cells = static_cast<std::size_t>(*opts_.mesh_cells);
      if (opts_.tol) setup_->iteration.tol = *opts_.tol;
    }
    return *setup_;
  }

  double lambda() {
    if (opts_.lambda) return *opts_.lambda;
    if (const auto l = cfg().find_double("solver.lambda")) return *l;
    throw Error(ErrorCode::ConfigError, command_ + " needs --lambda");
  }

  fs::path output(const std::string& name) {
    fs::create_directories(opts_.out);
    const fs::path path = fs::path(opts_.out) / name;
    outputs_.push_back(name);
    return path;
  }

  void write_manifest(int code, double seconds) {
    json m;
    m["toolkit_version"] = DEGENLAP_VERSION;
    m["subcommand"] = command_;
    m["exit_code"] = code;
    m["wall_time_s"] = seconds;
    m["config_file"] = opts_.config;
    json snapshot = json::object();
    if (cfg_) {
      for (const auto& [k, v] : cfg_->values()) snapshot[k] = v;
    }
    m["config"] = snapshot;
    json files = json::array();
    for (const auto& name : outputs_) {
      const fs::path path = fs::path(opts_.out) / name;
      if (!fs::exists(path)) continue;
      files.push_back({{"file", name},
                       {"sha256", file_digest(path.string())},
                       {"bytes", static_cast<std::uint64_t>(fs::file_size(path))}});
    }
    m["outputs"] = files;
    fs::create_directories(opts_.out);
    std::ofstream(fs::path(opts_.out) / "manifest.json") << m.dump(2) << "\n";
  }

 private:
  std::string command_;
  Options opts_;
  std::ostream& out_;
  std::ostream& err_;
  Level level_;
  std::optional<config::Config> cfg_;
  std::optional<setup::Setup> setup_;
  std::vector<std::string> outputs_;
};

void write_json(Context& ctx, const std::string& name, const json& j) {
  std::ofstream(ctx.output(name)) << j.dump(2) << "\n";
}

void write_csv(Context& ctx, const std::string& name, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns) {
  std::ofstream os(ctx.output(name));
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << (c ? "," : "") << format_number((*columns[c])[r]);
    }
    os << "\n";
  }
}

json checks_json(const weights::ValidationReport& report) {
  json arr = json::array();
  for (const auto& c : report.checks) {
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}});
  }
  return arr;
}

std::string negated(const std::string& name) {
  const auto pos = name.find(" in ");
  if (pos == std::string::npos) return "violated: " + name;
  return name.substr(0, pos) + " not in " + name.substr(pos + 4);
}

json thresholds_json(const barriers::LambdaThresholds& th) {
  return {{"lambda_hat1", th.lambda_hat1},
          {"lambda_star", th.lambda_star},
          {"lambda_0", th.lambda_0},
          {"rho_hat", th.rho_of_lambda.rho_hat},
          {"t_hat", th.rho_of_lambda.t_hat},
          {"rho_of_lambda", th.rho_of_lambda.rho},
          {"M_of_lambda", th.M_of_lambda},
          {"coupling", th.coupling},
          {"Lambda", th.Lambda},
          {"note", th.note}};
}

json pair_json(const barriers::BarrierPair& pair, double lambda) {
  return {{"lambda", lambda},
          {"thresholds", thresholds_json(pair.thresholds)},
          {"M", pair.M},
          {"sub_residual", pair.sub_residual},
          {"super_certificate", pair.super_certificate},
          {"ordering_gap", pair.ordering_gap},
          {"ordering_lhs", pair.prop_lhs},
          {"ordering_rhs", pair.prop_rhs},
          {"enlargements", pair.enlargements},
          {"u_lower_sup", pair.u_lower.sup_norm()},
          {"u_upper_sup", pair.u_upper.sup_norm()}};
}

json iteration_json(const fixedpoint::IterationReport& r) {
  return {{"scheme", r.scheme},         {"iterations", r.iterations},
          {"theta", r.theta},           {"tol", r.tol},
          {"converged", r.converged},   {"weak_residual", r.residual},
          {"sandwich", r.sandwich},     {"sandwich_gap", r.sandwich_gap},
          {"increments", r.increments}};
}

barriers::BarrierProblem barrier_problem(setup::Setup& s, const resolvent::Discretization& disc) {
  if (!s.nonlinearity) {
    throw Error(ErrorCode::EnvelopeFailure, "no nonlinearity configured");
  }
  return barriers::BarrierProblem{*s.nonlinearity, s.b, s.params, &disc};
}

int cmd_validate(Context& ctx) {
  auto& s = ctx.problem();
  weights::ExponentSet exps;
  exps.p = s.p;
  exps.N = s.N;
  exps.s = s.s;
  exps.q = s.q.value_or(s.p);
  try {
    const auto [ps, pss] = weights::sobolev_exponents(s.p, s.s, s.N);
    exps.p_s = ps;
    exps.p_s_star = pss;
  } catch (const Error& e) {
    ctx.log(Level::Info, e.what());
  }
  json j;
  bool valid = true;
  auto emit = [&](const std::string& section, const weights::ValidationReport& report) {
    j[section] = checks_json(report);
    for (const auto& c : report.checks) {
      ctx.out() << (c.passed ? "PASS " : "FAIL ") << section << ": "
                << (c.passed ? c.name : negated(c.name))
                << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    }
    valid = valid && report.valid;
  };
  emit("weight", weights::validate_weight(s.profile, exps));
  emit("b", weights::validate_b(s.b, s.profile, exps));
  if (s.nonlinearity) emit("nonlinearity", s.nonlinearity->validate(s.p));
  const auto info = s.geom.lambda_constants(s.geom.rho0());
  j["geometry"] = {{"describe", s.geom.describe()},
                   {"lambda_abs", info.lambda_abs},
                   {"lambda_min", info.lambda_min},
                   {"lambda_max", info.lambda_max},
                   {"mean_curvature_sign", geometry::to_string(info.mean_curvature_sign)},
                   {"admissible", info.lambda_min >= -geometry::kTolGeom}};
  j["exponents"] = {{"p", exps.p}, {"N", exps.N}, {"s", exps.s}, {"q", exps.q},
                    {"p_s", exps.p_s}, {"p_s_star", exps.p_s_star}};
  j["valid"] = valid;
  write_json(ctx, "validation.json", j);
  ctx.out() << (valid ? "valid" : "invalid") << "\n";
  return valid ? kSuccess : kCertificateFailure;
}

int cmd_psi(Context& ctx) {
  auto& s = ctx.problem();
  const auto psi = comparison::build_psi(s.profile, s.p, s.geom, s.psi);
  write_csv(ctx, "psi.csv", {"y", "d", "psi", "dpsi", "flux"},
            {&psi.y, &psi.d, &psi.psi, &psi.dpsi, &psi.flux});
  const bool ok = psi.bound_violation <= 1e-10 && psi.ode_residual <= 1e-8;
  write_json(ctx, "psi.json",
             {{"A", psi.A},
              {"Lambda", psi.Lambda},
              {"margin", psi.margin},
              {"collar_integral", psi.total},
              {"C", psi.Cbound},
              {"C_displayed", psi.C_displayed},
              {"upper", psi.upper},
              {"lower", psi.lower},
              {"bound_violation", psi.bound_violation},
              {"ode_residual", psi.ode_residual},
              {"certified", ok}});
  ctx.out() << "psi: C = " << format_number(psi.Cbound) << ", bound violation "
            << format_number(psi.bound_violation) << ", ode residual "
            << format_number(psi.ode_residual) << "\n";
  return ok ? kSuccess : kCertificateFailure;
}

int cmd_resolvent(Context& ctx) {
  auto& s = ctx.problem();
  const resolvent::Discretization disc(s.profile, s.p, s.geom, s.resolvent);
  const auto g = disc.sample_points([&](double, double dist) { return s.b(dist); });
  const auto [w, rep] = resolvent::solve(disc, g);
  const auto ratios = resolvent::resolvent_estimate_check(
      w, g, disc, std::min(s.profile.rho0(), s.geom.rho0()));
  write_csv(ctx, "solution.csv", {"x", "dist", "w", "flux"}, {&w.x, &w.dist, &w.values, &w.flux});
  write_json(ctx, "report.json",
             {{"flux_constant", rep.flux_constant},
              {"iterations", rep.iterations},
              {"expansions", rep.expansions},
              {"weak_residual", rep.residual_weak},
              {"flux_residual", rep.residual_flux},
              {"sup_norm", rep.sup_norm},
              {"lp_norm", rep.lp_norm},
              {"energy_norm", rep.energy_norm},
              {"energy_ratio", ratios.energy_ratio},
              {"boundary_ratio", ratios.boundary_ratio},
              {"boundary_quotient", ratios.boundary_quotient}});
  ctx.out() << "resolvent: sup " << format_number(rep.sup_norm) << ", weak residual "
            << format_number(rep.residual_weak) << "\n";
  return kSuccess;
}

int cmd_barriers(Context& ctx) {
  auto& s = ctx.problem();
  const double lambda = ctx.lambda();
  const resolvent::Discretization disc(s.profile, s.p, s.geom, s.resolvent);
  const auto problem = barrier_problem(s, disc);
  const auto pair = barriers::build_barriers(problem, lambda);
  write_csv(ctx, "u_lower.csv", {"x", "dist", "u_lower"},
            {&pair.u_lower.x, &pair.u_lower.dist, &pair.u_lower.values});
  write_csv(ctx, "u_upper.csv", {"x", "dist", "u_upper"},
            {&pair.u_upper.x, &pair.u_upper.dist, &pair.u_upper.values});
  write_json(ctx, "thresholds.json", pair_json(pair, lambda));
  ctx.out() << "barriers: lambda_hat1 " << format_number(pair.thresholds.lambda_hat1)
            << ", lambda_star " << format_number(pair.thresholds.lambda_star) << ", lambda_0 "
            << format_number(pair.thresholds.lambda_0) << ", M " << format_number(pair.M) << "\n";
  return kSuccess;
}

json solve_json(const fixedpoint::SemipositoneResult& r, double lambda) {
  json j = pair_json(r.pair, lambda);
  j["iteration"] = iteration_json(r.report);
  j["zeta0"] = r.zeta0;
  j["apriori_ratio"] = r.apriori_ratio;
  j["middle_third_min"] = r.middle_third_min;
  j["sup_norm"] = r.u.sup_norm();
  return j;
}

int cmd_solve(Context& ctx) {
  auto& s = ctx.problem();
  const double lambda = ctx.lambda();
  const resolvent::Discretization disc(s.profile, s.p, s.geom, s.resolvent);
  const auto problem = barrier_problem(s, disc);
  try {
    const auto r = fixedpoint::solve_semipositone(problem, lambda, s.iteration);
    write_csv(ctx, "solution.csv", {"x", "dist", "u", "u_lower", "u_upper"},
              {&r.u.x, &r.u.dist, &r.u.values, &r.pair.u_lower.values, &r.pair.u_upper.values});
    write_json(ctx, "report.json", solve_json(r, lambda));
    ctx.out() << "solve: converged in " << r.report.iterations << " steps, sup "
              << format_number(r.u.sup_norm()) << ", weak residual "
              << format_number(r.report.residual) << "\n";
    return kSuccess;
  } catch (const fixedpoint::IterationError& e) {
    write_json(ctx, "report.json",
               {{"lambda", lambda}, {"error", e.what()}, {"iteration", iteration_json(e.report())}});
    throw;
  }
}

int cmd_sweep(Context& ctx) {
  auto& s = ctx.problem();
  const auto& cfg = ctx.cfg();
  const double lo = ctx.opts().lambda_min.value_or(cfg.get_double("sweep.lambda_min", 0.0));
  const double hi = ctx.opts().lambda_max.value_or(cfg.get_double("sweep.lambda_max", 0.0));
  const double factor = ctx.opts().factor.value_or(cfg.get_double("sweep.factor", 2.0));
  if (!(lo > 0.0 && hi >= lo && factor > 1.0)) {
    throw Error(ErrorCode::ConfigError, "sweep needs 0 < lambda_min <= lambda_max and factor > 1");
  }
  const resolvent::Discretization disc(s.profile, s.p, s.geom, s.resolvent);
  const auto problem = barrier_problem(s, disc);
  std::ofstream csv(ctx.output("sweep.csv"));
  csv << "lambda,status,iterations,sup_norm,middle_third_min,apriori_ratio,weak_residual\n";
  json runs = json::array();
  for (double lambda = lo; lambda <= hi * (1.0 + 1e-12); lambda *= factor) {
    std::string status = "ok";
    fixedpoint::SemipositoneResult r;
    try {
      r = fixedpoint::solve_semipositone(problem, lambda, s.iteration);
      runs.push_back(solve_json(r, lambda));
    } catch (const Error& e) {
      status = std::string(to_string(e.code()));
      runs.push_back({{"lambda", lambda}, {"error", e.what()}});
      ctx.log(Level::Info, e.what());
    }
    const bool ok = status == "ok";
    csv << format_number(lambda) << "," << status << "," << (ok ? r.report.iterations : 0) << ","
        << format_number(ok ? r.u.sup_norm() : 0.0) << ","
        << format_number(ok ? r.middle_third_min : 0.0) << ","
        << format_number(ok ? r.apriori_ratio : 0.0) << ","
        << format_number(ok ? r.report.residual : 0.0) << "\n";
    ctx.out() << "lambda " << format_number(lambda) << ": " << status << "\n";
  }
  write_json(ctx, "report.json", {{"runs", runs}});
  return kSuccess;
}

int cmd_verify(Context& ctx) {
  std::vector<std::string> names = ctx.opts().scenarios;
  if (names.empty() && !ctx.opts().config.empty()) names = ctx.cfg().get_strings("verify.scenarios");
  std::vector<std::string> expanded;
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& all : verify::scenario_names()) expanded.push_back(all);
    } else {
      expanded.push_back(n);
    }
  }
  if (expanded.empty()) throw Error(ErrorCode::ConfigError, "empty scenario list");
  verify::VerifyOptions vopts;
  if (!ctx.opts().config.empty()) {
    const auto& cfg = ctx.cfg();
    cfg.require_known(setup::known_keys());
    vopts.cells = static_cast<std::size_t>(cfg.get_int("solver.cells", 2048));
    vopts.seed = static_cast<std::uint64_t>(cfg.get_int("verify.seed", 20240601));
  }
  if (ctx.opts().mesh_cells) vopts.cells = static_cast<std::size_t>(*ctx.opts().mesh_cells);
  json scenarios = json::array();
  bool all_passed = true;
  for (const auto& name : expanded) {
    const auto result = verify::run_scenario(name, vopts);
    json invs = json::array();
    for (const auto& inv : result.invariants) {
      invs.push_back({{"module", inv.module},
                      {"name", inv.name},
                      {"status", verify::to_string(inv.status)},
                      {"value", inv.value},
                      {"threshold", inv.threshold},
                      {"detail", inv.detail}});
      ctx.out() << verify::to_string(inv.status) << " " << name << " " << inv.module << ": "
                << inv.name << "\n";
    }
    scenarios.push_back({{"name", name}, {"passed", result.passed()}, {"invariants", invs}});
    all_passed = all_passed && result.passed();
  }
  write_json(ctx, "verify.json",
             {{"passed", all_passed}, {"mesh_cells", vopts.cells}, {"seed", vopts.seed},
              {"scenarios", scenarios}});
  ctx.out() << (all_passed ? "verify: all invariants hold" : "verify: failures") << "\n";
  return all_passed ? kSuccess : kCertificateFailure;
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
      return kUsage;
    case ErrorCode::Divergent:
    case ErrorCode::NaNEncountered:
    case ErrorCode::BracketFailure:
    case ErrorCode::QuadratureError:
    case ErrorCode::NoConvergence:
    case ErrorCode::UnsupportedGeometry:
    case ErrorCode::DegenerateJacobian:
      return kSolverFailure;
    default:
      return kCertificateFailure;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path);
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  EVP_DigestInit_ex(md, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(md, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(md, digest, &len);
  EVP_MD_CTX_free(md);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted p-Laplacian barriers and semipositone solver", "degenlap"};
  app.require_subcommand(1);
  Options opts;
  std::optional<double> lambda, lambda_min, lambda_max, factor, tol;
  std::optional<long> cells;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "Check the hypotheses on a, b, f and the geometry"},
      {"psi", "Build the boundary barrier psi"},
      {"resolvent", "Solve the weighted p-Laplacian with right-hand side b"},
      {"barriers", "Build the ordered sub/supersolution pair at --lambda"},
      {"solve", "Solve the semipositone problem at --lambda"},
      {"sweep", "Run solve over a geometric range of lambda"},
      {"verify", "Run the invariant suite of named scenarios"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "Config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory");
    sub->add_option("--mesh-cells", cells, "Mesh cells");
    if (name == "barriers" || name == "solve") sub->add_option("--lambda", lambda, "Parameter lambda");
    if (name == "solve" || name == "sweep") sub->add_option("--tol", tol, "Iteration tolerance");
    if (name == "sweep") {
      sub->add_option("--lambda-min", lambda_min, "Smallest lambda");
      sub->add_option("--lambda-max", lambda_max, "Largest lambda");
      sub->add_option("--factor", factor, "Ratio between successive lambda");
    }
    if (name == "verify") {
      sub->add_option("--scenario", opts.scenarios, "Scenario names, or all")->delimiter(',');
    }
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }
  opts.lambda = lambda;
  opts.lambda_min = lambda_min;
  opts.lambda_max = lambda_max;
  opts.factor = factor;
  opts.tol = tol;
  opts.mesh_cells = cells;
  const std::string command = app.get_subcommands().front()->get_name();
  if (command != "verify" && opts.config.empty()) {
    err << "degenlap: " << command << " needs --config\n";
    return kUsage;
  }

  Context ctx(command, opts, out, err);
  const auto start = std::chrono::steady_clock::now();
  int code = kSuccess;
  try {
    if (command == "validate") code = cmd_validate(ctx);
    else if (command == "psi") code = cmd_psi(ctx);
    else if (command == "resolvent") code = cmd_resolvent(ctx);
    else if (command == "barriers") code = cmd_barriers(ctx);
    else if (command == "solve") code = cmd_solve(ctx);
    else if (command == "sweep") code = cmd_sweep(ctx);
    else code = cmd_verify(ctx);
  } catch (const Error& e) {
    err << "degenlap: " << e.what() << "\n";
    code = exit_code(e.code());
  } catch (const std::exception& e) {
    err << "degenlap: " << e.what() << "\n";
    code = kSolverFailure;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    ctx.write_manifest(code, seconds);
  } catch (const std::exception& e) {
    err << "degenlap: cannot write manifest: " << e.what() << "\n";
  }
  return code;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace degenlap::cli
