// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "degenlap/barriers.hpp"
#include "degenlap/cli.hpp"
#include "degenlap/comparison.hpp"
#include "degenlap/error.hpp"
#include "degenlap/fixedpoint.hpp"
#include "degenlap/geometry.hpp"
#include "degenlap/resolvent.hpp"
#include "degenlap/weights.hpp"

namespace fs = std::filesystem;
using namespace degenlap;
using barriers::BarrierProblem;
using barriers::NonlinearitySpec;
using barriers::SubsolutionParams;
using geometry::DomainGeometry;
using resolvent::Discretization;
using weights::CoefficientB;
using weights::WeightProfile;

namespace {

enum class Verdict { Pass, Fail, ExpectedPass };

struct Line {
  Verdict verdict = Verdict::Fail;
  std::string text;
};

int failures = 0;

void report(int id, const std::string& title, const Line& line) {
  const char* tag = line.verdict == Verdict::Pass           ? "PASS"
                    : line.verdict == Verdict::ExpectedPass ? "EXPECTED-PASS"
                                                            : "FAIL";
  if (line.verdict == Verdict::Fail) ++failures;
  std::printf("[%2d] %-13s %s: %s\n", id, tag, title.c_str(), line.text.c_str());
  std::fflush(stdout);
}

void criterion(int id, const std::string& title, const std::function<Line()>& body) {
  try {
    report(id, title, body());
  } catch (const std::exception& e) {
    report(id, title, {Verdict::Fail, std::string("raised ") + e.what()});
  }
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

resolvent::ResolventSpec cells(std::size_t n) {
  resolvent::ResolventSpec s;
  s.cells = n;
  return s;
}

template <class F>
double sup_error(const Field& w, F exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) e = std::max(e, std::abs(w.values[i] - exact(w.x[i])));
  return e;
}

NonlinearitySpec power_minus_one(double r) {
  auto f = [r](double z) { return std::pow(std::max(z, 0.0), r) - 1.0; };
  return NonlinearitySpec(f, f, 1.0, r);
}

SubsolutionParams p3_params() {
  SubsolutionParams params;
  params.r = 1.5;
  params.sigma = 1.0;
  params.beta = 1.2;
  params.rho1 = 0.5;
  return params;
}

// int_0^y e^{L t} t^{-g} dt by its power series.
double exp_power_integral(double y, double L, double g) {
  double sum = 0.0, term = 1.0;
  for (int k = 0; k < 80; ++k) {
    if (k > 0) term *= L / k;
    sum += term * std::pow(y, k + 1.0 - g) / (k + 1.0 - g);
  }
  return sum;
}

Line closed_forms() {
  const std::size_t n = 10000;
  std::ostringstream os;
  bool ok = true;
  auto t0 = std::chrono::steady_clock::now();
  auto [w2, r2] = resolvent::solve_interval(WeightProfile::uniform(1.0, 0.5), 2.0,
                                            [](double) { return 1.0; }, 1.0, cells(n));
  const double e2 = sup_error(w2, [](double x) { return x * (1.0 - x) / 2.0; });
  const double s2 = seconds_since(t0);
  ok = ok && e2 <= 1e-8 && s2 < 1.0;

  t0 = std::chrono::steady_clock::now();
  auto [ub, rb] = resolvent::solve_radial(WeightProfile::uniform(1.0, 0.5), 2.0,
                                          [](double) { return 1.0; },
                                          DomainGeometry::ball(1.0, 3, 0.5), cells(n));
  const double eb = sup_error(ub, [](double r) { return (1.0 - r * r) / 6.0; });
  const double sb = seconds_since(t0);
  ok = ok && eb <= 1e-8 && sb < 1.0;

  t0 = std::chrono::steady_clock::now();
  auto [w3, r3] = resolvent::solve_interval(WeightProfile::uniform(1.0, 0.5), 3.0,
                                            [](double) { return 1.0; }, 1.0, cells(n));
  const auto p3 = [](double x) {
    return (2.0 / 3.0) * (std::pow(0.5, 1.5) - std::pow(std::abs(0.5 - x), 1.5));
  };
  const double e3 = std::max(sup_error(w3, p3), std::abs(r3.sup_norm - p3(0.5)));
  const double s3 = seconds_since(t0);
  ok = ok && e3 <= 1e-7 && s3 < 1.0;

  os << "interval p=2 " << sci(e2) << " (<=1e-8, " << sci(s2) << " s), ball N=3 " << sci(eb)
     << " (<=1e-8, " << sci(sb) << " s), interval p=3 " << sci(e3) << " (<=1e-7, " << sci(s3)
     << " s)";
  return {ok ? Verdict::Pass : Verdict::Fail, os.str()};
}

struct Draw {
  WeightProfile profile;
  double p;
  std::function<double(double)> g;
};

Draw random_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = 1.5 + 2.0 * unit(rng);
  const double alpha = 0.9 * (p - 1.0) * unit(rng);
  const double c = 0.5 + unit(rng);
  const double rho0 = 0.1 + 0.3 * unit(rng);
  const double amp = 0.9 * unit(rng), freq = 1.0 + 6.0 * unit(rng), k = 0.2 + 2.0 * unit(rng);
  return {WeightProfile::power(c, alpha, rho0), p,
          [=](double x) { return k * (1.0 + amp * std::sin(freq * x)); }};
}

Line homogeneity() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const auto d = random_draw(rng);
    const double t = 0.2 + 4.0 * unit(rng);
    const Discretization disc(d.profile, d.p, DomainGeometry::interval(1.0, d.profile.rho0()),
                              cells(512));
    auto [w, r] = resolvent::solve(disc, d.g);
    const double tp = std::pow(t, d.p - 1.0);
    auto [wt, rt] = resolvent::solve(disc, [&](double x) { return tp * d.g(x); });
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      num = std::max(num, std::abs(wt.values[i] - t * w.values[i]));
      den = std::max(den, std::abs(t * w.values[i]));
    }
    worst = std::max(worst, num / den);
  }
  return {worst <= 1e-9 ? Verdict::Pass : Verdict::Fail,
          "max relative deviation " + sci(worst) + " over 20 draws (<=1e-9)"};
}

Line comparison_principle() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = -1e300;
  for (int draw = 0; draw < 20; ++draw) {
    const auto d = random_draw(rng);
    const double shift = unit(rng) - 0.5;
    const double bump = 0.1 + unit(rng);
    const double centre = unit(rng);
    const auto g1 = [&](double x) { return d.g(x) + shift; };
    const auto g2 = [&](double x) {
      return g1(x) + bump * std::exp(-20.0 * (x - centre) * (x - centre));
    };
    const Discretization disc(d.profile, d.p, DomainGeometry::interval(1.0, d.profile.rho0()),
                              cells(512));
    auto [w1, r1] = resolvent::solve(disc, g1);
    auto [w2, r2] = resolvent::solve(disc, g2);
    for (std::size_t i = 0; i < w1.size(); ++i) worst = std::max(worst, w1.values[i] - w2.values[i]);
  }
  return {worst <= 1e-9 ? Verdict::Pass : Verdict::Fail,
          "max of L(g1) - L(g2) = " + sci(worst) + " over 20 ordered pairs (<=1e-9)"};
}

Line psi_certification() {
  double bound = 0.0, flux = 0.0;
  int certified = 0;
  std::string rejected;
  bool unexpected = false;
  const double Lambda = 1.0;
  for (double alpha : {0.0, 0.3, 0.6}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const double g = alpha / (p - 1.0);
      const auto a = WeightProfile::power(1.0, alpha, 0.5);
      if (g >= 1.0) {
        try {
          (void)comparison::build_psi(a, p, Lambda, comparison::PsiSpec{});
          unexpected = true;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InvalidExponents) unexpected = true;
          rejected += " (alpha=" + sci(alpha) + ", p=" + sci(p) + ")";
        }
        continue;
      }
      comparison::PsiSpec spec;
      spec.cells = 1000;
      const auto psi = comparison::build_psi(a, p, Lambda, spec);
      const double A = 2.0 * exp_power_integral(0.5, Lambda, g);
      for (std::size_t i = 0; i < psi.y.size(); ++i) {
        const double y = psi.y[i];
        const double d = std::pow(y, 1.0 - g) / (1.0 - g);
        if (y > 0.0) {
          bound = std::max(bound, psi.psi[i] / (psi.Cbound * d) - 1.0);
          bound = std::max(bound, d / (psi.Cbound * psi.psi[i]) - 1.0);
        }
        const double ref = std::exp(-Lambda * y) * (A - exp_power_integral(y, Lambda, g));
        flux = std::max(flux, std::abs(psi.flux[i] - ref) / A);
      }
      ++certified;
    }
  }
  const bool ok = !unexpected && bound <= 1e-12 && flux <= 1e-8 && certified == 8;
  std::string text = std::to_string(certified) + " pairs certified at 1001 nodes, bound excess " +
                     sci(std::max(bound, 0.0)) + ", flux identity " + sci(flux) +
                     " (<=1e-8); non-integrable pair rejected:" + rejected;
  if (!ok) return {Verdict::Fail, text};
  return {Verdict::ExpectedPass, text};
}

Line gluing() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double value = 0.0, flux = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const double p = 1.5 + 2.0 * unit(rng);
    const double alpha = 0.9 * (p - 1.0) * unit(rng);
    const double rho0 = 0.2 + 0.3 * unit(rng);
    const auto a = WeightProfile::power(0.5 + unit(rng), alpha, rho0);
    SubsolutionParams params;
    params.r = 0.5 * (p - 1.0);
    params.sigma = 1.0 / (p - 1.0 - 0.5 * params.r);
    params.beta = 1.0 + (0.05 + 0.9 * unit(rng)) / (p - 1.0);
    params.epsilon = 0.5;
    params.rho1 = rho0;
    const double rho = rho0 * (0.05 + 0.9 * unit(rng));
    const barriers::Subsolution sub(a, p, 0.0, params, 0.5, 1e3, rho);
    const double d = weights::weighted_distance(a, p, rho);
    const double beta = params.beta;
    value = std::max(value, std::abs(sub.B() * std::pow(d, beta) - 1.0));
    value = std::max(value, sub.value_gap());
    const double lhs = std::pow(beta, p - 1.0) * std::pow(sub.B(), p - 1.0) *
                       std::pow(d, (beta - 1.0) * (p - 1.0));
    flux = std::max(flux, std::abs(lhs / sub.A() - 1.0));
    flux = std::max(flux, sub.flux_gap());
  }
  return {value <= 1e-12 && flux <= 1e-12 ? Verdict::Pass : Verdict::Fail,
          "value " + sci(value) + ", flux " + sci(flux) + " over 100 draws (<=1e-12)"};
}

Line solve_rho() {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const auto geom = DomainGeometry::interval(1.0, 0.5);
  const auto t = [](double r) { return 1.44 / (r * r * (0.5 - r)); };
  // Dense scan, refined once around the best sample.
  double best = 0.25, tbest = t(0.25);
  for (int pass = 0; pass < 2; ++pass) {
    const double lo = pass == 0 ? 0.25 : best - 1e-6, hi = pass == 0 ? 0.5 : best + 1e-6;
    for (int i = 1; i < 1000000; ++i) {
      const double r = lo + (hi - lo) * i / 1000000.0;
      if (t(r) < tbest) {
        tbest = t(r);
        best = r;
      }
    }
  }
  const double lam1 = tbest * tbest;
  const auto rec = barriers::solve_rho(a, geom, p3_params(), 3.0, lam1 * (1.0 + 1e-9));
  const auto rec4 = barriers::solve_rho(a, geom, p3_params(), 3.0, 4.0 * rec.lambda_hat1);
  const double target = 1.44 / (2.0 * rec.t_hat);
  double lo = 1.0 / 3.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * (0.5 - mid) > target ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  const double e_rho = std::abs(rec.rho_hat - 1.0 / 3.0);
  const double e_lam = std::abs(rec.lambda_hat1 / std::pow(t(1.0 / 3.0), 2.0) - 1.0);
  const double e_root = std::abs(rec4.rho - root);
  const bool ok = e_rho <= 1e-6 && e_lam <= 1e-3 && e_root <= 1e-8 &&
                  std::abs(best - 1.0 / 3.0) <= 1e-6;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "|rho_hat - 1/3| " + sci(e_rho) + " (<=1e-6), lambda_hat1 rel " + sci(e_lam) +
              " (<=1e-3), rho(4 lambda_hat1) vs bisection " + sci(e_root) + " (<=1e-8)"};
}

Line subsolution_residual() {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const Discretization disc(a, 3.0, DomainGeometry::interval(1.0, 0.5), cells(2048));
  const BarrierProblem problem{power_minus_one(1.5), CoefficientB::uniform(1.0, 1.0, 1.0, 0.5),
                               p3_params(), &disc};
  const auto th = barriers::subsolution_thresholds(problem);
  double worst = -1e300;
  std::size_t nodes = 0;
  const double model = std::max(th.lambda_star, 4.0 * th.lambda_hat1);
  for (double lambda : {th.lambda_star, 2.0 * th.lambda_star, model, 16.0 * model}) {
    const auto [sub, cert] = barriers::build_subsolution(problem, lambda, th, 10000);
    worst = std::max(worst, cert.max_residual);
    nodes = cert.nodes;
  }
  return {worst <= 1e-8 ? Verdict::Pass : Verdict::Fail,
          "max signed residual / scale " + sci(worst) +
              " (<=1e-8) from lambda_star = " + sci(th.lambda_star) +
              " up to 16 max(lambda_star, 4 lambda_hat1) on " + std::to_string(nodes) + " nodes"};
}

Line semipositone() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const Discretization disc(a, 2.0, DomainGeometry::interval(1.0, 0.5), cells(2048));
  auto f = [](double z) { return std::sqrt(std::max(z, 0.0)) - 1.0; };
  SubsolutionParams params;
  params.r = 0.5;
  params.sigma = 1.2;
  params.beta = 1.2;
  params.epsilon = 0.5;
  params.rho1 = 0.5;
  const BarrierProblem problem{NonlinearitySpec(f, f, 1.0, 0.5),
                               CoefficientB::uniform(1.0, 1.0, 1.0, 0.5), params, &disc};
  const auto th = barriers::compute_thresholds(problem);
  const auto res = fixedpoint::solve_semipositone(problem, 2.0 * th.lambda_0);
  const double secs = seconds_since(t0);
  double below = 1e300, above = 1e300, third = 1e300;
  for (std::size_t i = 0; i < res.u.size(); ++i) {
    below = std::min(below, res.u.values[i] - res.pair.u_lower.values[i]);
    above = std::min(above, res.pair.u_upper.values[i] - res.u.values[i]);
    if (res.u.x[i] >= 1.0 / 3.0 && res.u.x[i] <= 2.0 / 3.0) third = std::min(third, res.u.values[i]);
  }
  const bool ok = res.report.converged && res.report.iterations <= 200 && below >= -1e-8 &&
                  above >= -1e-8 && third > 0.0 && res.report.residual <= 1e-6 && secs < 10.0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "lambda_0 " + sci(th.lambda_0) + ", " + std::to_string(res.report.iterations) +
              " steps (<=200), u - u_lower >= " + sci(below) + ", u_upper - u >= " + sci(above) +
              ", middle-third min " + sci(third) + ", weak residual " + sci(res.report.residual) +
              " (<=1e-6), " + sci(secs) + " s (<10)"};
}

Line geometry_gate() {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const CoefficientB b = CoefficientB::uniform(1.0, 1.0, 1.0, 0.5);
  std::string ball;
  bool refused = false;
  try {
    const Discretization disc(a, 3.0, DomainGeometry::ball(1.0, 3, 0.5), cells(512));
    const BarrierProblem problem{power_minus_one(1.5), b, p3_params(), &disc};
    const auto th = barriers::subsolution_thresholds(problem);
    (void)barriers::build_subsolution(problem, th.lambda_star, th);
    ball = "ball accepted";
  } catch (const Error& e) {
    refused = e.code() == ErrorCode::GeometryInadmissible;
    ball = std::string(to_string(e.code()));
  }
  const Discretization disc(a, 3.0, DomainGeometry::annulus_inner_collar(1.0, 3, 0.5), cells(512));
  const BarrierProblem problem{power_minus_one(1.5), b, p3_params(), &disc};
  const auto th = barriers::subsolution_thresholds(problem);
  const auto [sub, cert] = barriers::build_subsolution(problem, th.lambda_star, th);
  const bool ok = refused && cert.max_residual <= 1e-8;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "ball collar -> " + ball + "; annulus-inner collar accepted (Lambda " + sci(th.Lambda) +
              ", residual " + sci(cert.max_residual) + ")"};
}

Line moser_and_apriori() {
  double eps_err = 0.0;
  for (auto [p, pss] : std::vector<std::pair<double, double>>{{2.0, 3.0}, {1.5, 4.0}, {3.0, 6.0}}) {
    const auto ladder = fixedpoint::moser_ladder(p, pss, 40);
    for (int n = 0; n <= 40; ++n) {
      const double exact = std::pow(pss / p, n) - 1.0;
      eps_err = std::max(eps_err, std::abs(ladder.epsilons[n] - exact) / std::max(1.0, exact));
    }
  }
  // A priori ratio over the regression family.
  double ratio = 0.0;
  auto torsion = [&](const WeightProfile& w, double p, const DomainGeometry& g, double k) {
    const Discretization disc(w, p, g, cells(1024));
    const auto rhs = disc.sample_points([k](double, double) { return k; });
    auto [u, r] = resolvent::solve(disc, rhs);
    ratio = std::max(ratio, fixedpoint::apriori_check(disc, u, rhs));
  };
  for (double p : {1.5, 2.0, 3.0}) {
    for (double k : {1.0, std::pow(2.0, p - 1.0), 100.0}) {
      torsion(WeightProfile::uniform(1.0, 0.5), p, DomainGeometry::interval(1.0, 0.5), k);
      torsion(WeightProfile::power(1.0, 0.3 * (p - 1.0), 0.5), p,
              DomainGeometry::interval(1.0, 0.5), k);
    }
  }
  torsion(WeightProfile::uniform(1.0, 0.5), 2.0, DomainGeometry::ball(1.0, 3, 0.5), 1.0);
  const bool ok = eps_err <= 1e-12 && ratio < 10.0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "eps_n relative error " + sci(eps_err) + " for n <= 40 (<=1e-12), max a priori ratio " +
              sci(ratio) + " (<10)"};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Line determinism() {
  const fs::path root = fs::temp_directory_path() / "degenlap_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "verify.toml";
  std::ofstream(cfg) << "[verify]\nscenarios = [\"all\"]\nseed = 20240601\n";
  std::ostringstream out, err;
  const int a = cli::run({"degenlap", "verify", "--config", cfg.string(), "--out",
                          (root / "a").string()},
                         out, err);
  const int b = cli::run({"degenlap", "verify", "--config", cfg.string(), "--out",
                          (root / "b").string()},
                         out, err);
  const std::string ja = slurp(root / "a" / "verify.json");
  const std::string jb = slurp(root / "b" / "verify.json");
  const bool same = !ja.empty() && ja == jb;
  return {same && a == 0 && b == 0 ? Verdict::Pass : Verdict::Fail,
          std::string(same ? "byte-identical" : "different") + " verify.json (" +
              std::to_string(ja.size()) + " bytes), exit codes " + std::to_string(a) + "/" +
              std::to_string(b)};
}

}  // namespace

int main() {
  criterion(1, "closed-form regression", closed_forms);
  criterion(2, "resolvent homogeneity", homogeneity);
  criterion(3, "comparison principle", comparison_principle);
  criterion(4, "psi certification", psi_certification);
  criterion(5, "barrier gluing", gluing);
  criterion(6, "solve_rho", solve_rho);
  criterion(7, "subsolution residual", subsolution_residual);
  criterion(8, "semipositone end to end", semipositone);
  criterion(9, "geometry gate", geometry_gate);
  criterion(10, "Moser ladder and a priori ratio", moser_and_apriori);
  criterion(11, "determinism", determinism);
  std::printf("%s\n", failures == 0 ? "acceptance: all criteria met" : "acceptance: failures");
  return failures == 0 ? 0 : 1;
}
