#include "degenlap/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "degenlap/error.hpp"

namespace degenlap::barriers {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Cubic Hermite interpolation on an increasing grid.
double hermite(const std::vector<double>& x, const std::vector<double>& f,
               const std::vector<double>& df, double t) {
  if (t <= x.front()) return f.front();
  if (t >= x.back()) return f.back();
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double h = x[i + 1] - x[i];
  const double s = (t - x[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * f[i] + (s3 - 2 * s2 + s) * h * df[i] +
         (-2 * s3 + 3 * s2) * f[i + 1] + (s3 - s2) * h * df[i + 1];
}

double golden_min(const std::function<double(double)>& g, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    if (gc <= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Nonlinearity

NonlinearitySpec::NonlinearitySpec(Scalar f, Scalar f_tilde, double mu, double r)
    : f_(std::move(f)), f_tilde_(std::move(f_tilde)), mu_(mu), r_(r) {
  if (!f_) throw Error(ErrorCode::InvalidArgument, "nonlinearity needs f");
  build_cache();
}

NonlinearitySpec::NonlinearitySpec(Scalar f) : f_(std::move(f)) {
  if (!f_) throw Error(ErrorCode::InvalidArgument, "nonlinearity needs f");
  build_cache();
}

void NonlinearitySpec::build_cache() {
  // Uniform on [0,1], then geometric up to 1e12.
  constexpr std::size_t kUniform = 200000;
  constexpr std::size_t kGeometric = 800000;
  auto grid = std::make_shared<std::vector<double>>();
  grid->reserve(kUniform + kGeometric + 1);
  for (std::size_t i = 0; i <= kUniform; ++i) grid->push_back(static_cast<double>(i) / kUniform);
  const double ratio = std::pow(1e12, 1.0 / kGeometric);
  double z = 1.0;
  for (std::size_t i = 1; i <= kGeometric; ++i) {
    z = std::pow(ratio, static_cast<double>(i));
    grid->push_back(z);
  }
  grid->back() = 1e12;
  auto run = std::make_shared<std::vector<double>>(grid->size());
  double best = -kInf;
  monotone_ = true;
  double prev = -kInf;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double v = f_((*grid)[i]);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NaNEncountered, "f is not finite at " + num((*grid)[i]));
    }
    if (v < prev) monotone_ = false;
    prev = v;
    best = std::max(best, v);
    (*run)[i] = best;
  }
  grid_ = std::move(grid);
  running_max_ = std::move(run);
}

double NonlinearitySpec::f_tilde(double z) const {
  if (!f_tilde_) throw Error(ErrorCode::EnvelopeFailure, "no minorant f_tilde supplied");
  return f_tilde_(z);
}

double NonlinearitySpec::f_hat(double z) const {
  if (z < 0.0) z = 0.0;
  if (monotone_) return f_(z);
  const auto& x = *grid_;
  const auto& m = *running_max_;
  if (z >= x.back()) return std::max(m.back(), f_(z));
  const auto it = std::upper_bound(x.begin(), x.end(), z);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double s = (z - x[i]) / (x[i + 1] - x[i]);
  return (1.0 - s) * m[i] + s * m[i + 1];
}

double f_hat(const NonlinearitySpec& spec, double z) { return spec.f_hat(z); }

weights::ValidationReport NonlinearitySpec::validate(double p) const {
  weights::ValidationReport report;
  const double f0 = f_(0.0);
  report.add({"f(0) <= 0", f0 <= 0.0, f0, ""}, ErrorCode::InvalidArgument);
  double fmin = kInf;
  for (std::size_t i = 0; i < grid_->size(); i += 7) fmin = std::min(fmin, f_((*grid_)[i]));
  report.add({"min f < 0", fmin < 0.0, fmin, ""}, ErrorCode::InvalidArgument);

  const double r2 = f_hat(1e2) / std::pow(1e2, p - 1.0);
  const double r8 = f_hat(1e8) / std::pow(1e8, p - 1.0);
  const bool sublinear = r8 <= 1e-6 || r8 < 0.1 * std::abs(r2);
  report.add({"f_hat(z)/z^{p-1} -> 0", sublinear, r8,
              "ratio " + num(r2) + " at 1e2, " + num(r8) + " at 1e8"},
             ErrorCode::SublinearityUnverifiable);

  if (f_tilde_) {
    bool monotone = true;
    bool below = true;
    double prev = f_tilde_(0.0);
    std::string where;
    for (int k = 0; k <= 4000; ++k) {
      const double z = k == 0 ? 0.0 : std::pow(10.0, -6.0 + 14.0 * k / 4000.0);
      const double ft = f_tilde_(z);
      if (ft < prev - 1e-12 * (1.0 + std::abs(prev))) monotone = false;
      if (ft > f_(z) + 1e-12 * (1.0 + std::abs(f_(z)))) {
        if (below) where = "f_tilde > f at z = " + num(z);
        below = false;
      }
      prev = ft;
    }
    report.add({"f_tilde nondecreasing", monotone, 0.0, ""}, ErrorCode::EnvelopeFailure);
    report.add({"f_tilde <= f", below, 0.0, where}, ErrorCode::EnvelopeFailure);
    const double ft0 = f_tilde_(0.0);
    report.add({"f_tilde(0) < 0", ft0 < 0.0, ft0, ""}, ErrorCode::EnvelopeFailure);
    const double g6 = f_tilde_(1e6) / std::pow(1e6, r_);
    const double g8 = f_tilde_(1e8) / std::pow(1e8, r_);
    const bool growth = mu_ > 0.0 && std::abs(g8 / mu_ - 1.0) < 0.05 &&
                        std::abs(g6 / mu_ - 1.0) < 0.05;
    report.add({"f_tilde(z)/z^r -> mu", growth, g8,
                "ratio " + num(g6) + " at 1e6, " + num(g8) + " at 1e8, mu = " + num(mu_)},
               ErrorCode::EnvelopeFailure);
    report.add({"0 < r < p-1", r_ > 0.0 && r_ < p - 1.0, r_, ""}, ErrorCode::InvalidArgument);
  }
  return report;
}

std::string SubsolutionParams::validate(double p, double mu) const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (!(r > 0.0 && r < p - 1.0)) fail("r = " + num(r) + " must lie in (0, p-1)");
  const double lo = 1.0 / (p - 1.0);
  const double hi = 1.0 / (p - 1.0 - r);
  if (!(sigma > lo && sigma < hi)) {
    fail("sigma = " + num(sigma) + " must lie in (" + num(lo) + ", " + num(hi) + ")");
  }
  if (!(beta > 1.0 && beta < 1.0 + 1.0 / (p - 1.0))) {
    fail("beta = " + num(beta) + " must lie in (1, 1 + 1/(p-1))");
  }
  if (epsilon != 0.0 && !(epsilon > 0.0 && epsilon < mu)) {
    fail("epsilon = " + num(epsilon) + " must lie in (0, mu = " + num(mu) + ")");
  }
  if (coupling && !(*coupling > 0.0)) fail("coupling must be > 0");
  return r <= 1.0 ? "r <= 1 lies outside the range r in (1, p-1) of the original construction"
                  : "";
}

// ---------------------------------------------------------------------------
// rho(lambda)

RhoProblem::RhoProblem(const weights::WeightProfile& profile, double Lambda, double p,
                       double beta, double rho1, double kappa, double coupling)
    : profile_(profile),
      dist_(profile, p),
      Lambda_(Lambda),
      p_(p),
      beta_(beta),
      rho1_(rho1),
      kappa_(kappa),
      coupling_(coupling),
      gamma_(profile.singular_exponent(p)) {
  if (!(rho1 > 0.0 && rho1 <= profile.rho0())) {
    throw Error(ErrorCode::InvalidArgument, "rho1 must lie in (0, rho0]");
  }
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be > 0");
  constexpr std::size_t kGrid = 2000;
  grid_.resize(kGrid);
  t_grid_.resize(kGrid);
  std::size_t best = 0;
  for (std::size_t j = 0; j < kGrid; ++j) {
    grid_[j] = 0.5 * rho1 + 0.5 * rho1 * static_cast<double>(j) / kGrid;
    t_grid_[j] = t(grid_[j]);
    if (t_grid_[j] < t_grid_[best]) best = j;
  }
  const double a = best == 0 ? grid_[0] : grid_[best - 1];
  const double b = best + 1 < kGrid ? grid_[best + 1] : 0.5 * (grid_.back() + rho1);
  rho_hat_ = golden_min([this](double r) { return t(r); }, a, b);
  t_hat_ = t(rho_hat_);
  if (t_grid_[best] < t_hat_) {
    rho_hat_ = grid_[best];
    t_hat_ = t_grid_[best];
  }
  lambda_hat1_ = std::pow(t_hat_ / coupling_, 1.0 / kappa_);
}

double RhoProblem::t(double rho) const {
  if (rho >= rho1_) return kInf;
  const double d = dist_(rho);
  const double A = std::pow(beta_, p_ - 1.0) * std::pow(d, -(p_ - 1.0));
  const double H = quadrature::integrate(
      [this](double s) { return std::exp(Lambda_ * s) * profile_.inverse_root(s, p_); }, rho,
      rho1_);
  return std::exp(Lambda_ * rho) * A / H;
}

double RhoProblem::solve(double lambda, int* bisections) const {
  if (lambda < lambda_hat1_ * (1.0 - 1e-12)) {
    throw Error(ErrorCode::BelowLambdaHat1,
                "lambda = " + num(lambda) + " below lambda_hat1 = " + num(lambda_hat1_));
  }
  const double target = coupling_ * std::pow(lambda, kappa_);
  if (bisections) *bisections = 0;
  if (target <= t_hat_) return rho_hat_;
  double lo = rho_hat_;
  double hi = rho1_;
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    if (grid_[j] <= rho_hat_) continue;
    if (t_grid_[j] >= target) {
      hi = grid_[j];
      break;
    }
    lo = grid_[j];
  }
  int count = 0;
  while (hi - lo > 1e-15 * rho1_ && count < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (t(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++count;
  }
  if (bisections) *bisections = count;
  return 0.5 * (lo + hi);
}

RhoRecord solve_rho(const weights::WeightProfile& profile, const geometry::DomainGeometry& geom,
                    const SubsolutionParams& params, double p, double lambda, double coupling) {
  const double rho1 = params.rho1 > 0.0 ? params.rho1 : profile.rho0();
  const auto info = geom.lambda_constants(std::min(rho1, geom.rho0()));
  if (info.lambda_min < -geometry::kTolGeom) {
    throw Error(ErrorCode::GeometryInadmissible,
                "lambda_min = " + num(info.lambda_min) + " < 0 on " + geom.describe());
  }
  RhoProblem problem(profile, std::max(0.0, info.lambda_min), p, params.beta, rho1,
                     params.kappa(p), coupling);
  RhoRecord rec;
  rec.rho_hat = problem.rho_hat();
  rec.t_hat = problem.t_hat();
  rec.lambda_hat1 = problem.lambda_hat1();
  rec.rho = problem.solve(lambda, &rec.bisections);
  rec.t_rho = problem.t(rec.rho);
  return rec;
}

// ---------------------------------------------------------------------------
// Subsolution

Subsolution::Subsolution(const weights::WeightProfile& profile, double p, double Lambda,
                         const SubsolutionParams& params, double coupling, double lambda,
                         double rho)
    : profile_(profile),
      dist_(profile, p),
      p_(p),
      Lambda_(Lambda),
      params_(params),
      coupling_(coupling),
      lambda_(lambda),
      rho_(rho),
      rho1_(params.rho1 > 0.0 ? params.rho1 : profile.rho0()),
      kappa_(params.kappa(p)) {
  if (!(rho > 0.0 && rho < rho1_)) {
    throw Error(ErrorCode::InvalidArgument, "gluing radius must lie in (0, rho1)");
  }
  const double beta = params_.beta;
  d_rho_ = dist_(rho_);
  A_ = std::pow(beta, p - 1.0) * std::pow(d_rho_, -(p - 1.0));
  B_ = std::pow(d_rho_, -beta);
  S0_ = std::exp(Lambda_ * rho_) * A_;
  scale_ = std::pow(lambda_, params_.sigma);
  flux_scale_ = std::pow(lambda_, params_.sigma * (p - 1.0));

  const double e = 1.0 / (p - 1.0);
  const double load = coupling_ * std::pow(lambda_, kappa_);
  quadrature::MeshGrading grading{0.7, 1e-12 * rho1_, false, true};
  quadrature::QuadratureLayout layout(quadrature::graded_mesh(rho_, rho1_, 2000, grading), 0.0,
                                      0.0, 8);
  const auto pts = layout.points();
  std::vector<double> growth(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    growth[k] = std::exp(Lambda_ * pts[k]) * profile_.inverse_root(pts[k], p);
  }
  const auto Hc = layout.cumulative(growth);
  std::vector<double> g(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double S = std::max(0.0, S0_ - load * Hc.at_points[k]);
    g[k] = std::exp(-Lambda_ * pts[k] * e) * profile_.inverse_root(pts[k], p) * std::pow(S, e);
  }
  const auto Phi = layout.cumulative(g);
  const auto nodes = layout.nodes();
  y_.assign(nodes.begin(), nodes.end());
  H_ = Hc.at_nodes;
  phi_.resize(y_.size());
  dphi_.resize(y_.size());
  dH_.resize(y_.size());
  for (std::size_t i = 0; i < y_.size(); ++i) {
    phi_[i] = 1.0 + Phi.at_nodes[i];
    dH_[i] = std::exp(Lambda_ * y_[i]) * profile_.inverse_root(y_[i], p);
    const double S = std::max(0.0, S0_ - load * H_[i]);
    dphi_[i] = std::exp(-Lambda_ * y_[i] * e) * profile_.inverse_root(y_[i], p) * std::pow(S, e);
  }
}

double Subsolution::H(double y) const { return hermite(y_, H_, dH_, y); }

double Subsolution::phi(double y) const { return hermite(y_, phi_, dphi_, y); }

double Subsolution::v(double y) const {
  if (y <= 0.0) return 0.0;
  if (y <= rho_) return B_ * std::pow(dist_(y), params_.beta);
  if (y < rho1_) return phi(y);
  return phi_.back();
}

double Subsolution::dv(double y) const {
  const double e = 1.0 / (p_ - 1.0);
  if (y <= rho_) {
    return params_.beta * B_ * std::pow(dist_(y), params_.beta - 1.0) *
           profile_.inverse_root(y, p_);
  }
  if (y < rho1_) {
    const double S = std::max(0.0, S0_ - coupling_ * std::pow(lambda_, kappa_) * H(y));
    return std::exp(-Lambda_ * y * e) * profile_.inverse_root(y, p_) * std::pow(S, e);
  }
  return 0.0;
}

double Subsolution::flux_v(double y) const {
  const double beta = params_.beta;
  if (y <= rho_) {
    return std::pow(B_ * beta, p_ - 1.0) * std::pow(dist_(y), (beta - 1.0) * (p_ - 1.0));
  }
  if (y < rho1_) {
    const double S = std::max(0.0, S0_ - coupling_ * std::pow(lambda_, kappa_) * H(y));
    return std::exp(-Lambda_ * y) * S;
  }
  return 0.0;
}

double Subsolution::value_gap() const {
  return std::abs(B_ * std::pow(d_rho_, params_.beta) - 1.0);
}

double Subsolution::flux_gap() const {
  const double beta = params_.beta;
  const double left = std::pow(beta, p_ - 1.0) * std::pow(B_, p_ - 1.0) *
                      std::pow(d_rho_, (beta - 1.0) * (p_ - 1.0));
  return std::abs(left - A_) / A_;
}

bool Subsolution::phi_increasing() const {
  for (std::size_t i = 1; i < phi_.size(); ++i) {
    if (!(phi_[i] >= phi_[i - 1])) return false;
  }
  return phi_.back() > phi_.front();
}

// ---------------------------------------------------------------------------
// Problem data

double BarrierProblem::epsilon() const {
  return params.epsilon > 0.0 ? params.epsilon : 0.5 * nonlinearity.mu();
}

double BarrierProblem::rho1() const {
  if (params.rho1 > 0.0) return params.rho1;
  const double r = weights::envelope_radius(b, profile(), p());
  if (!(r > 0.0)) {
    throw Error(ErrorCode::EnvelopeViolated, "b violates its envelope at the boundary");
  }
  return std::min(r, geometry().max_dist());
}

double BarrierProblem::coupling() const {
  return params.coupling.value_or(std::min(1.0, b.c1 * (nonlinearity.mu() - epsilon())));
}

double BarrierProblem::admissible_Lambda() const {
  const auto& geom = geometry();
  const auto info = geom.lambda_constants(std::min(rho1(), geom.rho0()));
  if (info.lambda_min < -geometry::kTolGeom) {
    throw Error(ErrorCode::GeometryInadmissible,
                "lambda_min = " + num(info.lambda_min) + " < 0 on " + geom.describe());
  }
  return std::max(0.0, info.lambda_min);
}

namespace {

SubsolutionParams resolved(const BarrierProblem& problem) {
  SubsolutionParams out = problem.params;
  out.epsilon = problem.epsilon();
  out.rho1 = problem.rho1();
  out.coupling = problem.coupling();
  return out;
}

void require_minorant(const BarrierProblem& problem) {
  if (!problem.nonlinearity.has_minorant()) {
    throw Error(ErrorCode::EnvelopeFailure,
                "subsolution needs a minorant f_tilde with growth data (mu, r)");
  }
}

struct StarChecks {
  bool double_star = false;
  bool triple_star = false;
  double envelope_worst = 0.0;
};

StarChecks star_checks(const BarrierProblem& problem, const SubsolutionParams& params,
                       const Subsolution& sub) {
  const double p = problem.p();
  const double lambda = sub.lambda();
  const double mu = problem.nonlinearity.mu();
  const double eps = params.epsilon;
  const double beta = params.beta;
  const double sigma = params.sigma;
  const double r = params.r;
  StarChecks out;
  const double d1 = weights::weighted_distance(problem.profile(), p, params.rho1);
  const double lhs = std::pow(lambda, 1.0 - sigma * (p - 1.0)) * problem.b.c2 *
                     (-problem.nonlinearity.f_tilde_zero());
  const double rhs = std::pow(beta, p - 1.0) * (beta - 1.0) * (p - 1.0) * std::pow(d1, -p);
  out.double_star = lhs <= rhs;
  out.triple_star = std::pow(lambda, -sigma * (p - 1.0)) / (problem.b.c1 * (mu - eps)) <= 1.0;
  double worst = kInf;
  const double lam_s = std::pow(lambda, sigma);
  constexpr int kSamples = 2000;
  for (int k = 0; k <= kSamples; ++k) {
    const double y = sub.rho() + (params.rho1 - sub.rho()) * k / kSamples;
    const double v = sub.v(y);
    const double need = (mu - eps) * std::pow(lam_s * v, r);
    const double have = problem.nonlinearity.f_tilde(lam_s * v);
    worst = std::min(worst, (have - need) / need);
  }
  out.envelope_worst = worst;
  return out;
}

}  // namespace

LambdaThresholds subsolution_thresholds(const BarrierProblem& problem) {
  require_minorant(problem);
  const double p = problem.p();
  SubsolutionParams params = resolved(problem);
  LambdaThresholds th;
  th.note = params.validate(p, problem.nonlinearity.mu());
  th.Lambda = problem.admissible_Lambda();
  th.coupling = *params.coupling;
  RhoProblem rho_problem(problem.profile(), th.Lambda, p, params.beta, params.rho1,
                         params.kappa(p), th.coupling);
  th.lambda_hat1 = rho_problem.lambda_hat1();
  for (int k = 0; k < 2000; ++k) {
    const double lambda = th.lambda_hat1 * std::pow(1.1, k);
    const double rho = rho_problem.solve(std::max(lambda, th.lambda_hat1));
    Subsolution sub(problem.profile(), p, th.Lambda, params, th.coupling, lambda, rho);
    const auto checks = star_checks(problem, params, sub);
    if (checks.double_star && checks.triple_star && checks.envelope_worst >= -1e-12) {
      th.lambda_star = lambda;
      th.rho_of_lambda.rho_hat = rho_problem.rho_hat();
      th.rho_of_lambda.t_hat = rho_problem.t_hat();
      th.rho_of_lambda.lambda_hat1 = th.lambda_hat1;
      th.rho_of_lambda.rho = rho;
      th.rho_of_lambda.t_rho = rho_problem.t(rho);
      return th;
    }
  }
  throw Error(ErrorCode::EnvelopeFailure, "no lambda_star found on the search grid");
}

SubsolutionCertificate certify_subsolution(const BarrierProblem& problem, const Subsolution& sub,
                                           std::size_t residual_nodes) {
  const auto params = resolved(problem);
  const auto& geom = problem.geometry();
  const double lambda = sub.lambda();
  const double rho = sub.rho();
  const double rho1 = sub.rho1();
  const double y_end = geom.max_dist();

  // Dense mesh: [0, rho] graded at 0, [rho, rho1] graded at rho1, plateau.
  const std::size_t n = std::max<std::size_t>(residual_nodes, 64);
  const std::size_t n1 = n / 2;
  const std::size_t n3 = y_end > rho1 * (1.0 + 1e-12) ? std::max<std::size_t>(n / 20, 4) : 0;
  const std::size_t n2 = n - n1 - n3 - 1;
  std::vector<double> y =
      quadrature::graded_mesh(0.0, rho, n1, {0.7, 1e-12 * rho1, true, false});
  const auto y2 = quadrature::graded_mesh(rho, rho1, n2, {0.7, 1e-12 * rho1, false, true});
  y.insert(y.end(), y2.begin() + 1, y2.end());
  if (n3 > 0) {
    for (std::size_t j = 1; j <= n3; ++j) {
      y.push_back(rho1 + (y_end - rho1) * static_cast<double>(j) / n3);
    }
  }

  SubsolutionCertificate cert;
  cert.nodes = y.size();
  double worst = -kInf;
  double worst_y = 0.0;
  double scale = 0.0;
  for (std::size_t c = 0; c < geom.components().size(); ++c) {
    const auto& J = geom.components()[c].jacobian;
    std::vector<double> JF(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) JF[i] = J(y[i]) * sub.flux(y[i]);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
      const double h = y[i + 1] - y[i];
      const double m = y[i] + 0.5 * h;
      const double div = -(JF[i + 1] - JF[i]) / (h * J(m));
      const double load = lambda * problem.b(m) * problem.nonlinearity.f_tilde(sub.value(m));
      const double local = std::abs(div) + std::abs(load);
      scale = std::max(scale, local);
      const double res = local > 0.0 ? (div - load) / local : 0.0;
      if (res > worst) {
        worst = res;
        worst_y = m;
      }
    }
  }
  cert.scale = scale;
  cert.max_residual = worst;
  cert.worst_y = worst_y;
  const auto checks = star_checks(problem, params, sub);
  cert.lambda_double_star = checks.double_star;
  cert.lambda_triple_star = checks.triple_star;
  cert.envelope_worst = checks.envelope_worst;
  return cert;
}

std::pair<Subsolution, SubsolutionCertificate> build_subsolution(
    const BarrierProblem& problem, double lambda, const LambdaThresholds& thresholds,
    std::size_t residual_nodes) {
  require_minorant(problem);
  const double p = problem.p();
  const auto params = resolved(problem);
  const double Lambda = problem.admissible_Lambda();
  if (lambda < thresholds.lambda_hat1 * (1.0 - 1e-12)) {
    throw Error(ErrorCode::BelowLambdaHat1, "lambda = " + num(lambda) + " below lambda_hat1 = " +
                                                num(thresholds.lambda_hat1));
  }
  if (lambda < thresholds.lambda_star * (1.0 - 1e-12)) {
    throw Error(ErrorCode::BelowLambdaStar, "lambda = " + num(lambda) + " below lambda_star = " +
                                                num(thresholds.lambda_star));
  }
  RhoProblem rho_problem(problem.profile(), Lambda, p, params.beta, params.rho1, params.kappa(p),
                         *params.coupling);
  const double rho = rho_problem.solve(lambda);
  Subsolution sub(problem.profile(), p, Lambda, params, *params.coupling, lambda, rho);
  auto cert = certify_subsolution(problem, sub, residual_nodes);
  if (cert.envelope_worst < -1e-12) {
    throw Error(ErrorCode::EnvelopeFailure,
                "growth envelope fails, worst relative gap " + num(cert.envelope_worst));
  }
  return {std::move(sub), cert};
}

Field sample_subsolution(const resolvent::Discretization& disc, const Subsolution& sub) {
  const auto& geom = disc.geometry();
  const auto& layout = disc.layout();
  Field u = disc.field_from([&](double, double dist) { return sub.value(dist); }, "u_lower");
  const auto nodes = layout.nodes();
  u.flux.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double slope = geom.dist_slope(nodes[i] - nodes.front(), nodes.back() - nodes[i]);
    u.flux[i] = slope * geom.measure(nodes[i]) * sub.flux(u.dist[i]);
  }
  const auto off_lo = layout.lo_offsets();
  const auto off_hi = layout.hi_offsets();
  const auto& meas = disc.point_measure();
  const auto& dist = disc.point_dist();
  const double scale = std::pow(sub.lambda(), sub.sigma());
  u.point_derivs.resize(dist.size());
  u.point_flux.resize(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double slope = geom.dist_slope(off_lo[k], off_hi[k]);
    u.point_derivs[k] = slope * scale * sub.dv(dist[k]);
    u.point_flux[k] = slope * meas[k] * sub.flux(dist[k]);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Supersolution and ordering

namespace {
Field resolve_psi(const BarrierProblem& problem);
}  // namespace

Supersolution build_supersolution(const BarrierProblem& problem, double lambda) {
  return build_supersolution(problem, resolve_psi(problem), lambda);
}

Supersolution build_supersolution(const BarrierProblem& problem, const Field& psi,
                                  double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be > 0");
  const double p = problem.p();
  const auto& nl = problem.nonlinearity;
  Supersolution out;
  out.psi = psi;
  out.psi_sup = psi.sup_norm();
  if (!(out.psi_sup > 0.0)) throw Error(ErrorCode::InvalidArgument, "psi vanishes identically");
  out.epsilon = 1.0 / (lambda * std::pow(out.psi_sup, p - 1.0));

  if (nl.f_hat(1e12) <= 0.0) {
    // Nonpositive nonlinearity: psi itself is a supersolution.
    out.zeta = out.psi_sup;
    out.M = 1.0;
  } else {
    auto excess = [&](double z) { return nl.f_hat(z) - out.epsilon * std::pow(z, p - 1.0); };
    constexpr double kRatio = 1.001;
    const int kmax = static_cast<int>(std::ceil(std::log(1e12) / std::log(kRatio)));
    int last = -1;
    for (int k = 0; k <= kmax; ++k) {
      if (excess(std::pow(kRatio, k)) > 0.0) last = k;
    }
    if (last == kmax) {
      throw Error(ErrorCode::SublinearityUnverifiable,
                  "f_hat(z) > eps z^{p-1} persists up to 1e12 (eps = " + num(out.epsilon) + ")");
    }
    if (last < 0) {
      out.zeta = 1.0;
    } else {
      double lo = std::pow(kRatio, last);
      double hi = std::pow(kRatio, last + 1);
      for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      out.zeta = hi;
    }
    const double raw = out.zeta / out.psi_sup;
    out.M = std::pow(kRatio, std::ceil(std::log(raw) / std::log(kRatio) - 1e-12));
  }
  out.certificate = lambda * nl.f_hat(out.M * out.psi_sup) - std::pow(out.M, p - 1.0);
  out.u_upper = psi;
  out.u_upper.scale(out.M);
  out.u_upper.label = "u_upper";
  return out;
}

BarrierPair order_pair(const BarrierProblem& problem, const Subsolution& sub,
                       const SubsolutionCertificate& cert, const Supersolution& super,
                       const LambdaThresholds& thresholds) {
  const double p = problem.p();
  const auto params = resolved(problem);
  const double lambda = sub.lambda();
  const Field lower = sample_subsolution(*problem.disc, sub);
  const double rhs = std::pow(sub.phi_rho1(), params.r);
  const double factor = problem.b.c1 * std::pow(lambda, params.sigma * (p - 1.0 - params.r) - 1.0);
  const double tol = 1e-10 * std::max(1.0, lower.sup_norm());

  double M = super.M;
  for (int k = 0; k < 2000; ++k) {
    const double lhs = factor * std::pow(M, p - 1.0);
    double gap = kInf;
    std::size_t worst = 0;
    const double scale = M / super.M;
    for (std::size_t i = 0; i < lower.values.size(); ++i) {
      const double g = scale * super.u_upper.values[i] - lower.values[i];
      if (g < gap) {
        gap = g;
        worst = i;
      }
    }
    for (std::size_t i = 0; i < lower.point_values.size(); ++i) {
      gap = std::min(gap, scale * super.u_upper.point_values[i] - lower.point_values[i]);
    }
    if (lhs >= rhs && gap >= -tol) {
      BarrierPair pair;
      pair.u_lower = lower;
      pair.u_upper = super.psi;
      pair.u_upper.scale(M);
      pair.u_upper.label = "u_upper";
      pair.thresholds = thresholds;
      pair.thresholds.M_of_lambda = M;
      pair.sub_residual = cert.max_residual;
      pair.super_certificate =
          lambda * problem.nonlinearity.f_hat(M * super.psi_sup) - std::pow(M, p - 1.0);
      pair.M = M;
      pair.ordering_gap = gap;
      pair.prop_lhs = lhs;
      pair.prop_rhs = rhs;
      pair.enlargements = k;
      return pair;
    }
    if (k == 1999) {
      throw Error(ErrorCode::OrderingFailure,
                  "u_lower > u_upper at x = " + num(lower.x[worst]) + " (gap " + num(gap) + ")");
    }
    M *= 1.1;
  }
  throw Error(ErrorCode::OrderingFailure, "ordering not reached");
}

namespace {

void sweep_lambda0(const BarrierProblem& problem, const Field& psi, LambdaThresholds& th) {
  for (int k = 0; k <= 40; ++k) {
    const double lambda = th.lambda_star * std::pow(2.0, k);
    try {
      auto [sub, cert] = build_subsolution(problem, lambda, th, 2000);
      const auto super = build_supersolution(problem, psi, lambda);
      const auto pair = order_pair(problem, sub, cert, super, th);
      th.lambda_0 = lambda;
      th.M_of_lambda = pair.M;
      th.rho_of_lambda.rho = sub.rho();
      return;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OrderingFailure) throw;
    }
  }
  throw Error(ErrorCode::OrderingFailure, "no ordered pair up to 2^40 lambda_star");
}

Field resolve_psi(const BarrierProblem& problem) {
  const auto g = problem.disc->sample_points([&](double, double dist) { return problem.b(dist); });
  auto psi = resolvent::solve(*problem.disc, g).first;
  psi.label = "psi";
  return psi;
}

}  // namespace

LambdaThresholds compute_thresholds(const BarrierProblem& problem) {
  LambdaThresholds th = subsolution_thresholds(problem);
  sweep_lambda0(problem, resolve_psi(problem), th);
  return th;
}

BarrierPair build_barriers(const BarrierProblem& problem, double lambda,
                           LambdaThresholds* thresholds) {
  LambdaThresholds th = subsolution_thresholds(problem);
  if (lambda < th.lambda_hat1 * (1.0 - 1e-12)) {
    throw Error(ErrorCode::BelowLambdaHat1,
                "lambda = " + num(lambda) + " below lambda_hat1 = " + num(th.lambda_hat1));
  }
  if (lambda < th.lambda_star * (1.0 - 1e-12)) {
    throw Error(ErrorCode::BelowLambdaStar,
                "lambda = " + num(lambda) + " below lambda_star = " + num(th.lambda_star));
  }
  const Field psi = resolve_psi(problem);
  sweep_lambda0(problem, psi, th);
  auto [sub, cert] = build_subsolution(problem, lambda, th);
  const auto super = build_supersolution(problem, psi, lambda);
  auto pair = order_pair(problem, sub, cert, super, th);
  pair.thresholds.rho_of_lambda.rho = sub.rho();
  pair.thresholds.rho_of_lambda.t_rho =
      RhoProblem(problem.profile(), pair.thresholds.Lambda, problem.p(), problem.params.beta,
                 problem.rho1(), problem.params.kappa(problem.p()), pair.thresholds.coupling)
          .t(sub.rho());
  if (thresholds) *thresholds = pair.thresholds;
  return pair;
}

}  // namespace degenlap::barriers
