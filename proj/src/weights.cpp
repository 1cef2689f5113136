#include "degenlap/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace degenlap::weights {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Log-spaced plus linear sample points in (0, rho0].
std::vector<double> collar_samples(double rho0) {
  std::vector<double> t;
  constexpr int kLog = 241;
  for (int j = 0; j < kLog; ++j) {
    t.push_back(rho0 * std::pow(10.0, -12.0 + 12.0 * j / (kLog - 1)));
  }
  constexpr int kLin = 200;
  for (int j = 1; j <= kLin; ++j) t.push_back(rho0 * j / kLin);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

}  // namespace

WeightProfile WeightProfile::uniform(double c, double rho0) {
  if (!(c > 0.0)) throw Error(ErrorCode::NonPositiveWeight, "uniform weight needs c > 0");
  if (!(rho0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho0 must be > 0");
  WeightProfile w;
  w.family_ = Family::Uniform;
  w.c_ = c;
  w.rho0_ = rho0;
  w.interior_floor_ = c;
  return w;
}

WeightProfile WeightProfile::power(double c, double alpha, double rho0) {
  if (!(c > 0.0)) throw Error(ErrorCode::NonPositiveWeight, "power weight needs c > 0");
  if (!(rho0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho0 must be > 0");
  WeightProfile w;
  w.family_ = Family::Power;
  w.c_ = c;
  w.alpha_ = alpha;
  w.rho0_ = rho0;
  w.interior_floor_ = c * std::pow(rho0, alpha);
  return w;
}

WeightProfile WeightProfile::table(std::vector<double> t, std::vector<double> a,
                                   double rho0) {
  if (t.size() != a.size() || t.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "weight table needs >= 2 matching samples");
  }
  if (!(rho0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho0 must be > 0");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(a[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveWeight,
                  "table sample a(" + fmt_double(t[i]) + ") = " + fmt_double(a[i]));
    }
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "weight table abscissae must increase");
    }
  }
  WeightProfile w;
  w.family_ = Family::Table;
  w.table_t_ = std::move(t);
  w.table_a_ = std::move(a);
  w.rho0_ = rho0;
  w.interior_floor_ = w.collar_value(rho0);
  return w;
}

WeightProfile& WeightProfile::with_interior_floor(double floor) {
  if (!(floor > 0.0)) throw Error(ErrorCode::NonPositiveWeight, "interior floor must be > 0");
  interior_ = Interior::Floor;
  interior_floor_ = floor;
  return *this;
}

double WeightProfile::collar_value(double t) const {
  switch (family_) {
    case Family::Uniform:
      return c_;
    case Family::Power:
      return c_ * std::pow(t, alpha_);
    case Family::Table: {
      if (t <= table_t_.front()) return table_a_.front();
      if (t >= table_t_.back()) return table_a_.back();
      const auto it = std::upper_bound(table_t_.begin(), table_t_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - table_t_.begin()) - 1;
      const double theta = (t - table_t_[i]) / (table_t_[i + 1] - table_t_[i]);
      return std::exp((1.0 - theta) * std::log(table_a_[i]) +
                      theta * std::log(table_a_[i + 1]));
    }
  }
  return c_;
}

double WeightProfile::operator()(double t) const {
  if (t >= rho0_) {
    return interior_ == Interior::Floor ? interior_floor_ : collar_value(rho0_);
  }
  return collar_value(t);
}

double WeightProfile::inverse_root(double t, double p) const {
  return std::pow((*this)(t), -1.0 / (p - 1.0));
}

double WeightProfile::singular_exponent(double p) const {
  if (family_ == Family::Power && alpha_ > 0.0) return alpha_ / (p - 1.0);
  return 0.0;
}

std::string WeightProfile::describe() const {
  switch (family_) {
    case Family::Uniform:
      return "uniform(" + fmt_double(c_) + ")";
    case Family::Power:
      return "power(" + fmt_double(c_) + ", " + fmt_double(alpha_) + ")";
    case Family::Table:
      return "table(" + std::to_string(table_t_.size()) + " samples)";
  }
  return "?";
}

std::pair<double, double> sobolev_exponents(double p, double s, int N) {
  if (!(p > 1.0) || !(p < N)) {
    throw Error(ErrorCode::InvalidExponents,
                "p = " + fmt_double(p) + " not in (1, N=" + std::to_string(N) + ")");
  }
  const double bound = std::max(N / p, 1.0 / (p - 1.0));
  if (!(s > bound)) {
    throw Error(ErrorCode::InvalidExponents,
                "s = " + fmt_double(s) + " must exceed max(N/p, 1/(p-1)) = " +
                    fmt_double(bound));
  }
  const double p_s = p * s / (s + 1.0);
  const double p_s_star = N * p_s / (N - p_s);
  const double critical = N * p / (N - p);
  if (!(p_s < p && p < p_s_star && p_s_star < critical)) {
    throw Error(ErrorCode::InvalidExponents, "exponent chain p_s < p < p_s* < Np/(N-p) fails");
  }
  return {p_s, p_s_star};
}

ExponentSet ExponentSet::make(double p, int N, double s, std::optional<double> q) {
  ExponentSet e;
  e.p = p;
  e.N = N;
  e.s = s;
  if (N < 2) throw Error(ErrorCode::InvalidExponents, "N must be >= 2");
  auto [ps, pss] = sobolev_exponents(p, s, N);
  e.p_s = ps;
  e.p_s_star = pss;
  e.q = q.value_or(p);
  if (!(e.q >= p && e.q < pss)) {
    throw Error(ErrorCode::InvalidExponents,
                "q = " + fmt_double(e.q) + " not in [p, p_s*) = [" + fmt_double(p) +
                    ", " + fmt_double(pss) + ")");
  }
  return e;
}

CoefficientB CoefficientB::uniform(double k, double c1, double c2, double rho0) {
  CoefficientB b;
  b.family = Family::Uniform;
  b.k = k;
  b.c1 = c1;
  b.c2 = c2;
  b.rho0 = rho0;
  return b;
}

CoefficientB CoefficientB::power(double k, double e, double c1, double c2,
                                 double rho0) {
  CoefficientB b;
  b.family = Family::Power;
  b.k = k;
  b.exponent = e;
  b.c1 = c1;
  b.c2 = c2;
  b.rho0 = rho0;
  return b;
}

double CoefficientB::operator()(double t) const {
  const double tt = std::min(t, rho0);
  if (family == Family::Uniform) return k;
  return k * std::pow(tt, exponent);
}

void ValidationReport::add(Check check, ErrorCode code_on_failure) {
  if (!check.passed) {
    if (valid) failure = code_on_failure;
    valid = false;
  }
  checks.push_back(std::move(check));
}

void ValidationReport::raise_if_invalid() const {
  if (valid) return;
  for (const Check& c : checks) {
    if (!c.passed) {
      throw Error(failure.value_or(ErrorCode::InvalidArgument),
                  c.name + (c.detail.empty() ? "" : " (" + c.detail + ")"));
    }
  }
}

double collar_integral(const quadrature::Integrand& f, double rho0,
                       double singular_exponent) {
  if (singular_exponent > 0.0 && singular_exponent < 1.0) {
    quadrature::QuadratureSpec spec;
    spec.singularity_hint = singular_exponent;
    return quadrature::integrate(f, 0.0, rho0, spec);
  }
  // Truncated estimates over decades [rho0 10^{-2(k+1)}, rho0 10^{-2k}].
  double total = 0.0;
  int above = 0;
  for (int k = 0; k < 8; ++k) {
    const double hi = rho0 * std::pow(10.0, -2.0 * k);
    const double lo = rho0 * std::pow(10.0, -2.0 * (k + 1));
    try {
      total += quadrature::integrate(f, lo, hi);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Divergent || e.code() == ErrorCode::NaNEncountered) {
        return kInf;
      }
      throw;
    }
    above = total > 1e12 ? above + 1 : 0;
    if (above >= 2) return kInf;
  }
  return total;
}

ValidationReport validate_weight(const WeightProfile& profile,
                                 const ExponentSet& exps) {
  const double p = exps.p;
  const double s = exps.s;
  const int N = exps.N;
  if (!(p > 1.0) || !(p < N) || !(s > 0.0)) {
    throw Error(ErrorCode::InvalidExponents,
                "need p in (1,N) and s > 0 (p=" + fmt_double(p) +
                    ", N=" + std::to_string(N) + ", s=" + fmt_double(s) + ")");
  }
  const double rho0 = profile.rho0();
  for (double t : collar_samples(rho0)) {
    const double a = profile(t);
    if (!(a > 0.0)) {
      throw Error(ErrorCode::NonPositiveWeight,
                  "a(" + fmt_double(t) + ") = " + fmt_double(a));
    }
  }
  if (!(profile.interior_floor() > 0.0)) {
    throw Error(ErrorCode::NonPositiveWeight, "interior floor must be positive");
  }

  ValidationReport report;
  double int_a = 0.0;
  double int_inv_s = 0.0;
  double int_root = 0.0;
  const double gamma_root = 1.0 / (p - 1.0);
  if (profile.family() == WeightProfile::Family::Power) {
    const double c = profile.c();
    const double alpha = profile.alpha();
    int_a = alpha > -1.0 ? c * std::pow(rho0, alpha + 1.0) / (alpha + 1.0) : kInf;
    int_inv_s = alpha * s < 1.0
                    ? std::pow(c, -s) * std::pow(rho0, 1.0 - alpha * s) / (1.0 - alpha * s)
                    : kInf;
    const double g = alpha * gamma_root;
    int_root = g < 1.0 ? std::pow(c, -gamma_root) * std::pow(rho0, 1.0 - g) / (1.0 - g)
                       : kInf;
  } else {
    int_a = collar_integral([&](double t) { return profile(t); }, rho0);
    int_inv_s = collar_integral([&](double t) { return std::pow(profile(t), -s); }, rho0);
    int_root = collar_integral([&](double t) { return profile.inverse_root(t, p); }, rho0);
  }
  report.add({"a in L^1(0,rho0)", std::isfinite(int_a), int_a, ""},
             ErrorCode::InvalidExponents);
  report.add({"a^{-1} in L^s(0,rho0)", std::isfinite(int_inv_s), int_inv_s,
              profile.family() == WeightProfile::Family::Power
                  ? "alpha*s = " + fmt_double(profile.alpha() * s) + " (needs < 1)"
                  : ""},
             ErrorCode::InvalidExponents);
  const double bound = std::max(static_cast<double>(N) / p, 1.0 / (p - 1.0));
  report.add({"s > max(N/p, 1/(p-1))", s > bound, bound,
              "s = " + fmt_double(s)},
             ErrorCode::InvalidExponents);
  report.add({"a^{-1/(p-1)} in L^1(0,rho0)", std::isfinite(int_root), int_root, ""},
             ErrorCode::InvalidExponents);
  return report;
}

ValidationReport validate_b(const CoefficientB& b, const WeightProfile& profile,
                            const ExponentSet& exps) {
  const double p = exps.p;
  const double q = exps.q;
  const double rho0 = profile.rho0();
  ValidationReport report;
  if (!(b.c1 > 0.0) || !(b.c1 <= b.c2)) {
    throw Error(ErrorCode::InvalidArgument, "envelope constants need 0 < c1 <= c2");
  }
  const auto samples = collar_samples(rho0);

  double min_b = kInf;
  double max_b = 0.0;
  for (double t : samples) {
    min_b = std::min(min_b, b(t));
    max_b = std::max(max_b, b(t));
  }
  report.add({"b >= 0", min_b >= 0.0, min_b, ""}, ErrorCode::EnvelopeViolated);
  report.add({"b not identically 0", max_b > 0.0, max_b, ""}, ErrorCode::EnvelopeViolated);

  // Norm of b in L^{q/(q-p)} over the collar; sup norm when q = p.
  double norm = 0.0;
  std::string norm_name;
  if (q == p) {
    norm_name = "b in L^inf";
    if (b.family == CoefficientB::Family::Power && b.exponent < 0.0) {
      norm = kInf;
    } else {
      norm = max_b;
    }
  } else {
    const double r = q / (q - p);
    norm_name = "b in L^{q/(q-p)}";
    if (b.family == CoefficientB::Family::Power) {
      norm = b.exponent * r > -1.0
                 ? std::pow(std::pow(std::abs(b.k), r) * std::pow(rho0, b.exponent * r + 1.0) /
                                (b.exponent * r + 1.0),
                            1.0 / r)
                 : kInf;
    } else {
      norm = std::abs(b.k) * std::pow(rho0, 1.0 / r);
    }
  }
  report.add({norm_name, std::isfinite(norm), norm, ""}, ErrorCode::EnvelopeViolated);

  std::string offending;
  const double rho1 = envelope_radius(b, profile, p, &offending);
  report.rho1 = rho1;
  report.add({"collar envelope c1 a^{-1/(p-1)} <= b <= c2 a^{-1/(p-1)}", rho1 > 0.0,
              rho1, offending},
             ErrorCode::EnvelopeViolated);
  return report;
}

double envelope_radius(const CoefficientB& b, const WeightProfile& profile, double p,
                       std::string* offending) {
  // Scan from the boundary inward; relative tolerance absorbs rounding.
  constexpr double kTol = 1e-12;
  double rho1 = 0.0;
  for (double t : collar_samples(profile.rho0())) {
    const double ratio = std::pow(profile(t), 1.0 / (p - 1.0)) * b(t);
    if (ratio < b.c1 * (1.0 - kTol) || ratio > b.c2 * (1.0 + kTol)) {
      if (offending) {
        *offending = "a^{1/(p-1)} b = " + fmt_double(ratio) + " at t = " + fmt_double(t) +
                     " outside [" + fmt_double(b.c1) + ", " + fmt_double(b.c2) + "]";
      }
      break;
    }
    rho1 = t;
  }
  return rho1;
}

double weighted_distance(const WeightProfile& profile, double p, double t) {
  if (t < 0.0 || t > profile.rho0() * (1.0 + 1e-15)) {
    throw Error(ErrorCode::OutOfCollar,
                "t = " + fmt_double(t) + " outside [0, rho0 = " + fmt_double(profile.rho0()) + "]");
  }
  if (t == 0.0) return 0.0;
  const double e = 1.0 / (p - 1.0);
  switch (profile.family()) {
    case WeightProfile::Family::Uniform:
      return std::pow(profile.c(), -e) * t;
    case WeightProfile::Family::Power: {
      const double g = profile.alpha() * e;
      if (g >= 1.0) return kInf;
      return std::pow(profile.c(), -e) * std::pow(t, 1.0 - g) / (1.0 - g);
    }
    case WeightProfile::Family::Table:
      return quadrature::integrate([&](double x) { return profile.inverse_root(x, p); },
                                   0.0, t);
  }
  return 0.0;
}

WeightedDistance::WeightedDistance(WeightProfile profile, double p)
    : profile_(std::move(profile)), p_(p) {
  if (profile_.family() == WeightProfile::Family::Table) {
    const WeightProfile copy = profile_;
    const double pp = p_;
    table_.emplace([copy, pp](double x) { return copy.inverse_root(x, pp); },
                   profile_.rho0(), quadrature::QuadratureSpec{});
  }
}

double WeightedDistance::operator()(double t) const {
  if (table_) {
    if (t < 0.0 || t > profile_.rho0() * (1.0 + 1e-15)) {
      throw Error(ErrorCode::OutOfCollar, "t = " + fmt_double(t) + " outside the collar");
    }
    return (*table_)(std::min(t, profile_.rho0()));
  }
  return weighted_distance(profile_, p_, t);
}

}  // namespace degenlap::weights
