#include "degenlap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "degenlap/error.hpp"

namespace degenlap::geometry {

namespace {

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::Interval: return "interval";
    case Kind::Ball: return "ball";
    case Kind::Annulus: return "annulus";
    case Kind::Collar: return "collar";
  }
  return "?";
}

std::string to_string(CurvatureSign sign) {
  switch (sign) {
    case CurvatureSign::Nonnegative: return "nonnegative";
    case CurvatureSign::Indefinite: return "indefinite";
    case CurvatureSign::Negative: return "negative";
  }
  return "?";
}

DomainGeometry DomainGeometry::interval(double L, double rho0) {
  require(L > 0.0, ErrorCode::InvalidArgument, "interval length must be > 0");
  require(rho0 > 0.0 && rho0 <= 0.5 * L, ErrorCode::InvalidArgument,
          "interval collar needs 0 < rho0 <= L/2");
  DomainGeometry g;
  g.kind_ = Kind::Interval;
  g.N_ = 1;
  g.lo_ = 0.0;
  g.hi_ = L;
  g.rho0_ = rho0;
  auto one = [](double) { return 1.0; };
  auto zero = [](double) { return 0.0; };
  g.components_ = {{"left", rho0, one, zero}, {"right", rho0, one, zero}};
  return g;
}

DomainGeometry DomainGeometry::ball(double R, int N, double rho0) {
  require(R > 0.0 && N >= 2, ErrorCode::InvalidArgument, "ball needs R > 0, N >= 2");
  require(rho0 > 0.0 && rho0 < R, ErrorCode::InvalidArgument, "ball collar needs 0 < rho0 < R");
  DomainGeometry g;
  g.kind_ = Kind::Ball;
  g.N_ = N;
  g.lo_ = 0.0;
  g.hi_ = R;
  g.rho0_ = rho0;
  g.lo_bc_ = EndCondition::ZeroFlux;
  const double e = N - 1.0;
  g.components_ = {{"sphere", rho0, [R, e](double y) { return std::pow(R - y, e); },
                    [R, e](double y) { return -e / (R - y); }}};
  return g;
}

DomainGeometry DomainGeometry::annulus(double R_in, double R_out, int N, double rho0) {
  require(R_in > 0.0 && R_out > R_in && N >= 2, ErrorCode::InvalidArgument,
          "annulus needs 0 < R_in < R_out, N >= 2");
  require(rho0 > 0.0 && rho0 <= 0.5 * (R_out - R_in), ErrorCode::InvalidArgument,
          "annulus collar needs 0 < rho0 <= (R_out - R_in)/2");
  DomainGeometry g;
  g.kind_ = Kind::Annulus;
  g.N_ = N;
  g.lo_ = R_in;
  g.hi_ = R_out;
  g.rho0_ = rho0;
  const double e = N - 1.0;
  g.components_ = {
      {"inner", rho0, [R_in, e](double y) { return std::pow(R_in + y, e); },
       [R_in, e](double y) { return e / (R_in + y); }},
      {"outer", rho0, [R_out, e](double y) { return std::pow(R_out - y, e); },
       [R_out, e](double y) { return -e / (R_out - y); }}};
  return g;
}

DomainGeometry DomainGeometry::collar(std::string name, std::function<double(double)> J,
                                      double rho0, double depth) {
  require(rho0 > 0.0 && depth >= rho0, ErrorCode::InvalidArgument,
          "collar needs 0 < rho0 <= depth");
  require(static_cast<bool>(J), ErrorCode::InvalidArgument, "collar needs a Jacobian");
  DomainGeometry g;
  g.kind_ = Kind::Collar;
  g.N_ = 1;
  g.lo_ = 0.0;
  g.hi_ = depth;
  g.rho0_ = rho0;
  g.hi_bc_ = EndCondition::ZeroFlux;
  g.components_ = {{std::move(name), rho0, std::move(J), {}}};
  for (int k = 0; k <= 1000; ++k) {
    const double y = depth * k / 1000.0;
    const double v = g.components_[0].jacobian(y);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::DegenerateJacobian,
                  "collar Jacobian J(" + num(y) + ") = " + num(v));
    }
  }
  return g;
}

DomainGeometry DomainGeometry::annulus_inner_collar(double R_in, int N, double rho0) {
  require(R_in > 0.0 && N >= 2, ErrorCode::InvalidArgument, "collar needs R_in > 0, N >= 2");
  const double e = N - 1.0;
  auto g = collar("annulus_inner", [R_in, e](double y) { return std::pow(R_in + y, e); },
                  rho0, rho0);
  g.N_ = N;
  return g;
}

DomainGeometry DomainGeometry::annulus_outer_collar(double R_out, int N, double rho0) {
  require(R_out > rho0 && N >= 2, ErrorCode::InvalidArgument,
          "collar needs R_out > rho0, N >= 2");
  const double e = N - 1.0;
  auto g = collar("annulus_outer", [R_out, e](double y) { return std::pow(R_out - y, e); },
                  rho0, rho0);
  g.N_ = N;
  return g;
}

std::string DomainGeometry::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "[" << lo_ << ", " << hi_ << "]";
  if (kind_ == Kind::Ball || kind_ == Kind::Annulus) os << " N=" << N_;
  if (kind_ == Kind::Collar) os << " " << components_.front().name;
  os << " rho0=" << rho0_;
  return os.str();
}

double DomainGeometry::jacobian(std::size_t component, double y) const {
  require(component < components_.size(), ErrorCode::InvalidArgument,
          "no boundary component " + std::to_string(component));
  if (y < 0.0 || y > rho0_ * (1.0 + 1e-14)) {
    throw Error(ErrorCode::OutOfCollar, "y = " + num(y) + " outside [0, " + num(rho0_) + "]");
  }
  const double v = components_[component].jacobian(y);
  if (!(v > 0.0)) {
    throw Error(ErrorCode::DegenerateJacobian, "J(" + num(y) + ") = " + num(v));
  }
  return v;
}

double DomainGeometry::dlog_jacobian(std::size_t component, double y) const {
  const Component& c = components_.at(component);
  if (c.dlog_jacobian) {
    static_cast<void>(jacobian(component, y));
    return c.dlog_jacobian(y);
  }
  const double h = 1e-5 * std::max(rho0_, 1e-3);
  auto logj = [&](double t) {
    const double v = c.jacobian(t);
    if (!(v > 0.0)) {
      throw Error(ErrorCode::DegenerateJacobian, "J(" + num(t) + ") = " + num(v));
    }
    return std::log(v);
  };
  static_cast<void>(jacobian(component, y));
  if (y >= h) return (logj(y + h) - logj(y - h)) / (2.0 * h);
  return (-3.0 * logj(y) + 4.0 * logj(y + h) - logj(y + 2.0 * h)) / (2.0 * h);
}

CurvatureInfo DomainGeometry::lambda_constants(double rho,
                                               std::optional<std::size_t> component) const {
  require(rho > 0.0 && rho <= rho0_ * (1.0 + 1e-14), ErrorCode::InvalidArgument,
          "lambda_constants needs 0 < rho <= rho0");
  CurvatureInfo info;
  info.lambda_min = std::numeric_limits<double>::infinity();
  info.lambda_max = -std::numeric_limits<double>::infinity();
  constexpr int kSamples = 1000;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    if (component && *component != c) continue;
    for (int k = 0; k <= kSamples; ++k) {
      const double y = std::min(rho * k / kSamples, rho0_);
      const double g = dlog_jacobian(c, y);
      info.lambda_abs = std::max(info.lambda_abs, std::abs(g));
      info.lambda_min = std::min(info.lambda_min, g);
      info.lambda_max = std::max(info.lambda_max, g);
    }
  }
  if (info.lambda_min >= -kTolGeom) {
    info.mean_curvature_sign = CurvatureSign::Nonnegative;
  } else if (info.lambda_max <= -kTolGeom) {
    info.mean_curvature_sign = CurvatureSign::Negative;
  } else {
    info.mean_curvature_sign = CurvatureSign::Indefinite;
  }
  return info;
}

BoundaryPoint DomainGeometry::dist_to_boundary(double x) const {
  if (x < lo_ || x > hi_) {
    throw Error(ErrorCode::OutsideDomain,
                "x = " + num(x) + " outside [" + num(lo_) + ", " + num(hi_) + "]");
  }
  switch (kind_) {
    case Kind::Interval:
    case Kind::Annulus: {
      const double left = x - lo_;
      const double right = hi_ - x;
      return left <= right ? BoundaryPoint{0, left} : BoundaryPoint{1, right};
    }
    case Kind::Ball:
      return {0, hi_ - x};
    case Kind::Collar:
      return {0, x};
  }
  return {};
}

double DomainGeometry::measure(double x) const {
  switch (kind_) {
    case Kind::Interval:
      return 1.0;
    case Kind::Ball:
    case Kind::Annulus:
      return std::pow(x, N_ - 1.0);
    case Kind::Collar:
      return components_.front().jacobian(x);
  }
  return 1.0;
}

double DomainGeometry::dist_from_offsets(double off_lo, double off_hi) const {
  switch (kind_) {
    case Kind::Interval:
    case Kind::Annulus:
      return std::min(off_lo, off_hi);
    case Kind::Ball:
      return off_hi;
    case Kind::Collar:
      return off_lo;
  }
  return off_lo;
}

double DomainGeometry::dist_slope(double off_lo, double off_hi) const {
  switch (kind_) {
    case Kind::Interval:
    case Kind::Annulus:
      return off_lo <= off_hi ? 1.0 : -1.0;
    case Kind::Ball:
      return -1.0;
    case Kind::Collar:
      return 1.0;
  }
  return 1.0;
}

double DomainGeometry::max_dist() const {
  switch (kind_) {
    case Kind::Interval:
    case Kind::Annulus:
      return 0.5 * (hi_ - lo_);
    case Kind::Ball:
    case Kind::Collar:
      return hi_ - lo_;
  }
  return hi_ - lo_;
}

}  // namespace degenlap::geometry
