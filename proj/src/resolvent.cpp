#include "degenlap/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "degenlap/error.hpp"

namespace degenlap::resolvent {

using geometry::EndCondition;

double p_flux_inverse(double z, double p) {
  if (z == 0.0) return 0.0;
  const double m = std::pow(std::abs(z), 1.0 / (p - 1.0));
  return z < 0.0 ? -m : m;
}

namespace {

double p_flux_inverse_derivative(double z, double p) {
  const double e = 1.0 / (p - 1.0);
  if (z == 0.0) return e == 1.0 ? 1.0 : (e > 1.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return e * std::pow(std::abs(z), e - 1.0);
}

}  // namespace

Discretization::Discretization(weights::WeightProfile profile, double p,
                               geometry::DomainGeometry geom, ResolventSpec spec)
    : profile_(std::move(profile)), p_(p), geom_(std::move(geom)), spec_(spec) {
  if (!(p_ > 1.0)) throw Error(ErrorCode::InvalidExponents, "p must be > 1");
  if (spec_.cells < 4) throw Error(ErrorCode::InvalidArgument, "mesh needs >= 4 cells");
  const bool dir_lo = geom_.lo_condition() == EndCondition::Dirichlet;
  const bool dir_hi = geom_.hi_condition() == EndCondition::Dirichlet;
  if (!dir_lo && !dir_hi) {
    throw Error(ErrorCode::UnsupportedGeometry, "geometry has no Dirichlet end");
  }
  const double gamma = profile_.singular_exponent(p_);
  if (gamma >= 1.0) {
    throw Error(ErrorCode::InvalidExponents,
                "a^{-1/(p-1)} is not integrable at the boundary");
  }
  quadrature::MeshGrading grading{spec_.grading_ratio,
                                  spec_.finest * geom_.rho0(), dir_lo, dir_hi};
  auto nodes = quadrature::graded_mesh(geom_.lo(), geom_.hi(), spec_.cells, grading);
  layout_ = std::make_shared<quadrature::QuadratureLayout>(
      std::move(nodes), dir_lo ? gamma : 0.0, dir_hi ? gamma : 0.0, spec_.order);

  const auto pts = layout_->points();
  const auto off_lo = layout_->lo_offsets();
  const auto off_hi = layout_->hi_offsets();
  point_dist_.resize(pts.size());
  point_measure_.resize(pts.size());
  point_ainv_.resize(pts.size());
  point_a_.resize(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double dist = geom_.dist_from_offsets(off_lo[k], off_hi[k]);
    point_dist_[k] = dist;
    point_measure_[k] = geom_.measure(pts[k]);
    point_a_[k] = profile_(dist);
    point_ainv_[k] = std::pow(point_a_[k], -1.0 / (p_ - 1.0));
    if (!std::isfinite(point_ainv_[k]) || !(point_measure_[k] >= 0.0)) {
      std::ostringstream os;
      os << "weight sample not finite at x = " << pts[k];
      throw Error(ErrorCode::NaNEncountered, os.str());
    }
  }
  const auto nd = layout_->nodes();
  node_dist_.resize(nd.size());
  for (std::size_t i = 0; i < nd.size(); ++i) {
    node_dist_[i] = geom_.dist_from_offsets(nd[i] - nd.front(), nd.back() - nd[i]);
  }
  node_dist_.front() = geom_.dist_from_offsets(0.0, nd.back() - nd.front());
  node_dist_.back() = geom_.dist_from_offsets(nd.back() - nd.front(), 0.0);
}

std::vector<double> Discretization::sample_points(const PointFunction& f) const {
  const auto pts = points();
  std::vector<double> out(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) out[k] = f(pts[k], point_dist_[k]);
  return out;
}

std::vector<double> Discretization::sample_nodes(const PointFunction& f) const {
  const auto nd = nodes();
  std::vector<double> out(nd.size());
  for (std::size_t i = 0; i < nd.size(); ++i) out[i] = f(nd[i], node_dist_[i]);
  return out;
}

Field Discretization::field_from(const PointFunction& f, std::string label) const {
  Field u;
  u.x.assign(nodes().begin(), nodes().end());
  u.dist = node_dist_;
  u.values = sample_nodes(f);
  u.point_values = sample_points(f);
  u.p = p_;
  u.label = std::move(label);
  return u;
}

double Discretization::weak_residual(std::span<const double> flux_points,
                                     std::span<const double> rhs_points) const {
  const auto nd = nodes();
  const auto pts = points();
  const auto w = layout_->weights();
  const std::size_t n = layout_->order();
  const std::size_t ncell = layout_->cells();
  std::vector<double> residual(nd.size(), 0.0);
  std::vector<double> load(nd.size(), 0.0);
  for (std::size_t c = 0; c < ncell; ++c) {
    const double x0 = nd[c];
    const double x1 = nd[c + 1];
    const double h = x1 - x0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = c * n + j;
      const double right = (pts[k] - x0) / h;
      const double left = 1.0 - right;
      const double g = point_measure_[k] * rhs_points[k] * w[k];
      const double fl = flux_points[k] * w[k] / h;
      residual[c] += -fl - g * left;
      residual[c + 1] += fl - g * right;
      load[c] += std::abs(g) * left;
      load[c + 1] += std::abs(g) * right;
    }
  }
  // Hats touching a mapped end cell are skipped: the mapped rule is not
  // exact for the piecewise-linear test functions there.
  const std::size_t first = geom_.lo_condition() == EndCondition::Dirichlet ? 2 : 0;
  const std::size_t last =
      geom_.hi_condition() == EndCondition::Dirichlet ? nd.size() - 2 : nd.size();
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    worst = std::max(worst, std::abs(residual[i]));
    scale = std::max(scale, load[i]);
  }
  return scale > 0.0 ? worst / scale : worst;
}

double Discretization::lp_norm(const Field& u, double q) const {
  if (u.point_values.size() != point_measure_.size()) {
    throw Error(ErrorCode::InvalidArgument, "field has no samples on this layout");
  }
  const auto w = layout_->weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k] * point_measure_[k] * std::pow(std::abs(u.point_values[k]), q);
  }
  return std::pow(acc, 1.0 / q);
}

double Discretization::l1_norm(std::span<const double> g) const {
  const auto w = layout_->weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * point_measure_[k] * std::abs(g[k]);
  return acc;
}

double Discretization::energy_norm(const Field& u) const {
  if (u.point_derivs.size() != point_measure_.size()) {
    throw Error(ErrorCode::InvalidArgument, "field has no derivative samples");
  }
  const auto w = layout_->weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k] * point_measure_[k] * point_a_[k] * std::pow(std::abs(u.point_derivs[k]), p_);
  }
  return std::pow(acc, 1.0 / p_);
}

std::pair<Field, SolveReport> solve(const Discretization& disc,
                                    std::span<const double> rhs_points) {
  const auto& layout = disc.layout();
  const auto& meas = disc.point_measure();
  const auto& ainv = disc.point_inverse_root();
  const auto w = layout.weights();
  const double p = disc.p();
  const std::size_t npts = layout.points().size();
  if (rhs_points.size() != npts) {
    throw Error(ErrorCode::InvalidArgument, "right-hand side does not match the layout");
  }

  std::vector<double> load(npts);
  for (std::size_t k = 0; k < npts; ++k) {
    if (!std::isfinite(rhs_points[k])) {
      throw Error(ErrorCode::NaNEncountered, "right-hand side is not finite");
    }
    load[k] = meas[k] * rhs_points[k];
  }
  const auto I = layout.cumulative(load);
  double I_sup = 0.0;
  for (double v : I.at_points) I_sup = std::max(I_sup, std::abs(v));
  for (double v : I.at_nodes) I_sup = std::max(I_sup, std::abs(v));

  const auto& geom = disc.geometry();
  const bool dir_lo = geom.lo_condition() == EndCondition::Dirichlet;
  const bool dir_hi = geom.hi_condition() == EndCondition::Dirichlet;

  // Quadrature weight times a^{-1/(p-1)}; w(hi) - w(lo) = sum A_k Phi(F_k / m_k).
  std::vector<double> A(npts);
  for (std::size_t k = 0; k < npts; ++k) A[k] = w[k] * ainv[k];
  auto shoot = [&](double c, double* slope) {
    double g = 0.0;
    double dg = 0.0;
    for (std::size_t k = 0; k < npts; ++k) {
      const double z = (c - I.at_points[k]) / meas[k];
      g += A[k] * p_flux_inverse(z, p);
      if (slope) dg += A[k] * p_flux_inverse_derivative(z, p) / meas[k];
    }
    if (slope) *slope = dg;
    return g;
  };

  SolveReport report;
  double c = 0.0;
  if (dir_lo && dir_hi) {
    if (I_sup > 0.0) {
      double lo = -I_sup;
      double hi = I_sup;
      double g_lo = shoot(lo, nullptr);
      double g_hi = shoot(hi, nullptr);
      while (!(g_lo <= 0.0 && g_hi >= 0.0)) {
        if (++report.expansions > disc.spec().max_expansions) {
          throw Error(ErrorCode::BracketFailure, "no sign change in the flux bracket");
        }
        lo *= 2.0;
        hi *= 2.0;
        g_lo = shoot(lo, nullptr);
        g_hi = shoot(hi, nullptr);
      }
      c = 0.5 * (lo + hi);
      for (int it = 0; it < disc.spec().max_iterations; ++it) {
        report.iterations = it + 1;
        double dg = 0.0;
        const double g = shoot(c, &dg);
        if (g == 0.0) break;
        if (g < 0.0) {
          lo = c;
        } else {
          hi = c;
        }
        double next = c - g / dg;
        if (!std::isfinite(next) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double width = hi - lo;
        const double step = std::abs(next - c);
        c = next;
        if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)) ||
            step <= 1e-16 * (std::abs(c) + I_sup)) {
          break;
        }
      }
    }
  } else if (!dir_lo) {
    c = 0.0;
  } else {
    c = I.at_nodes.back();
  }
  report.flux_constant = c;

  Field u;
  u.x.assign(layout.nodes().begin(), layout.nodes().end());
  u.dist = disc.node_dist();
  u.p = p;
  u.label = "w";
  const std::size_t nn = u.x.size();
  u.flux.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) u.flux[i] = c - I.at_nodes[i];
  u.point_flux.resize(npts);
  u.point_derivs.resize(npts);
  double shoot_scale = 0.0;
  for (std::size_t k = 0; k < npts; ++k) {
    u.point_flux[k] = c - I.at_points[k];
    u.point_derivs[k] = p_flux_inverse(u.point_flux[k] / meas[k], p) * ainv[k];
    shoot_scale += std::abs(w[k] * u.point_derivs[k]);
  }
  const auto fwd = layout.cumulative(u.point_derivs);
  const auto rev = layout.reverse_cumulative(u.point_derivs);

  // Forward from the left end up to the flux sign change, backward after it.
  std::size_t split = nn;
  if (dir_lo && dir_hi) {
    split = 0;
    while (split < nn && u.flux[split] > 0.0) ++split;
    split = std::clamp<std::size_t>(split, 1, nn - 1);
  } else if (!dir_lo) {
    split = 0;
  }
  u.values.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    u.values[i] = i < split ? fwd.at_nodes[i] : -rev.at_nodes[i];
  }
  u.point_values.resize(npts);
  for (std::size_t k = 0; k < npts; ++k) {
    const std::size_t cell = layout.cell_of(k);
    u.point_values[k] = cell < split ? fwd.at_points[k] : -rev.at_points[k];
  }
  if (dir_lo) u.values.front() = 0.0;
  if (dir_hi) u.values.back() = 0.0;

  if (dir_lo && dir_hi) {
    report.residual_flux = shoot_scale > 0.0 ? std::abs(fwd.at_nodes.back()) / shoot_scale : 0.0;
  }
  report.residual_weak = disc.weak_residual(u.point_flux, rhs_points);
  report.sup_norm = u.sup_norm();
  report.lp_norm = disc.lp_norm(u, p);
  report.energy_norm = disc.energy_norm(u);
  return {std::move(u), report};
}

std::pair<Field, SolveReport> solve(const Discretization& disc,
                                    const std::function<double(double)>& rhs) {
  const auto g = disc.sample_points([&](double x, double) { return rhs(x); });
  return solve(disc, g);
}

std::pair<Field, SolveReport> solve_interval(const weights::WeightProfile& profile, double p,
                                             const std::function<double(double)>& rhs,
                                             double L, const ResolventSpec& spec) {
  auto geom = geometry::DomainGeometry::interval(L, std::min(profile.rho0(), 0.5 * L));
  Discretization disc(profile, p, geom, spec);
  return solve(disc, rhs);
}

std::pair<Field, SolveReport> solve_radial(const weights::WeightProfile& profile, double p,
                                           const std::function<double(double)>& rhs,
                                           const geometry::DomainGeometry& geom,
                                           const ResolventSpec& spec) {
  if (geom.kind() != geometry::Kind::Ball && geom.kind() != geometry::Kind::Annulus) {
    throw Error(ErrorCode::UnsupportedGeometry, "solve_radial needs a ball or an annulus");
  }
  Discretization disc(profile, p, geom, spec);
  return solve(disc, rhs);
}

Field resolvent(const weights::WeightProfile& profile, double p,
                const std::function<double(double)>& rhs,
                const geometry::DomainGeometry& geom, const ResolventSpec& spec) {
  switch (geom.kind()) {
    case geometry::Kind::Interval:
      return solve_interval(profile, p, rhs, geom.hi() - geom.lo(), spec).first;
    case geometry::Kind::Ball:
    case geometry::Kind::Annulus:
      return solve_radial(profile, p, rhs, geom, spec).first;
    case geometry::Kind::Collar: {
      Discretization disc(profile, p, geom, spec);
      return solve(disc, rhs).first;
    }
  }
  throw Error(ErrorCode::UnsupportedGeometry, "unknown geometry kind");
}

EstimateRatios resolvent_estimate_check(const Field& w, std::span<const double> rhs_points,
                                        const Discretization& disc, double rho1) {
  EstimateRatios out;
  double g_sup = 0.0;
  for (double v : rhs_points) g_sup = std::max(g_sup, std::abs(v));
  if (g_sup == 0.0) return out;
  const double p = disc.p();
  const double g_root = std::pow(g_sup, 1.0 / (p - 1.0));
  out.energy_ratio = disc.energy_norm(w) / g_root;

  weights::WeightedDistance d(disc.profile(), p);
  const double rho0 = disc.profile().rho0();
  const auto nd = disc.nodes();
  const double first_cell = nd[1] - nd[0];
  double quotient = 0.0;
  for (std::size_t i = 0; i < w.x.size(); ++i) {
    const double y = w.dist[i];
    if (y <= first_cell * (1.0 + 1e-9) || y > std::min(rho1, rho0)) continue;
    quotient = std::max(quotient, std::abs(w.values[i]) / d(y));
  }
  out.boundary_quotient = quotient;
  out.boundary_ratio = (w.sup_norm() + quotient) / (1.0 + g_sup + g_root);
  return out;
}

}  // namespace degenlap::resolvent
