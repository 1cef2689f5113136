#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "degenlap/field.hpp"
#include "degenlap/geometry.hpp"
#include "degenlap/quadrature.hpp"
#include "degenlap/weights.hpp"

namespace degenlap::resolvent {

/// Phi(z) = sign(z) |z|^{1/(p-1)}, the inverse of z -> |z|^{p-2} z.
double p_flux_inverse(double z, double p);

struct ResolventSpec {
  std::size_t cells = 2048;
  double grading_ratio = 0.7;
  double finest = 1e-12;  // finest boundary cell, relative to rho0
  std::size_t order = 8;
  int max_expansions = 60;
  int max_iterations = 400;
};

struct SolveReport {
  double flux_constant = 0.0;
  int iterations = 0;
  int expansions = 0;
  double residual_weak = 0.0;
  double residual_flux = 0.0;
  double sup_norm = 0.0;
  double lp_norm = 0.0;
  double energy_norm = 0.0;
};

/// Mesh, quadrature layout and weight samples for one (a, p, geometry).
///
/// Everything a solve needs is sampled eagerly here, so the object is
/// immutable afterwards and solves against it can run concurrently.
class Discretization {
 public:
  Discretization(weights::WeightProfile profile, double p,
                 geometry::DomainGeometry geom, ResolventSpec spec = {});

  [[nodiscard]] const weights::WeightProfile& profile() const { return profile_; }
  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] const geometry::DomainGeometry& geometry() const { return geom_; }
  [[nodiscard]] const ResolventSpec& spec() const { return spec_; }
  [[nodiscard]] const quadrature::QuadratureLayout& layout() const { return *layout_; }

  [[nodiscard]] std::span<const double> nodes() const { return layout_->nodes(); }
  [[nodiscard]] std::span<const double> points() const { return layout_->points(); }
  [[nodiscard]] const std::vector<double>& node_dist() const { return node_dist_; }
  [[nodiscard]] const std::vector<double>& point_dist() const { return point_dist_; }
  [[nodiscard]] const std::vector<double>& point_measure() const { return point_measure_; }
  [[nodiscard]] const std::vector<double>& point_inverse_root() const { return point_ainv_; }

  using PointFunction = std::function<double(double x, double dist)>;

  [[nodiscard]] std::vector<double> sample_points(const PointFunction& f) const;
  [[nodiscard]] std::vector<double> sample_nodes(const PointFunction& f) const;

  /// Field with values f at nodes and points.
  [[nodiscard]] Field field_from(const PointFunction& f, std::string label = {}) const;

  /// max_i |int F phi_i' - int m g phi_i| / max_i int m |g| phi_i over
  /// hat functions phi_i at non-Dirichlet nodes; F is the flux at points and
  /// g the right-hand side density at points.
  [[nodiscard]] double weak_residual(std::span<const double> flux_points,
                                     std::span<const double> rhs_points) const;

  /// (int m |u|^q)^{1/q} over the domain from point samples.
  [[nodiscard]] double lp_norm(const Field& u, double q) const;
  /// int m |g| from point samples.
  [[nodiscard]] double l1_norm(std::span<const double> g) const;
  /// (int m a |u'|^p)^{1/p} from point derivatives.
  [[nodiscard]] double energy_norm(const Field& u) const;

 private:
  weights::WeightProfile profile_;
  double p_;
  geometry::DomainGeometry geom_;
  ResolventSpec spec_;
  std::shared_ptr<quadrature::QuadratureLayout> layout_;
  std::vector<double> node_dist_;
  std::vector<double> point_dist_;
  std::vector<double> point_measure_;
  std::vector<double> point_ainv_;
  std::vector<double> point_a_;
};

/// Solves -div(a |grad w|^{p-2} grad w) = g with w = 0 on the boundary,
/// g sampled at the discretization's points.
std::pair<Field, SolveReport> solve(const Discretization& disc,
                                    std::span<const double> rhs_points);

/// Same with g given as a function of the coordinate.
std::pair<Field, SolveReport> solve(const Discretization& disc,
                                    const std::function<double(double)>& rhs);

std::pair<Field, SolveReport> solve_interval(const weights::WeightProfile& profile,
                                             double p,
                                             const std::function<double(double)>& rhs,
                                             double L, const ResolventSpec& spec = {});

std::pair<Field, SolveReport> solve_radial(const weights::WeightProfile& profile, double p,
                                           const std::function<double(double)>& rhs,
                                           const geometry::DomainGeometry& geom,
                                           const ResolventSpec& spec = {});

/// Dispatch on the geometry kind; the discrete resolvent L(g).
Field resolvent(const weights::WeightProfile& profile, double p,
                const std::function<double(double)>& rhs,
                const geometry::DomainGeometry& geom, const ResolventSpec& spec = {});

struct EstimateRatios {
  double energy_ratio = 0.0;    // energy / ||g||^{1/(p-1)}
  double boundary_ratio = 0.0;  // (||w|| + ||w/d||_collar) / (1 + ||g|| + ||g||^{1/(p-1)})
  double boundary_quotient = 0.0;
};

/// Dimensionless ratios of the resolvent estimates; ||g|| is the sup norm
/// over the points. The collar quotient skips the boundary cells.
EstimateRatios resolvent_estimate_check(const Field& w, std::span<const double> rhs_points,
                                        const Discretization& disc, double rho1);

}  // namespace degenlap::resolvent
