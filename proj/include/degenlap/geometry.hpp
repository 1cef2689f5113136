#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace degenlap::geometry {

enum class Kind { Interval, Ball, Annulus, Collar };
enum class CurvatureSign { Nonnegative, Indefinite, Negative };

std::string to_string(Kind kind);
std::string to_string(CurvatureSign sign);

/// One boundary component with its collar Jacobian J(y), y the inward
/// normal distance.
struct Component {
  std::string name;
  double rho0 = 0.0;
  std::function<double(double)> jacobian;
  std::function<double(double)> dlog_jacobian;  // empty: central differences
};

struct CurvatureInfo {
  double lambda_abs = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  CurvatureSign mean_curvature_sign = CurvatureSign::Nonnegative;
};

struct BoundaryPoint {
  std::size_t component = 0;
  double y = 0.0;
};

/// End condition of the 1D/radial reduction.
enum class EndCondition { Dirichlet, ZeroFlux };

/// Interval, ball, annulus, or a single abstract collar, all reduced to a
/// scalar coordinate x in [lo, hi] with measure density m(x).
///
/// For the ball the coordinate is the radius and the center carries a
/// zero-flux condition. An abstract collar is the strip y in [0, depth]
/// with Dirichlet data at y = 0 and zero flux at y = depth.
class DomainGeometry {
 public:
  static DomainGeometry interval(double L, double rho0);
  static DomainGeometry ball(double R, int N, double rho0);
  static DomainGeometry annulus(double R_in, double R_out, int N, double rho0);
  static DomainGeometry collar(std::string name, std::function<double(double)> J,
                               double rho0, double depth);

  /// Abstract collars with the Jacobians of the closed-form kinds.
  static DomainGeometry annulus_inner_collar(double R_in, int N, double rho0);
  static DomainGeometry annulus_outer_collar(double R_out, int N, double rho0);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int dimension() const { return N_; }
  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }
  [[nodiscard]] double rho0() const { return rho0_; }
  [[nodiscard]] EndCondition lo_condition() const { return lo_bc_; }
  [[nodiscard]] EndCondition hi_condition() const { return hi_bc_; }
  [[nodiscard]] const std::vector<Component>& components() const { return components_; }
  [[nodiscard]] std::string describe() const;

  /// J(y) on component c for 0 <= y <= rho0; OutOfCollar otherwise.
  [[nodiscard]] double jacobian(std::size_t component, double y) const;

  /// d/dy log J(y): analytic for closed-form kinds, central differences
  /// for abstract collars.
  [[nodiscard]] double dlog_jacobian(std::size_t component, double y) const;

  /// Curvature constants over y in [0, rho], over all components or one.
  [[nodiscard]] CurvatureInfo lambda_constants(
      double rho, std::optional<std::size_t> component = {}) const;

  /// Nearest boundary component and normal coordinate of the point x.
  [[nodiscard]] BoundaryPoint dist_to_boundary(double x) const;

  /// Measure density of the reduction: 1, r^{N-1}, or J(y).
  [[nodiscard]] double measure(double x) const;

  /// Distance to the boundary from coordinate offsets, avoiding cancellation
  /// near the ends: off_lo = x - lo, off_hi = hi - x.
  [[nodiscard]] double dist_from_offsets(double off_lo, double off_hi) const;

  /// d(dist)/dx at the same point: +1 or -1.
  [[nodiscard]] double dist_slope(double off_lo, double off_hi) const;

  /// Largest boundary distance attained in the domain.
  [[nodiscard]] double max_dist() const;

 private:
  DomainGeometry() = default;

  Kind kind_ = Kind::Interval;
  int N_ = 1;
  double lo_ = 0.0;
  double hi_ = 1.0;
  double rho0_ = 0.5;
  EndCondition lo_bc_ = EndCondition::Dirichlet;
  EndCondition hi_bc_ = EndCondition::Dirichlet;
  std::vector<Component> components_;
};

constexpr double kTolGeom = 1e-9;

}  // namespace degenlap::geometry
