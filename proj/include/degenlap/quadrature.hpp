#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace degenlap::quadrature {

using Integrand = std::function<double(double)>;

/// Tolerances and endpoint-singularity hints for adaptive integration.
///
/// A hint gamma in [0,1) declares that the integrand behaves like
/// |t - endpoint|^{-gamma}; the integrator then works in the variable
/// u = (t - endpoint)^{1-gamma}, where the integrand is bounded.
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_depth = 48;
  std::optional<double> singularity_hint;        // left endpoint
  std::optional<double> right_singularity_hint;  // right endpoint

  void validate() const;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
///
/// Throws Error(Divergent) when the error estimate cannot be
/// driven below tolerance within max_depth bisections of any panel, and
/// Error(NaNEncountered) on non-finite integrand samples.
double integrate(const Integrand& f, double lo, double hi,
                 const QuadratureSpec& spec = {});

/// Gauss-Legendre rule on [0,1]: nodes ascending, weights summing to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(std::size_t n);

/// Mesh grading: geometric cells of ratio `ratio` toward each graded end,
/// starting at `finest` absolute width, joined by a uniform core.
struct MeshGrading {
  double ratio = 0.7;
  double finest = 1e-12;
  bool grade_lo = true;
  bool grade_hi = true;
};

std::vector<double> graded_mesh(double lo, double hi, std::size_t cells,
                                const MeshGrading& grading);

/// Fixed-order cell quadrature laid over a mesh.
///
/// Every cell carries `order` Gauss points; the first cell may be mapped by
/// t = x0 + h s^{1/(1-gamma_lo)} and the last by the mirrored map, so that
/// integrands singular like a power of the boundary distance become smooth
/// in s. Besides full-cell sums, the layout provides the running integral
/// from the left of each cell to each of its points via the Gauss spectral
/// integration matrix, which is what flux primitives need.
class QuadratureLayout {
 public:
  QuadratureLayout(std::vector<double> nodes, double gamma_lo, double gamma_hi,
                   std::size_t order = 8);

  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  [[nodiscard]] std::span<const double> points() const { return points_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] std::size_t order() const { return order_; }
  [[nodiscard]] std::size_t cells() const { return nodes_.size() - 1; }

  struct Cumulative {
    std::vector<double> at_nodes;   // size cells()+1, starts at 0
    std::vector<double> at_points;  // aligned with points()
  };

  /// Running integral of a function sampled at points().
  [[nodiscard]] Cumulative cumulative(std::span<const double> samples) const;

  /// Integral from each node/point to the right end of the mesh.
  [[nodiscard]] Cumulative reverse_cumulative(std::span<const double> samples) const;

  /// Distance of each point from the left and right ends of the mesh,
  /// computed without cancellation inside the mapped end cells.
  [[nodiscard]] std::span<const double> lo_offsets() const { return lo_offsets_; }
  [[nodiscard]] std::span<const double> hi_offsets() const { return hi_offsets_; }

  /// Index of the cell containing point k.
  [[nodiscard]] std::size_t cell_of(std::size_t k) const { return k / order_; }

  /// Total integral of a function sampled at points().
  [[nodiscard]] double total(std::span<const double> samples) const;

  /// Samples f at every point.
  [[nodiscard]] std::vector<double> sample(const Integrand& f) const;

 private:
  std::vector<double> nodes_;
  std::size_t order_;
  std::vector<double> points_;
  std::vector<double> weights_;
  std::vector<double> jac_;      // dt/ds at each point, per unit s
  std::vector<double> partial_;  // order x order spectral integration matrix
  std::vector<double> rpartial_;  // same, integrating from s_k to 1
  std::vector<double> lo_offsets_;
  std::vector<double> hi_offsets_;
};

/// Cumulative integral F(t) = int_0^t f on a graded mesh over [0, rho0].
///
/// Nodal values come from adaptive integration cell by cell; queries between
/// nodes add the adaptive integral from the enclosing node, so for f >= 0 the
/// evaluation is nondecreasing in t.
class PrimitiveTable {
 public:
  PrimitiveTable(Integrand f, double rho0, const QuadratureSpec& spec,
                 std::size_t cells = 256, double grading_ratio = 0.7);

  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double rho0() const { return nodes_.back(); }
  [[nodiscard]] double total() const { return values_.back(); }

  /// F(t) for t in [0, rho0]; throws Error(OutOfCollar) outside.
  [[nodiscard]] double operator()(double t) const;

 private:
  Integrand f_;
  QuadratureSpec spec_;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

inline PrimitiveTable primitive(Integrand f, double rho0,
                                const QuadratureSpec& spec = {}) {
  return PrimitiveTable(std::move(f), rho0, spec);
}

}  // namespace degenlap::quadrature
