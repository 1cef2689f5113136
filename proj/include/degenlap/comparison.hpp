#pragma once

#include <vector>

#include "degenlap/field.hpp"
#include "degenlap/geometry.hpp"
#include "degenlap/quadrature.hpp"
#include "degenlap/weights.hpp"

namespace degenlap::comparison {

/// Boundary barrier psi on the collar [0, rho0] with its two-sided bound
/// (1/C) d <= psi <= C d. Inside the collar psi is continued by psi(rho0).
struct PsiBarrier {
  double A = 0.0;
  double Lambda = 0.0;
  double margin = 0.0;
  double p = 2.0;
  double total = 0.0;        // int_0^rho0 e^{Lambda t} a^{-1/(p-1)}
  double Cbound = 0.0;       // envelope constant max(upper, 1/lower)
  double upper = 0.0;        // sup of psi'/d' = A^{1/(p-1)}
  double lower = 0.0;        // inf of psi'/d'
  double C_displayed = 0.0;  // max{A, e^{Lambda rho0/(p-1)} (A - total)^{-1}}, for comparison

  std::vector<double> y;
  std::vector<double> d;
  std::vector<double> psi;
  std::vector<double> dpsi;
  std::vector<double> flux;  // a |psi'|^{p-1} at the nodes

  double bound_violation = 0.0;  // max relative excess over the two-sided bound
  double ode_residual = 0.0;     // integrated form of -F' - Lambda F = a^{-1/(p-1)}

  [[nodiscard]] bool bounds_hold(double tol = 1e-12) const { return bound_violation <= tol; }
  /// psi(y) by linear interpolation; psi(rho0) beyond the collar.
  [[nodiscard]] double operator()(double y) const;
};

struct PsiSpec {
  std::size_t cells = 1000;
  double grading_ratio = 0.7;
  double finest = 1e-12;  // relative to rho0
  std::size_t order = 8;
  double margin = 1.0;
};

/// A = (1 + margin) int_0^rho0 e^{Lambda t} a^{-1/(p-1)}.
double choose_A(const weights::WeightProfile& profile, double p, double Lambda, double rho0,
                double margin);

/// Builds psi with Lambda = lambda_abs of the geometry over the collar.
PsiBarrier build_psi(const weights::WeightProfile& profile, double p,
                     const geometry::DomainGeometry& geom, const PsiSpec& spec = {});

/// Same with an explicit Lambda.
PsiBarrier build_psi(const weights::WeightProfile& profile, double p, double Lambda,
                     const PsiSpec& spec);

/// sup |u| / d over nodes with 0 < dist <= rho; +inf if not finite.
double boundary_quotient(const Field& u, const weights::WeightProfile& profile, double p,
                         double rho);

/// Smallest M on a x1.1 grid with M^{p-1} > K and M d(rho) >= Cbound.
double barrier_multiplier(double K, const weights::WeightProfile& profile, double p, double rho,
                          const PsiBarrier& psi);

/// Same with d(rho) given directly.
double barrier_multiplier(double K, double p, double d_rho, double Cbound);

}  // namespace degenlap::comparison
