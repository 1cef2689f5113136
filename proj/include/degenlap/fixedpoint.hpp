#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "degenlap/barriers.hpp"
#include "degenlap/error.hpp"
#include "degenlap/field.hpp"
#include "degenlap/resolvent.hpp"

namespace degenlap::fixedpoint {

/// F(x, dist, zeta): the right-hand side as a function of the coordinate,
/// its boundary distance and the value.
using Source = std::function<double(double x, double dist, double zeta)>;

/// F clamped to the band [u_lower, u_upper] pointwise.
class TruncatedRHS {
 public:
  TruncatedRHS(Source F, Field u_lower, Field u_upper, double zeta0, double bound);

  [[nodiscard]] const Field& lower() const { return lower_; }
  [[nodiscard]] const Field& upper() const { return upper_; }
  [[nodiscard]] double zeta0() const { return zeta0_; }
  /// Sampled C_M with |F~| <= C_M b on the band (b = 1 when not given).
  [[nodiscard]] double bound() const { return bound_; }

  /// F~ at quadrature point k of the discretization the band was sampled on.
  [[nodiscard]] double at_point(std::size_t k, double x, double dist, double zeta) const;
  /// F~ at an arbitrary coordinate; the band is interpolated linearly between nodes.
  [[nodiscard]] double operator()(double x, double dist, double zeta) const;
  /// F~(., u(.)) at every quadrature point.
  [[nodiscard]] std::vector<double> sample(const resolvent::Discretization& disc,
                                           const Field& u) const;
  /// Clamps the values of u into the band.
  [[nodiscard]] Field clamp(const Field& u) const;

 private:
  Source F_;
  Field lower_;
  Field upper_;
  double zeta0_;
  double bound_;
};

/// Builds F~ after checking u_lower <= u_upper at nodes and points
/// (UnorderedPair otherwise). `b`, when given, normalizes the bound C_M.
TruncatedRHS truncate(const resolvent::Discretization& disc, Source F, const Field& u_lower,
                      const Field& u_upper, double zeta0 = 0.0,
                      const resolvent::Discretization::PointFunction& b = {});

struct IterationReport {
  int iterations = 0;
  std::vector<double> increments;
  double theta = 0.5;
  double tol = 0.0;
  bool converged = false;
  double residual = 0.0;  // normalized weak residual of the last iterate
  bool sandwich = false;
  double sandwich_gap = 0.0;  // most negative of u - u_lower + tol and u_upper + tol - u
  std::string scheme;
};

/// NoConvergence, SandwichViolated or MonotonicityViolated with the report
/// and the last iterate attached.
class IterationError : public Error {
 public:
  IterationError(ErrorCode code, const std::string& what, IterationReport report, Field last)
      : Error(code, what), report_(std::move(report)), last_(std::move(last)) {}
  [[nodiscard]] const IterationReport& report() const { return report_; }
  [[nodiscard]] const Field& last() const { return last_; }

 private:
  IterationReport report_;
  Field last_;
};

struct IterationOptions {
  double theta = 0.5;
  double tol = 0.0;  // 0 selects 1e-10 (1 + ||u_upper||)
  int max_iter = 10000;
};

/// u_{k+1} = (1 - theta) u_k + theta L(F~(., u_k)) from u_0 = u_lower.
///
/// After convergence one undamped step is taken, and its weak residual must
/// stay below 10 tol / (1 + ||u_upper||).
std::pair<Field, IterationReport> iterate_T(const TruncatedRHS& trunc,
                                            const resolvent::Discretization& disc,
                                            const IterationOptions& opts = {});

/// Undamped iteration for F~ nondecreasing in zeta, from u_lower (or from
/// u_upper when `from_upper`); asserts nodal monotonicity every step.
std::pair<Field, IterationReport> monotone_iterate(const TruncatedRHS& trunc,
                                                   const resolvent::Discretization& disc,
                                                   const IterationOptions& opts = {},
                                                   bool from_upper = false);

struct SemipositoneResult {
  Field u;
  barriers::BarrierPair pair;
  IterationReport report;
  double zeta0 = 0.0;
  double apriori_ratio = 0.0;
  double middle_third_min = 0.0;
};

/// Barriers, truncation at zeta0 = max(||u_lower||, ||u_upper||) + 1 and
/// the damped iteration for -div(a |u'|^{p-2} u') = lambda b f(u).
SemipositoneResult solve_semipositone(const barriers::BarrierProblem& problem, double lambda,
                                      const IterationOptions& opts = {});

struct MoserLadder {
  double p = 2.0;
  double p_s_star = 3.0;
  std::vector<double> epsilons;     // eps_0 = 0, ..., eps_n
  std::vector<double> partial_sums; // sum_{j <= n} 1/(1 + eps_j)
  std::vector<double> constants;    // C(eps) = (1 + eps)^p / (1 + eps p)
  double limit = 0.0;               // p_s* / (p_s* - p)
};

/// Rungs with 1/(1 + eps_n) = (p/p_s*)^n.
MoserLadder moser_ladder(double p, double p_s_star, int n_max);

/// ||u||_inf / (1 + ||b||_1 + ||u||_p) with b sampled at the points.
double apriori_check(const resolvent::Discretization& disc, const Field& u,
                     std::span<const double> b_points);

/// Smallest value of u over nodes with x in the middle third of the domain.
double middle_third_min(const Field& u);

}  // namespace degenlap::fixedpoint
