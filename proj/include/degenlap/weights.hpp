#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degenlap/error.hpp"
#include "degenlap/quadrature.hpp"

namespace degenlap::weights {

/// Boundary weight a(t) on the collar (0, rho0), with its interior extension.
///
/// Families: uniform c, power c*t^alpha, or a sampled table interpolated
/// piecewise-linearly in log a. Beyond rho0 the profile returns either the
/// constant continuation a(rho0-) or the declared interior floor.
class WeightProfile {
 public:
  enum class Family { Uniform, Power, Table };
  enum class Interior { Continuation, Floor };

  static WeightProfile uniform(double c, double rho0);
  static WeightProfile power(double c, double alpha, double rho0);
  static WeightProfile table(std::vector<double> t, std::vector<double> a,
                             double rho0);

  WeightProfile& with_interior_floor(double floor);

  [[nodiscard]] Family family() const { return family_; }
  [[nodiscard]] double c() const { return c_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double rho0() const { return rho0_; }
  [[nodiscard]] double interior_floor() const { return interior_floor_; }
  [[nodiscard]] Interior interior() const { return interior_; }
  [[nodiscard]] const std::vector<double>& table_t() const { return table_t_; }
  [[nodiscard]] const std::vector<double>& table_a() const { return table_a_; }

  /// a(t) for t > 0; interior extension for t >= rho0.
  [[nodiscard]] double operator()(double t) const;

  /// a(t)^{-1/(p-1)}.
  [[nodiscard]] double inverse_root(double t, double p) const;

  /// Exponent gamma with a^{-1/(p-1)} ~ t^{-gamma} at t -> 0 (0 if bounded).
  [[nodiscard]] double singular_exponent(double p) const;

  [[nodiscard]] std::string describe() const;

 private:
  WeightProfile() = default;
  [[nodiscard]] double collar_value(double t) const;

  Family family_ = Family::Uniform;
  double c_ = 1.0;
  double alpha_ = 0.0;
  double rho0_ = 1.0;
  double interior_floor_ = 1.0;
  Interior interior_ = Interior::Continuation;
  std::vector<double> table_t_;
  std::vector<double> table_a_;
};

struct ExponentSet {
  double p = 2.0;
  int N = 2;
  double s = 1.0;
  double q = 2.0;
  double p_s = 0.0;
  double p_s_star = 0.0;

  /// Builds the set, filling p_s and p_s* and checking every constraint.
  static ExponentSet make(double p, int N, double s, std::optional<double> q = {});
};

/// p_s = p s/(s+1) and p_s* = N p_s/(N - p_s); throws InvalidExponents unless
/// p in (1,N) and s > max(N/p, 1/(p-1)).
std::pair<double, double> sobolev_exponents(double p, double s, int N);

/// Coefficient b(t) on the collar with envelope constants c1 < c2.
///
/// Families: uniform k, or power k*t^e. Beyond rho0 the value is the
/// continuation b(rho0-).
struct CoefficientB {
  enum class Family { Uniform, Power };
  Family family = Family::Uniform;
  double k = 1.0;
  double exponent = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double rho0 = 1.0;

  static CoefficientB uniform(double k, double c1, double c2, double rho0);
  static CoefficientB power(double k, double e, double c1, double c2, double rho0);

  [[nodiscard]] double operator()(double t) const;
  /// Exponent gamma with b ~ t^{-gamma} at the boundary (0 if bounded).
  [[nodiscard]] double singular_exponent() const { return exponent < 0.0 ? -exponent : 0.0; }
};

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;  // numeric evidence; +inf when an integral diverges
  std::string detail;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Check> checks;
  std::optional<ErrorCode> failure;
  double rho1 = 0.0;  // populated by validate_b

  void add(Check check, ErrorCode code_on_failure);
  /// Throws the error recorded for the first failed check.
  void raise_if_invalid() const;
};

ValidationReport validate_weight(const WeightProfile& profile,
                                 const ExponentSet& exps);

ValidationReport validate_b(const CoefficientB& b, const WeightProfile& profile,
                            const ExponentSet& exps);

/// Largest sampled radius rho1 <= rho0 up to which
/// c1 a^{-1/(p-1)} <= b <= c2 a^{-1/(p-1)} holds; 0 if it fails at once.
/// `offending` receives the first failing sample when non-null.
double envelope_radius(const CoefficientB& b, const WeightProfile& profile, double p,
                       std::string* offending = nullptr);

/// d(t) = int_0^t a^{-1/(p-1)}; closed form for uniform and power weights.
double weighted_distance(const WeightProfile& profile, double p, double t);

/// Reusable d(.) evaluator with a cached primitive for table weights.
class WeightedDistance {
 public:
  WeightedDistance(WeightProfile profile, double p);

  /// d(t) for 0 <= t <= rho0 (OutOfCollar otherwise).
  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] const WeightProfile& profile() const { return profile_; }

 private:
  WeightProfile profile_;
  double p_;
  std::optional<quadrature::PrimitiveTable> table_;
};

/// Integral of f over (0, rho0), or +inf when the truncated estimate exceeds
/// 1e12 on two successive refinements of the cut-off.
double collar_integral(const quadrature::Integrand& f, double rho0,
                       double singular_exponent = 0.0);

}  // namespace degenlap::weights
