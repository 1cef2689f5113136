#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "degenlap/field.hpp"
#include "degenlap/geometry.hpp"
#include "degenlap/resolvent.hpp"
#include "degenlap/weights.hpp"

namespace degenlap::barriers {

using Scalar = std::function<double(double)>;

/// f with its monotone majorant f_hat (running maximum) and a user-supplied
/// nondecreasing minorant f_tilde with f_tilde(z) / z^r -> mu.
class NonlinearitySpec {
 public:
  NonlinearitySpec(Scalar f, Scalar f_tilde, double mu, double r);
  /// Only f: the subsolution builder rejects it (no minorant growth data).
  explicit NonlinearitySpec(Scalar f);

  [[nodiscard]] double f(double z) const { return f_(z); }
  [[nodiscard]] double f_tilde(double z) const;
  [[nodiscard]] double f_hat(double z) const;
  [[nodiscard]] bool has_minorant() const { return static_cast<bool>(f_tilde_); }
  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] double r() const { return r_; }
  [[nodiscard]] double f_tilde_zero() const { return f_tilde(0.0); }
  [[nodiscard]] bool f_monotone() const { return monotone_; }

  /// Sampled checks of continuity, sign, sublinearity and the minorant.
  [[nodiscard]] weights::ValidationReport validate(double p) const;

 private:
  void build_cache();

  Scalar f_;
  Scalar f_tilde_;
  double mu_ = 0.0;
  double r_ = 0.0;
  bool monotone_ = true;
  std::shared_ptr<const std::vector<double>> grid_;
  std::shared_ptr<const std::vector<double>> running_max_;
};

/// Running maximum of f over [0, z].
double f_hat(const NonlinearitySpec& spec, double z);

struct SubsolutionParams {
  double r = 1.0;
  double sigma = 1.0;
  double beta = 1.2;
  double epsilon = 0.0;  // 0 selects mu/2
  double rho1 = 0.0;     // 0 selects the envelope radius of b
  std::optional<double> coupling;  // defaults to min(1, c1 (mu - epsilon))

  /// kappa = 1 - sigma (p - 1 - r).
  [[nodiscard]] double kappa(double p) const { return 1.0 - sigma * (p - 1.0 - r); }
  /// Throws InvalidArgument when a range constraint fails; returns a note
  /// when r <= 1.
  std::string validate(double p, double mu) const;
};

/// t(rho) and its minimizer over [rho1/2, rho1).
class RhoProblem {
 public:
  RhoProblem(const weights::WeightProfile& profile, double Lambda, double p, double beta,
             double rho1, double kappa, double coupling);

  [[nodiscard]] double t(double rho) const;
  [[nodiscard]] double rho_hat() const { return rho_hat_; }
  [[nodiscard]] double t_hat() const { return t_hat_; }
  [[nodiscard]] double lambda_hat1() const { return lambda_hat1_; }
  [[nodiscard]] double rho1() const { return rho1_; }

  /// Smallest root of t(rho) = coupling * lambda^kappa in [rho_hat, rho1).
  [[nodiscard]] double solve(double lambda, int* bisections = nullptr) const;

 private:
  weights::WeightProfile profile_;
  weights::WeightedDistance dist_;
  double Lambda_;
  double p_;
  double beta_;
  double rho1_;
  double kappa_;
  double coupling_;
  double gamma_;
  std::vector<double> grid_;
  std::vector<double> t_grid_;
  double rho_hat_ = 0.0;
  double t_hat_ = 0.0;
  double lambda_hat1_ = 0.0;
};

struct RhoRecord {
  double rho_hat = 0.0;
  double t_hat = 0.0;
  double lambda_hat1 = 0.0;
  double rho = 0.0;
  double t_rho = 0.0;
  int bisections = 0;
};

/// rho(lambda) with Lambda = lambda_min of the geometry over [0, rho1].
RhoRecord solve_rho(const weights::WeightProfile& profile, const geometry::DomainGeometry& geom,
                    const SubsolutionParams& params, double p, double lambda,
                    double coupling = 1.0);

/// The collar profile v and u_lower = lambda^sigma v.
///
/// v = B d^beta on [0, rho], phi on [rho, rho1], phi(rho1) beyond rho1;
/// phi carries the coupling factor in front of lambda^kappa.
class Subsolution {
 public:
  Subsolution(const weights::WeightProfile& profile, double p, double Lambda,
              const SubsolutionParams& params, double coupling, double lambda, double rho);

  [[nodiscard]] double v(double y) const;
  [[nodiscard]] double dv(double y) const;
  /// a |v'|^{p-2} v' at y.
  [[nodiscard]] double flux_v(double y) const;
  [[nodiscard]] double value(double y) const { return scale_ * v(y); }
  [[nodiscard]] double flux(double y) const { return flux_scale_ * flux_v(y); }

  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] double rho() const { return rho_; }
  [[nodiscard]] double rho1() const { return rho1_; }
  [[nodiscard]] double A() const { return A_; }
  [[nodiscard]] double B() const { return B_; }
  [[nodiscard]] double d_rho() const { return d_rho_; }
  [[nodiscard]] double phi_rho1() const { return phi_.back(); }
  [[nodiscard]] double plateau() const { return scale_ * phi_.back(); }
  [[nodiscard]] double coupling() const { return coupling_; }
  [[nodiscard]] double sigma() const { return params_.sigma; }

  /// Gluing at rho: |v(rho-) - 1| and |flux(rho-) - A| / A.
  [[nodiscard]] double value_gap() const;
  [[nodiscard]] double flux_gap() const;
  /// Nodal check that phi increases on [rho, rho1].
  [[nodiscard]] bool phi_increasing() const;

 private:
  [[nodiscard]] double H(double y) const;  // int_rho^y e^{Lambda t} a^{-1/(p-1)}
  [[nodiscard]] double phi(double y) const;

  weights::WeightProfile profile_;
  weights::WeightedDistance dist_;
  double p_;
  double Lambda_;
  SubsolutionParams params_;
  double coupling_;
  double lambda_;
  double rho_;
  double rho1_;
  double kappa_;
  double A_ = 0.0;
  double B_ = 0.0;
  double d_rho_ = 0.0;
  double S0_ = 0.0;  // e^{Lambda rho} A
  double scale_ = 1.0;
  double flux_scale_ = 1.0;
  std::vector<double> y_;
  std::vector<double> phi_;
  std::vector<double> dphi_;
  std::vector<double> H_;
  std::vector<double> dH_;
};

struct SubsolutionCertificate {
  double max_residual = 0.0;  // max over cells of the signed residual over |div| + |load|
  double worst_y = 0.0;
  double scale = 0.0;         // max of |div| + |load|
  double envelope_worst = 0.0;   // min of f_tilde(u) - (mu-eps) lambda^{sigma r} v^r, relative
  bool lambda_double_star = false;
  bool lambda_triple_star = false;
  std::size_t nodes = 0;
};

struct LambdaThresholds {
  double lambda_hat1 = 0.0;
  double lambda_star = 0.0;
  double lambda_0 = 0.0;
  RhoRecord rho_of_lambda;
  double M_of_lambda = 0.0;
  double coupling = 1.0;
  double Lambda = 0.0;
  std::string note;
};

struct Supersolution {
  Field psi;
  Field u_upper;
  double psi_sup = 0.0;
  double epsilon = 0.0;
  double zeta = 0.0;
  double M = 0.0;
  double certificate = 0.0;  // lambda f_hat(M ||psi||) - M^{p-1}, <= 0 when certified
};

struct BarrierPair {
  Field u_lower;
  Field u_upper;
  LambdaThresholds thresholds;
  double sub_residual = 0.0;
  double super_certificate = 0.0;
  double M = 0.0;
  double ordering_gap = 0.0;  // min over nodes of (upper - lower)
  double prop_lhs = 0.0;      // c1 lambda^{sigma(p-1-r)-1} M^{p-1}
  double prop_rhs = 0.0;      // phi(rho1)^r
  int enlargements = 0;
};

/// Problem data the barrier constructions share.
struct BarrierProblem {
  NonlinearitySpec nonlinearity;
  weights::CoefficientB b;
  SubsolutionParams params;
  const resolvent::Discretization* disc = nullptr;

  [[nodiscard]] double p() const { return disc->p(); }
  [[nodiscard]] const weights::WeightProfile& profile() const { return disc->profile(); }
  [[nodiscard]] const geometry::DomainGeometry& geometry() const { return disc->geometry(); }
  /// Resolved epsilon, rho1 and coupling.
  [[nodiscard]] double epsilon() const;
  [[nodiscard]] double rho1() const;
  [[nodiscard]] double coupling() const;
  /// Lambda of the subsolution: lambda_min over [0, rho1]; throws
  /// GeometryInadmissible when negative.
  [[nodiscard]] double admissible_Lambda() const;
};

Supersolution build_supersolution(const BarrierProblem& problem, double lambda);

/// Supersolution with a given psi = L(b) (reused across lambda).
Supersolution build_supersolution(const BarrierProblem& problem, const Field& psi, double lambda);

/// lambda_hat1, lambda_star and the subsolution checks at a candidate lambda.
LambdaThresholds subsolution_thresholds(const BarrierProblem& problem);

/// Builds u_lower at lambda >= lambda_star on a dense collar mesh and
/// certifies its residual.
std::pair<Subsolution, SubsolutionCertificate> build_subsolution(
    const BarrierProblem& problem, double lambda, const LambdaThresholds& thresholds,
    std::size_t residual_nodes = 10000);

/// Certificate of a subsolution at lambda (no threshold gate).
SubsolutionCertificate certify_subsolution(const BarrierProblem& problem, const Subsolution& sub,
                                           std::size_t residual_nodes = 10000);

/// Samples u_lower on the discretization.
Field sample_subsolution(const resolvent::Discretization& disc, const Subsolution& sub);

/// Enlarges M until the ordering inequality and u_lower <= u_upper hold.
BarrierPair order_pair(const BarrierProblem& problem, const Subsolution& sub,
                       const SubsolutionCertificate& cert, const Supersolution& super,
                       const LambdaThresholds& thresholds);

/// lambda_hat1, lambda_star, lambda_0 and the certified pair at lambda.
BarrierPair build_barriers(const BarrierProblem& problem, double lambda,
                           LambdaThresholds* thresholds = nullptr);

/// Computes all thresholds, including lambda_0 by the doubling sweep.
LambdaThresholds compute_thresholds(const BarrierProblem& problem);

}  // namespace degenlap::barriers
