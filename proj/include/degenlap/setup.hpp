#pragma once

#include <optional>
#include <string>
#include <vector>

#include "degenlap/barriers.hpp"
#include "degenlap/comparison.hpp"
#include "degenlap/config.hpp"
#include "degenlap/fixedpoint.hpp"
#include "degenlap/geometry.hpp"
#include "degenlap/resolvent.hpp"
#include "degenlap/weights.hpp"

namespace degenlap::setup {

/// Problem data assembled from a config file.
struct Setup {
  double p = 2.0;
  int N = 3;       // ambient dimension of the exponent checks
  double s = 2.0;
  std::optional<double> q;
  weights::WeightProfile profile;
  geometry::DomainGeometry geom;
  weights::CoefficientB b;
  std::optional<barriers::NonlinearitySpec> nonlinearity;
  std::string nonlinearity_text;
  barriers::SubsolutionParams params;
  resolvent::ResolventSpec resolvent;
  comparison::PsiSpec psi;
  fixedpoint::IterationOptions iteration;
};

/// Every key the config may contain.
const std::vector<std::string>& known_keys();

/// Builds the setup; missing keys take the defaults of the model problem
/// (interval of length 1, a = b = 1, p = 2).
Setup make_setup(const config::Config& cfg);

/// sqrt-type, power or constant nonlinearities from their parameters.
barriers::NonlinearitySpec make_nonlinearity(const config::Config& cfg, double p,
                                             std::string* text = nullptr);

}  // namespace degenlap::setup
