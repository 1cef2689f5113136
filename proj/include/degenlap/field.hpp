#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace degenlap {

/// Nodal function on a 1D/radial mesh, with optional samples at the
/// quadrature points of the discretization that produced it.
struct Field {
  std::vector<double> x;       // mesh nodes
  std::vector<double> dist;    // boundary distance of each node
  std::vector<double> values;  // nodal values
  std::vector<double> flux;    // nodal J a |u'|^{p-2} u' (empty when unknown)

  std::vector<double> point_values;
  std::vector<double> point_derivs;
  std::vector<double> point_flux;

  double p = 2.0;
  std::string label;

  [[nodiscard]] std::size_t size() const { return x.size(); }

  [[nodiscard]] double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    for (double v : point_values) m = std::max(m, std::abs(v));
    return m;
  }

  Field& scale(double factor) {
    for (auto* vec : {&values, &point_values, &point_derivs}) {
      for (double& v : *vec) v *= factor;
    }
    const double flux_factor = std::pow(std::abs(factor), p - 1.0) * (factor < 0 ? -1.0 : 1.0);
    for (auto* vec : {&flux, &point_flux}) {
      for (double& v : *vec) v *= flux_factor;
    }
    return *this;
  }
};

}  // namespace degenlap
