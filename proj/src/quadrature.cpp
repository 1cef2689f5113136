#include "degenlap/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <sstream>

#include "degenlap/error.hpp"

namespace degenlap::quadrature {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  int depth;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gk15(const Integrand& g, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = g(center - dx) + g(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) {
    std::ostringstream os;
    os << "non-finite integrand on [" << a << ", " << b << "]";
    throw Error(ErrorCode::NaNEncountered, os.str());
  }
  return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

double adaptive(const Integrand& g, double a, double b,
                const QuadratureSpec& spec) {
  std::priority_queue<Panel> queue;
  Panel first = gk15(g, a, b, 0);
  double value = first.value;
  double error = first.error;
  queue.push(first);
  constexpr std::size_t kMaxPanels = 200000;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    Panel worst = queue.top();
    if (worst.depth >= spec.max_depth || queue.size() >= kMaxPanels) {
      std::ostringstream os;
      os << "refinement did not converge (estimate " << value << ", error "
         << error << ")";
      throw Error(ErrorCode::Divergent, os.str());
    }
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = gk15(g, worst.a, mid, worst.depth + 1);
    Panel right = gk15(g, mid, worst.b, worst.depth + 1);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    if (error < 0.0) {
      // Accumulated cancellation; recompute from the live panels.
      std::priority_queue<Panel> copy = queue;
      value = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        value += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  // Final sum over panels in a fixed order for reproducibility.
  std::vector<Panel> panels;
  panels.reserve(queue.size());
  while (!queue.empty()) {
    panels.push_back(queue.top());
    queue.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  double total = 0.0;
  for (const Panel& p : panels) total += p.value;
  return total;
}

// Integral over [0,1] in u of f(anchor + dir*H*u^m) * H*m*u^{m-1}.
double mapped(const Integrand& f, double anchor, double dir, double length,
              double gamma, const QuadratureSpec& spec) {
  const double m = 1.0 / (1.0 - gamma);
  Integrand g = [&](double u) {
    const double offset = length * std::pow(u, m);
    const double t = anchor + dir * offset;
    if (offset <= 0.0 || t == anchor) return 0.0;
    return f(t) * length * m * std::pow(u, m - 1.0);
  };
  return adaptive(g, 0.0, 1.0, spec);
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "quadrature tolerances must be > 0");
  }
  if (max_depth < 1) {
    throw Error(ErrorCode::InvalidArgument, "quadrature max_depth must be >= 1");
  }
  for (const auto& hint : {singularity_hint, right_singularity_hint}) {
    if (hint && (*hint < 0.0 || *hint >= 1.0)) {
      throw Error(ErrorCode::Divergent,
                  "singularity exponent outside [0,1): integral diverges");
    }
  }
}

double integrate(const Integrand& f, double lo, double hi,
                 const QuadratureSpec& spec) {
  spec.validate();
  if (!(lo < hi)) {
    if (lo == hi) return 0.0;
    throw Error(ErrorCode::InvalidArgument, "integrate requires lo < hi");
  }
  const double gl = spec.singularity_hint.value_or(0.0);
  const double gr = spec.right_singularity_hint.value_or(0.0);
  const double length = hi - lo;
  if (gl > 0.0 && gr > 0.0) {
    const double mid = lo + 0.5 * length;
    return mapped(f, lo, 1.0, mid - lo, gl, spec) +
           mapped(f, hi, -1.0, hi - mid, gr, spec);
  }
  if (gl > 0.0) return mapped(f, lo, 1.0, length, gl, spec);
  if (gr > 0.0) return mapped(f, hi, -1.0, length, gr, spec);
  return adaptive(f, lo, hi, spec);
}

const GaussRule& gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "Gauss rule needs n >= 1");

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double jj = static_cast<double>(j);
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * jj - 1.0) * x * p2 - (jj - 1.0) * p3) / jj;
      }
      dp = static_cast<double>(n) * (x * p1 - p2) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map [-1,1] -> [0,1]; ascending order.
    rule.nodes[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

std::vector<double> graded_mesh(double lo, double hi, std::size_t cells,
                                const MeshGrading& grading) {
  if (!(lo < hi) || cells < 2) {
    throw Error(ErrorCode::InvalidArgument, "graded_mesh needs lo < hi, cells >= 2");
  }
  if (!(grading.ratio > 0.0 && grading.ratio < 1.0) || !(grading.finest > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mesh ratio must be in (0,1), finest > 0");
  }
  const double length = hi - lo;
  const double q = 1.0 / grading.ratio;
  const int ends = (grading.grade_lo ? 1 : 0) + (grading.grade_hi ? 1 : 0);

  auto graded_count = [&](double h_core) -> std::size_t {
    if (ends == 0 || grading.finest >= h_core) return 0;
    return static_cast<std::size_t>(
        std::ceil(std::log(h_core / grading.finest) / std::log(q)));
  };
  auto graded_length = [&](std::size_t count) {
    return grading.finest * (std::pow(q, static_cast<double>(count)) - 1.0) /
           (q - 1.0);
  };

  double h_core = length / static_cast<double>(cells);
  std::size_t graded = 0;
  std::size_t core = cells;
  for (int iter = 0; iter < 60; ++iter) {
    graded = graded_count(h_core);
    while (graded > 0 && ends * graded_length(graded) >= 0.5 * length) --graded;
    const std::size_t used = static_cast<std::size_t>(ends) * graded;
    core = cells > used + 1 ? cells - used : 1;
    const double next =
        (length - ends * graded_length(graded)) / static_cast<double>(core);
    if (std::abs(next - h_core) <= 1e-15 * h_core) break;
    h_core = next;
  }
  const double core_width =
      (length - ends * graded_length(graded)) / static_cast<double>(core);

  std::vector<double> widths;
  widths.reserve(static_cast<std::size_t>(ends) * graded + core);
  if (grading.grade_lo) {
    for (std::size_t j = 0; j < graded; ++j) {
      widths.push_back(grading.finest * std::pow(q, static_cast<double>(j)));
    }
  }
  for (std::size_t j = 0; j < core; ++j) widths.push_back(core_width);
  if (grading.grade_hi) {
    for (std::size_t j = graded; j-- > 0;) {
      widths.push_back(grading.finest * std::pow(q, static_cast<double>(j)));
    }
  }

  std::vector<double> nodes;
  nodes.reserve(widths.size() + 1);
  nodes.push_back(lo);
  // The upper graded block is laid out from hi backwards so that both
  // boundary cells have exactly the finest width.
  const std::size_t hi_block = grading.grade_hi ? graded : 0;
  const std::size_t forward = widths.size() - hi_block;
  double x = lo;
  for (std::size_t j = 0; j < forward; ++j) {
    x += widths[j];
    nodes.push_back(x);
  }
  std::vector<double> tail;
  double y = hi;
  for (std::size_t j = 0; j < hi_block; ++j) {
    tail.push_back(y);
    y -= widths[widths.size() - 1 - j];
  }
  if (hi_block > 0) {
    // Replace the last forward node by the exact junction point.
    nodes.back() = y;
    for (std::size_t j = tail.size(); j-- > 0;) nodes.push_back(tail[j]);
  } else {
    nodes.back() = hi;
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "graded_mesh produced a degenerate cell");
    }
  }
  return nodes;
}

QuadratureLayout::QuadratureLayout(std::vector<double> nodes, double gamma_lo,
                                   double gamma_hi, std::size_t order)
    : nodes_(std::move(nodes)), order_(order) {
  if (nodes_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "layout needs at least one cell");
  }
  if (gamma_lo < 0.0 || gamma_lo >= 1.0 || gamma_hi < 0.0 || gamma_hi >= 1.0) {
    throw Error(ErrorCode::Divergent, "endpoint exponent outside [0,1)");
  }
  if (nodes_.size() == 2 && gamma_lo > 0.0 && gamma_hi > 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "a single cell cannot carry two singular endpoints");
  }
  const GaussRule& rule = gauss_legendre(order_);
  const std::size_t n = order_;

  auto lagrange = [&](std::size_t j, double s) {
    double basis = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m != j) basis *= (s - rule.nodes[m]) / (rule.nodes[j] - rule.nodes[m]);
    }
    return basis;
  };
  partial_.assign(n * n, 0.0);
  rpartial_.assign(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double sk = rule.nodes[k];
    for (std::size_t q = 0; q < n; ++q) {
      const double s = sk * rule.nodes[q];
      const double w = sk * rule.weights[q];
      const double sr = sk + (1.0 - sk) * rule.nodes[q];
      const double wr = (1.0 - sk) * rule.weights[q];
      for (std::size_t j = 0; j < n; ++j) {
        partial_[k * n + j] += w * lagrange(j, s);
        rpartial_[k * n + j] += wr * lagrange(j, sr);
      }
    }
  }

  const std::size_t ncell = cells();
  points_.resize(ncell * n);
  weights_.resize(ncell * n);
  jac_.resize(ncell * n);
  lo_offsets_.resize(ncell * n);
  hi_offsets_.resize(ncell * n);
  const double lo = nodes_.front();
  const double hi = nodes_.back();
  for (std::size_t c = 0; c < ncell; ++c) {
    const double x0 = nodes_[c];
    const double x1 = nodes_[c + 1];
    const double h = x1 - x0;
    const bool left = (c == 0 && gamma_lo > 0.0);
    const bool right = (c + 1 == ncell && gamma_hi > 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double s = rule.nodes[k];
      double t;
      double dt;
      double off_lo;
      double off_hi;
      if (left) {
        const double m = 1.0 / (1.0 - gamma_lo);
        off_lo = h * std::pow(s, m);
        t = x0 + off_lo;
        off_hi = hi - t;
        dt = h * m * std::pow(s, m - 1.0);
      } else if (right) {
        // 1 - s_k is the mirrored node, exact by symmetry of the rule.
        const double m = 1.0 / (1.0 - gamma_hi);
        const double sm = rule.nodes[n - 1 - k];
        off_hi = h * std::pow(sm, m);
        t = x1 - off_hi;
        off_lo = t - lo;
        dt = h * m * std::pow(sm, m - 1.0);
      } else {
        t = x0 + h * s;
        dt = h;
        off_lo = (x0 - lo) + h * s;
        off_hi = (hi - x1) + h * rule.nodes[n - 1 - k];
      }
      lo_offsets_[c * n + k] = off_lo;
      hi_offsets_[c * n + k] = off_hi;
      points_[c * n + k] = t;
      jac_[c * n + k] = dt;
      weights_[c * n + k] = rule.weights[k] * dt;
    }
  }
}

QuadratureLayout::Cumulative QuadratureLayout::cumulative(
    std::span<const double> samples) const {
  if (samples.size() != points_.size()) {
    throw Error(ErrorCode::InvalidArgument, "sample count does not match layout");
  }
  const std::size_t n = order_;
  Cumulative out;
  out.at_nodes.assign(cells() + 1, 0.0);
  out.at_points.assign(points_.size(), 0.0);
  double running = 0.0;
  for (std::size_t c = 0; c < cells(); ++c) {
    const std::size_t base = c * n;
    double cell_total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cell_total += weights_[base + j] * samples[base + j];
    }
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += partial_[k * n + j] * jac_[base + j] * samples[base + j];
      }
      out.at_points[base + k] = running + acc;
    }
    running += cell_total;
    out.at_nodes[c + 1] = running;
  }
  return out;
}

QuadratureLayout::Cumulative QuadratureLayout::reverse_cumulative(
    std::span<const double> samples) const {
  if (samples.size() != points_.size()) {
    throw Error(ErrorCode::InvalidArgument, "sample count does not match layout");
  }
  const std::size_t n = order_;
  Cumulative out;
  out.at_nodes.assign(cells() + 1, 0.0);
  out.at_points.assign(points_.size(), 0.0);
  double running = 0.0;
  for (std::size_t c = cells(); c-- > 0;) {
    const std::size_t base = c * n;
    double cell_total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cell_total += weights_[base + j] * samples[base + j];
    }
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += rpartial_[k * n + j] * jac_[base + j] * samples[base + j];
      }
      out.at_points[base + k] = running + acc;
    }
    running += cell_total;
    out.at_nodes[c] = running;
  }
  return out;
}

double QuadratureLayout::total(std::span<const double> samples) const {
  if (samples.size() != points_.size()) {
    throw Error(ErrorCode::InvalidArgument, "sample count does not match layout");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) acc += weights_[i] * samples[i];
  return acc;
}

std::vector<double> QuadratureLayout::sample(const Integrand& f) const {
  std::vector<double> out(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) out[i] = f(points_[i]);
  return out;
}

PrimitiveTable::PrimitiveTable(Integrand f, double rho0,
                               const QuadratureSpec& spec, std::size_t cells,
                               double grading_ratio)
    : f_(std::move(f)), spec_(spec) {
  spec_.validate();
  if (!(rho0 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "primitive requires rho0 > 0");
  }
  MeshGrading grading{grading_ratio, 1e-12 * rho0, true, false};
  nodes_ = graded_mesh(0.0, rho0, cells, grading);
  values_.assign(nodes_.size(), 0.0);
  QuadratureSpec interior = spec_;
  interior.singularity_hint.reset();
  interior.right_singularity_hint.reset();
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double piece =
        integrate(f_, nodes_[i], nodes_[i + 1], i == 0 ? spec_ : interior);
    values_[i + 1] = values_[i] + piece;
  }
}

double PrimitiveTable::operator()(double t) const {
  if (t < 0.0 || t > nodes_.back()) {
    std::ostringstream os;
    os << "t=" << t << " outside [0, " << nodes_.back() << "]";
    throw Error(ErrorCode::OutOfCollar, os.str());
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  const std::size_t i =
      it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (i + 1 >= nodes_.size()) return values_.back();
  if (t == nodes_[i]) return values_[i];
  QuadratureSpec local = spec_;
  if (i != 0) local.singularity_hint.reset();
  local.right_singularity_hint.reset();
  return values_[i] + integrate(f_, nodes_[i], t, local);
}

}  // namespace degenlap::quadrature
