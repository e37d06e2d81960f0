#include "bdflow/geometry.hpp"

#include <cmath>
#include <string>

#include "bdflow/errors.hpp"

namespace bdflow {

namespace {

void check_grid(int n) {
  if (n < 16 || n % 2 != 0)
    throw ValidationError("curve grid size must be even and >= 16, got " + std::to_string(n));
}

std::vector<double> sample_x(const CurveSpec& s, std::span<const double> theta) {
  std::vector<double> v(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    switch (s.kind) {
      case CurveKind::Circle: v[i] = s.radius * std::cos(t); break;
      case CurveKind::Ellipse: v[i] = s.semi_major * std::cos(t); break;
      case CurveKind::Star: v[i] = (1.0 + s.amplitude * std::cos(s.lobes * t)) * std::cos(t); break;
    }
  }
  return v;
}

std::vector<double> sample_y(const CurveSpec& s, std::span<const double> theta) {
  std::vector<double> v(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    switch (s.kind) {
      case CurveKind::Circle: v[i] = s.radius * std::sin(t); break;
      case CurveKind::Ellipse: v[i] = s.semi_minor * std::sin(t); break;
      case CurveKind::Star: v[i] = (1.0 + s.amplitude * std::cos(s.lobes * t)) * std::sin(t); break;
    }
  }
  return v;
}

}  // namespace

BoundaryCurve make_curve(const CurveSpec& spec, int n) {
  check_grid(n);
  switch (spec.kind) {
    case CurveKind::Circle:
      if (spec.radius <= 0.0) throw ValidationError("circle radius must be positive");
      break;
    case CurveKind::Ellipse:
      if (spec.semi_major <= 0.0 || spec.semi_minor <= 0.0)
        throw ValidationError("ellipse semi-axes must be positive");
      break;
    case CurveKind::Star: {
      if (spec.lobes < 1) throw ValidationError("star lobe count must be >= 1");
      const double limit = 1.0 / (1.0 + static_cast<double>(spec.lobes) * spec.lobes);
      if (std::abs(spec.amplitude) >= limit)
        throw ValidationError("star amplitude must satisfy |eps| < 1/(1+m^2)");
      break;
    }
  }

  BoundaryCurve c;
  c.spec_ = spec;
  c.n_ = n;
  c.theta_.resize(n);
  for (int j = 0; j < n; ++j) c.theta_[j] = 2.0 * M_PI * j / n;

  const auto xs = sample_x(spec, c.theta_);
  const auto ys = sample_y(spec, c.theta_);

  const auto cx = dft_real(xs);
  const auto cy = dft_real(ys);
  const auto dx = idft_real(fourier_derivative(cx));
  const auto dy = idft_real(fourier_derivative(cy));
  const auto ddx = idft_real(fourier_derivative(fourier_derivative(cx)));
  const auto ddy = idft_real(fourier_derivative(fourier_derivative(cy)));

  c.nodes_.resize(n);
  c.normals_.resize(n);
  c.speed_.resize(n);
  c.curvature_.resize(n);
  c.weights_.resize(n);
  const double h = 2.0 * M_PI / n;
  double perim = 0.0;
  for (int j = 0; j < n; ++j) {
    c.nodes_[j] = {xs[j], ys[j]};
    const double sp = std::hypot(dx[j], dy[j]);
    if (!(sp > 0.0)) throw ValidationError("curve parametrization is degenerate (zero speed)");
    c.speed_[j] = sp;
    // Counterclockwise orientation: outward normal is the tangent rotated by -pi/2.
    c.normals_[j] = {dy[j] / sp, -dx[j] / sp};
    c.curvature_[j] = (dx[j] * ddy[j] - dy[j] * ddx[j]) / (sp * sp * sp);
    c.weights_[j] = h * sp;
    perim += c.weights_[j];
  }
  c.perimeter_ = perim;
  return c;
}

BoundaryCurve BoundaryCurve::circle(double radius, int n) {
  CurveSpec s;
  s.kind = CurveKind::Circle;
  s.radius = radius;
  return make_curve(s, n);
}

BoundaryCurve BoundaryCurve::ellipse(double semi_major, double semi_minor, int n) {
  CurveSpec s;
  s.kind = CurveKind::Ellipse;
  s.semi_major = semi_major;
  s.semi_minor = semi_minor;
  return make_curve(s, n);
}

BoundaryCurve BoundaryCurve::star(double amplitude, int lobes, int n) {
  CurveSpec s;
  s.kind = CurveKind::Star;
  s.amplitude = amplitude;
  s.lobes = lobes;
  return make_curve(s, n);
}

double integrate_boundary(const BoundaryCurve& curve, std::span<const double> f) {
  if (static_cast<int>(f.size()) != curve.size())
    throw ValidationError("integrate_boundary: field size mismatch");
  double s = 0.0;
  const auto w = curve.weights();
  for (int i = 0; i < curve.size(); ++i) s += f[i] * w[i];
  return s;
}

double weighted_inner(const BoundaryCurve& curve, std::span<const double> f,
                      std::span<const double> g, std::span<const double> weight) {
  const size_t n = static_cast<size_t>(curve.size());
  if (f.size() != n || g.size() != n || weight.size() != n)
    throw ValidationError("weighted_inner: field size mismatch");
  const auto w = curve.weights();
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (!(weight[i] > 0.0)) throw ValidationError("weighted_inner: weight must be positive");
    s += f[i] * g[i] * weight[i] * w[i];
  }
  return s;
}

BoundaryField synthesize(const BoundaryCurve& curve, const FourierSeries& series) {
  BoundaryField f(curve.size(), series.mean);
  const auto theta = curve.theta();
  for (const auto& t : series.terms) {
    if (t.k < 1 || t.k > curve.size() / 2)
      throw ValidationError("synthesize: harmonic index out of range");
    for (int j = 0; j < curve.size(); ++j)
      f[j] += t.cos_coeff * std::cos(t.k * theta[j]) + t.sin_coeff * std::sin(t.k * theta[j]);
  }
  return f;
}

}  // namespace bdflow
