#pragma once

#include <memory>
#include <span>
#include <vector>

#include "bdflow/numerics.hpp"

namespace bdflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// One real value per boundary node.
using BoundaryField = std::vector<double>;

enum class CurveKind { Circle, Ellipse, Star };

/// Shape parameters for the three supported boundary families.
///   Circle:  radius
///   Ellipse: semi_major, semi_minor
///   Star:    r(t) = 1 + amplitude * cos(lobes * t)
struct CurveSpec {
  CurveKind kind = CurveKind::Circle;
  double radius = 1.0;
  double semi_major = 1.0;
  double semi_minor = 0.5;
  double amplitude = 0.1;
  int lobes = 3;
};

/// Discretized smooth Jordan curve, counterclockwise, with uniform parameter
/// grid t_j = 2 pi j / N. Geometry derivatives come from spectral
/// differentiation of the sampled parametrization, so speed, normals,
/// curvature and quadrature weights share the parametrization's accuracy.
/// Immutable after construction.
class BoundaryCurve {
 public:
  int size() const { return n_; }
  const CurveSpec& spec() const { return spec_; }

  std::span<const double> theta() const { return theta_; }
  std::span<const Vec2> nodes() const { return nodes_; }
  std::span<const Vec2> normals() const { return normals_; }
  std::span<const double> speed() const { return speed_; }
  std::span<const double> curvature() const { return curvature_; }
  std::span<const double> weights() const { return weights_; }
  double perimeter() const { return perimeter_; }

  static BoundaryCurve circle(double radius, int n);
  static BoundaryCurve ellipse(double semi_major, double semi_minor, int n);
  static BoundaryCurve star(double amplitude, int lobes, int n);

 private:
  friend BoundaryCurve make_curve(const CurveSpec&, int);
  BoundaryCurve() = default;

  CurveSpec spec_;
  int n_ = 0;
  std::vector<double> theta_;
  std::vector<Vec2> nodes_;
  std::vector<Vec2> normals_;
  std::vector<double> speed_;
  std::vector<double> curvature_;
  std::vector<double> weights_;
  double perimeter_ = 0.0;
};

/// Validates the shape parameters (positive axes, star amplitude below the
/// smooth star-shaped limit 1/(1+m^2)) and N even >= 16.
BoundaryCurve make_curve(const CurveSpec& spec, int n);

/// Quadrature of f over the curve: sum f_i w_i. Spectrally accurate for
/// smooth periodic integrands.
double integrate_boundary(const BoundaryCurve& curve, std::span<const double> f);

/// integral of f * g * weight over the curve; weight must be positive.
double weighted_inner(const BoundaryCurve& curve, std::span<const double> f,
                      std::span<const double> g, std::span<const double> weight);

/// Finite trigonometric data used for coefficient fields and initial data:
/// mean + sum of (k, cos-coeff, sin-coeff) terms. Smooth by construction.
struct FourierSeries {
  struct Term {
    int k = 1;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
  };
  double mean = 0.0;
  std::vector<Term> terms;
};

/// Evaluates the series on the curve's parameter grid.
BoundaryField synthesize(const BoundaryCurve& curve, const FourierSeries& series);

}  // namespace bdflow
