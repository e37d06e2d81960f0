#pragma once

#include <memory>
#include <span>
#include <vector>

#include "bdflow/geometry.hpp"
#include "bdflow/numerics.hpp"

namespace bdflow {

/// Discretization-honesty record filled in at operator build time.
/// symmetry_defect is measured before the mandatory symmetrization, in the
/// quadrature-weighted coordinates where the continuous operator is
/// self-adjoint.
struct DtnBuildReport {
  double symmetry_defect = 0.0;
  double constant_defect = 0.0;   // |B 1|_inf
  double psd_defect = 0.0;        // max(0, -lambda_min) of the weighted form
  double dirichlet_residual = 0.0;  // worst smooth-mode trace fit (MFS only)
};

struct InteriorSamples {
  std::vector<Vec2> points;
  std::vector<double> values;
};

/// Map from Dirichlet boundary data to the outward normal derivative of its
/// harmonic extension. Two representations:
///   Spectral — exact |k|/R multiplier on a circle of radius R;
///   Dense    — N x N nodal matrix from a fundamental-solutions fit,
///              symmetrized in the weighted inner product.
/// Immutable once built; apply() is const and thread-safe.
class DtnOperator {
 public:
  enum class Kind { Spectral, Dense };

  Kind kind() const { return kind_; }
  const BoundaryCurve& curve() const { return *curve_; }
  std::shared_ptr<const BoundaryCurve> curve_ptr() const { return curve_; }
  const DtnBuildReport& build_report() const { return report_; }

  BoundaryField apply(std::span<const double> f) const;

  /// Nodal matrix form (materialized for both kinds; Jacobians and spectra
  /// need it).
  const DenseMatrix& matrix() const { return matrix_; }

  /// Spectral representation: multiplier per wavenumber k = 0..N/2.
  std::span<const double> multipliers() const { return multipliers_; }

 private:
  friend DtnOperator build_dtn_circle(std::shared_ptr<const BoundaryCurve>);
  friend DtnOperator build_dtn_general(std::shared_ptr<const BoundaryCurve>, double, double);
  friend InteriorSamples harmonic_extend(const DtnOperator&, std::span<const double>,
                                         std::span<const Vec2>);

  Kind kind_ = Kind::Spectral;
  std::shared_ptr<const BoundaryCurve> curve_;
  std::vector<double> multipliers_;
  DenseMatrix matrix_;
  DtnBuildReport report_;
  // Fundamental-solutions data, kept for harmonic extension.
  std::vector<Vec2> sources_;
  DenseMatrix charge_solve_;  // boundary data -> source strengths
};

/// Exact multiplier operator on a circle; the curve must be a circle and the
/// output applies |k|/R per mode.
DtnOperator build_dtn_circle(std::shared_ptr<const BoundaryCurve> circle);

/// Dense operator on a smooth star-shaped curve by the method of fundamental
/// solutions: point sources sit outside the domain at distance charge_offset
/// along the outward normals, the Dirichlet trace is fitted by damped least
/// squares (damping `reg`), and the normal derivative of the source expansion
/// is read off at the nodes. The result is symmetrized in the weighted inner
/// product; the pre-symmetrization defect is recorded in the build report.
DtnOperator build_dtn_general(std::shared_ptr<const BoundaryCurve> curve,
                              double charge_offset = 0.6, double reg = 1e-12);

/// Evaluates the harmonic extension of f at interior points (Poisson integral
/// for the circle, source expansion otherwise). Points closer to the boundary
/// than the local node spacing are rejected.
InteriorSamples harmonic_extend(const DtnOperator& op, std::span<const double> f,
                                std::span<const Vec2> points);

}  // namespace bdflow
