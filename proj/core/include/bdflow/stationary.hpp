#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>

#include "bdflow/dtn.hpp"
#include "bdflow/geometry.hpp"

namespace bdflow {

/// Dynamical regime selected jointly by sgn(lambda1) and sgn(p-1):
///   Growth             lambda1 (p-1) < 0, global solutions growing like (t+c)^{1/(p-1)}
///   Neutral            lambda1 = 0 within tolerance, bounded solutions
///   ExtinctionOrBlowup lambda1 (p-1) > 0, finite-time extinction (p>1) or blow-up (p<1)
enum class Regime { Growth, Neutral, ExtinctionOrBlowup };

/// Problem data shared by every downstream computation: exponent, boundary
/// coefficient, operator, and the cached first eigenpair of B + a with the
/// regime sign convention. Immutable; build through make_problem.
struct ProblemSpec {
  std::shared_ptr<const BoundaryCurve> curve;
  std::shared_ptr<const DtnOperator> dtn;
  double p = 2.0;
  BoundaryField a;
  double zero_tol = 0.0;  // absolute tolerance deciding lambda1 == 0
  double lambda1 = 0.0;
  BoundaryField phi1;  // positive first eigenfunction, unit L2(dS) norm
  int sign = 0;        // sgn(lambda1) under zero_tol
  Regime regime = Regime::Neutral;

  int size() const { return curve->size(); }
  /// sgn(lambda1) * p / |p-1|, the coefficient of the power nonlinearity.
  double source_coeff() const;
};

/// Validates p (positive, |p-1| >= 0.05) and the coefficient field, computes
/// the first eigenpair and regime. zero_tol_rel scales with (1 + |a|_inf).
ProblemSpec make_problem(std::shared_ptr<const BoundaryCurve> curve,
                         std::shared_ptr<const DtnOperator> dtn, double p, BoundaryField a,
                         double zero_tol_rel = 1e-8);

/// Smallest eigenvalue of B + a in the quadrature-weighted symmetric form,
/// with its positive L2(dS)-normalized eigenfunction.
std::pair<double, BoundaryField> first_eigen(const DtnOperator& dtn, const BoundaryCurve& curve,
                                             std::span<const double> a);

Regime classify_regime(double lambda1, double p, double zero_tol);

/// Time factor of the separable solutions: (c+t), c, or (c-t) to the power
/// 1/(p-1) depending on the regime branch encoded by `sign` = sgn(lambda1).
/// The vanishing branch requires t < c.
double separable_b(double t, double c, double p, int sign);

/// Lyapunov energy of the normalized flow:
/// integral of  1/2 (f Bf + a f^2) - sgn(lambda1) p/(|p-1|(p+1)) f^{p+1}.
double energy_G(std::span<const double> f, const ProblemSpec& spec);

/// Rayleigh-type quotient (⟨Bf,f⟩ + ∫ a f²) / (∫ |f|^{p+1})^{2/(p+1)}.
/// Also serves as the monotone Dirichlet quotient of trajectories.
double energy_Ep(std::span<const double> f, const ProblemSpec& spec);

struct SteadyState {
  BoundaryField phi;     // positive stationary profile
  double lambda1 = 0.0;
  BoundaryField phi1;
  double Yp = 0.0;       // variational energy level estimate (diagnostic)
  double residual = 0.0; // sup norm of the stationary equation residual
  Regime regime = Regime::Neutral;
};

/// Solves B phi + a phi = sgn(lambda1) p/|p-1| phi^p by damped Newton with a
/// constant-mode-balanced initial scale. The Neutral branch instead selects
/// the eigenfunction ray by the conserved mass: mass_target must equal
/// the integral of w0^p phi1 and fixes phi = s phi1.
SteadyState solve_steady(const ProblemSpec& spec, std::optional<BoundaryField> init = {},
                         std::optional<double> mass_target = {});

struct UniquenessReport {
  int trials = 0;
  double max_pair_distance = 0.0;  // sup-norm over converged pairs
  double max_residual = 0.0;
};

/// Reruns solve_steady from random positive starting profiles (Growth regime
/// only, where the steady state is unique) and reports the worst pairwise
/// sup distance.
UniquenessReport uniqueness_probe(const ProblemSpec& spec, int trials, std::uint64_t seed = 2024);

}  // namespace bdflow
