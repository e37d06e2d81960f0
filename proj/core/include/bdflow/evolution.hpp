#pragma once

#include <optional>
#include <vector>

#include "bdflow/stationary.hpp"

namespace bdflow {

enum class FlowMode { Physical, Normalized };

/// State of the flow at one instant. The stepped unknown is v = w^p (the
/// conserved-form variable); w is kept alongside and both stay strictly
/// positive.
struct FlowState {
  double time = 0.0;
  BoundaryField w;
  BoundaryField v;
  double dt_last = 0.0;
};

struct StepControls {
  double rtol = 1e-8;           // step-doubling relative error tolerance
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 0.25;
  double growth_cap = 1.5;      // max dt growth per accepted step
  std::optional<double> fixed_dt;  // plain implicit-Euler marching, no adaptivity
  int store_stride = 1;         // store every k-th accepted step
  double horizon = 1.0;
  double halt_floor_factor = 1e-3;    // extinction halt: min u below factor * initial min
  double halt_ceiling_factor = 1e3;   // blow-up halt: max u above factor * initial max
};

/// Per-sample functionals: Lyapunov energy G, Dirichlet quotient I, the
/// integral power Z, field extrema, and the weighted mass against phi1.
/// flux_int accumulates dt * integral(u phi1 dS) over the implicit substeps
/// since the previous stored sample; the discrete mass law states
/// delta mass1 = -lambda1 * flux_int for the physical flow.
struct SampleDiag {
  double G = 0.0;
  double I = 0.0;
  double Z = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mass1 = 0.0;
  double flux_int = 0.0;
};

struct Trajectory {
  FlowMode mode = FlowMode::Physical;
  std::vector<double> times;
  std::vector<BoundaryField> fields;
  std::vector<SampleDiag> diag;
  bool halted = false;  // reached the near-singular threshold
  std::optional<double> tstar_estimate;
  ProblemSpec problem;

  int samples() const { return static_cast<int>(times.size()); }
};

/// One backward-Euler step of dt in the conserved variable, solved by damped
/// Newton with positivity-preserving backtracking. Converged residual is at
/// most 1e-11 |v|_inf. Throws SolverError when Newton cannot meet that; the
/// adaptive driver responds by halving dt.
FlowState step(const FlowState& state, const ProblemSpec& spec, FlowMode mode, double dt);

/// Marches the flow to the horizon (or the near-singular halt in the
/// physical extinction/blow-up regime) with step-doubling error control,
/// storing every store_stride-th accepted state with its diagnostics.
Trajectory evolve(const ProblemSpec& spec, const BoundaryField& u0, FlowMode mode,
                  const StepControls& controls);

/// Linear extrapolation of Z(t) over the final stored window (up to 20
/// samples, at least 5) to its zero crossing. Valid only for halted physical
/// trajectories in the extinction/blow-up regime.
double estimate_Tstar(const Trajectory& traj);

/// Physical -> Normalized change of variables, branch selected by the
/// regime: w = u / b(t) with the separable time factor and log-type time map
/// (identity for the Neutral branch). The extinction/blow-up branch requires
/// tstar beyond every stored sample time.
Trajectory rescale_trajectory(const Trajectory& traj, std::optional<double> tstar,
                              const ProblemSpec& spec);

/// H = u^{-p} (B u + a u), the curvature-like quantity obeying one-sided
/// comparison bounds (lower for p > 1, upper for p < 1).
BoundaryField monitor_H(std::span<const double> u, const ProblemSpec& spec);

struct InfiniteSpeedReport {
  std::vector<double> estimates;  // one per initial datum: min over stored t of min_x u / t^{1/p}
};

/// Evolves each initial datum to t0 and reports the positivity-rate
/// estimate min_{x, 0 < t <= t0} u(x,t) / t^{1/p}.
InfiniteSpeedReport infinite_speed_probe(const ProblemSpec& spec,
                                         const std::vector<BoundaryField>& initial_data,
                                         double t0, const StepControls& controls);

/// Z(f) = (integral of f^{p+1} dS)^{(p-1)/(p+1)}; asymptotically linear near
/// the extinction or blow-up time.
double z_functional(std::span<const double> f, const ProblemSpec& spec);

}  // namespace bdflow
