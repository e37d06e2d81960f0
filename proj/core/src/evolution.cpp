#include "bdflow/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdflow/errors.hpp"

namespace bdflow {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Right-hand side R(v) = -(B + a) v^{1/p} + kappa v (kappa only in the
// normalized flow), evaluated at the root w = v^{1/p}.
BoundaryField flow_rhs(const ProblemSpec& spec, FlowMode mode, std::span<const double> w,
                       std::span<const double> v) {
  auto r = spec.dtn->apply(w);
  const double kappa = (mode == FlowMode::Normalized) ? spec.source_coeff() : 0.0;
  for (int i = 0; i < spec.size(); ++i) r[i] = -(r[i] + spec.a[i] * w[i]) + kappa * v[i];
  return r;
}

SampleDiag make_diag(const ProblemSpec& spec, std::span<const double> u, double flux_int) {
  SampleDiag d;
  d.G = energy_G(u, spec);
  d.I = energy_Ep(u, spec);
  d.Z = z_functional(u, spec);
  d.min = *std::min_element(u.begin(), u.end());
  d.max = *std::max_element(u.begin(), u.end());
  BoundaryField up(spec.size());
  for (int i = 0; i < spec.size(); ++i) up[i] = std::pow(u[i], spec.p) * spec.phi1[i];
  d.mass1 = integrate_boundary(*spec.curve, up);
  d.flux_int = flux_int;
  return d;
}

double phi1_flux(const ProblemSpec& spec, std::span<const double> u) {
  BoundaryField f(spec.size());
  for (int i = 0; i < spec.size(); ++i) f[i] = u[i] * spec.phi1[i];
  return integrate_boundary(*spec.curve, f);
}

}  // namespace

double z_functional(std::span<const double> f, const ProblemSpec& spec) {
  BoundaryField fp(spec.size());
  for (int i = 0; i < spec.size(); ++i) fp[i] = std::pow(f[i], spec.p + 1.0);
  const double integral = integrate_boundary(*spec.curve, fp);
  return std::pow(integral, (spec.p - 1.0) / (spec.p + 1.0));
}

FlowState step(const FlowState& state, const ProblemSpec& spec, FlowMode mode, double dt) {
  if (!(dt > 0.0)) throw ValidationError("step: dt must be positive");
  const int n = spec.size();
  if (static_cast<int>(state.v.size()) != n) throw ValidationError("step: state size mismatch");
  const double p = spec.p;
  const double kappa = (mode == FlowMode::Normalized) ? spec.source_coeff() : 0.0;

  // Predictor: explicit Euler, clipped away from zero.
  BoundaryField v = state.v;
  {
    const auto r = flow_rhs(spec, mode, state.w, state.v);
    for (int i = 0; i < n; ++i) v[i] = std::max(0.2 * state.v[i], state.v[i] + dt * r[i]);
  }

  BoundaryField w(n);
  auto refresh_w = [&](const BoundaryField& vv) {
    for (int i = 0; i < n; ++i) w[i] = std::pow(vv[i], 1.0 / p);
  };
  refresh_w(v);

  auto residual = [&](const BoundaryField& vv, const BoundaryField& ww) {
    auto r = flow_rhs(spec, mode, ww, vv);
    BoundaryField f(n);
    for (int i = 0; i < n; ++i) f[i] = vv[i] - state.v[i] - dt * r[i];
    return f;
  };

  auto res = residual(v, w);
  const int max_newton = 40;
  bool done = false;
  for (int iter = 0; iter < max_newton; ++iter) {
    const double tol = 1e-11 * std::max(inf_norm(v), 1e-30);
    if (inf_norm(res) <= tol) {
      done = true;
      break;
    }

    // J = I + dt (B + diag a) diag(v^{1/p-1}/p) - dt kappa I; the chain-rule
    // factor scales columns.
    std::vector<double> dwdv(n);
    for (int j = 0; j < n; ++j) dwdv[j] = std::pow(v[j], 1.0 / p - 1.0) / p;
    DenseMatrix jac(n, n);
    const auto& b = spec.dtn->matrix();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) jac(i, j) = dt * b(i, j) * dwdv[j];
      jac(i, i) += 1.0 - dt * kappa + dt * spec.a[i] * dwdv[i];
    }
    std::vector<double> rhs(res.begin(), res.end());
    for (auto& x : rhs) x = -x;
    const auto delta = solve_dense(std::move(jac), std::move(rhs));

    double f0 = 0.0;
    for (double x : res) f0 += x * x;
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= std::ldexp(1.0, -24)) {
      BoundaryField trial(n);
      bool positive = true;
      for (int i = 0; i < n; ++i) {
        trial[i] = v[i] + alpha * delta[i];
        if (!(trial[i] > 0.0)) {
          positive = false;
          break;
        }
      }
      if (positive) {
        BoundaryField tw(n);
        for (int i = 0; i < n; ++i) tw[i] = std::pow(trial[i], 1.0 / p);
        auto tr = residual(trial, tw);
        double f1 = 0.0;
        for (double x : tr) f1 += x * x;
        if (f1 <= (1.0 - 1e-4 * alpha) * f0 || f1 <= 1e-30) {
          v = std::move(trial);
          w = std::move(tw);
          res = std::move(tr);
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) throw SolverError("step: Newton backtracking failed (positivity or descent)");
  }
  if (!done && inf_norm(res) > 1e-11 * std::max(inf_norm(v), 1e-30))
    throw SolverError("step: Newton did not converge in the iteration budget");

  FlowState out;
  out.time = state.time + dt;
  out.v = std::move(v);
  out.w = std::move(w);
  out.dt_last = dt;
  return out;
}

Trajectory evolve(const ProblemSpec& spec, const BoundaryField& u0, FlowMode mode,
                  const StepControls& controls) {
  const int n = spec.size();
  if (static_cast<int>(u0.size()) != n) throw ValidationError("evolve: initial data size mismatch");
  for (double x : u0)
    if (!(x > 1e-12))
      throw ValidationError("evolve: initial data must be positive (nodes below 1e-12 rejected)");
  if (!(controls.horizon > 0.0)) throw ValidationError("evolve: horizon must be positive");
  if (controls.store_stride < 1) throw ValidationError("evolve: store stride must be >= 1");

  const double u0_min = *std::min_element(u0.begin(), u0.end());
  const double u0_max = *std::max_element(u0.begin(), u0.end());
  const bool haltable = mode == FlowMode::Physical && spec.regime == Regime::ExtinctionOrBlowup;
  const double floor_level = controls.halt_floor_factor * u0_min;
  const double ceiling_level = controls.halt_ceiling_factor * u0_max;

  FlowState state;
  state.time = 0.0;
  state.w = u0;
  state.v.resize(n);
  for (int i = 0; i < n; ++i) state.v[i] = std::pow(u0[i], spec.p);

  Trajectory traj;
  traj.mode = mode;
  traj.problem = spec;
  traj.times.push_back(0.0);
  traj.fields.push_back(state.w);
  traj.diag.push_back(make_diag(spec, state.w, 0.0));

  double flux_acc = 0.0;
  int since_store = 0;
  auto store = [&](const FlowState& s) {
    traj.times.push_back(s.time);
    traj.fields.push_back(s.w);
    traj.diag.push_back(make_diag(spec, s.w, flux_acc));
    flux_acc = 0.0;
    since_store = 0;
  };

  auto check_halt = [&](const FlowState& s) {
    if (!haltable) return false;
    const double mn = *std::min_element(s.w.begin(), s.w.end());
    const double mx = *std::max_element(s.w.begin(), s.w.end());
    if (spec.p > 1.0) return mn < floor_level;
    return mx > ceiling_level;
  };

  double dt = controls.fixed_dt ? *controls.fixed_dt : controls.dt_init;
  while (state.time < controls.horizon * (1.0 - 1e-14)) {
    const double remaining = controls.horizon - state.time;

    if (controls.fixed_dt) {
      const double h = std::min(dt, remaining);
      auto next = step(state, spec, mode, h);
      flux_acc += h * phi1_flux(spec, next.w);
      state = std::move(next);
      ++since_store;
      const bool halt = check_halt(state);
      if (since_store >= controls.store_stride || halt ||
          state.time >= controls.horizon * (1.0 - 1e-14))
        store(state);
      if (halt) {
        traj.halted = true;
        break;
      }
      continue;
    }

    double h = std::min(dt, remaining);
    bool accepted = false;
    FlowState fine;
    double half_flux = 0.0;
    while (!accepted) {
      if (h < controls.dt_min)
        throw SolverError("evolve: step size underflow at t = " + std::to_string(state.time));
      try {
        const auto coarse = step(state, spec, mode, h);
        auto mid = step(state, spec, mode, 0.5 * h);
        half_flux = 0.5 * h * phi1_flux(spec, mid.w);
        fine = step(mid, spec, mode, 0.5 * h);
        half_flux += 0.5 * h * phi1_flux(spec, fine.w);

        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(coarse.v[i] - fine.v[i]));
        err /= 1.0 + inf_norm(fine.v);
        if (err <= controls.rtol) {
          accepted = true;
          const double grow =
              err > 0.0 ? 0.9 * std::sqrt(controls.rtol / err) : controls.growth_cap;
          dt = h * std::clamp(grow, 0.3, controls.growth_cap);
          dt = std::min(dt, controls.dt_max);
        } else {
          h *= std::clamp(0.9 * std::sqrt(controls.rtol / err), 0.1, 0.7);
        }
      } catch (const SolverError&) {
        h *= 0.5;
      }
    }
    fine.dt_last = h;
    flux_acc += half_flux;
    state = std::move(fine);
    ++since_store;
    const bool halt = check_halt(state);
    if (since_store >= controls.store_stride || halt ||
        state.time >= controls.horizon * (1.0 - 1e-14))
      store(state);
    if (halt) {
      traj.halted = true;
      break;
    }
  }
  return traj;
}

double estimate_Tstar(const Trajectory& traj) {
  if (traj.mode != FlowMode::Physical)
    throw ValidationError("estimate_Tstar: needs a physical trajectory");
  if (traj.problem.regime != Regime::ExtinctionOrBlowup)
    throw ValidationError("estimate_Tstar: regime has no finite extinction or blow-up time");
  if (!traj.halted)
    throw ValidationError("estimate_Tstar: trajectory did not reach the near-singular halt");
  const int m = traj.samples();
  const int window = std::min(20, m);
  if (window < 5) throw ValidationError("estimate_Tstar: window too short (< 5 samples)");

  std::vector<double> ts, zs;
  for (int i = m - window; i < m; ++i) {
    ts.push_back(traj.times[i]);
    zs.push_back(traj.diag[i].Z);
  }
  const auto fit = fit_line(ts, zs);
  if (!(fit.slope < 0.0)) throw SolverError("estimate_Tstar: Z is not decreasing on the window");
  return -fit.intercept / fit.slope;
}

Trajectory rescale_trajectory(const Trajectory& traj, std::optional<double> tstar,
                              const ProblemSpec& spec) {
  if (traj.mode != FlowMode::Physical)
    throw ValidationError("rescale_trajectory: input must be a physical trajectory");
  const double p = spec.p;
  const double expo = 1.0 / (p - 1.0);

  Trajectory out;
  out.mode = FlowMode::Normalized;
  out.problem = spec;
  out.halted = false;
  out.tstar_estimate = tstar;

  for (int s = 0; s < traj.samples(); ++s) {
    const double t = traj.times[s];
    double tau = 0.0, b = 1.0;
    switch (spec.regime) {
      case Regime::Growth:
        tau = std::log1p(t);
        b = std::pow(1.0 + t, expo);
        break;
      case Regime::Neutral:
        tau = t;
        b = 1.0;
        break;
      case Regime::ExtinctionOrBlowup: {
        if (!tstar)
          throw ValidationError("rescale_trajectory: extinction/blow-up branch needs tstar");
        if (t >= *tstar)
          throw ValidationError("rescale_trajectory: sample at or beyond tstar");
        tau = -std::log1p(-t / *tstar);
        b = std::pow(*tstar - t, expo);
        break;
      }
    }
    BoundaryField w(traj.fields[s].size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = traj.fields[s][i] / b;
    out.times.push_back(tau);
    out.diag.push_back(make_diag(spec, w, 0.0));
    out.fields.push_back(std::move(w));
  }
  return out;
}

BoundaryField monitor_H(std::span<const double> u, const ProblemSpec& spec) {
  if (static_cast<int>(u.size()) != spec.size())
    throw ValidationError("monitor_H: field size mismatch");
  for (double x : u)
    if (!(x > 0.0)) throw ValidationError("monitor_H: field must be positive");
  auto bu = spec.dtn->apply(u);
  BoundaryField h(spec.size());
  for (int i = 0; i < spec.size(); ++i)
    h[i] = std::pow(u[i], -spec.p) * (bu[i] + spec.a[i] * u[i]);
  return h;
}

InfiniteSpeedReport infinite_speed_probe(const ProblemSpec& spec,
                                         const std::vector<BoundaryField>& initial_data,
                                         double t0, const StepControls& controls) {
  if (!(t0 > 0.0)) throw ValidationError("infinite_speed_probe: t0 must be positive");
  InfiniteSpeedReport rep;
  for (const auto& u0 : initial_data) {
    StepControls c = controls;
    c.horizon = t0;
    const auto traj = evolve(spec, u0, FlowMode::Physical, c);
    double est = 1e300;
    for (int s = 1; s < traj.samples(); ++s) {
      const double t = traj.times[s];
      if (t <= 0.0 || t > t0 * (1.0 + 1e-12)) continue;
      est = std::min(est, traj.diag[s].min / std::pow(t, 1.0 / spec.p));
    }
    rep.estimates.push_back(est);
  }
  return rep;
}

}  // namespace bdflow
