#include "bdflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "bdflow/errors.hpp"

namespace bdflow {

namespace {

double weighted_norm(std::span<const double> f, const ProblemSpec& spec,
                     std::span<const double> phi, double p) {
  const auto w = spec.curve->weights();
  double s = 0.0;
  for (int i = 0; i < spec.size(); ++i) s += f[i] * f[i] * std::pow(phi[i], p - 1.0) * w[i];
  return std::sqrt(s);
}

double l2_norm(std::span<const double> f, const ProblemSpec& spec) {
  const auto w = spec.curve->weights();
  double s = 0.0;
  for (int i = 0; i < spec.size(); ++i) s += f[i] * f[i] * w[i];
  return std::sqrt(s);
}

}  // namespace

LyapunovReport lyapunov_series(const Trajectory& traj) {
  if (traj.mode != FlowMode::Normalized)
    throw ValidationError("lyapunov_series: needs a normalized trajectory");
  LyapunovReport rep;
  for (const auto& d : traj.diag) rep.values.push_back(d.G);
  rep.pass = true;
  for (size_t i = 0; i + 1 < rep.values.size(); ++i) {
    const double inc = rep.values[i + 1] - rep.values[i];
    rep.increments.push_back(inc);
    if (inc > 1e-8 * (1.0 + std::abs(rep.values[i])) && rep.pass) {
      rep.pass = false;
      rep.first_violation = static_cast<int>(i);
    }
  }
  return rep;
}

HarnackReport harnack_report(const Trajectory& traj, double tstar, const ProblemSpec& spec) {
  if (traj.mode != FlowMode::Physical)
    throw ValidationError("harnack_report: needs a physical trajectory");
  if (spec.regime != Regime::ExtinctionOrBlowup)
    throw ValidationError("harnack_report: regime has no separable rate to compare against");
  if (!(tstar > 0.0)) throw ValidationError("harnack_report: missing tstar");

  const double expo = 1.0 / (spec.p - 1.0);
  HarnackReport rep;
  double cmax = 0.0;
  bool positive = true;
  for (int s = 0; s < traj.samples(); ++s) {
    const double t = traj.times[s];
    if (t <= 0.0 || t > 0.95 * tstar) continue;
    const double rate = std::pow(tstar - t, expo);
    const auto& d = traj.diag[s];
    const double rs = d.max / rate;
    const double ri = d.min / rate;

    BoundaryField uabs(traj.fields[s]);
    const double l1 = integrate_boundary(*spec.curve, uabs);
    BoundaryField upp(spec.size());
    for (int i = 0; i < spec.size(); ++i) upp[i] = std::pow(uabs[i], spec.p + 1.0);
    const double lpp = std::pow(integrate_boundary(*spec.curve, upp), 1.0 / (spec.p + 1.0));

    rep.times.push_back(t);
    rep.r_sup.push_back(rs);
    rep.r_inf.push_back(ri);
    rep.lppq_ratio.push_back(lpp / rate);
    rep.sup_over_l1.push_back(d.max / l1);
    rep.inf_over_l1.push_back(d.min / l1);
    if (!(ri > 0.0)) positive = false;
    cmax = std::max(cmax, rs);
    if (ri > 0.0) cmax = std::max(cmax, 1.0 / ri);
  }
  rep.c_emp = cmax;
  rep.bounded = positive && !rep.times.empty();
  return rep;
}

RateReport fit_rate(const Trajectory& traj, std::span<const double> phi, double window_fraction,
                    double gamma_p_reference) {
  if (traj.mode != FlowMode::Normalized)
    throw ValidationError("fit_rate: needs a normalized trajectory");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw ValidationError("fit_rate: window fraction out of (0, 1]");
  const ProblemSpec& spec = traj.problem;
  if (static_cast<int>(phi.size()) != spec.size())
    throw ValidationError("fit_rate: phi size mismatch");

  const double tau_end = traj.times.back();
  const double tau_start = tau_end - window_fraction * (tau_end - traj.times.front());

  std::vector<double> taus, lognorms;
  double first_norm = -1.0;
  for (int s = 0; s < traj.samples(); ++s) {
    if (traj.times[s] < tau_start) continue;
    BoundaryField h(spec.size());
    for (int i = 0; i < spec.size(); ++i) h[i] = traj.fields[s][i] - phi[i];
    const double nrm = l2_norm(h, spec);
    if (nrm < 1e-10) continue;  // solver-tolerance floor
    if (first_norm < 0.0) first_norm = nrm;
    taus.push_back(traj.times[s]);
    lognorms.push_back(std::log(nrm));
  }
  if (static_cast<int>(taus.size()) < 20)
    throw ValidationError("fit_rate: window too short (< 20 usable samples)");

  RateReport rep;
  rep.tau_start = taus.front();
  rep.tau_end = taus.back();
  rep.gamma_p_reference = gamma_p_reference;

  const double phinorm = l2_norm(phi, spec);
  if (first_norm > 0.1 * phinorm) return rep;  // not yet in the perturbative tail

  const auto fexp = fit_line(taus, lognorms);
  std::vector<double> logtaus;
  bool tau_positive = true;
  for (double t : taus) {
    if (t <= 0.0) {
      tau_positive = false;
      break;
    }
    logtaus.push_back(std::log(t));
  }
  LineFit falg;
  bool have_alg = false;
  if (tau_positive) {
    falg = fit_line(logtaus, lognorms);
    have_alg = true;
  }

  rep.rms_exp = fexp.rms;
  rep.rms_alg = have_alg ? falg.rms : 1e300;
  rep.gamma_fit = -fexp.slope;
  rep.algebraic_exponent = have_alg ? falg.slope : 0.0;

  const bool exp_ok = fexp.rms <= 0.05 && fexp.rms <= 0.8 * rep.rms_alg;
  const bool alg_ok = have_alg && falg.slope >= -1.3 && falg.slope <= -0.7 &&
                      falg.rms <= 0.8 * fexp.rms;
  if (exp_ok) {
    rep.model = RateModel::Exponential;
    rep.rms = fexp.rms;
    if (gamma_p_reference > 0.0)
      rep.agreement = std::abs(rep.gamma_fit - gamma_p_reference) / gamma_p_reference;
  } else if (alg_ok) {
    rep.model = RateModel::Algebraic;
    rep.rms = falg.rms;
  }
  return rep;
}

ExpansionReport mode_expansion(const Trajectory& traj, const LinearizedSpectrum& spectrum,
                               const RateReport& rate, double tail_fraction) {
  if (traj.mode != FlowMode::Normalized)
    throw ValidationError("mode_expansion: needs a normalized trajectory");
  if (rate.model != RateModel::Exponential)
    throw ValidationError("mode_expansion: trajectory was not classified exponential");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ValidationError("mode_expansion: tail fraction out of (0, 1]");

  const ProblemSpec& spec = traj.problem;
  const double p = spectrum.p;
  const double gp = spectrum.gamma_p;

  ExpansionReport rep;
  rep.gamma_p = gp;
  for (int i = spectrum.k_index; i <= static_cast<int>(spectrum.mu.size()); ++i) {
    if (spectrum.mu[i - 1] / p < 2.0 * gp)
      rep.mode_index.push_back(i);
    else
      break;
  }

  const double tau_end = traj.times.back();
  const double tau_start = tau_end - tail_fraction * (tau_end - traj.times.front());
  std::vector<int> tail;
  for (int s = 0; s < traj.samples(); ++s)
    if (traj.times[s] >= tau_start) tail.push_back(s);
  if (static_cast<int>(tail.size()) < 5)
    throw ValidationError("mode_expansion: tail window too short");

  const int nmodes = static_cast<int>(rep.mode_index.size());
  const int up_to = rep.mode_index.empty() ? 0 : rep.mode_index.back();
  // Compensated amplitudes y_i(tau) e^{mu_i tau / p} over the tail.
  std::vector<std::vector<double>> series(nmodes);
  for (int s : tail) {
    BoundaryField h(spec.size());
    for (int i = 0; i < spec.size(); ++i) h[i] = traj.fields[s][i] - spectrum.phi[i];
    const auto y = project_modes(h, spectrum, *spec.curve, std::max(up_to, 1));
    for (int m = 0; m < nmodes; ++m) {
      const int idx = rep.mode_index[m];
      series[m].push_back(y[idx - 1] * std::exp(spectrum.mu[idx - 1] / p * traj.times[s]));
    }
    rep.tail_times.push_back(traj.times[s]);
  }

  rep.cauchy_ok = true;
  for (int m = 0; m < nmodes; ++m) {
    const double limit = series[m].back();
    double tv = 0.0;
    for (size_t s = 0; s + 1 < series[m].size(); ++s)
      tv += std::abs(series[m][s + 1] - series[m][s]);
    rep.coefficients.push_back(limit);
    const double frac = tv / std::max(std::abs(limit), 1e-300);
    rep.tv_fraction.push_back(frac);
    if (frac > 0.10) rep.cauchy_ok = false;
  }

  // Remainder after subtracting the extracted expansion, in the weighted norm.
  std::vector<double> logrem, remtimes;
  for (size_t ti = 0; ti < tail.size(); ++ti) {
    const int s = tail[ti];
    BoundaryField r(spec.size());
    for (int i = 0; i < spec.size(); ++i) r[i] = traj.fields[s][i] - spectrum.phi[i];
    for (int m = 0; m < nmodes; ++m) {
      const int idx = rep.mode_index[m];
      const double amp =
          rep.coefficients[m] * std::exp(-spectrum.mu[idx - 1] / p * traj.times[s]);
      for (int i = 0; i < spec.size(); ++i) r[i] -= amp * spectrum.modes(i, idx - 1);
    }
    const double nrm = weighted_norm(r, spec, spectrum.phi, p);
    rep.remainder.push_back(nrm);
    if (nrm > 1e-14) {
      logrem.push_back(std::log(nrm));
      remtimes.push_back(traj.times[s]);
    }
  }
  if (remtimes.size() >= 3) {
    const auto fit = fit_line(remtimes, logrem);
    rep.remainder_rate = -fit.slope;
  } else {
    rep.remainder_rate = 2.0 * gp;  // remainder at solver noise everywhere
  }
  rep.remainder_ok = rep.remainder_rate >= 1.5 * gp;
  return rep;
}

}  // namespace bdflow
