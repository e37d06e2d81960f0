#include "bdflow/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "bdflow/diagnostics.hpp"
#include "bdflow/errors.hpp"

namespace bdflow {

namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "bdflow 0.1.0";

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

struct ProblemBundle {
  std::shared_ptr<const BoundaryCurve> curve;
  std::shared_ptr<const DtnOperator> dtn;
  ProblemSpec spec;
};

ProblemBundle build_problem(const RunConfig& config) {
  ProblemBundle b;
  b.curve = std::make_shared<const BoundaryCurve>(make_curve(config.domain, config.n));
  if (config.dtn.method == DtnMethod::Spectral)
    b.dtn = std::make_shared<const DtnOperator>(build_dtn_circle(b.curve));
  else
    b.dtn = std::make_shared<const DtnOperator>(
        build_dtn_general(b.curve, config.dtn.offset, config.dtn.reg));
  b.spec = make_problem(b.curve, b.dtn, config.p, synthesize(*b.curve, config.a),
                        config.zero_tol_rel);
  return b;
}

BoundaryField synth_initial(const BoundaryCurve& curve, const FourierSeries& series,
                            double offset) {
  auto u0 = synthesize(curve, series);
  for (auto& v : u0) v += offset;
  for (double v : u0)
    if (!(v > 0.0))
      throw ValidationError("initial data is not strictly positive after synthesis");
  return u0;
}

double mass_target_for(const RunConfig& config, const ProblemSpec& spec,
                       const BoundaryCurve& curve, bool allow_initial) {
  if (config.mass_target) return *config.mass_target;
  if (allow_initial && config.initial) {
    const auto w0 = synth_initial(curve, *config.initial, config.initial_offset);
    BoundaryField m(curve.size());
    for (int i = 0; i < curve.size(); ++i) m[i] = std::pow(w0[i], spec.p) * spec.phi1[i];
    return integrate_boundary(curve, m);
  }
  throw ValidationError(
      "the Neutral regime needs an explicit mass_target (or initial data to derive it from): "
      "the stationary profile is selected by the conserved mass");
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Growth: return "growth";
    case Regime::Neutral: return "neutral";
    case Regime::ExtinctionOrBlowup: return "extinction_or_blowup";
  }
  return "?";
}

json diag_json(const SampleDiag& d) {
  return json{{"G", d.G},     {"I", d.I},     {"Z", d.Z},
              {"min", d.min}, {"max", d.max}, {"mass1", d.mass1}};
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::string csv = "time,Z,G,I,min,max,M1";
  const int n = traj.fields.empty() ? 0 : static_cast<int>(traj.fields.front().size());
  for (int i = 0; i < n; ++i) csv += ",f_" + std::to_string(i);
  csv += "\n";
  for (int s = 0; s < traj.samples(); ++s) {
    const auto& d = traj.diag[s];
    csv += fmt_double(traj.times[s]) + "," + fmt_double(d.Z) + "," + fmt_double(d.G) + "," +
           fmt_double(d.I) + "," + fmt_double(d.min) + "," + fmt_double(d.max) + "," +
           fmt_double(d.mass1);
    for (double v : traj.fields[s]) csv += "," + fmt_double(v);
    csv += "\n";
  }
  write_text(path, csv);
}

SteadyState solve_for_config(const RunConfig& config, const ProblemBundle& bundle) {
  std::optional<double> mass;
  if (bundle.spec.regime == Regime::Neutral)
    mass = mass_target_for(config, bundle.spec, *bundle.curve, /*allow_initial=*/true);
  return solve_steady(bundle.spec, {}, mass);
}

}  // namespace

void cmd_steady(const RunConfig& config, const std::filesystem::path& out_dir) {
  const auto bundle = build_problem(config);
  std::optional<double> mass;
  if (bundle.spec.regime == Regime::Neutral)
    mass = mass_target_for(config, bundle.spec, *bundle.curve, /*allow_initial=*/false);
  const auto steady = solve_steady(bundle.spec, {}, mass);

  json out{{"tool_version", kToolVersion},
           {"config_hash", config.hash},
           {"lambda1", steady.lambda1},
           {"Yp", steady.Yp},
           {"regime", regime_name(steady.regime)},
           {"sign", bundle.spec.sign},
           {"residual", steady.residual},
           {"phi_min", *std::min_element(steady.phi.begin(), steady.phi.end())},
           {"phi_max", *std::max_element(steady.phi.begin(), steady.phi.end())},
           {"dtn_report",
            json{{"symmetry_defect", bundle.dtn->build_report().symmetry_defect},
                 {"constant_defect", bundle.dtn->build_report().constant_defect},
                 {"psd_defect", bundle.dtn->build_report().psd_defect}}}};
  write_json(out_dir / "steady.json", out);

  std::string csv = "theta,phi,phi1\n";
  const auto theta = bundle.curve->theta();
  for (int i = 0; i < bundle.curve->size(); ++i)
    csv += fmt_double(theta[i]) + "," + fmt_double(steady.phi[i]) + "," +
           fmt_double(steady.phi1[i]) + "\n";
  write_text(out_dir / "phi.csv", csv);
}

void cmd_evolve(const RunConfig& config, const std::filesystem::path& out_dir) {
  const auto bundle = build_problem(config);
  if (!config.initial) throw ValidationError("evolve needs initial data in the config");
  const auto u0 = synth_initial(*bundle.curve, *config.initial, config.initial_offset);

  auto traj = evolve(bundle.spec, u0, config.mode, config.controls);
  if (traj.mode == FlowMode::Physical && bundle.spec.regime == Regime::ExtinctionOrBlowup &&
      traj.halted)
    traj.tstar_estimate = estimate_Tstar(traj);

  write_trajectory_csv(out_dir / "trajectory.csv", traj);
  json out{{"tool_version", kToolVersion},
           {"config_hash", config.hash},
           {"mode", traj.mode == FlowMode::Physical ? "physical" : "normalized"},
           {"regime", regime_name(bundle.spec.regime)},
           {"lambda1", bundle.spec.lambda1},
           {"samples", traj.samples()},
           {"halted", traj.halted},
           {"final_time", traj.times.back()},
           {"final", diag_json(traj.diag.back())}};
  if (traj.tstar_estimate) out["Tstar_estimate"] = *traj.tstar_estimate;

  if (config.initial_second) {
    const auto u0b = synth_initial(*bundle.curve, *config.initial_second, 0.0);
    bool ordered0 = true;
    for (int i = 0; i < bundle.curve->size(); ++i)
      if (u0[i] > u0b[i]) ordered0 = false;
    if (!ordered0)
      throw ValidationError("comparison pair: initial data are not ordered (need u0 <= u0_second)");
    StepControls c2 = config.controls;
    c2.horizon = traj.times.back();
    const auto traj2 = evolve(bundle.spec, u0b, config.mode, c2);
    write_trajectory_csv(out_dir / "trajectory2.csv", traj2);

    double worst = 0.0;
    const int m = std::min(traj.samples(), traj2.samples());
    bool aligned = true;
    for (int s = 0; s < m; ++s) {
      if (std::abs(traj.times[s] - traj2.times[s]) > 1e-12 * (1.0 + traj.times[s])) {
        aligned = false;
        break;
      }
      for (int i = 0; i < bundle.curve->size(); ++i)
        worst = std::max(worst, traj.fields[s][i] - traj2.fields[s][i]);
    }
    out["comparison"] = json{{"aligned", aligned},
                             {"max_violation", worst},
                             {"ordered", aligned && worst <= 1e-10},
                             {"samples_compared", m}};
  }
  write_json(out_dir / "summary.json", out);
}

void cmd_spectrum(const RunConfig& config, const std::filesystem::path& out_dir) {
  const auto bundle = build_problem(config);
  const auto steady = solve_for_config(config, bundle);
  const auto lin = assemble_linearized(bundle.spec, steady.phi);
  const auto spectrum =
      solve_weighted_spectrum(lin, steady.phi, bundle.spec.p, *bundle.curve);

  json out{{"tool_version", kToolVersion},
           {"config_hash", config.hash},
           {"mu", spectrum.mu},
           {"I", spectrum.negatives},
           {"K", spectrum.kernel_dim},
           {"k", spectrum.k_index},
           {"gamma_p", spectrum.gamma_p},
           {"symmetry_defect", spectrum.symmetry_defect},
           {"lambda1", bundle.spec.lambda1},
           {"regime", regime_name(bundle.spec.regime)}};
  write_json(out_dir / "spectrum.json", out);

  const int m = std::min<int>(config.rates.modes, spectrum.mu.size());
  std::string csv = "theta";
  for (int j = 0; j < m; ++j) csv += ",mode_" + std::to_string(j + 1);
  csv += "\n";
  const auto theta = bundle.curve->theta();
  for (int i = 0; i < bundle.curve->size(); ++i) {
    csv += fmt_double(theta[i]);
    for (int j = 0; j < m; ++j) csv += "," + fmt_double(spectrum.modes(i, j));
    csv += "\n";
  }
  write_text(out_dir / "modes.csv", csv);
}

void cmd_rates(const RunConfig& config, const std::filesystem::path& out_dir) {
  const auto bundle = build_problem(config);
  if (!config.initial) throw ValidationError("rates needs initial data in the config");
  const auto u0 = synth_initial(*bundle.curve, *config.initial, config.initial_offset);

  // Make the Neutral mass selection follow the actual initial datum.
  RunConfig cfg = config;
  if (bundle.spec.regime == Regime::Neutral && !cfg.mass_target) {
    BoundaryField mfield(bundle.curve->size());
    for (int i = 0; i < bundle.curve->size(); ++i)
      mfield[i] = std::pow(u0[i], bundle.spec.p) * bundle.spec.phi1[i];
    cfg.mass_target = integrate_boundary(*bundle.curve, mfield);
  }
  const auto steady = solve_for_config(cfg, bundle);

  auto traj = evolve(bundle.spec, u0, config.mode, config.controls);
  std::optional<double> tstar;
  if (traj.mode == FlowMode::Physical) {
    if (bundle.spec.regime == Regime::ExtinctionOrBlowup) {
      if (!traj.halted)
        throw SolverError("rates: physical trajectory did not reach the singular halt; "
                          "extend the horizon");
      tstar = estimate_Tstar(traj);
    }
    traj = rescale_trajectory(traj, tstar, bundle.spec);
  }

  const auto lin = assemble_linearized(bundle.spec, steady.phi);
  const auto spectrum =
      solve_weighted_spectrum(lin, steady.phi, bundle.spec.p, *bundle.curve);
  const auto rate = fit_rate(traj, steady.phi, config.rates.window_fraction, spectrum.gamma_p);

  json out{{"tool_version", kToolVersion},
           {"config_hash", config.hash},
           {"model", rate.model == RateModel::Exponential
                         ? "exponential"
                         : (rate.model == RateModel::Algebraic ? "algebraic" : "undetermined")},
           {"gamma_fit", rate.gamma_fit},
           {"algebraic_exponent", rate.algebraic_exponent},
           {"window", json{{"tau_start", rate.tau_start}, {"tau_end", rate.tau_end}}},
           {"rms", rate.rms},
           {"rms_exp", rate.rms_exp},
           {"rms_alg", rate.rms_alg},
           {"gamma_p", spectrum.gamma_p},
           {"agreement", rate.agreement}};
  if (tstar) out["Tstar_estimate"] = *tstar;

  if (rate.model == RateModel::Exponential) {
    const auto exp_rep = mode_expansion(traj, spectrum, rate, config.rates.tail_fraction);
    out["expansion"] = json{{"modes", exp_rep.mode_index},
                            {"coefficients", exp_rep.coefficients},
                            {"tv_fraction", exp_rep.tv_fraction},
                            {"remainder_rate", exp_rep.remainder_rate},
                            {"cauchy_ok", exp_rep.cauchy_ok},
                            {"remainder_ok", exp_rep.remainder_ok}};
  }
  write_json(out_dir / "rates.json", out);

  // Sampled series: tau, |h|_L2, leading projections, G, I, Z.
  const int m = std::min<int>(config.rates.modes, spectrum.mu.size());
  std::string csv = "tau,h_l2";
  for (int j = 0; j < m; ++j) csv += ",y_" + std::to_string(j + 1);
  csv += ",G,I,Z\n";
  const auto w = bundle.curve->weights();
  for (int s = 0; s < traj.samples(); ++s) {
    BoundaryField h(bundle.curve->size());
    double nrm = 0.0;
    for (int i = 0; i < bundle.curve->size(); ++i) {
      h[i] = traj.fields[s][i] - steady.phi[i];
      nrm += h[i] * h[i] * w[i];
    }
    const auto y = project_modes(h, spectrum, *bundle.curve, m);
    csv += fmt_double(traj.times[s]) + "," + fmt_double(std::sqrt(nrm));
    for (int j = 0; j < m; ++j) csv += "," + fmt_double(y[j]);
    const auto& d = traj.diag[s];
    csv += "," + fmt_double(d.G) + "," + fmt_double(d.I) + "," + fmt_double(d.Z) + "\n";
  }
  write_text(out_dir / "modes_series.csv", csv);
}

bool cmd_verify(const RunConfig* config, const std::filesystem::path& out_dir) {
  VerifyOptions opts;
  if (config) {
    opts.seed = config->seed;
    if (config->verify_n_override) opts.n_override = *config->verify_n_override;
  }
  const auto report = verify_suite(opts);

  json items = json::array();
  for (const auto& item : report.items) {
    std::printf("[%s] %2d %s — %s\n", item.pass ? "PASS" : "FAIL", item.id, item.name.c_str(),
                item.detail.c_str());
    items.push_back(json{
        {"id", item.id}, {"name", item.name}, {"pass", item.pass}, {"detail", item.detail}});
  }
  std::printf("%s: %zu/%zu checks passed\n", report.all_pass ? "OK" : "FAILED",
              static_cast<size_t>(
                  std::count_if(report.items.begin(), report.items.end(),
                                [](const VerifyItem& i) { return i.pass; })),
              report.items.size());

  json out{{"tool_version", kToolVersion},
           {"config_hash", config ? config->hash : std::string("default")},
           {"all_pass", report.all_pass},
           {"items", items}};
  write_json(out_dir / "verify.json", out);
  return report.all_pass;
}

}  // namespace bdflow
