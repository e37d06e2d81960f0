#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdflow/evolution.hpp"
#include "bdflow/spectrum.hpp"

namespace bdflow {

struct LyapunovReport {
  std::vector<double> values;
  std::vector<double> increments;
  bool pass = false;        // every increment <= 1e-8 (1 + |G|)
  int first_violation = -1;
};

/// Per-step monotonicity audit of the Lyapunov energy along a normalized
/// trajectory.
LyapunovReport lyapunov_series(const Trajectory& traj);

struct HarnackReport {
  std::vector<double> times;
  std::vector<double> r_sup;        // max u / (T*-t)^{1/(p-1)}
  std::vector<double> r_inf;        // min u / (T*-t)^{1/(p-1)}
  std::vector<double> lppq_ratio;   // |u|_{L^{p+1}} / (T*-t)^{1/(p-1)}
  std::vector<double> sup_over_l1;  // elliptic ratios per time slice
  std::vector<double> inf_over_l1;
  double c_emp = 0.0;  // smallest C with 1/C <= r_inf, r_sup <= C on the window
  bool bounded = false;
};

/// Two-sided separable-rate sandwich over the window (0, 0.95 T*] of a halted
/// physical extinction/blow-up trajectory.
HarnackReport harnack_report(const Trajectory& traj, double tstar, const ProblemSpec& spec);

enum class RateModel { Exponential, Algebraic, Undetermined };

struct RateReport {
  RateModel model = RateModel::Undetermined;
  double gamma_fit = 0.0;           // decay rate of the exponential model
  double algebraic_exponent = 0.0;  // slope of the log-log model
  double tau_start = 0.0;
  double tau_end = 0.0;
  double rms = 0.0;      // winning fit residual
  double rms_exp = 0.0;
  double rms_alg = 0.0;
  double gamma_p_reference = 0.0;
  double agreement = 0.0;  // |gamma_fit - gamma_p| / gamma_p
};

/// Classifies the tail decay of |w - phi|_{L2(dS)}: log-linear vs log-log
/// least squares on the trailing window_fraction of the time range, with a
/// 20% residual margin required to declare a winner. Samples below the 1e-10
/// norm floor are dropped as solver-noise dominated.
RateReport fit_rate(const Trajectory& traj, std::span<const double> phi, double window_fraction,
                    double gamma_p_reference);

struct ExpansionReport {
  std::vector<int> mode_index;       // 1-based, stable band below 2 gamma_p
  std::vector<double> coefficients;  // C_i, tail limits of y_i e^{mu_i tau / p}
  std::vector<double> tv_fraction;   // total variation over the tail / |C_i|
  std::vector<double> tail_times;
  std::vector<double> remainder;     // weighted norm after subtracting the expansion
  double remainder_rate = 0.0;       // fitted decay rate of the remainder
  double gamma_p = 0.0;
  bool cauchy_ok = false;     // every tv_fraction <= 0.10
  bool remainder_ok = false;  // remainder_rate >= 1.5 gamma_p
};

/// Extracts the leading eigenmode amplitudes of h = w - phi on the tail of an
/// exponentially converging normalized trajectory and checks the
/// second-order remainder decay. `rate` must have classified the trajectory
/// Exponential.
ExpansionReport mode_expansion(const Trajectory& traj, const LinearizedSpectrum& spectrum,
                               const RateReport& rate, double tail_fraction);

struct VerifyItem {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values, one line
};

struct VerifyReport {
  std::vector<VerifyItem> items;
  bool all_pass = false;
};

struct VerifyOptions {
  std::uint64_t seed = 31415926;
  /// When nonzero, every canonical grid is replaced by this node count.
  /// Deliberately coarse grids make the accuracy criteria fail, which is the
  /// intended negative control.
  int n_override = 0;
};

/// Runs the canonical desk-scale configurations and evaluates every
/// quantitative acceptance check, one verdict per item.
VerifyReport verify_suite(const VerifyOptions& options = {});

}  // namespace bdflow
