#include "bdflow/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdflow/errors.hpp"

namespace bdflow {

DenseMatrix assemble_linearized(const ProblemSpec& spec, std::span<const double> phi) {
  const int n = spec.size();
  if (static_cast<int>(phi.size()) != n)
    throw ValidationError("assemble_linearized: phi size mismatch");
  for (double v : phi)
    if (!(v > 0.0)) throw ValidationError("assemble_linearized: phi must be positive");

  DenseMatrix lin = spec.dtn->matrix();
  const double coeff = spec.sign * spec.p * spec.p / std::abs(spec.p - 1.0);
  for (int i = 0; i < n; ++i)
    lin(i, i) += spec.a[i] - coeff * std::pow(phi[i], spec.p - 1.0);
  return lin;
}

LinearizedSpectrum solve_weighted_spectrum(const DenseMatrix& linearized,
                                           std::span<const double> phi, double p,
                                           const BoundaryCurve& curve, double zero_tol_rel) {
  const int n = curve.size();
  if (linearized.rows() != n || linearized.cols() != n)
    throw ValidationError("solve_weighted_spectrum: matrix size mismatch");
  if (static_cast<int>(phi.size()) != n)
    throw ValidationError("solve_weighted_spectrum: phi size mismatch");

  const auto w = curve.weights();
  std::vector<double> t(n);  // sqrt of the composite weight w_i phi_i^{p-1}
  for (int i = 0; i < n; ++i) {
    const double wt = w[i] * std::pow(phi[i], p - 1.0);
    if (!(wt > 0.0)) throw ValidationError("solve_weighted_spectrum: non-positive weight");
    t[i] = std::sqrt(wt);
  }

  // W L is symmetric when L is self-adjoint in L2(dS); conjugating by T^{-1}
  // turns the pencil L e = mu diag(phi^{p-1}) e into a standard symmetric
  // problem for T e.
  DenseMatrix s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = w[i] * linearized(i, j) / (t[i] * t[j]);
  const double scale = std::max(1.0, s.max_abs());
  const double defect = s.symmetry_defect();
  if (defect > 1e-7 * scale)
    throw ValidationError("solve_weighted_spectrum: weighted form asymmetric beyond 1e-7: " +
                          std::to_string(defect / scale));
  const auto eig = sym_eig(s, 1e-7 * scale);

  LinearizedSpectrum out;
  out.mu = eig.values;
  out.p = p;
  out.phi.assign(phi.begin(), phi.end());
  out.symmetry_defect = defect / scale;
  out.modes = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    // Back-transform and re-apply the sign convention in nodal coordinates.
    int imax = 0;
    double vmax = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = eig.vectors(i, j) / t[i];
      out.modes(i, j) = v;
      if (std::abs(v) > vmax) {
        vmax = std::abs(v);
        imax = i;
      }
    }
    if (out.modes(imax, j) < 0.0)
      for (int i = 0; i < n; ++i) out.modes(i, j) = -out.modes(i, j);
  }

  out.zero_tol = zero_tol_rel * (1.0 + std::abs(out.mu.front()));
  const auto cls = classify_modes(out.mu, p, out.zero_tol);
  out.negatives = cls.negatives;
  out.kernel_dim = cls.kernel_dim;
  out.k_index = cls.k_index;
  out.gamma_p = cls.gamma_p;
  return out;
}

ModeClassification classify_modes(std::span<const double> mu, double p, double zero_tol) {
  if (mu.empty()) throw ValidationError("classify_modes: empty spectrum");
  ModeClassification c;
  for (double m : mu) {
    if (m < -zero_tol)
      ++c.negatives;
    else if (m <= zero_tol)
      ++c.kernel_dim;
  }
  c.k_index = c.negatives + c.kernel_dim + 1;
  if (c.k_index > static_cast<int>(mu.size()))
    throw SolverError("classify_modes: no positive eigenvalue (invalid steady state?)");
  c.gamma_p = mu[c.k_index - 1] / p;
  return c;
}

std::vector<double> project_modes(std::span<const double> h, const LinearizedSpectrum& spectrum,
                                  const BoundaryCurve& curve, int up_to) {
  const int n = curve.size();
  if (static_cast<int>(h.size()) != n) throw ValidationError("project_modes: field size mismatch");
  if (up_to < 1 || up_to > static_cast<int>(spectrum.mu.size()))
    throw ValidationError("project_modes: mode count out of range");
  const auto w = curve.weights();
  std::vector<double> y(up_to, 0.0);
  for (int j = 0; j < up_to; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += h[i] * spectrum.modes(i, j) * std::pow(spectrum.phi[i], spectrum.p - 1.0) * w[i];
    y[j] = s;
  }
  return y;
}

}  // namespace bdflow
