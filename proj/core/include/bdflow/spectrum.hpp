#pragma once

#include <span>
#include <vector>

#include "bdflow/stationary.hpp"

namespace bdflow {

/// Spectrum of the linearization at a steady state phi in the phi^{p-1}-
/// weighted inner product. Eigenvalues ascending; eigenfields are columns of
/// `modes`, orthonormal in L2 with weight phi^{p-1} dS. Index bookkeeping
/// follows the unstable/central/stable split:
///   negatives  — count of eigenvalues below -zero_tol (unstable modes)
///   kernel_dim — count within +-zero_tol (central modes)
///   k_index    — 1-based index of the smallest positive eigenvalue
///   gamma_p    — mu_{k} / p, the sharp exponential contraction rate
struct LinearizedSpectrum {
  std::vector<double> mu;
  DenseMatrix modes;
  int negatives = 0;
  int kernel_dim = 0;
  int k_index = 0;
  double gamma_p = 0.0;
  BoundaryField phi;
  double p = 0.0;
  double zero_tol = 0.0;
  double symmetry_defect = 0.0;
};

struct ModeClassification {
  int negatives = 0;
  int kernel_dim = 0;
  int k_index = 0;
  double gamma_p = 0.0;
};

/// Nodal matrix of  B + a - sgn(lambda1) p^2/|p-1| phi^{p-1}.
DenseMatrix assemble_linearized(const ProblemSpec& spec, std::span<const double> phi);

/// Solves L e = mu phi^{p-1} e by reducing the pencil to a standard symmetric
/// problem: conjugation by the square root of (quadrature weights x
/// phi^{p-1}). zero_tol_rel scales the kernel detection window by (1+|mu_1|).
LinearizedSpectrum solve_weighted_spectrum(const DenseMatrix& linearized,
                                           std::span<const double> phi, double p,
                                           const BoundaryCurve& curve,
                                           double zero_tol_rel = 1e-6);

/// Counts of unstable / central modes and the sharp rate from an eigenvalue
/// list. Throws if no positive eigenvalue exists.
ModeClassification classify_modes(std::span<const double> mu, double p, double zero_tol);

/// Coefficients y_i = <h, e_i> in the weighted inner product, for i = 1..up_to.
std::vector<double> project_modes(std::span<const double> h, const LinearizedSpectrum& spectrum,
                                  const BoundaryCurve& curve, int up_to);

}  // namespace bdflow
