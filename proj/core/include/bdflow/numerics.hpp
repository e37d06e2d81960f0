#pragma once

#include <span>
#include <vector>

namespace bdflow {

/// Row-major dense matrix of doubles. Small sizes only (N <= 512-ish);
/// everything downstream is desk scale.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols);

  static DenseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  std::span<const double> flat() const { return a_; }
  std::span<double> flat() { return a_; }

  std::vector<double> apply(std::span<const double> x) const;
  DenseMatrix matmul(const DenseMatrix& rhs) const;
  DenseMatrix transposed() const;

  /// Largest |entry|.
  double max_abs() const;
  /// Induced infinity norm (max absolute row sum).
  double inf_norm() const;
  /// Largest |a_ij - a_ji|; zero for symmetric matrices.
  double symmetry_defect() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

/// Full spectrum of a symmetric matrix. Eigenvalues ascending, eigenvectors
/// stored as the columns of `vectors`, orthonormal, sign-fixed so that each
/// vector's largest-magnitude component is positive.
struct EigenResult {
  std::vector<double> values;
  DenseMatrix vectors;
};

/// Cyclic Jacobi eigensolver for symmetric matrices. `sym_tol` bounds the
/// accepted input asymmetry max|a_ij - a_ji|.
EigenResult sym_eig(const DenseMatrix& m, double sym_tol = 1e-9);

/// LU with partial pivoting. A pivot below 1e-13 * |A|_inf is reported as
/// singular together with the offending pivot index.
std::vector<double> solve_dense(DenseMatrix a, std::vector<double> rhs);

/// Minimizes |A x - b|^2 + damping * |x|^2 column-by-column for every column
/// b of `rhs`, via Householder QR of the damped system carried in extended
/// precision. The normal equations would square the condition number, which
/// the nearly rank-deficient charge bases downstream cannot afford.
DenseMatrix solve_damped_least_squares(const DenseMatrix& a, const DenseMatrix& rhs,
                                       double damping);

/// Real trigonometric coefficients on a uniform periodic grid of even size N:
/// f_j = mean + sum_{k=1}^{N/2-1} (cos_k[k-1] cos(k t_j) + sin_k[k-1] sin(k t_j))
///            + cos_k[N/2-1] cos((N/2) t_j),
/// with t_j = 2 pi j / N. The Nyquist sine channel is identically zero on the
/// grid and is stored as zero.
struct FourierCoeffs {
  double mean = 0.0;
  std::vector<double> cos_k;  // k = 1 .. N/2
  std::vector<double> sin_k;  // k = 1 .. N/2, last entry 0
  int grid_size = 0;
};

/// Direct O(N^2) transform; N must be even and >= 8.
FourierCoeffs dft_real(std::span<const double> values);

/// Inverse of dft_real back onto the same grid.
std::vector<double> idft_real(const FourierCoeffs& coeffs);

/// Coefficients of d/dt of the represented trigonometric polynomial. The
/// Nyquist cosine maps to a pure sine that vanishes on the grid, so it is
/// dropped.
FourierCoeffs fourier_derivative(const FourierCoeffs& coeffs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;  // root-mean-square residual
};

/// Ordinary least-squares line through (xs, ys). Needs >= 3 points and
/// non-degenerate abscissae.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace bdflow
