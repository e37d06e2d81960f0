#include "bdflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bdflow/errors.hpp"

namespace bdflow {

DenseMatrix::DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ValidationError("DenseMatrix: negative dimension");
  a_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols_)
    throw ValidationError("DenseMatrix::apply: size mismatch");
  std::vector<double> y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* row = a_.data() + static_cast<size_t>(i) * cols_;
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

DenseMatrix DenseMatrix::matmul(const DenseMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw ValidationError("DenseMatrix::matmul: size mismatch");
  DenseMatrix out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      const double* rrow = rhs.a_.data() + static_cast<size_t>(k) * rhs.cols_;
      double* orow = out.a_.data() + static_cast<size_t>(i) * out.cols_;
      for (int j = 0; j < rhs.cols_; ++j) orow[j] += aik * rrow[j];
    }
  }
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

double DenseMatrix::inf_norm() const {
  double m = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
    m = std::max(m, s);
  }
  return m;
}

double DenseMatrix::symmetry_defect() const {
  if (rows_ != cols_) throw ValidationError("symmetry_defect: matrix not square");
  double d = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j)
      d = std::max(d, std::abs((*this)(i, j) - (*this)(j, i)));
  return d;
}

namespace {

// One Jacobi rotation zeroing a(p,q). Rows p and q of both matrices are
// rotated contiguously; `vt` holds eigenvector candidates as rows.
void jacobi_rotate(DenseMatrix& a, DenseMatrix& vt, int p, int q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const int n = a.rows();
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 1.0 / (2.0 * theta);
  } else {
    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
    if (theta < 0.0) t = -t;
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  const double app = a(p, p), aqq = a(q, q);
  double* rp = &a(p, 0);
  double* rq = &a(q, 0);
  for (int i = 0; i < n; ++i) {
    const double aip = rp[i], aiq = rq[i];
    rp[i] = aip - s * (aiq + tau * aip);
    rq[i] = aiq + s * (aip - tau * aiq);
  }
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  // Mirror the rotated rows back onto the columns.
  for (int i = 0; i < n; ++i) {
    if (i == p || i == q) continue;
    a(i, p) = a(p, i);
    a(i, q) = a(q, i);
  }
  double* vp = &vt(p, 0);
  double* vq = &vt(q, 0);
  for (int i = 0; i < n; ++i) {
    const double vip = vp[i], viq = vq[i];
    vp[i] = vip - s * (viq + tau * vip);
    vq[i] = viq + s * (vip - tau * viq);
  }
}

double off_diag_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenResult sym_eig(const DenseMatrix& m, double sym_tol) {
  if (m.rows() != m.cols()) throw ValidationError("sym_eig: matrix not square");
  const int n = m.rows();
  const double defect = m.symmetry_defect();
  if (defect > sym_tol)
    throw ValidationError("sym_eig: input asymmetry " + std::to_string(defect) +
                          " exceeds tolerance");

  // Work on the symmetrized copy so the defect cannot bias the rotations.
  DenseMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  DenseMatrix vt = DenseMatrix::identity(n);

  const double scale = std::max(a.max_abs(), 1e-300);
  const double target = 1e-14 * scale * n;
  const int max_sweeps = 60;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diag_norm(a) <= target) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) > 1e-300) jacobi_rotate(a, vt, p, q);
  }
  if (!converged && off_diag_norm(a) > target)
    throw SolverError("sym_eig: Jacobi iteration budget exhausted");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return diag[i] < diag[j]; });

  EigenResult out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    out.values[j] = diag[src];
    // Sign convention: largest-magnitude component positive.
    int imax = 0;
    double vmax = 0.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(vt(src, i)) > vmax) {
        vmax = std::abs(vt(src, i));
        imax = i;
      }
    }
    const double sgn = vt(src, imax) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) out.vectors(i, j) = sgn * vt(src, i);
  }
  return out;
}

std::vector<double> solve_dense(DenseMatrix a, std::vector<double> rhs) {
  if (a.rows() != a.cols()) throw ValidationError("solve_dense: matrix not square");
  const int n = a.rows();
  if (static_cast<int>(rhs.size()) != n)
    throw ValidationError("solve_dense: rhs size mismatch");
  const double pivot_floor = 1e-13 * a.inf_norm();

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    }
    if (best <= pivot_floor)
      throw SolverError("solve_dense: singular to tolerance at pivot " + std::to_string(k));
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(rhs[k], rhs[piv]);
    }
    const double inv = 1.0 / a(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) * inv;
      if (f == 0.0) continue;
      a(i, k) = f;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  // Back substitution.
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * rhs[j];
    rhs[i] = s / a(i, i);
  }
  return rhs;
}

DenseMatrix solve_damped_least_squares(const DenseMatrix& a, const DenseMatrix& rhs,
                                       double damping) {
  const int m = a.rows(), n = a.cols();
  if (rhs.rows() != m) throw ValidationError("solve_damped_least_squares: rhs rows mismatch");
  if (damping < 0.0) throw ValidationError("solve_damped_least_squares: negative damping");

  // Stack [A; sqrt(damping) I] and QR-factor in place with Householder
  // reflectors, then solve R x = Q^T b for every column of rhs.
  const int mm = m + n;
  const int nrhs = rhs.cols();
  std::vector<long double> w(static_cast<size_t>(mm) * n, 0.0L);
  std::vector<long double> b(static_cast<size_t>(mm) * nrhs, 0.0L);
  auto W = [&](int i, int j) -> long double& { return w[static_cast<size_t>(i) * n + j]; };
  auto B = [&](int i, int j) -> long double& { return b[static_cast<size_t>(i) * nrhs + j]; };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) W(i, j) = a(i, j);
  const long double mu = std::sqrt(static_cast<long double>(damping));
  for (int j = 0; j < n; ++j) W(m + j, j) = mu;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < nrhs; ++j) B(i, j) = rhs(i, j);

  for (int k = 0; k < n; ++k) {
    long double norm = 0.0L;
    for (int i = k; i < mm; ++i) norm += W(i, k) * W(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0L) throw SolverError("solve_damped_least_squares: zero column");
    if (W(k, k) > 0.0L) norm = -norm;
    const long double wkk = W(k, k) - norm;
    for (int i = k + 1; i < mm; ++i) W(i, k) /= wkk;
    const long double beta = -wkk / norm;
    W(k, k) = norm;

    for (int j = k + 1; j < n; ++j) {
      long double s = W(k, j);
      for (int i = k + 1; i < mm; ++i) s += W(i, k) * W(i, j);
      s *= beta;
      W(k, j) -= s;
      for (int i = k + 1; i < mm; ++i) W(i, j) -= s * W(i, k);
    }
    for (int j = 0; j < nrhs; ++j) {
      long double s = B(k, j);
      for (int i = k + 1; i < mm; ++i) s += W(i, k) * B(i, j);
      s *= beta;
      B(k, j) -= s;
      for (int i = k + 1; i < mm; ++i) B(i, j) -= s * W(i, k);
    }
  }

  DenseMatrix x(n, nrhs);
  std::vector<long double> xcol(n);
  for (int col = 0; col < nrhs; ++col) {
    for (int i = n - 1; i >= 0; --i) {
      long double s = B(i, col);
      for (int j = i + 1; j < n; ++j) s -= W(i, j) * xcol[j];
      if (W(i, i) == 0.0L)
        throw SolverError("solve_damped_least_squares: rank deficient at " + std::to_string(i));
      xcol[i] = s / W(i, i);
    }
    for (int i = 0; i < n; ++i) x(i, col) = static_cast<double>(xcol[i]);
  }
  return x;
}

FourierCoeffs dft_real(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  if (n < 8 || n % 2 != 0)
    throw ValidationError("dft_real: grid size must be even and >= 8");
  const int half = n / 2;
  FourierCoeffs c;
  c.grid_size = n;
  c.cos_k.assign(half, 0.0);
  c.sin_k.assign(half, 0.0);
  double mean = 0.0;
  for (double v : values) mean += v;
  c.mean = mean / n;
  const double step = 2.0 * M_PI / n;
  for (int k = 1; k <= half; ++k) {
    double sc = 0.0, ss = 0.0;
    for (int j = 0; j < n; ++j) {
      const double ang = step * k * j;
      sc += values[j] * std::cos(ang);
      ss += values[j] * std::sin(ang);
    }
    const double w = (k == half) ? 1.0 / n : 2.0 / n;
    c.cos_k[k - 1] = w * sc;
    c.sin_k[k - 1] = (k == half) ? 0.0 : w * ss;
  }
  return c;
}

std::vector<double> idft_real(const FourierCoeffs& coeffs) {
  const int n = coeffs.grid_size;
  if (n < 2) throw ValidationError("idft_real: invalid grid size");
  const int half = n / 2;
  if (static_cast<int>(coeffs.cos_k.size()) != half ||
      static_cast<int>(coeffs.sin_k.size()) != half)
    throw ValidationError("idft_real: coefficient count mismatch");
  std::vector<double> out(n, coeffs.mean);
  const double step = 2.0 * M_PI / n;
  for (int k = 1; k <= half; ++k) {
    const double ck = coeffs.cos_k[k - 1];
    const double sk = coeffs.sin_k[k - 1];
    if (ck == 0.0 && sk == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double ang = step * k * j;
      out[j] += ck * std::cos(ang) + sk * std::sin(ang);
    }
  }
  return out;
}

FourierCoeffs fourier_derivative(const FourierCoeffs& coeffs) {
  FourierCoeffs d = coeffs;
  d.mean = 0.0;
  const int half = coeffs.grid_size / 2;
  for (int k = 1; k <= half; ++k) {
    if (k == half) {
      // Nyquist cosine differentiates to a sine invisible on the grid.
      d.cos_k[k - 1] = 0.0;
      d.sin_k[k - 1] = 0.0;
      continue;
    }
    d.cos_k[k - 1] = k * coeffs.sin_k[k - 1];
    d.sin_k[k - 1] = -k * coeffs.cos_k[k - 1];
  }
  return d;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  const int n = static_cast<int>(xs.size());
  if (n < 3) throw ValidationError("fit_line: need at least 3 points");
  if (ys.size() != xs.size()) throw ValidationError("fit_line: size mismatch");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, xscale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    sxx += dx * dx;
    sxy += dx * (ys[i] - my);
    xscale = std::max(xscale, std::abs(xs[i]));
  }
  if (sxx <= n * 1e-28 * std::max(1.0, xscale * xscale))
    throw ValidationError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace bdflow
