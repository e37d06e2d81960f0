#include "bdflow/dtn.hpp"

#include <cmath>
#include <string>

#include "bdflow/errors.hpp"

namespace bdflow {

namespace {

double dist2(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Weighted-coordinate symmetrization: S = W^{1/2} M W^{-1/2}, average with
// its transpose, conjugate back. Returns the pre-averaging defect.
double symmetrize_weighted(DenseMatrix& m, std::span<const double> w) {
  const int n = m.rows();
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(w[i]);
  DenseMatrix s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = sq[i] * m(i, j) / sq[j];
  const double defect = s.symmetry_defect();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double avg = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = avg;
      s(j, i) = avg;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = s(i, j) * sq[j] / sq[i];
  return defect;
}

double min_eig_weighted(const DenseMatrix& m, std::span<const double> w) {
  const int n = m.rows();
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(w[i]);
  DenseMatrix s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = sq[i] * m(i, j) / sq[j];
  const auto eig = sym_eig(s, 1e-8 * std::max(1.0, s.max_abs()));
  return eig.values.front();
}

// Zeroes parameter-space harmonics above kcut on both sides of the nodal
// matrix. Everything above the resolved band of a source-expansion operator
// is junk; keeping it would leak noise into the symmetry and PSD reports.
void band_limit(DenseMatrix& m, int kcut) {
  const int n = m.rows();
  auto filter = [&](std::vector<double>& v) {
    auto c = dft_real(v);
    for (int k = kcut + 1; k <= n / 2; ++k) {
      c.cos_k[k - 1] = 0.0;
      c.sin_k[k - 1] = 0.0;
    }
    v = idft_real(c);
  };
  std::vector<double> buf(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) buf[i] = m(i, j);
    filter(buf);
    for (int i = 0; i < n; ++i) m(i, j) = buf[i];
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) buf[j] = m(i, j);
    filter(buf);
    for (int j = 0; j < n; ++j) m(i, j) = buf[j];
  }
}

bool point_strictly_inside(const CurveSpec& s, const Vec2& p) {
  switch (s.kind) {
    case CurveKind::Circle:
      return p.x * p.x + p.y * p.y < s.radius * s.radius;
    case CurveKind::Ellipse: {
      const double u = p.x / s.semi_major, v = p.y / s.semi_minor;
      return u * u + v * v < 1.0;
    }
    case CurveKind::Star: {
      const double r = std::hypot(p.x, p.y);
      const double ang = std::atan2(p.y, p.x);
      return r < 1.0 + s.amplitude * std::cos(s.lobes * ang);
    }
  }
  return false;
}

}  // namespace

BoundaryField DtnOperator::apply(std::span<const double> f) const {
  const int n = curve_->size();
  if (static_cast<int>(f.size()) != n) throw ValidationError("DtnOperator::apply: size mismatch");
  if (kind_ == Kind::Spectral) {
    auto c = dft_real(f);
    c.mean *= multipliers_[0];
    const int half = n / 2;
    for (int k = 1; k <= half; ++k) {
      c.cos_k[k - 1] *= multipliers_[k];
      c.sin_k[k - 1] *= multipliers_[k];
    }
    return idft_real(c);
  }
  return matrix_.apply(f);
}

DtnOperator build_dtn_circle(std::shared_ptr<const BoundaryCurve> circle) {
  if (!circle) throw ValidationError("build_dtn_circle: null curve");
  if (circle->spec().kind != CurveKind::Circle)
    throw ValidationError("build_dtn_circle: curve is not a circle");
  const int n = circle->size();
  const double radius = circle->spec().radius;

  DtnOperator op;
  op.kind_ = DtnOperator::Kind::Spectral;
  op.curve_ = std::move(circle);
  const int half = n / 2;
  op.multipliers_.resize(half + 1);
  for (int k = 0; k <= half; ++k) op.multipliers_[k] = static_cast<double>(k) / radius;

  // Circulant nodal matrix of the multiplier: exact on the grid.
  std::vector<double> kernel(n, 0.0);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int k = 1; k < half; ++k) s += k * std::cos(2.0 * M_PI * k * d / n);
    s *= 2.0 / n;
    s += 0.5 * half * ((d % 2 == 0) ? 1.0 : -1.0) * (2.0 / n);
    kernel[d] = s / radius;
  }
  op.matrix_ = DenseMatrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) op.matrix_(i, j) = kernel[(i - j + n) % n];

  op.report_.symmetry_defect = op.matrix_.symmetry_defect();
  std::vector<double> ones(n, 1.0);
  double cmax = 0.0;
  for (double v : op.matrix_.apply(ones)) cmax = std::max(cmax, std::abs(v));
  op.report_.constant_defect = cmax;
  op.report_.psd_defect = 0.0;  // multipliers are nonnegative by construction
  return op;
}

DtnOperator build_dtn_general(std::shared_ptr<const BoundaryCurve> curve, double charge_offset,
                              double reg) {
  if (!curve) throw ValidationError("build_dtn_general: null curve");
  if (charge_offset <= 0.0) throw ValidationError("build_dtn_general: charge offset must be > 0");
  if (reg < 0.0) throw ValidationError("build_dtn_general: regularization must be >= 0");
  const int n = curve->size();
  const auto nodes = curve->nodes();
  const auto normals = curve->normals();

  DtnOperator op;
  op.kind_ = DtnOperator::Kind::Dense;
  op.curve_ = curve;
  op.sources_.resize(n);
  for (int j = 0; j < n; ++j)
    op.sources_[j] = {nodes[j].x + charge_offset * normals[j].x,
                      nodes[j].y + charge_offset * normals[j].y};

  // Trace and normal-derivative matrices of the log-source basis.
  DenseMatrix trace(n, n), flux(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double dx = nodes[i].x - op.sources_[j].x;
      const double dy = nodes[i].y - op.sources_[j].y;
      const double r2 = dx * dx + dy * dy;
      trace(i, j) = 0.5 * std::log(r2);
      flux(i, j) = (normals[i].x * dx + normals[i].y * dy) / r2;
    }
  }

  op.charge_solve_ = solve_damped_least_squares(trace, DenseMatrix::identity(n), reg);

  // Trace-fit quality on smooth data: low parameter harmonics.
  const auto theta = curve->theta();
  double worst = 0.0;
  for (int k = 0; k <= 8; ++k) {
    for (int phase = 0; phase < (k == 0 ? 1 : 2); ++phase) {
      std::vector<double> f(n);
      for (int i = 0; i < n; ++i)
        f[i] = phase == 0 ? std::cos(k * theta[i]) : std::sin(k * theta[i]);
      const auto q = op.charge_solve_.apply(f);
      const auto back = trace.apply(q);
      double err = 0.0;
      for (int i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - f[i]));
      worst = std::max(worst, err);
    }
  }
  op.report_.dirichlet_residual = worst;
  if (worst > 1e-6)
    throw SolverError("build_dtn_general: Dirichlet trace fit residual " + std::to_string(worst) +
                      " exceeds 1e-6; offset/regularization out of range for this grid");

  op.matrix_ = flux.matmul(op.charge_solve_);
  band_limit(op.matrix_, n / 4);
  op.report_.symmetry_defect = symmetrize_weighted(op.matrix_, curve->weights());

  std::vector<double> ones(n, 1.0);
  double cmax = 0.0;
  for (double v : op.matrix_.apply(ones)) cmax = std::max(cmax, std::abs(v));
  op.report_.constant_defect = cmax;
  op.report_.psd_defect = std::max(0.0, -min_eig_weighted(op.matrix_, curve->weights()));
  return op;
}

InteriorSamples harmonic_extend(const DtnOperator& op, std::span<const double> f,
                                std::span<const Vec2> points) {
  const auto& curve = op.curve();
  const int n = curve.size();
  if (static_cast<int>(f.size()) != n) throw ValidationError("harmonic_extend: size mismatch");
  const auto nodes = curve.nodes();
  const auto speed = curve.speed();
  const double h = 2.0 * M_PI / n;

  for (const auto& p : points) {
    if (!point_strictly_inside(curve.spec(), p))
      throw ValidationError("harmonic_extend: point not strictly inside the domain");
    double best = 1e300;
    int inear = 0;
    for (int i = 0; i < n; ++i) {
      const double d2 = dist2(p, nodes[i]);
      if (d2 < best) {
        best = d2;
        inear = i;
      }
    }
    if (std::sqrt(best) <= h * speed[inear])
      throw ValidationError("harmonic_extend: point closer to the boundary than node spacing");
  }

  InteriorSamples out;
  out.points.assign(points.begin(), points.end());
  out.values.resize(points.size());

  if (op.kind() == DtnOperator::Kind::Spectral) {
    const double radius = curve.spec().radius;
    const auto w = curve.weights();
    for (size_t s = 0; s < points.size(); ++s) {
      const double r2 = points[s].x * points[s].x + points[s].y * points[s].y;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double kernel =
            (radius * radius - r2) / (2.0 * M_PI * radius * dist2(points[s], nodes[i]));
        acc += kernel * f[i] * w[i];
      }
      out.values[s] = acc;
    }
    return out;
  }

  const auto charges = op.charge_solve_.apply(f);
  for (size_t s = 0; s < points.size(); ++s) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += charges[j] * 0.5 * std::log(dist2(points[s], op.sources_[j]));
    out.values[s] = acc;
  }
  return out;
}

}  // namespace bdflow
