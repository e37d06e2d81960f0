#include "bdflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bdflow/errors.hpp"

namespace bdflow {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_exponent(double p) {
  if (!(p > 0.0)) throw ValidationError("exponent p must be positive");
  if (std::abs(p - 1.0) < 0.05)
    throw ValidationError("exponent p must satisfy |p-1| >= 0.05 (p=1 scalings degenerate)");
}

// Stationary residual F(phi) = B phi + a phi - kappa phi^p.
BoundaryField steady_residual(const ProblemSpec& spec, std::span<const double> phi) {
  auto r = spec.dtn->apply(phi);
  const double kappa = spec.source_coeff();
  for (int i = 0; i < spec.size(); ++i)
    r[i] += spec.a[i] * phi[i] - kappa * std::pow(phi[i], spec.p);
  return r;
}

// Low-dimensional energy-level estimate: minimize energy_Ep over the unit
// sphere of the span of the first six eigenfunctions of B + a. Gradient
// descent with numerical gradients; the value is a diagnostic, only its sign
// carries a contract.
double estimate_Yp(const ProblemSpec& spec) {
  const int n = spec.size();
  const auto w = spec.curve->weights();
  const auto& B = spec.dtn->matrix();
  DenseMatrix sym(n, n);
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(w[i]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = sq[i] * B(i, j) / sq[j];
      if (i == j) v += spec.a[i];
      sym(i, j) = v;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (sym(i, j) + sym(j, i));
      sym(i, j) = avg;
      sym(j, i) = avg;
    }
  const auto eig = sym_eig(sym, 1e-6 * std::max(1.0, sym.max_abs()));

  const int dim = std::min(6, n);
  std::vector<BoundaryField> basis(dim, BoundaryField(n));
  for (int b = 0; b < dim; ++b)
    for (int i = 0; i < n; ++i) basis[b][i] = eig.vectors(i, b) / sq[i];

  auto eval = [&](const std::vector<double>& x) {
    BoundaryField f(n, 0.0);
    for (int b = 0; b < dim; ++b)
      for (int i = 0; i < n; ++i) f[i] += x[b] * basis[b][i];
    return energy_Ep(f, spec);
  };

  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = 0.0;
  bool have_best = false;
  for (int start = 0; start < 6; ++start) {
    std::vector<double> x(dim, 0.0);
    if (start == 0) {
      x[0] = 1.0;
    } else {
      for (auto& xi : x) xi = gauss(rng);
    }
    double nrm = 0.0;
    for (double xi : x) nrm += xi * xi;
    for (auto& xi : x) xi /= std::sqrt(nrm);

    double step = 0.2;
    double val = eval(x);
    for (int it = 0; it < 300 && step > 1e-8; ++it) {
      std::vector<double> grad(dim);
      const double hstep = 1e-6;
      for (int b = 0; b < dim; ++b) {
        auto xp = x, xm = x;
        xp[b] += hstep;
        xm[b] -= hstep;
        grad[b] = (eval(xp) - eval(xm)) / (2.0 * hstep);
      }
      auto trial = x;
      for (int b = 0; b < dim; ++b) trial[b] -= step * grad[b];
      double tn = 0.0;
      for (double xi : trial) tn += xi * xi;
      for (auto& xi : trial) xi /= std::sqrt(tn);
      const double tval = eval(trial);
      if (tval < val) {
        x = trial;
        val = tval;
        step *= 1.2;
      } else {
        step *= 0.5;
      }
    }
    if (!have_best || val < best) {
      best = val;
      have_best = true;
    }
  }
  return best;
}

}  // namespace

double ProblemSpec::source_coeff() const { return sign * p / std::abs(p - 1.0); }

std::pair<double, BoundaryField> first_eigen(const DtnOperator& dtn, const BoundaryCurve& curve,
                                             std::span<const double> a) {
  const int n = curve.size();
  if (static_cast<int>(a.size()) != n) throw ValidationError("first_eigen: coefficient size mismatch");
  const auto w = curve.weights();
  const auto& B = dtn.matrix();
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(w[i]);
  DenseMatrix sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = sq[i] * B(i, j) / sq[j];
      if (i == j) v += a[i];
      sym(i, j) = v;
    }
  const auto eig = sym_eig(sym, 1e-6 * std::max(1.0, sym.max_abs()));

  BoundaryField phi1(n);
  double smin = 1e300, smax = -1e300;
  for (int i = 0; i < n; ++i) {
    phi1[i] = eig.vectors(i, 0) / sq[i];
    smin = std::min(smin, phi1[i]);
    smax = std::max(smax, phi1[i]);
  }
  if (smin < 0.0 && smax <= 0.0) {
    for (auto& v : phi1) v = -v;
    std::swap(smin, smax);
    smin = -smin;
    smax = -smax;
  }
  if (!(smin > 0.0))
    throw SolverError("first_eigen: first eigenvector is not sign-definite (discretization fault)");
  // Unit vector in the transformed coordinates is already L2(dS)-normalized.
  return {eig.values[0], phi1};
}

ProblemSpec make_problem(std::shared_ptr<const BoundaryCurve> curve,
                         std::shared_ptr<const DtnOperator> dtn, double p, BoundaryField a,
                         double zero_tol_rel) {
  if (!curve || !dtn) throw ValidationError("make_problem: null curve or operator");
  if (&dtn->curve() != curve.get())
    throw ValidationError("make_problem: operator was built on a different curve");
  check_exponent(p);
  if (static_cast<int>(a.size()) != curve->size())
    throw ValidationError("make_problem: coefficient field size mismatch");

  ProblemSpec spec;
  spec.curve = std::move(curve);
  spec.dtn = std::move(dtn);
  spec.p = p;
  spec.a = std::move(a);
  spec.zero_tol = zero_tol_rel * (1.0 + inf_norm(spec.a));
  auto [lam, phi1] = first_eigen(*spec.dtn, *spec.curve, spec.a);
  spec.lambda1 = lam;
  spec.phi1 = std::move(phi1);
  spec.sign = (std::abs(lam) <= spec.zero_tol) ? 0 : (lam > 0.0 ? 1 : -1);
  spec.regime = classify_regime(lam, p, spec.zero_tol);
  return spec;
}

Regime classify_regime(double lambda1, double p, double zero_tol) {
  check_exponent(p);
  if (std::abs(lambda1) <= zero_tol) return Regime::Neutral;
  return lambda1 * (p - 1.0) < 0.0 ? Regime::Growth : Regime::ExtinctionOrBlowup;
}

double separable_b(double t, double c, double p, int sign) {
  check_exponent(p);
  if (!(c > 0.0)) throw ValidationError("separable_b: c must be positive");
  const double expo = 1.0 / (p - 1.0);
  const double branch = sign * (p - 1.0);
  if (sign == 0) return std::pow(c, expo);
  if (branch < 0.0) return std::pow(c + t, expo);
  if (t >= c) throw ValidationError("separable_b: t >= c in the vanishing branch");
  return std::pow(c - t, expo);
}

double energy_G(std::span<const double> f, const ProblemSpec& spec) {
  if (static_cast<int>(f.size()) != spec.size()) throw ValidationError("energy_G: size mismatch");
  for (double v : f)
    if (v < 0.0) throw ValidationError("energy_G: field must be nonnegative");
  const auto bf = spec.dtn->apply(f);
  const double coeff = spec.source_coeff() / (spec.p + 1.0);
  BoundaryField integrand(spec.size());
  for (int i = 0; i < spec.size(); ++i)
    integrand[i] = 0.5 * (f[i] * bf[i] + spec.a[i] * f[i] * f[i]) -
                   coeff * std::pow(f[i], spec.p + 1.0);
  return integrate_boundary(*spec.curve, integrand);
}

double energy_Ep(std::span<const double> f, const ProblemSpec& spec) {
  if (static_cast<int>(f.size()) != spec.size()) throw ValidationError("energy_Ep: size mismatch");
  const auto bf = spec.dtn->apply(f);
  double num = 0.0, den = 0.0;
  const auto w = spec.curve->weights();
  for (int i = 0; i < spec.size(); ++i) {
    num += (f[i] * bf[i] + spec.a[i] * f[i] * f[i]) * w[i];
    den += std::pow(std::abs(f[i]), spec.p + 1.0) * w[i];
  }
  if (!(den > 0.0)) throw ValidationError("energy_Ep: trace norm vanishes");
  return num / std::pow(den, 2.0 / (spec.p + 1.0));
}

SteadyState solve_steady(const ProblemSpec& spec, std::optional<BoundaryField> init,
                         std::optional<double> mass_target) {
  const int n = spec.size();
  SteadyState out;
  out.lambda1 = spec.lambda1;
  out.phi1 = spec.phi1;
  out.regime = spec.regime;

  if (spec.regime == Regime::Neutral) {
    if (!mass_target)
      throw ValidationError("solve_steady: Neutral regime needs the conserved mass target");
    if (!(*mass_target > 0.0))
      throw ValidationError("solve_steady: mass target must be positive");
    BoundaryField pw(n);
    for (int i = 0; i < n; ++i) pw[i] = std::pow(spec.phi1[i], spec.p + 1.0);
    const double denom = integrate_boundary(*spec.curve, pw);
    const double s = std::pow(*mass_target / denom, 1.0 / spec.p);
    out.phi.assign(n, 0.0);
    for (int i = 0; i < n; ++i) out.phi[i] = s * spec.phi1[i];
    out.residual = inf_norm(steady_residual(spec, out.phi));
    out.Yp = estimate_Yp(spec);
    return out;
  }

  BoundaryField phi;
  if (init) {
    if (static_cast<int>(init->size()) != n)
      throw ValidationError("solve_steady: initial guess size mismatch");
    for (double v : *init)
      if (!(v > 0.0)) throw ValidationError("solve_steady: initial guess must be positive");
    phi = std::move(*init);
  } else {
    // Scale of the first-eigenfunction ray balancing the constant mode:
    // g(c) = <F(c phi1), phi1> changes sign once on (0, inf).
    auto g = [&](double c) {
      BoundaryField f(n);
      for (int i = 0; i < n; ++i) f[i] = c * spec.phi1[i];
      const auto r = steady_residual(spec, f);
      double s = 0.0;
      const auto w = spec.curve->weights();
      for (int i = 0; i < n; ++i) s += r[i] * spec.phi1[i] * w[i];
      return s;
    };
    double lo = 1e-6, hi = 1.0;
    double glo = g(lo);
    while (g(hi) * glo > 0.0 && hi < 1e12) hi *= 2.0;
    if (hi >= 1e12) throw SolverError("solve_steady: could not bracket the starting scale");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g(mid) * glo > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    const double c = 0.5 * (lo + hi);
    phi.assign(n, 0.0);
    for (int i = 0; i < n; ++i) phi[i] = c * spec.phi1[i];
  }

  const double kappa = spec.source_coeff();
  const double target_tol = 0.25e-9;  // headroom under the 1e-9 contract
  auto norm2 = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };

  auto res = steady_residual(spec, phi);
  for (int iter = 0; iter < 100; ++iter) {
    const double rn = inf_norm(res);
    double scale = 1.0;
    for (double v : phi) scale = std::max(scale, std::pow(std::abs(v), spec.p));
    if (rn <= target_tol * scale) break;
    if (iter == 99)
      throw SolverError("solve_steady: Newton stagnation, residual " + std::to_string(rn));

    DenseMatrix jac = spec.dtn->matrix();
    for (int i = 0; i < n; ++i) {
      jac(i, i) += spec.a[i] - kappa * spec.p * std::pow(phi[i], spec.p - 1.0);
    }
    std::vector<double> rhs(res.begin(), res.end());
    for (auto& v : rhs) v = -v;
    const auto delta = solve_dense(std::move(jac), std::move(rhs));

    const double f0 = norm2(res);
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= std::ldexp(1.0, -30)) {
      BoundaryField trial(n);
      bool positive = true;
      for (int i = 0; i < n; ++i) {
        trial[i] = phi[i] + alpha * delta[i];
        if (!(trial[i] > 0.0)) {
          positive = false;
          break;
        }
      }
      if (positive) {
        auto tr = steady_residual(spec, trial);
        if (norm2(tr) <= (1.0 - 1e-4 * alpha) * f0) {
          phi = std::move(trial);
          res = std::move(tr);
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw SolverError("solve_steady: positivity-preserving backtracking failed at residual " +
                        std::to_string(std::sqrt(f0)));
  }

  out.phi = std::move(phi);
  out.residual = inf_norm(res);
  double scale = 1.0;
  for (double v : out.phi) scale = std::max(scale, std::pow(v, spec.p));
  if (out.residual > 1e-9 * scale)
    throw SolverError("solve_steady: residual contract violated");
  out.Yp = estimate_Yp(spec);
  return out;
}

UniquenessReport uniqueness_probe(const ProblemSpec& spec, int trials, std::uint64_t seed) {
  if (spec.regime != Regime::Growth)
    throw ValidationError("uniqueness_probe: requires the Growth regime");
  if (trials < 1) throw ValidationError("uniqueness_probe: trials must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  const int n = spec.size();
  const auto theta = spec.curve->theta();

  std::vector<BoundaryField> solutions;
  UniquenessReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    BoundaryField init(n);
    const double c0 = unif(rng) + 1.0;
    const double a1 = unif(rng), b1 = unif(rng), a2 = 0.5 * unif(rng);
    for (int i = 0; i < n; ++i) {
      const double bump =
          a1 * std::cos(theta[i]) + b1 * std::sin(theta[i]) + a2 * std::cos(2.0 * theta[i]);
      init[i] = c0 * std::exp(0.5 * bump);
    }
    auto st = solve_steady(spec, init);
    rep.max_residual = std::max(rep.max_residual, st.residual);
    solutions.push_back(std::move(st.phi));
  }
  for (size_t i = 0; i < solutions.size(); ++i)
    for (size_t j = i + 1; j < solutions.size(); ++j) {
      double d = 0.0;
      for (int kk = 0; kk < n; ++kk) d = std::max(d, std::abs(solutions[i][kk] - solutions[j][kk]));
      rep.max_pair_distance = std::max(rep.max_pair_distance, d);
    }
  return rep;
}

}  // namespace bdflow
